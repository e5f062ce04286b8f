#include "moldgen/cli.hpp"

int main(int argc, char** argv) { return moldgen::cli::run(argc, argv); }
