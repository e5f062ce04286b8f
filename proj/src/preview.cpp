#include "moldgen/preview.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "moldgen/error.hpp"

namespace moldgen {

void write_png_preview(const std::filesystem::path& path, const FloatGrid& img) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorCode::IoFailure, "PNG encoding failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(img.width);
  for (std::size_t r = 0; r < img.height; ++r) {
    const std::size_t j = img.height - 1 - r;
    for (std::size_t i = 0; i < img.width; ++i)
      row[i] = static_cast<png_byte>(std::lround(255.0 * std::clamp(static_cast<double>(img(i, j)), 0.0, 1.0)));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace moldgen
