#pragma once

#include <filesystem>
#include <iosfwd>

#include "moldgen/ddpm/mlp.hpp"
#include "moldgen/ddpm/schedule.hpp"
#include "moldgen/depth.hpp"

namespace moldgen::ddpm {

// Little-endian layout:
//   "DDPM" | version u32 | T u32 | beta_start f64 | beta_end f64 | rule u32
//   | channels u32 | height u32 | width u32 | GridSpec (x_min, y_min, cell,
//   z_top, z_bottom as f64) | embed_dim u32 | layer count u32 | dims u32…
//   | parameter count u64 | float32 parameters
inline constexpr char kCheckpointMagic[4] = {'D', 'D', 'P', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// A trained ε-network together with the schedule and sample geometry it
/// was trained for.
struct Model {
  NoiseSchedule schedule;
  GridSpec spec;
  MlpDenoiser mlp;
};

void save_checkpoint(std::ostream& out, const Model& model);
void save_checkpoint(const std::filesystem::path& path, const Model& model);

/// Throws BadMagic, UnsupportedVersion, TruncatedPayload, ShapeMismatch
/// (layer dims inconsistent with the sample shape or parameter count).
Model load_checkpoint(std::istream& in);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace moldgen::ddpm
