#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace noisecollage::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

struct GenerateFlags {
  std::optional<double> alpha;
  std::optional<std::size_t> steps;
  std::optional<double> guidance;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::string> kind;
  // Falls back to NC_WORKERS, then to the scene's sampler.workers.
  std::optional<std::size_t> workers;
  std::optional<std::string> weights_path;
  bool dump_noise = false;
};

int cmd_validate(const std::string& scene_path, std::ostream& out, std::ostream& err);

// Writes into out_dir: sample.pgm or sample.ppm, sample.ncts (raw values),
// metrics.json, report.json and, with dump_noise, noise/step_XXXX.ncts.
// Files written before a failure are removed.
int cmd_generate(const std::string& scene_path, const std::string& out_dir, const GenerateFlags& flags,
                 std::ostream& out, std::ostream& err);

// image_path is a raw .ncts sample or a PGM/PPM (mapped back through the
// scene's display window). Prints the metrics document; also writes it to
// out_path when given.
int cmd_eval(const std::string& image_path, const std::string& scene_path,
             const std::optional<std::string>& out_path, std::ostream& out, std::ostream& err);

// Writes region_N.pgm (canvas), region_N_HxW.pgm per pyramid level and
// coverage.pgm holding the per-pixel region count.
int cmd_dump_masks(const std::string& scene_path, const std::string& out_dir, std::ostream& out,
                   std::ostream& err);

// Writes seeded UNet weights in the NCUW format.
int cmd_init_weights(const std::string& path, std::uint64_t seed, std::ostream& out, std::ostream& err);

}  // namespace noisecollage::cli
