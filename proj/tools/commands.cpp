#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "documents.hpp"
#include "image_io.hpp"
#include "noisecollage/error.hpp"
#include "noisecollage/sampler.hpp"
#include "noisecollage/unet.hpp"
#include "scene_file.hpp"

namespace noisecollage::cli {

namespace fs = std::filesystem;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema:
    case ErrorKind::kConfig:
    case ErrorKind::kDegenerateRegion:
    case ErrorKind::kMergeConfig:
    case ErrorKind::kShape:
    case ErrorKind::kIndex:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

// Removes every file it recorded unless committed.
class OutputTransaction {
 public:
  explicit OutputTransaction(const fs::path& dir) {
    fs::path p = dir;
    while (!p.empty() && !fs::exists(p)) {
      created_dirs_.insert(created_dirs_.begin(), p);
      p = p.parent_path();
    }
    fs::create_directories(dir);
  }
  ~OutputTransaction() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
    for (auto it = created_dirs_.rbegin(); it != created_dirs_.rend(); ++it) fs::remove(*it, ec);
  }
  void mkdir(const fs::path& dir) {
    if (!fs::exists(dir)) {
      fs::create_directories(dir);
      created_dirs_.push_back(dir);
    }
  }
  void write(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    files_.push_back(path);
    write_file(path.string(), bytes);
  }
  void write(const fs::path& path, const std::string& text) {
    files_.push_back(path);
    write_text(path.string(), text);
  }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> files_;
  std::vector<fs::path> created_dirs_;
  bool committed_ = false;
};

std::optional<std::size_t> env_workers() {
  const char* v = std::getenv("NC_WORKERS");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v, &end, 10);
  if (*end != '\0') throw Error(ErrorKind::kConfig, "NC_WORKERS must be a positive integer");
  return static_cast<std::size_t>(n);
}

std::string step_file(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%04zu.ncts", t);
  return buf;
}

}  // namespace

int cmd_validate(const std::string& scene_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SceneFile file = load_scene(scene_path);
    const SceneSpec spec = to_scene_spec(file);
    const PreparedScene prep = prepare_scene(spec);
    out << "OK: " << spec.objects.size() << " object(s), canvas " << spec.channels << "x" << spec.canvas.height
        << "x" << spec.canvas.width << ", " << prep.pyramids.size() << " mask pyramid(s)\n";
    return kExitOk;
  });
}

int cmd_generate(const std::string& scene_path, const std::string& out_dir, const GenerateFlags& flags,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SceneFile file = load_scene(scene_path);
    if (flags.alpha) file.sampler.alpha = *flags.alpha;
    if (flags.steps) file.sampler.steps = *flags.steps;
    if (flags.guidance) file.sampler.guidance = *flags.guidance;
    if (flags.seed) file.sampler.seed = *flags.seed;
    if (flags.backend) file.sampler.backend = *flags.backend;
    if (flags.kind) file.sampler.kind = *flags.kind;
    if (flags.workers) file.sampler.workers = *flags.workers;
    else if (auto w = env_workers()) file.sampler.workers = *w;

    SceneSpec spec = to_scene_spec(file);
    spec.sampler.dump_noise = flags.dump_noise;
    prepare_scene(spec);

    std::optional<UNetWeights> weights;
    if (flags.weights_path) weights = load_weights(read_file(*flags.weights_path));
    const auto estimator = make_estimator(spec, weights ? &*weights : nullptr);

    OutputTransaction tx(out_dir);
    const RunReport report = generate(spec, *estimator);
    const DisplayMapping mapping = display_mapping(file);
    const fs::path dir(out_dir);
    const std::string image_name = spec.channels == 1 ? "sample.pgm" : "sample.ppm";
    tx.write(dir / image_name, encode_pnm(quantize(report.x0, mapping)));
    tx.write(dir / "sample.ncts", encode_tensor(report.x0));
    tx.write(dir / "metrics.json", metrics_to_json(compute_metrics(report.x0, spec, "raw")).dump(2) + "\n");
    tx.write(dir / "report.json", report_to_json(report, file, mapping, spec.sampler.workers).dump(2) + "\n");
    if (flags.dump_noise) {
      tx.mkdir(dir / "noise");
      for (std::size_t i = 0; i < report.noise_dumps.size(); ++i) {
        tx.write(dir / "noise" / step_file(spec.sampler.steps - i), encode_tensor(report.noise_dumps[i]));
      }
    }
    tx.commit();
    out << "wrote " << (dir / image_name).string() << " (" << report.estimator_call_count
        << " estimator calls, " << report.total_seconds << " s)\n";
    return kExitOk;
  });
}

int cmd_eval(const std::string& image_path, const std::string& scene_path,
             const std::optional<std::string>& out_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SceneFile file = load_scene(scene_path);
    const SceneSpec spec = to_scene_spec(file);
    const std::vector<std::uint8_t> bytes = read_file(image_path);
    Tensor image;
    std::string source;
    if (bytes.size() >= 4 && bytes[0] == 'N' && bytes[1] == 'C' && bytes[2] == 'T' && bytes[3] == 'S') {
      image = decode_tensor(bytes);
      source = "raw";
    } else {
      image = dequantize(decode_pnm(bytes), display_mapping(file));
      source = "quantized";
    }
    const Shape expected{spec.channels, spec.canvas.height, spec.canvas.width};
    if (image.shape() != expected) {
      throw Error(ErrorKind::kShape, "image is " + shape_string(image.shape()) + " but the scene canvas is " +
                                         shape_string(expected));
    }
    const std::string doc = metrics_to_json(compute_metrics(image, spec, source)).dump(2) + "\n";
    if (out_path) write_text(*out_path, doc);
    out << doc;
    return kExitOk;
  });
}

int cmd_dump_masks(const std::string& scene_path, const std::string& out_dir, std::ostream& out,
                   std::ostream& err) {
  return guarded(err, [&] {
    const SceneSpec spec = to_scene_spec(load_scene(scene_path));
    const PreparedScene prep = prepare_scene(spec);
    OutputTransaction tx(out_dir);
    const fs::path dir(out_dir);
    std::size_t written = 0;
    for (std::size_t n = 0; n < prep.pyramids.size(); ++n) {
      const std::string stem = "region_" + std::to_string(n);
      tx.write(dir / (stem + ".pgm"), encode_pnm(mask_raster(prep.masks[n])));
      ++written;
      for (const auto& [size, mask] : prep.pyramids[n].levels()) {
        if (size == spec.canvas) continue;
        tx.write(dir / (stem + "_" + std::to_string(size.height) + "x" + std::to_string(size.width) + ".pgm"),
                 encode_pnm(mask_raster(mask)));
        ++written;
      }
    }
    Raster coverage{1, spec.canvas.height, spec.canvas.width,
                    std::vector<std::uint8_t>(spec.canvas.height * spec.canvas.width, 0)};
    for (const auto& m : prep.masks)
      for (std::size_t i = 0; i < m.pixel_count(); ++i)
        if (m.at_index(i) && coverage.pixels[i] < 255) ++coverage.pixels[i];
    tx.write(dir / "coverage.pgm", encode_pnm(coverage));
    tx.commit();
    out << "wrote " << written + 1 << " mask image(s) to " << out_dir << "\n";
    return kExitOk;
  });
}

int cmd_init_weights(const std::string& path, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    write_file(path, save_weights(init_weights(seed)));
    out << "wrote UNet weights (seed " << seed << ") to " << path << "\n";
    return kExitOk;
  });
}

}  // namespace noisecollage::cli
