#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace cli = noisecollage::cli;

int main(int argc, char** argv) {
  CLI::App app{"ncollage - layout-aware diffusion sampling with per-object noise collage"};
  app.require_subcommand(1);

  std::string scene_path, out_dir, image_path, weights_out;
  std::optional<std::string> eval_out;
  cli::GenerateFlags gen;
  std::uint64_t weights_seed = 0;

  auto* validate = app.add_subcommand("validate", "Check a scene file");
  validate->add_option("scene", scene_path, "Scene JSON")->required();

  auto* generate = app.add_subcommand("generate", "Run the sampler and write image, metrics and report");
  generate->add_option("scene", scene_path, "Scene JSON")->required();
  generate->add_option("out_dir", out_dir, "Output directory")->required();
  generate->add_option("--alpha", gen.alpha, "Global-noise weight inside regions (default 0.1)");
  generate->add_option("--steps", gen.steps, "Denoising steps (default 50)");
  generate->add_option("--guidance", gen.guidance, "Classifier-free guidance scale (default 7.5)");
  generate->add_option("--seed", gen.seed, "Noise seed");
  generate->add_option("--backend", gen.backend, "analytic | unet");
  generate->add_option("--kind", gen.kind, "ddim | ancestral");
  generate->add_option("--workers", gen.workers, "Estimator threads (default: NC_WORKERS, then scene)");
  generate->add_option("--weights", gen.weights_path, "NCUW weight file for the unet backend");
  generate->add_flag("--dump-noise", gen.dump_noise, "Write the merged noise of every step");

  auto* eval = app.add_subcommand("eval", "Score an image against a scene");
  eval->add_option("image", image_path, "sample.ncts, PGM or PPM")->required();
  eval->add_option("scene", scene_path, "Scene JSON")->required();
  eval->add_option("--out", eval_out, "Also write the metrics document here");

  auto* masks = app.add_subcommand("dump-masks", "Write region masks, pyramid levels and coverage");
  masks->add_option("scene", scene_path, "Scene JSON")->required();
  masks->add_option("out_dir", out_dir, "Output directory")->required();

  auto* init = app.add_subcommand("init-weights", "Write seeded UNet weights");
  init->add_option("path", weights_out, "Output NCUW file")->required();
  init->add_option("--seed", weights_seed, "Initialization seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitValidation;
  }

  if (*validate) return cli::cmd_validate(scene_path, std::cout, std::cerr);
  if (*generate) return cli::cmd_generate(scene_path, out_dir, gen, std::cout, std::cerr);
  if (*eval) return cli::cmd_eval(image_path, scene_path, eval_out, std::cout, std::cerr);
  if (*masks) return cli::cmd_dump_masks(scene_path, out_dir, std::cout, std::cerr);
  if (*init) return cli::cmd_init_weights(weights_out, weights_seed, std::cout, std::cerr);
  return cli::kExitValidation;
}
