/* Copyright 2026 The ShadowForge Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */

// shadowforge: optimize, eval, render, gradcheck and export-sticker.

#include <CLI11.hpp>

#include "shadowforge/cli/commands.hpp"

#ifndef SHADOWFORGE_DEFAULT_MODEL
#define SHADOWFORGE_DEFAULT_MODEL "assets/demo_car/model.json"
#endif

namespace sf = shadowforge;

int main(int argc, char** argv) {
  CLI::App app{"Adversarial mesh-shadow patterns against a template car detector"};
  app.set_version_flag("--version", sf::kToolVersion);
  app.require_subcommand(1);

  sf::OptimizeOptions opt;
  std::uint64_t seed = 0;
  int iterations = 0, workers = 0;
  auto* optimize = app.add_subcommand("optimize", "Optimize shadow patterns and write T_adv");
  optimize->add_option("--config", opt.config, "Run config JSON")->required();
  optimize->add_option("--out", opt.out, "Output directory")->required();
  optimize->add_option("--model", opt.model, "Car model JSON (overrides the config's model entry)");
  auto* seed_opt = optimize->add_option("--seed", seed, "Master seed");
  auto* iter_opt = optimize->add_option("--iterations", iterations, "Iteration count")->check(CLI::NonNegativeNumber);
  auto* opt_workers = optimize->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  optimize->add_option("--resume", opt.resume, "Checkpoint to resume from");
  optimize->add_option("--log-every", opt.log_every, "Progress line interval");

  sf::EvalOptions ev;
  ev.model = SHADOWFORGE_DEFAULT_MODEL;
  auto* eval = app.add_subcommand("eval", "Attack success rate over a viewing grid");
  eval->add_option("--texture", ev.texture, "Texture image")->required();
  eval->add_option("--detector", ev.detector, "builtin or bridge:URL")->capture_default_str();
  eval->add_option("--grid", ev.grid, "default, reduced or a grid JSON file")->capture_default_str();
  eval->add_option("--out", ev.out, "Output directory")->required();
  eval->add_option("--model", ev.model, "Car model JSON")->capture_default_str();
  eval->add_option("--conf", ev.conf_thresh, "Confidence threshold")->capture_default_str();
  eval->add_option("--iou", ev.iou_thresh, "IOU threshold")->capture_default_str();
  eval->add_option("--workers", ev.workers, "Worker threads")->check(CLI::PositiveNumber);

  sf::RenderOptions rd;
  rd.model = SHADOWFORGE_DEFAULT_MODEL;
  auto* render = app.add_subcommand("render", "Render one view of the car");
  render->add_option("--azim", rd.camera.azim, "Azimuth, degrees")->required();
  render->add_option("--elev", rd.camera.elev, "Elevation, degrees")->required();
  render->add_option("--dist", rd.camera.dist, "Distance, meters")->required();
  render->add_option("--fov", rd.camera.fov, "Vertical field of view, degrees")->capture_default_str();
  render->add_option("--width", rd.camera.width, "Image width")->capture_default_str();
  render->add_option("--height", rd.camera.height, "Image height")->capture_default_str();
  render->add_option("--texture", rd.texture, "Texture image (default: the model's)");
  render->add_option("--out", rd.out, "Output image (.png or .pgm)")->required();
  render->add_option("--model", rd.model, "Car model JSON")->capture_default_str();

  sf::GradcheckOptions gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference checks of every differentiable stage");
  gradcheck->add_option("--module", gc.module, "all, a module or an operation name")->capture_default_str();
  gradcheck->add_option("--seeds", gc.seeds, "Seeds")->delimiter(',');
  gradcheck->add_option("--inject-sign-flip", gc.sign_flip, "Negate one operation's VJP (harness check)");

  sf::StickerOptions st;
  auto* sticker = app.add_subcommand("export-sticker", "Vector contours of a pattern raster");
  sticker->add_option("--pattern", st.pattern, "Pattern alpha image")->required();
  sticker->add_option("--mm-per-texel", st.mm_per_texel, "Physical size of one texel")->required();
  sticker->add_option("--threshold", st.threshold, "Coverage threshold in (0, 1)")->capture_default_str();
  sticker->add_option("--out", st.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return sf::kExitDomain;
  }

  if (*optimize) {
    if (*seed_opt) opt.seed = seed;
    if (*iter_opt) opt.iterations = iterations;
    if (*opt_workers) opt.workers = workers;
    return sf::cmd_optimize(opt);
  }
  if (*eval) return sf::cmd_eval(ev);
  if (*render) return sf::cmd_render(rd);
  if (*gradcheck) return sf::cmd_gradcheck(gc);
  return sf::cmd_export_sticker(st);
}
