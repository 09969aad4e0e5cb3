/*
 * Copyright 2026 The SEAN Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: gen-data, train-align, train-seg, evaluate, predict.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sean/align_net.hpp"
#include "sean/checkpoint.hpp"
#include "sean/config.hpp"
#include "sean/dataset.hpp"
#include "sean/evaluate.hpp"
#include "sean/fsutil.hpp"
#include "sean/train.hpp"
#include "sean/volume_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sean;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "override a config value, e.g. --set train.epochs=3");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_resolved(const fs::path& dir, const RunConfig& cfg) {
  write_file_atomic(dir / "config.resolved.json", to_json(cfg).dump(2) + "\n");
}

json align_echo(const AlignTrainConfig& a) {
  RunConfig r;
  r.align = a;
  return {{"align", to_json(r)["align"]}};
}

AlignmentNet<float> load_alignment(const fs::path& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.kind != "alignment") fail(ErrorKind::Config, path.string() + " is not an alignment checkpoint");
  const RunConfig cfg = load_run_config({}, {}, ckpt.config);
  AlignmentNet<float> net(cfg.align.input_size, cfg.align.seed);
  restore_parameters(ckpt, net.parameters());
  return net;
}

// Model architecture comes from the run config, seeded with the
// checkpoint's own echo; explicit settings that disagree fail on restore.
SegModel<float> load_model(const Checkpoint& ckpt, const RunConfig& cfg, const fs::path& path) {
  if (ckpt.kind != "segmentation") fail(ErrorKind::Config, path.string() + " is not a segmentation checkpoint");
  SegModel<float> model(cfg.model);
  restore_parameters(ckpt, model.parameters());
  model.set_training(false);
  return model;
}

json model_base(const Checkpoint& ckpt) {
  json base = json::object();
  for (const char* key : {"model", "attention"})
    if (ckpt.config.contains(key)) base[key] = ckpt.config.at(key);
  return base;
}

int gen_data(const fs::path& out, std::size_t num, std::uint64_t seed, const std::string& spec_file,
             const Common& c) {
  json base = json::object();
  if (!spec_file.empty()) {
    try {
      base["phantom"] = json::parse(read_file(spec_file));
    } catch (const json::exception& e) {
      fail(ErrorKind::Config, "spec file " + spec_file + " is not valid JSON: " + e.what());
    }
  }
  const RunConfig cfg = load_run_config(c.config, c.overrides, base);
  OutputDirLock lock(out);
  write_dataset(out, cfg.phantom, num, seed);
  write_resolved(out, cfg);
  std::cout << json{{"cases", num}, {"out", out.string()}}.dump() << "\n";
  return 0;
}

int train_align(const fs::path& data, const fs::path& out, const Common& c) {
  const RunConfig cfg = load_run_config(c.config, c.overrides);
  const auto cases = read_dataset(data);
  std::vector<CtVolume> volumes;
  for (const auto& e : cases) volumes.push_back(e.volume);
  OutputDirLock lock(out);
  write_resolved(out, cfg);
  std::string curve = "epoch,loss,sym_term,rest_term\n";
  const auto result = train_alignment(volumes, cfg.align, [&](const AlignEpochStats& s, AlignmentNet<float>&) {
    curve += std::to_string(s.epoch) + "," + fmt(s.loss) + "," + fmt(s.symmetry) + "," + fmt(s.restoration) + "\n";
    std::cerr << "epoch " << s.epoch << " loss " << s.loss << "\n";
  });
  auto net = result.net;
  save_checkpoint(out / "align.ckpt", "alignment", align_echo(cfg.align), net.parameters());
  write_file_atomic(out / "align_curve.csv", curve);
  std::cout << json{{"checkpoint", (out / "align.ckpt").string()}, {"final_loss", result.curve.back().loss}}.dump()
            << "\n";
  return 0;
}

int train_seg(const fs::path& data, const std::string& align_path, const std::string& fusion, const fs::path& out,
              const Common& c) {
  std::vector<std::string> overrides = c.overrides;
  if (!fusion.empty()) overrides.push_back("model.fusion=\"" + fusion + "\"");
  const RunConfig cfg = load_run_config(c.config, overrides);
  const auto raw = read_dataset(data);
  std::optional<AlignmentNet<float>> align;
  if (!align_path.empty()) align = load_alignment(align_path);

  std::vector<SegCase> cases;
  for (const auto& e : raw) {
    const RigidParams alpha = align ? estimate_volume_params(*align, e.volume) : RigidParams{};
    cases.push_back(prepare_case(e.volume, e.mask, alpha));
  }

  OutputDirLock lock(out);
  write_resolved(out, cfg);
  SegModel<float> model(cfg.model, cfg.train.seed);
  const json echo = model_sections_json(cfg.model);
  TrainHooks hooks;
  hooks.on_checkpoint = [&](long iter, SegModel<float>& m) {
    char name[48];
    std::snprintf(name, sizeof(name), "model_iter%06ld.ckpt", iter);
    save_checkpoint(out / name, "segmentation", echo, m.parameters());
  };
  hooks.on_diverge = [&](long, SegModel<float>& m) {
    save_checkpoint(out / "model_diverged.ckpt", "segmentation", echo, m.parameters());
  };
  const auto result = train_segmentation(model, cases, cfg.train, {}, hooks);
  std::string log = "iter,lr,loss,dice_term,ce_term\n";
  for (const auto& r : result.log)
    log += std::to_string(r.iter) + "," + fmt(r.lr) + "," + fmt(r.loss) + "," + fmt(r.dice_term) + "," +
           fmt(r.ce_term) + "\n";
  write_file_atomic(out / "train_log.csv", log);
  save_checkpoint(out / "model.ckpt", "segmentation", echo, model.parameters());
  std::cout << json{{"checkpoint", (out / "model.ckpt").string()},
                    {"iterations", result.total_iter},
                    {"final_loss", result.log.empty() ? 0.0 : result.log.back().loss}}
                   .dump()
            << "\n";
  return 0;
}

int evaluate(const fs::path& data, const std::string& align_path, const fs::path& model_path, const fs::path& out,
             std::optional<double> iou, bool bench, const Common& c) {
  const Checkpoint ckpt = load_checkpoint(model_path);
  std::vector<std::string> overrides = c.overrides;
  if (iou) overrides.push_back("eval.iou_threshold=" + fmt(*iou));
  const RunConfig cfg = load_run_config(c.config, overrides, model_base(ckpt));
  SegModel<float> model = load_model(ckpt, cfg, model_path);
  std::optional<AlignmentNet<float>> align;
  if (!align_path.empty()) align = load_alignment(align_path);
  const auto cases = read_dataset(data);

  OutputDirLock lock(out);
  write_resolved(out, cfg);
  const MetricsReport rep = evaluate_dataset(model, align ? &*align : nullptr, cases, cfg.eval);
  write_file_atomic(out / "report.json", rep.to_json().dump(2) + "\n");
  write_file_atomic(out / "report.csv", rep.to_csv());
  json summary = {{"mean_dice", rep.mean_dice}, {"f1", rep.lesion.f1}, {"recall", rep.lesion.recall},
                  {"precision", rep.lesion.precision}};
  if (bench) {
    json per_case = json::array();
    for (const auto& r : rep.cases) per_case.push_back({{"case_id", r.id}, {"align_seconds", r.align_seconds}});
    const json b = {{"volumes", rep.cases.size()},
                    {"mean_align_seconds", rep.mean_align_seconds},
                    {"max_align_seconds", rep.max_align_seconds},
                    {"cases", per_case}};
    write_file_atomic(out / "bench.json", b.dump(2) + "\n");
    summary["mean_align_seconds"] = rep.mean_align_seconds;
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

int predict(const fs::path& volume, const std::string& align_path, const fs::path& model_path, const fs::path& out,
            const Common& c) {
  const Checkpoint ckpt = load_checkpoint(model_path);
  const RunConfig cfg = load_run_config(c.config, c.overrides, model_base(ckpt));
  SegModel<float> model = load_model(ckpt, cfg, model_path);
  std::optional<AlignmentNet<float>> align;
  if (!align_path.empty()) align = load_alignment(align_path);
  const LoadedVolume lv = read_volume(volume);
  const auto pred = predict_volume(model, align ? &*align : nullptr, lv.volume, cfg.eval.threshold);
  write_mask(pred.mask, out);
  std::cout << json{{"out", out.string()},
                    {"alpha", {{"theta", pred.alpha.theta}, {"tx", pred.alpha.tx}, {"ty", pred.alpha.ty}}},
                    {"lesion_voxels", pred.mask.array().cast<long>().sum()}}
                   .dump()
            << "\n";
  return 0;
}

void report_error(const char* kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-enhanced lesion segmentation: data, alignment, segmentation, evaluation"};
  app.require_subcommand(1);

  Common common;
  std::string out, data, align, model, fusion, spec, volume;
  std::size_t num = 0;
  std::uint64_t seed = 0;
  std::optional<double> iou;
  bool bench = false;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic phantom dataset");
  gen->add_option("--out", out, "output dataset directory")->required();
  gen->add_option("--num", num, "number of volumes")->required();
  gen->add_option("--seed", seed, "dataset seed")->required();
  gen->add_option("--spec", spec, "JSON phantom spec (keys of the phantom section)")->check(CLI::ExistingFile);
  add_common(gen, common);

  auto* ta = app.add_subcommand("train-align", "train the alignment network on the symmetry loss");
  ta->add_option("--data", data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  ta->add_option("--out", out, "output directory")->required();
  add_common(ta, common);

  auto* ts = app.add_subcommand("train-seg", "train the segmentation network");
  ts->add_option("--data", data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  ts->add_option("--align", align, "alignment checkpoint (omit to skip alignment)")->check(CLI::ExistingFile);
  ts->add_option("--fusion", fusion, "none, im-l1, ft-l1, ft-cc, sea or sea-self");
  ts->add_option("--out", out, "output directory")->required();
  add_common(ts, common);

  auto* ev = app.add_subcommand("evaluate", "segment a dataset and write report.json / report.csv");
  ev->add_option("--data", data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--align", align, "alignment checkpoint (omit to skip alignment)")->check(CLI::ExistingFile);
  ev->add_option("--model", model, "segmentation checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", out, "output directory")->required();
  ev->add_option("--iou-threshold", iou, "lesion matching IoU threshold");
  ev->add_flag("--bench", bench, "also write per-volume alignment timings to bench.json");
  add_common(ev, common);

  auto* pr = app.add_subcommand("predict", "segment one volume");
  pr->add_option("--volume", volume, "volume sidecar (.json) or raw file")->required();
  pr->add_option("--align", align, "alignment checkpoint (omit to skip alignment)")->check(CLI::ExistingFile);
  pr->add_option("--model", model, "segmentation checkpoint")->required()->check(CLI::ExistingFile);
  pr->add_option("--out", out, "output mask file (8-bit raw)")->required();
  add_common(pr, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("config", e.what());
    return exit_code(ErrorKind::Config);
  }

  try {
    if (*gen) return gen_data(out, num, seed, spec, common);
    if (*ta) return train_align(data, out, common);
    if (*ts) return train_seg(data, align, fusion, out, common);
    if (*ev) return evaluate(data, align, model, out, iou, bench, common);
    if (*pr) return predict(volume, align, model, out, common);
  } catch (const Error& e) {
    report_error(to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    report_error(to_string(ErrorKind::Io), e.what());
    return exit_code(ErrorKind::Io);
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return 0;
}
