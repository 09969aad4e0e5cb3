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

#include "sean/config.hpp"

#include <functional>
#include <map>

#include "sean/fsutil.hpp"

namespace sean {

using nlohmann::json;

namespace {

json interval(const Interval& i) { return json::array({i.lo, i.hi}); }

json phantom_json(const PhantomSpec& p) {
  return {{"height", p.height},
          {"width", p.width},
          {"num_slices", p.num_slices},
          {"rotation_range_deg", interval(p.rotation_range_deg)},
          {"shift_range_px", interval(p.shift_range_px)},
          {"vshift_range_px", interval(p.vshift_range_px)},
          {"lesion_probability", p.lesion_probability},
          {"lesion_intensity_delta", p.lesion_intensity_delta},
          {"lesion_radius_px", interval(p.lesion_radius_px)},
          {"texture_seed", p.texture_seed},
          {"spacing", p.spacing}};
}

json align_json(const AlignTrainConfig& a) {
  return {{"epochs", a.epochs},         {"batch_size", a.batch_size}, {"base_lr", a.base_lr},
          {"beta1", a.beta1},           {"beta2", a.beta2},           {"poly_power", a.poly_power},
          {"seed", a.seed},             {"input_size", a.input_size}};
}

json train_json(const TrainConfig& t) {
  return {{"base_lr", t.base_lr},       {"beta1", t.beta1},           {"beta2", t.beta2},
          {"epochs", t.epochs},         {"poly_power", t.poly_power}, {"w_dice", t.w_dice},
          {"w_ce", t.w_ce},             {"batch_size", t.batch_size}, {"seed", t.seed},
          {"checkpoint_every", t.checkpoint_every}};
}

// Reads known keys of one section; anything else is an error.
class SectionReader {
 public:
  SectionReader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) fail(ErrorKind::Config, "config section '" + section_ + "' must be an object");
  }

  template <typename T>
  SectionReader& operator()(const std::string& key, T& out) {
    known_.push_back(key);
    if (!j_.contains(key)) return *this;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(ErrorKind::Config, "config key '" + section_ + "." + key + "' has the wrong type: " + j_.at(key).dump());
    }
    return *this;
  }

  SectionReader& operator()(const std::string& key, Interval& out) {
    std::vector<double> v{out.lo, out.hi};
    (*this)(key, v);
    if (v.size() != 2) fail(ErrorKind::Config, "config key '" + section_ + "." + key + "' must be [lo, hi]");
    out = {v[0], v[1]};
    return *this;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (std::find(known_.begin(), known_.end(), key) == known_.end())
        fail(ErrorKind::Config, "unknown config key '" + section_ + "." + key + "'");
  }

 private:
  const json& j_;
  std::string section_;
  std::vector<std::string> known_;
};

}  // namespace

void RunConfig::validate() const {
  try {
    phantom.validate();
    align.validate();
    train.validate();
    model.validate();
    require(eval.iou_threshold >= 0.0 && eval.iou_threshold < 1.0, "eval.iou_threshold must lie in [0, 1)");
    require(eval.threshold > 0.0 && eval.threshold < 1.0, "eval.threshold must lie in (0, 1)");
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
}

namespace {

json model_json(const SegConfig& m) {
  return {{"base_width", m.base_width}, {"T", m.radius}, {"fusion", to_string(m.fusion)}};
}

json attention_json(const SegConfig& m) {
  return {{"P", m.partition.P}, {"Q", m.partition.Q}, {"T", m.attention_radius}, {"d_ratio", m.d_ratio}};
}

}  // namespace

json model_sections_json(const SegConfig& m) { return {{"model", model_json(m)}, {"attention", attention_json(m)}}; }

SegConfig seg_config_from_json(const json& model, const json& attention) {
  SegConfig m;
  std::string fusion = to_string(m.fusion);
  SectionReader(model, "model")("base_width", m.base_width)("T", m.radius)("fusion", fusion).finish();
  m.fusion = parse_fusion(fusion);
  SectionReader(attention, "attention")("P", m.partition.P)("Q", m.partition.Q)("T", m.attention_radius)(
      "d_ratio", m.d_ratio)
      .finish();
  return m;
}

json to_json(const RunConfig& cfg) {
  return {{"phantom", phantom_json(cfg.phantom)},
          {"align", align_json(cfg.align)},
          {"train", train_json(cfg.train)},
          {"model", model_json(cfg.model)},
          {"attention", attention_json(cfg.model)},
          {"eval", {{"iou_threshold", cfg.eval.iou_threshold}, {"threshold", cfg.eval.threshold}}}};
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (key != "phantom" && key != "align" && key != "train" && key != "model" && key != "attention" && key != "eval")
      fail(ErrorKind::Config, "unknown config section '" + key + "'");
  RunConfig cfg;
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& { return j.contains(name) ? j.at(name) : empty; };

  auto& p = cfg.phantom;
  SectionReader(section("phantom"), "phantom")("height", p.height)("width", p.width)("num_slices", p.num_slices)(
      "rotation_range_deg", p.rotation_range_deg)("shift_range_px", p.shift_range_px)(
      "vshift_range_px", p.vshift_range_px)("lesion_probability", p.lesion_probability)(
      "lesion_intensity_delta", p.lesion_intensity_delta)("lesion_radius_px", p.lesion_radius_px)(
      "texture_seed", p.texture_seed)("spacing", p.spacing)
      .finish();
  auto& a = cfg.align;
  SectionReader(section("align"), "align")("epochs", a.epochs)("batch_size", a.batch_size)("base_lr", a.base_lr)(
      "beta1", a.beta1)("beta2", a.beta2)("poly_power", a.poly_power)("seed", a.seed)("input_size", a.input_size)
      .finish();
  auto& t = cfg.train;
  SectionReader(section("train"), "train")("base_lr", t.base_lr)("beta1", t.beta1)("beta2", t.beta2)(
      "epochs", t.epochs)("poly_power", t.poly_power)("w_dice", t.w_dice)("w_ce", t.w_ce)(
      "batch_size", t.batch_size)("seed", t.seed)("checkpoint_every", t.checkpoint_every)
      .finish();
  cfg.model = seg_config_from_json(section("model"), section("attention"));
  SectionReader(section("eval"), "eval")("iou_threshold", cfg.eval.iou_threshold)("threshold", cfg.eval.threshold)
      .finish();
  return cfg;
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 || dot + 1 == eq)
      fail(ErrorKind::Config, "override '" + o + "' is not of the form section.key=value");
    const std::string section = o.substr(0, dot), key = o.substr(dot + 1, eq - dot - 1), text = o.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::exception&) {
      value = text;
    }
    if (!j.contains(section)) j[section] = json::object();
    j[section][key] = value;
  }
}

RunConfig load_run_config(const std::filesystem::path& file, const std::vector<std::string>& overrides,
                          const json& base) {
  json j = base.is_object() ? base : json::object();
  if (!file.empty()) {
    json from_file;
    try {
      from_file = json::parse(read_file(file));
    } catch (const json::exception& e) {
      fail(ErrorKind::Config, "config file " + file.string() + " is not valid JSON: " + e.what());
    }
    if (!from_file.is_object()) fail(ErrorKind::Config, "config file " + file.string() + " must hold a JSON object");
    for (const auto& [section, values] : from_file.items()) {
      if (!values.is_object() || !j.contains(section)) {
        j[section] = values;
        continue;
      }
      for (const auto& [key, value] : values.items()) j[section][key] = value;
    }
  }
  apply_overrides(j, overrides);
  RunConfig cfg = run_config_from_json(j);
  cfg.validate();
  return cfg;
}

}  // namespace sean
