// Copyright 2026 The lags Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "lags/experiment_config.hpp"

#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lags/errors.hpp"
#include "lags/snapshot.hpp"

namespace lags {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& section_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"model", {"kind", "hidden", "layer_dims", "eigen_min", "eigen_max"}},
      {"dataset", {"kind", "samples", "features", "classes", "separation", "noise"}},
      {"train",
       {"workers", "iterations", "batch_size", "schedule", "theta", "log_every", "delta_every",
        "track_auxiliary", "track_grad_norm"}},
      {"arm", {"algorithm", "ratio", "ratios", "schedule", "theta"}},
      {"analysis", {"bounds", "m2_draws", "gap"}},
      {"perf", {"scenario"}},
  };
  return keys;
}

// Collects every problem before reporting, so one run lists all bad keys.
class Problems {
 public:
  void add(std::string key, std::string why) { items_.push_back(std::move(key) + ": " + why); }
  bool empty() const { return items_.empty(); }
  std::string message() const {
    std::string out = "invalid config";
    for (const auto& item : items_) out += "\n  " + item;
    return out;
  }

 private:
  std::vector<std::string> items_;
};

template <typename T>
std::optional<T> read(const pt::ptree& section, const std::string& section_name,
                      const std::string& key, Problems& problems) {
  auto raw = section.get_optional<std::string>(key);
  if (!raw) return std::nullopt;
  const std::string value = boost::trim_copy(*raw);
  try {
    if constexpr (std::is_same_v<T, bool>) {
      const std::string lower = boost::to_lower_copy(value);
      if (lower == "true" || lower == "yes" || lower == "1" || lower == "on") return true;
      if (lower == "false" || lower == "no" || lower == "0" || lower == "off") return false;
      throw boost::bad_lexical_cast();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!value.empty() && value.front() == '-') throw boost::bad_lexical_cast();
      return boost::lexical_cast<T>(value);
    } else {
      return boost::lexical_cast<T>(value);
    }
  } catch (const boost::bad_lexical_cast&) {
    problems.add(section_name + key, "bad value '" + value + "'");
    return std::nullopt;
  }
}

template <typename T>
std::optional<std::vector<T>> read_list(const pt::ptree& section, const std::string& section_name,
                                        const std::string& key, Problems& problems) {
  auto raw = section.get_optional<std::string>(key);
  if (!raw) return std::nullopt;
  std::vector<std::string> parts;
  const std::string value = boost::trim_copy(*raw);
  if (value.empty()) return std::vector<T>{};
  boost::split(parts, value, boost::is_any_of(","));
  std::vector<T> out;
  try {
    for (auto& p : parts) {
      boost::trim(p);
      if constexpr (std::is_unsigned_v<T>) {
        if (!p.empty() && p.front() == '-') throw boost::bad_lexical_cast();
      }
      out.push_back(boost::lexical_cast<T>(p));
    }
  } catch (const boost::bad_lexical_cast&) {
    problems.add(section_name + key, "bad list '" + value + "'");
    return std::nullopt;
  }
  return out;
}

std::size_t model_layer_count(const ModelSpec& spec) {
  if (spec.kind == ModelKind::kQuadratic) return spec.layer_dims.size();
  return spec.hidden.size() + 1;
}

}  // namespace

void ExperimentConfig::apply_seed(std::uint64_t new_seed) {
  seed = new_seed;
  model.seed = new_seed;
  if (dataset) dataset->seed = new_seed + 1;
  for (auto& arm : arms) arm.trainer.seed = new_seed;
}

ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }

  Problems problems;
  ExperimentConfig cfg;

  std::map<std::string, const pt::ptree*> sections;
  std::vector<std::pair<std::string, const pt::ptree*>> arm_sections;
  for (const auto& [name, node] : tree) {
    if (name == "seed" || name == "output") continue;
    if (boost::starts_with(name, "arm:")) {
      const std::string arm_name = boost::trim_copy(name.substr(4));
      if (arm_name.empty()) {
        problems.add(name, "arm needs a name");
        continue;
      }
      arm_sections.emplace_back(arm_name, &node);
      continue;
    }
    if (!section_keys().count(name) || name == "arm") {
      problems.add(node.empty() ? name : "[" + name + "]",
                   node.empty() ? "unknown top-level key" : "unknown section");
      continue;
    }
    sections[name] = &node;
  }
  auto check_keys = [&](const std::string& label, const std::string& schema, const pt::ptree& s) {
    for (const auto& [key, value] : s) {
      if (!section_keys().at(schema).count(key)) problems.add(label + "." + key, "unknown key");
    }
  };
  for (const auto& [name, node] : sections) check_keys(name, name, *node);
  for (const auto& [name, node] : arm_sections) check_keys("arm:" + name, "arm", *node);

  const pt::ptree empty;
  auto section = [&](const std::string& name) -> const pt::ptree& {
    auto it = sections.find(name);
    return it == sections.end() ? empty : *it->second;
  };

  if (auto v = read<std::uint64_t>(tree, "", "seed", problems)) cfg.seed = *v;
  if (auto v = tree.get_optional<std::string>("output")) cfg.output = boost::trim_copy(*v);

  // [model]
  if (!sections.count("model")) {
    problems.add("model", "missing required section");
  } else {
    const auto& m = section("model");
    if (auto kind = m.get_optional<std::string>("kind")) {
      try {
        cfg.model.kind = model_kind_from_string(boost::trim_copy(*kind));
      } catch (const ArgumentError&) {
        problems.add("model.kind", "unknown model kind '" + *kind + "'");
      }
    } else {
      problems.add("model.kind", "missing");
    }
    if (auto v = read_list<std::size_t>(m, "model.", "hidden", problems)) cfg.model.hidden = *v;
    if (auto v = read_list<std::size_t>(m, "model.", "layer_dims", problems)) {
      cfg.model.layer_dims = *v;
    }
    if (auto v = read<double>(m, "model.", "eigen_min", problems)) cfg.model.eigen_min = *v;
    if (auto v = read<double>(m, "model.", "eigen_max", problems)) cfg.model.eigen_max = *v;
    if (cfg.model.kind == ModelKind::kQuadratic && cfg.model.layer_dims.empty()) {
      problems.add("model.layer_dims", "required for the quadratic model");
    }
    if (cfg.model.kind == ModelKind::kMlp && cfg.model.hidden.empty()) {
      problems.add("model.hidden", "required for the mlp model");
    }
    if ((cfg.model.kind == ModelKind::kLogistic || cfg.model.kind == ModelKind::kLinearRegression) &&
        !cfg.model.hidden.empty()) {
      problems.add("model.hidden", "only the mlp model has hidden layers");
    }
  }

  // [dataset]
  const bool needs_data = cfg.model.kind != ModelKind::kQuadratic;
  if (sections.count("dataset")) {
    const auto& d = section("dataset");
    DatasetSpec ds;
    ds.kind = cfg.model.kind == ModelKind::kLinearRegression ? DatasetKind::kLinearRegression
                                                              : DatasetKind::kGaussianClassification;
    if (auto kind = d.get_optional<std::string>("kind")) {
      try {
        ds.kind = dataset_kind_from_string(boost::trim_copy(*kind));
      } catch (const ArgumentError&) {
        problems.add("dataset.kind", "unknown dataset kind '" + *kind + "'");
      }
    }
    if (auto v = read<std::size_t>(d, "dataset.", "samples", problems)) ds.samples = *v;
    if (auto v = read<std::size_t>(d, "dataset.", "features", problems)) ds.features = *v;
    if (auto v = read<std::size_t>(d, "dataset.", "classes", problems)) ds.classes = *v;
    if (auto v = read<double>(d, "dataset.", "separation", problems)) ds.separation = *v;
    if (auto v = read<double>(d, "dataset.", "noise", problems)) ds.noise = *v;
    if (ds.samples == 0) problems.add("dataset.samples", "must be positive");
    if (ds.features == 0) problems.add("dataset.features", "must be positive");
    if (needs_data) {
      const bool regression = ds.kind == DatasetKind::kLinearRegression;
      if (regression != (cfg.model.kind == ModelKind::kLinearRegression)) {
        problems.add("dataset.kind", "does not match the model's loss");
      }
      if (!regression && ds.classes < 2) problems.add("dataset.classes", "must be at least 2");
    }
    cfg.dataset = ds;
    cfg.model.inputs = ds.features;
    cfg.model.outputs = ds.kind == DatasetKind::kLinearRegression ? 1 : ds.classes;
  } else if (needs_data && sections.count("model")) {
    problems.add("dataset", "missing required section");
  }

  // [train]
  TrainerConfig base;
  const auto& tr = section("train");
  if (auto v = read<std::size_t>(tr, "train.", "workers", problems)) base.workers = *v;
  if (auto v = read<std::size_t>(tr, "train.", "iterations", problems)) base.iterations = *v;
  if (auto v = read<std::size_t>(tr, "train.", "batch_size", problems)) base.batch_size = *v;
  if (auto v = read<std::size_t>(tr, "train.", "log_every", problems)) base.log_every = *v;
  if (auto v = read<std::size_t>(tr, "train.", "delta_every", problems)) base.delta_every = *v;
  if (auto v = read<bool>(tr, "train.", "track_auxiliary", problems)) base.track_auxiliary = *v;
  if (auto v = read<bool>(tr, "train.", "track_grad_norm", problems)) base.track_grad_norm = *v;
  if (auto v = read<double>(tr, "train.", "theta", problems)) base.schedule.theta = *v;
  if (auto kind = tr.get_optional<std::string>("schedule")) {
    try {
      base.schedule.kind = schedule_kind_from_string(boost::trim_copy(*kind));
    } catch (const ArgumentError&) {
      problems.add("train.schedule", "unknown schedule '" + *kind + "'");
    }
  }
  if (base.workers == 0) problems.add("train.workers", "must be at least 1");
  if (base.iterations == 0) problems.add("train.iterations", "must be at least 1");
  if (base.batch_size == 0) problems.add("train.batch_size", "must be at least 1");
  if (base.log_every == 0) problems.add("train.log_every", "must be at least 1");
  if (!(base.schedule.theta > 0.0)) problems.add("train.theta", "must be positive");
  base.schedule.horizon = std::max<std::size_t>(base.iterations, 1);

  // [arm:NAME]
  const std::size_t layers = model_layer_count(cfg.model);
  if (arm_sections.empty()) problems.add("arm", "at least one [arm:NAME] section is required");
  std::set<std::string> arm_names;
  for (const auto& [name, node] : arm_sections) {
    const std::string prefix = "arm:" + name + ".";
    if (!arm_names.insert(name).second) problems.add("arm:" + name, "duplicate arm");
    ArmSpec arm{name, base};
    if (auto alg = node->get_optional<std::string>("algorithm")) {
      try {
        arm.trainer.algorithm = algorithm_from_string(boost::trim_copy(*alg));
      } catch (const ArgumentError&) {
        problems.add(prefix + "algorithm", "unknown algorithm '" + *alg + "'");
      }
    } else {
      problems.add(prefix + "algorithm", "missing");
    }
    if (auto v = read<double>(*node, prefix, "theta", problems)) arm.trainer.schedule.theta = *v;
    if (auto kind = node->get_optional<std::string>("schedule")) {
      try {
        arm.trainer.schedule.kind = schedule_kind_from_string(boost::trim_copy(*kind));
      } catch (const ArgumentError&) {
        problems.add(prefix + "schedule", "unknown schedule '" + *kind + "'");
      }
    }
    std::map<std::uint32_t, double> ratios;
    auto ratio = read<double>(*node, prefix, "ratio", problems);
    auto list = read_list<double>(*node, prefix, "ratios", problems);
    if (ratio && list) problems.add(prefix + "ratios", "give either ratio or ratios");
    if (list) {
      if (list->size() != layers) {
        problems.add(prefix + "ratios",
                     "needs " + std::to_string(layers) + " values, one per layer");
      }
      for (std::size_t l = 0; l < list->size(); ++l) {
        ratios[static_cast<std::uint32_t>(l + 1)] = (*list)[l];
      }
    } else {
      for (std::size_t l = 1; l <= layers; ++l) {
        ratios[static_cast<std::uint32_t>(l)] = ratio.value_or(1.0);
      }
    }
    double cap = 1.0;
    for (const auto& [id, c] : ratios) cap = std::max(cap, c);
    try {
      arm.trainer.policy = CompressionPolicy(std::move(ratios), cap);
    } catch (const ArgumentError& e) {
      problems.add(prefix + (list ? "ratios" : "ratio"), e.what());
    }
    if (arm.trainer.algorithm == Algorithm::kDense && !arm.trainer.policy.is_lossless()) {
      problems.add(prefix + "ratio", "dense arms cannot compress");
    }
    cfg.arms.push_back(std::move(arm));
  }

  // [analysis]
  const auto& an = section("analysis");
  if (auto v = read<bool>(an, "analysis.", "bounds", problems)) cfg.analysis.bounds = *v;
  if (auto v = read<std::size_t>(an, "analysis.", "m2_draws", problems)) cfg.analysis.m2_draws = *v;
  if (auto v = read<double>(an, "analysis.", "gap", problems)) cfg.analysis.gap = *v;
  if (cfg.analysis.m2_draws == 0) problems.add("analysis.m2_draws", "must be at least 1");

  // [perf]
  if (auto v = section("perf").get_optional<std::string>("scenario")) {
    std::filesystem::path p = boost::trim_copy(*v);
    cfg.perf_scenario = p.is_absolute() ? p : base_dir / p;
  }

  if (!problems.empty()) throw SchemaError(problems.message());
  cfg.apply_seed(cfg.seed);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const std::exception&) {
    throw ArgumentError("cannot read config file " + path.string());
  }
  return parse_experiment_config(std::string(bytes.begin(), bytes.end()), path.parent_path());
}

}  // namespace lags
