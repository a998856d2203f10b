// Copyright 2026 The fadx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fadx/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "fadx/attribution.hpp"
#include "fadx/csv.hpp"
#include "fadx/dataset.hpp"
#include "fadx/digest.hpp"
#include "fadx/error.hpp"
#include "fadx/fadcurve.hpp"
#include "fadx/matcher.hpp"
#include "fadx/nncore.hpp"
#include "fadx/pipeline.hpp"
#include "fadx/report.hpp"
#include "fadx/rng.hpp"
#include "json.hpp"

namespace fadx::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::uint64_t kShapleyStream = 4000;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text + ",") {
    if (c == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else if (c != ' ') {
      item += c;
    }
  }
  return out;
}

// Record of one command invocation, written next to its outputs.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv)
      : command_(std::move(command)), argv_(std::move(argv)), started_(utc_now()) {}

  json config = json::object();
  json results = json::object();

  std::string read_input(const fs::path& path) {
    std::string contents = read_file(path);
    inputs_.push_back({{"path", path.string()}, {"sha256", sha256_hex(contents)}});
    return contents;
  }

  void write_output(const fs::path& path, const std::string& contents) {
    write_file(path, contents);
    outputs_.push_back({{"path", path.string()}, {"sha256", sha256_hex(contents)}});
  }

  void note_output(const fs::path& path) {
    outputs_.push_back({{"path", path.string()}, {"sha256", sha256_hex(read_file(path))}});
  }

  void save(const fs::path& path, std::uint64_t seed, unsigned jobs) const {
    json doc;
    doc["format"] = "fadx-run-manifest";
    doc["version"] = 1;
    doc["command"] = command_;
    doc["argv"] = argv_;
    doc["seed"] = seed;
    doc["jobs"] = jobs;
    doc["versions"] = {{"fadx", kVersion}, {"model_format", 1}, {"report_format", 1}};
    doc["config"] = config;
    doc["inputs"] = inputs_;
    doc["outputs"] = outputs_;
    doc["results"] = results;
    doc["started_at"] = started_;
    doc["finished_at"] = utc_now();
    write_file(path, doc.dump(1) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::string started_;
  json inputs_ = json::array();
  json outputs_ = json::array();
};

fs::path sidecar_for(const fs::path& csv_path) {
  return csv_path.parent_path() / (csv_path.stem().string() + ".meta.json");
}

data::TabularDataset load_data(Manifest& manifest, const std::string& path, const std::string& meta) {
  const std::string text = manifest.read_input(path);
  std::string sidecar;
  if (!meta.empty()) {
    sidecar = manifest.read_input(meta);
  } else if (fs::exists(sidecar_for(path))) {
    sidecar = manifest.read_input(sidecar_for(path));
  }
  try {
    return data::load_dataset(text, sidecar);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()));
  }
}

struct ExperimentConfig {
  pipeline::ModelSettings model;
  pipeline::FadSettings fad;
  std::optional<std::uint64_t> seed;
};

void apply_config(const nlohmann::json& doc, ExperimentConfig& cfg) {
  static const std::set<std::string> kKeys = {
      "hidden", "learning_rate", "beta1", "beta2", "epsilon", "batch_size", "epochs", "seed",
      "validation_fraction", "standardize", "gradient_target", "beta", "methods", "baseline",
      "ranking", "aggregation", "folds", "ig_steps", "permutations"};
  if (!doc.is_object()) throw ParseError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.contains(key)) throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
  try {
    auto& m = cfg.model;
    auto& f = cfg.fad;
    m.hidden = doc.value("hidden", m.hidden);
    m.optimizer.learning_rate = doc.value("learning_rate", m.optimizer.learning_rate);
    m.optimizer.beta1 = doc.value("beta1", m.optimizer.beta1);
    m.optimizer.beta2 = doc.value("beta2", m.optimizer.beta2);
    m.optimizer.epsilon = doc.value("epsilon", m.optimizer.epsilon);
    m.optimizer.batch_size = doc.value("batch_size", m.optimizer.batch_size);
    m.optimizer.epochs = doc.value("epochs", m.optimizer.epochs);
    m.validation_fraction = doc.value("validation_fraction", m.validation_fraction);
    m.standardize = doc.value("standardize", m.standardize);
    if (doc.contains("gradient_target")) {
      m.gradient_target = nn::parse_gradient_target(doc["gradient_target"].get<std::string>());
    }
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    f.beta = doc.value("beta", f.beta);
    f.methods = doc.value("methods", f.methods);
    if (doc.contains("baseline")) {
      const auto b = doc["baseline"].get<std::string>();
      if (b != "mean" && b != "zero") throw ConfigError("baseline must be 'mean' or 'zero'");
      f.baseline = b == "mean" ? pipeline::BaselineMode::kMean : pipeline::BaselineMode::kZero;
    }
    if (doc.contains("ranking")) {
      const auto r = doc["ranking"].get<std::string>();
      if (r != "per-instance" && r != "class-global") {
        throw ConfigError("ranking must be 'per-instance' or 'class-global'");
      }
      f.ranking = r == "per-instance" ? pipeline::RankingMode::kPerInstance
                                      : pipeline::RankingMode::kClassGlobal;
    }
    if (doc.contains("aggregation")) {
      const auto a = doc["aggregation"].get<std::string>();
      if (a != "pooled" && a != "mean") throw ConfigError("aggregation must be 'pooled' or 'mean'");
      f.aggregation = a == "pooled" ? pipeline::FoldAggregation::kPooled : pipeline::FoldAggregation::kMean;
    }
    f.folds = doc.value("folds", f.folds);
    f.ig_steps = doc.value("ig_steps", f.ig_steps);
    f.permutations = doc.value("permutations", f.permutations);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
}

json config_json(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto& m = cfg.model;
  const auto& f = cfg.fad;
  return json{{"hidden", m.hidden},
              {"learning_rate", m.optimizer.learning_rate},
              {"beta1", m.optimizer.beta1},
              {"beta2", m.optimizer.beta2},
              {"epsilon", m.optimizer.epsilon},
              {"batch_size", m.optimizer.batch_size},
              {"epochs", m.optimizer.epochs},
              {"seed", seed},
              {"validation_fraction", m.validation_fraction},
              {"standardize", m.standardize},
              {"gradient_target", std::string(nn::to_string(m.gradient_target))},
              {"beta", f.beta},
              {"methods", f.methods},
              {"baseline", f.baseline == pipeline::BaselineMode::kMean ? "mean" : "zero"},
              {"ranking", f.ranking == pipeline::RankingMode::kPerInstance ? "per-instance" : "class-global"},
              {"aggregation", f.aggregation == pipeline::FoldAggregation::kPooled ? "pooled" : "mean"},
              {"folds", f.folds},
              {"ig_steps", f.ig_steps},
              {"permutations", f.permutations}};
}

ExperimentConfig load_config(Manifest& manifest, const std::string& path) {
  ExperimentConfig cfg;
  if (path.empty()) return cfg;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(manifest.read_input(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()));
  }
  apply_config(doc, cfg);
  return cfg;
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
  fs::path stem = path;
  stem.replace_extension();
  return fs::path(stem.string() + suffix);
}

struct Globals {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string out;
};

// ---- train ----------------------------------------------------------------

struct TrainOptions {
  std::string data;
  std::string meta;
  std::string config;
};

int cmd_train(const TrainOptions& opt, const Globals& g, const std::vector<std::string>& argv,
              std::ostream& out) {
  Manifest manifest("train", argv);
  const data::TabularDataset ds = load_data(manifest, opt.data, opt.meta);
  ExperimentConfig cfg = load_config(manifest, opt.config);
  const std::uint64_t seed = cfg.seed.value_or(g.seed);
  cfg.model.optimizer.validate();
  manifest.config = config_json(cfg, seed);

  const auto split = pipeline::validation_split(ds.samples, ds.class_count(),
                                                cfg.model.validation_fraction, mix_seed(seed, 2));
  const nn::Samples fit = data::subset(ds.samples, split.fit);
  const nn::Samples validation = data::subset(ds.samples, split.validation);
  nn::DenseNetwork init =
      nn::DenseNetwork::initialize({ds.dim(), cfg.model.hidden, ds.class_count()}, mix_seed(seed, 0));
  if (cfg.model.standardize) init.set_scaler(pipeline::fit_scaler(fit, ds.kinds));
  init.set_gradient_target(cfg.model.gradient_target);
  init.feature_names = ds.feature_names;
  init.class_names = ds.class_names;
  nn::TrainConfig optimizer = cfg.model.optimizer;
  optimizer.seed = mix_seed(seed, 1);
  const nn::TrainResult trained =
      nn::train(fit, validation.size() > 0 ? &validation : nullptr, std::move(init), optimizer);

  const fs::path model_path = g.out.empty() ? fs::path("model.json") : fs::path(g.out);
  manifest.write_output(model_path, nn::serialize_network(trained.network));
  std::string trace = "epoch,train_loss,validation_loss\n";
  for (std::size_t e = 0; e < trained.train_loss.size(); ++e) {
    trace += fmt::format("{},{},{}\n", e + 1, csv::format_double(trained.train_loss[e]),
                         e < trained.validation_loss.size()
                             ? csv::format_double(trained.validation_loss[e])
                             : std::string());
  }
  manifest.write_output(with_suffix(model_path, ".loss.csv"), trace);

  const double train_acc = nn::accuracy(trained.network, fit);
  manifest.results = {{"final_train_accuracy", train_acc},
                      {"validation_accuracy",
                       validation.size() > 0 ? json(nn::accuracy(trained.network, validation)) : json(nullptr)},
                      {"best_epoch", trained.best_epoch},
                      {"epochs", optimizer.epochs},
                      {"parameters", trained.network.parameter_count()},
                      {"train_instances", fit.size()},
                      {"validation_instances", validation.size()}};
  manifest.save(with_suffix(model_path, ".manifest.json"), seed, g.jobs);
  out << fmt::format("trained {} parameters; best epoch {}; train accuracy {:.4f}\n",
                     trained.network.parameter_count(), trained.best_epoch, train_acc);
  return kExitOk;
}

// ---- attribute --------------------------------------------------------------

struct AttributeOptions {
  std::string model;
  std::string data;
  std::string meta;
  std::string methods = "ig";
  std::size_t steps = attr::kDefaultIgSteps;
  std::size_t permutations = 256;
  std::string baseline = "mean";
  std::string target = "label";
  bool exhaustive = false;
};

attr::BaselineVector baseline_for(Manifest& manifest, const std::string& spec,
                                  const nn::DenseNetwork& net, const data::TabularDataset& ds) {
  if (spec == "zero") return attr::zero_baseline(ds.dim());
  if (spec == "mean") {
    // Training means live in the model's scaler; fall back to this data.
    if (!net.scaler().is_identity()) {
      attr::BaselineVector b = attr::zero_baseline(ds.dim());
      for (std::size_t j = 0; j < ds.dim(); ++j) {
        if (ds.kinds[j] == attr::FeatureKind::kContinuous) {
          b.values[j] = net.scaler().offset[j];
          b.policies[j] = attr::BaselinePolicy::kMean;
        }
      }
      return b;
    }
    return attr::make_baseline(ds.samples, ds.kinds);
  }
  try {
    return attr::custom_baseline(nlohmann::json::parse(manifest.read_input(spec)).get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("baseline {}: {}", spec, e.what()));
  }
}

int cmd_attribute(const AttributeOptions& opt, const Globals& g, const std::vector<std::string>& argv,
                  std::ostream& out) {
  Manifest manifest("attribute", argv);
  const nn::DenseNetwork net = nn::parse_network(manifest.read_input(opt.model));
  const data::TabularDataset ds = load_data(manifest, opt.data, opt.meta);
  if (ds.dim() != net.input_dim()) {
    throw ShapeError(fmt::format("model expects {} features, dataset has {}", net.input_dim(), ds.dim()));
  }
  if (ds.class_count() > net.class_count()) throw ShapeError("dataset has more classes than the model");
  if (opt.target != "label" && opt.target != "predicted") {
    throw ConfigError("target must be 'label' or 'predicted'");
  }
  const auto requested = split_list(opt.methods);
  if (requested.empty()) throw ConfigError("at least one method is required");
  for (const auto& m : requested) {
    if (m != "ig" && m != "shapley" && m != "shapley-exact" && m != "shapley-sampled") {
      throw ConfigError(fmt::format("unknown attribution method '{}'", m));
    }
  }
  const attr::BaselineVector baseline = baseline_for(manifest, opt.baseline, net, ds);
  if (baseline.dim() != ds.dim()) throw ShapeError("baseline dim does not match the data");

  json rows = json::array();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto x = ds.samples.row(i);
    const std::size_t target =
        opt.target == "label" ? ds.samples.labels[i] : nn::predict(net, x);
    for (std::size_t m = 0; m < requested.size(); ++m) {
      const std::string& method = requested[m];
      attr::AttributionVector a;
      bool auto_selected = false;
      if (method == "ig") {
        a = attr::integrated_gradients(net, x, baseline, target, opt.steps);
      } else if (method == "shapley-exact" ||
                 (method == "shapley" && ds.dim() <= attr::kExactEnumerationLimit)) {
        auto_selected = method == "shapley";
        a = attr::shapley_exact(net, x, baseline, target);
      } else if (opt.exhaustive) {
        a = attr::shapley_exhaustive(net, x, baseline, target);
      } else {
        auto_selected = method == "shapley";
        a = attr::shapley_sampled(net, x, baseline, target, opt.permutations,
                                  mix_seed(mix_seed(g.seed, kShapleyStream + m), i));
      }
      json row = attr::to_json(a, ds.feature_names);
      json meta = row["metadata"];
      meta["mode"] = a.method == attr::Method::kShapleyExact    ? "exact"
                     : a.method == attr::Method::kShapleySampled ? (a.metadata.exhaustive ? "exhaustive" : "sampled")
                                                                 : "path-integral";
      if (method == "shapley") meta["auto_selected"] = auto_selected;
      json ordered;
      ordered["instance"] = i;
      ordered["label"] = ds.class_names[ds.samples.labels[i]];
      ordered["requested"] = method;
      ordered["method"] = row["method"];
      ordered["target_class"] = row["target_class"];
      ordered["metadata"] = std::move(meta);
      ordered["features"] = row["features"];
      rows.push_back(std::move(ordered));
    }
  }
  json doc;
  doc["format"] = "fadx-attributions";
  doc["version"] = 1;
  doc["feature_names"] = ds.feature_names;
  doc["class_names"] = ds.class_names;
  doc["methods"] = requested;
  doc["target"] = opt.target;
  json policies = json::array();
  for (auto p : baseline.policies) policies.push_back(std::string(attr::to_string(p)));
  doc["baseline"] = {{"values", baseline.values}, {"policies", policies}};
  doc["rows"] = std::move(rows);

  const fs::path out_path = g.out.empty() ? fs::path("attributions.json") : fs::path(g.out);
  manifest.config = {{"methods", requested},   {"steps", opt.steps},
                     {"permutations", opt.permutations}, {"baseline", opt.baseline},
                     {"target", opt.target},   {"exhaustive", opt.exhaustive}};
  manifest.write_output(out_path, doc.dump(1) + "\n");
  manifest.results = {{"rows", ds.size() * requested.size()}};
  manifest.save(with_suffix(out_path, ".manifest.json"), g.seed, g.jobs);
  out << fmt::format("wrote {} attribution rows to {}\n", ds.size() * requested.size(), out_path.string());
  return kExitOk;
}

// ---- fad --------------------------------------------------------------------

struct FadOptions {
  bool end_to_end = false;
  std::string model;
  std::string data;
  std::string meta;
  std::string attributions;
  std::string config;
  std::optional<double> beta;
  std::optional<std::string> methods;
  bool planted = false;
  std::size_t instances = 500;
  std::size_t features = 50;
  double informative = 0.2;
  std::size_t classes = 3;
  double separation = 1.0;
  std::size_t seeds = 1;
};

json summarize(std::span<const pipeline::FadResult> results, const std::vector<std::string>& methods,
               double beta) {
  json summary;
  summary["runs"] = results.size();
  summary["beta"] = beta;
  summary["methods"] = methods;
  json means;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& r : results) {
      for (const auto& row : r.report.rows) {
        if (row.entries[m]) {
          total += row.entries[m]->n_auc;
          ++count;
        }
      }
    }
    means[pipeline::method_label(methods[m])] = count > 0 ? json(total / static_cast<double>(count)) : json(nullptr);
  }
  summary["mean_nauc"] = std::move(means);
  if (std::find(methods.begin(), methods.end(), "random") != methods.end()) {
    json wins;
    for (const auto& m : methods) {
      if (m == "random") continue;
      wins[pipeline::method_label(m)] = pipeline::win_rate(results, m, "random");
    }
    summary["win_rate_vs_random"] = std::move(wins);
  }
  return summary;
}

int fad_end_to_end(const FadOptions& opt, const Globals& g, const std::vector<std::string>& argv,
                   std::ostream& out) {
  Manifest manifest("fad", argv);
  ExperimentConfig cfg = load_config(manifest, opt.config);
  const std::uint64_t seed = cfg.seed.value_or(g.seed);
  if (opt.beta) cfg.fad.beta = *opt.beta;
  if (opt.methods) {
    cfg.fad.methods = split_list(*opt.methods);
  } else if (opt.planted && opt.config.empty()) {
    cfg.fad.methods = {"ig", "shapley", "oracle", "random"};
  }
  cfg.fad.jobs = g.jobs;
  cfg.fad.validate();
  if (opt.seeds < 1) throw ConfigError("--seeds must be at least 1");
  if (!opt.planted && opt.data.empty()) throw ConfigError("--end-to-end needs --data or --planted");

  std::optional<data::TabularDataset> loaded;
  if (!opt.planted) loaded = load_data(manifest, opt.data, opt.meta);
  manifest.config = config_json(cfg, seed);
  if (opt.planted) {
    manifest.config["planted"] = {{"instances", opt.instances}, {"features", opt.features},
                                  {"informative_fraction", opt.informative}, {"classes", opt.classes},
                                  {"separation", opt.separation}};
  }
  manifest.config["seeds"] = opt.seeds;

  const fs::path dir = g.out.empty() ? fs::path("fad_out") : fs::path(g.out);
  std::vector<pipeline::FadResult> results;
  for (std::size_t r = 0; r < opt.seeds; ++r) {
    const std::uint64_t run_seed = seed + r;
    data::TabularDataset ds;
    if (opt.planted) {
      ds = pipeline::generate_vital_few({opt.instances, opt.features, opt.informative, opt.classes,
                                         run_seed, opt.separation});
    } else {
      ds = *loaded;
    }
    pipeline::ModelSettings model = cfg.model;
    model.optimizer.seed = run_seed;
    pipeline::FadSettings fad = cfg.fad;
    fad.seed = run_seed;
    results.push_back(pipeline::run_fad_analysis(ds, model, fad));
    const fs::path run_dir = opt.seeds == 1 ? dir : dir / fmt::format("seed_{}", run_seed);
    for (const auto& rel : report::write_fad_outputs(results.back(), ds.class_names, run_dir)) {
      manifest.note_output(run_dir / rel);
    }
    if (opt.planted) {
      manifest.write_output(run_dir / "data.csv", data::dataset_to_csv(ds));
      manifest.write_output(run_dir / "data.meta.json", data::sidecar_to_json(ds));
    }
  }
  const json summary = summarize(results, cfg.fad.methods, cfg.fad.beta);
  manifest.write_output(dir / "summary.json", summary.dump(1) + "\n");
  manifest.results = summary;
  manifest.save(dir / "manifest.json", seed, g.jobs);

  out << nlohmann::ordered_json(summary).dump() << "\n";
  if (opt.seeds == 1) out << report::nauc_markdown(results.front().report);
  return kExitOk;
}

int fad_from_files(const FadOptions& opt, const Globals& g, const std::vector<std::string>& argv,
                   std::ostream& out) {
  if (opt.model.empty() || opt.data.empty() || opt.attributions.empty()) {
    throw ConfigError("fad needs --model, --data and --attributions, or --end-to-end");
  }
  Manifest manifest("fad", argv);
  const nn::DenseNetwork net = nn::parse_network(manifest.read_input(opt.model));
  const data::TabularDataset ds = load_data(manifest, opt.data, opt.meta);
  if (ds.dim() != net.input_dim()) {
    throw ShapeError(fmt::format("model expects {} features, dataset has {}", net.input_dim(), ds.dim()));
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(manifest.read_input(opt.attributions));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", opt.attributions, e.what()));
  }
  const double beta = opt.beta.value_or(fad::kDefaultBeta);
  std::vector<std::string> methods;
  std::map<std::string, std::vector<std::optional<attr::ImportanceRanking>>> rankings;
  attr::BaselineVector baseline;
  try {
    baseline = attr::custom_baseline(doc.at("baseline").at("values").get<std::vector<double>>());
    for (const auto& row : doc.at("rows")) {
      const std::string method = row.value("requested", row.at("method").get<std::string>());
      if (opt.methods) {
        const auto wanted = split_list(*opt.methods);
        if (std::find(wanted.begin(), wanted.end(), method) == wanted.end()) continue;
      }
      if (!rankings.contains(method)) {
        methods.push_back(method);
        rankings[method].resize(ds.size());
      }
      const auto i = row.at("instance").get<std::size_t>();
      if (i >= ds.size()) throw IndexError(fmt::format("attribution row for instance {} out of range", i));
      const attr::AttributionVector a = attr::attribution_from_json(row);
      if (a.dim() != ds.dim()) throw ShapeError("attribution dim does not match the data");
      rankings[method][i] = attr::importance_ranking(a);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", opt.attributions, e.what()));
  }
  if (methods.empty()) throw ConfigError("no attribution methods selected");
  if (baseline.dim() != ds.dim()) throw ShapeError("baseline dim does not match the data");

  const fad::DropSchedule schedule = fad::default_schedule(ds.dim(), beta);
  pipeline::FadResult result;
  result.report.beta = beta;
  for (const auto& m : methods) {
    result.report.methods.push_back(pipeline::method_label(m));
    result.resolved_methods.push_back(m);
  }
  std::vector<std::size_t> predictions;
  for (std::size_t i = 0; i < ds.size(); ++i) predictions.push_back(nn::predict(net, ds.samples.row(i)));
  result.metrics = pipeline::classification_metrics(predictions, ds.samples.labels, ds.class_count());
  for (std::size_t c = 0; c < ds.class_count(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.samples.labels[i] == c) members.push_back(i);
    }
    if (members.empty()) {
      result.report.excluded_classes.push_back(ds.class_names[c]);
      continue;
    }
    std::vector<fad::FADCurve> by_method;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      std::vector<attr::ImportanceRanking> ranks;
      for (std::size_t i : members) {
        const auto& r = rankings[methods[m]][i];
        if (!r) throw ConfigError(fmt::format("instance {} has no {} attribution", i, methods[m]));
        ranks.push_back(*r);
      }
      fad::FADCurve curve =
          fad::fad_curve(net, data::subset(ds.samples, members), ranks, baseline, schedule, c);
      curve.class_label = ds.class_names[c];
      curve.method = result.report.methods[m];
      result.diagnostics.push_back({curve.class_label, curve.method, fad::monotonicity(curve, beta)});
      by_method.push_back(curve);
      result.curves.push_back(std::move(curve));
    }
    result.report.rows.push_back(fad::make_row(ds.class_names[c], members.size(), by_method, beta));
  }

  const fs::path dir = g.out.empty() ? fs::path("fad_out") : fs::path(g.out);
  for (const auto& rel : report::write_fad_outputs(result, ds.class_names, dir)) {
    manifest.note_output(dir / rel);
  }
  manifest.config = {{"beta", beta}, {"methods", methods}};
  manifest.save(dir / "manifest.json", g.seed, g.jobs);
  out << report::nauc_markdown(result.report);
  return kExitOk;
}

// ---- match ------------------------------------------------------------------

struct MatchOptions {
  std::string lexicon;
  std::string mentions;
  double epsilon = match::kDefaultEpsilon;
};

int cmd_match(const MatchOptions& opt, const Globals& g, const std::vector<std::string>& argv,
              std::ostream& out) {
  if (!(opt.epsilon >= -1.0 && opt.epsilon <= 1.0)) {
    throw ConfigError(fmt::format("epsilon must lie in [-1, 1], got {}", opt.epsilon));
  }
  Manifest manifest("match", argv);
  const match::EmbeddingLexicon lexicon = match::parse_lexicon(manifest.read_input(opt.lexicon));
  const auto mentions = match::parse_mentions(manifest.read_input(opt.mentions));
  json rows = json::array();
  std::size_t filtered = 0;
  std::size_t ties = 0;
  for (const auto& mention : mentions) {
    const auto a = match::assign_symptom(mention, lexicon, opt.epsilon);
    filtered += !a.concept_id;
    ties += a.tie;
    rows.push_back({{"mention", a.mention},
                    {"concept_id", a.concept_id ? json(*a.concept_id) : json(nullptr)},
                    {"similarity", a.similarity},
                    {"tie", a.tie}});
  }
  const double fraction =
      mentions.empty() ? 0.0 : static_cast<double>(filtered) / static_cast<double>(mentions.size());
  json doc;
  doc["format"] = "fadx-assignments";
  doc["version"] = 1;
  doc["epsilon"] = opt.epsilon;
  doc["assignments"] = std::move(rows);
  doc["summary"] = {{"mentions", mentions.size()}, {"filtered", filtered},
                    {"filtered_fraction", fraction}, {"ties", ties}};
  const fs::path out_path = g.out.empty() ? fs::path("assignments.json") : fs::path(g.out);
  manifest.config = {{"epsilon", opt.epsilon}};
  manifest.write_output(out_path, doc.dump(1) + "\n");
  manifest.results = doc["summary"];
  manifest.save(with_suffix(out_path, ".manifest.json"), g.seed, g.jobs);
  out << fmt::format("assigned {} of {} mentions (epsilon {}); filtered fraction {:.4f}\n",
                     mentions.size() - filtered, mentions.size(), opt.epsilon, fraction);
  return kExitOk;
}

// ---- gen --------------------------------------------------------------------

struct GenOptions {
  pipeline::VitalFewConfig config;
};

int cmd_gen(const GenOptions& opt, const Globals& g, const std::vector<std::string>& argv,
            std::ostream& out) {
  Manifest manifest("gen", argv);
  pipeline::VitalFewConfig config = opt.config;
  config.seed = g.seed;
  const data::TabularDataset ds = pipeline::generate_vital_few(config);
  const fs::path path = g.out.empty() ? fs::path("data.csv") : fs::path(g.out);
  manifest.config = {{"instances", config.instances}, {"features", config.features},
                     {"informative_fraction", config.informative_fraction},
                     {"classes", config.classes}, {"separation", config.separation}};
  manifest.write_output(path, data::dataset_to_csv(ds));
  manifest.write_output(sidecar_for(path), data::sidecar_to_json(ds));
  manifest.results = {{"informative", ds.informative}};
  manifest.save(with_suffix(path, ".manifest.json"), g.seed, g.jobs);
  out << fmt::format("generated {} instances x {} features ({} informative) to {}\n", ds.size(),
                     ds.dim(), ds.informative.size(), path.string());
  return kExitOk;
}

// ---- replay -----------------------------------------------------------------

int cmd_replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(manifest_path));
    if (doc.at("format").get<std::string>() != "fadx-run-manifest") throw ParseError("not a run manifest");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", manifest_path, e.what()));
  }
  for (const auto& input : doc.at("inputs")) {
    const auto path = input.at("path").get<std::string>();
    if (sha256_hex(read_file(path)) != input.at("sha256").get<std::string>()) {
      throw ConfigError(fmt::format("input {} changed since the recorded run", path));
    }
  }
  return run(doc.at("argv").get<std::vector<std::string>>(), out, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fadx: feature attribution dropping (FAD) curve toolkit", "fadx"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Globals g;
  app.add_option("--seed", g.seed, "Root seed for every random stream")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads for fold-level parallelism")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file or directory");
  app.fallthrough();

  TrainOptions train_opt;
  auto* train = app.add_subcommand("train", "Train a dense classifier on a CSV dataset");
  train->add_option("--data", train_opt.data, "Dataset CSV with a 'label' column")->required();
  train->add_option("--meta", train_opt.meta, "Feature-kind sidecar JSON");
  train->add_option("--config", train_opt.config, "Training config JSON");

  AttributeOptions attr_opt;
  auto* attribute = app.add_subcommand("attribute", "Compute per-instance feature attributions");
  attribute->add_option("--model", attr_opt.model, "Model JSON")->required();
  attribute->add_option("--data", attr_opt.data, "Dataset CSV")->required();
  attribute->add_option("--meta", attr_opt.meta, "Feature-kind sidecar JSON");
  attribute->add_option("--method", attr_opt.methods, "ig, shapley, shapley-exact, shapley-sampled (comma list)")
      ->capture_default_str();
  attribute->add_option("--steps", attr_opt.steps, "Integrated-gradients steps")->capture_default_str();
  attribute->add_option("--permutations", attr_opt.permutations, "Sampled-Shapley permutations")
      ->capture_default_str();
  attribute->add_option("--baseline", attr_opt.baseline, "mean, zero, or a JSON array file")
      ->capture_default_str();
  attribute->add_option("--target", attr_opt.target, "label or predicted")->capture_default_str();
  attribute->add_flag("--exhaustive", attr_opt.exhaustive,
                      "Enumerate every permutation for sampled Shapley (<= 10 features)");

  FadOptions fad_opt;
  auto* fad = app.add_subcommand("fad", "FAD curves and N-AUC table");
  fad->add_flag("--end-to-end", fad_opt.end_to_end, "Cross-validated train + attribute + FAD");
  fad->add_option("--model", fad_opt.model, "Model JSON");
  fad->add_option("--data", fad_opt.data, "Dataset CSV");
  fad->add_option("--meta", fad_opt.meta, "Feature-kind sidecar JSON");
  fad->add_option("--attributions", fad_opt.attributions, "Attribution JSON from 'attribute'");
  fad->add_option("--config", fad_opt.config, "Experiment config JSON");
  fad->add_option("--beta", fad_opt.beta, "Upper bound of the AUC in percent (default 20)");
  fad->add_option("--methods", fad_opt.methods, "Comma list of methods");
  fad->add_flag("--planted", fad_opt.planted, "Generate vital-few data for every seed");
  fad->add_option("--instances", fad_opt.instances)->capture_default_str();
  fad->add_option("--features", fad_opt.features)->capture_default_str();
  fad->add_option("--informative", fad_opt.informative, "Informative feature fraction")->capture_default_str();
  fad->add_option("--classes", fad_opt.classes)->capture_default_str();
  fad->add_option("--separation", fad_opt.separation)->capture_default_str();
  fad->add_option("--seeds", fad_opt.seeds, "Repetitions with seeds seed, seed+1, ...")->capture_default_str();

  MatchOptions match_opt;
  auto* matchc = app.add_subcommand("match", "Assign mention embeddings to lexicon concepts");
  matchc->add_option("--lexicon", match_opt.lexicon, "Lexicon CSV or JSON")->required();
  matchc->add_option("--mentions", match_opt.mentions, "Mention CSV or JSON")->required();
  matchc->add_option("--epsilon", match_opt.epsilon, "Similarity threshold")->capture_default_str();

  GenOptions gen_opt;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic vital-few dataset");
  gen->add_option("--instances", gen_opt.config.instances)->capture_default_str();
  gen->add_option("--features", gen_opt.config.features)->capture_default_str();
  gen->add_option("--informative", gen_opt.config.informative_fraction, "Informative feature fraction")
      ->capture_default_str();
  gen->add_option("--classes", gen_opt.config.classes)->capture_default_str();
  gen->add_option("--separation", gen_opt.config.separation)->capture_default_str();

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay->add_option("manifest", manifest_path, "Run manifest JSON")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (train->parsed()) return cmd_train(train_opt, g, args, out);
    if (attribute->parsed()) return cmd_attribute(attr_opt, g, args, out);
    if (fad->parsed()) {
      return fad_opt.end_to_end ? fad_end_to_end(fad_opt, g, args, out) : fad_from_files(fad_opt, g, args, out);
    }
    if (matchc->parsed()) return cmd_match(match_opt, g, args, out);
    if (gen->parsed()) return cmd_gen(gen_opt, g, args, out);
    if (replay->parsed()) return cmd_replay(manifest_path, out, err);
  } catch (const NumericDivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace fadx::cli
