// Copyright 2026 The CBF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cbf/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "cbf/error.hpp"
#include "cbf/eval.hpp"
#include "cbf/io.hpp"
#include "cbf/loop.hpp"
#include "cbf/rule_dsl.hpp"
#include "cbf/synth.hpp"

namespace cbf {

namespace fs = std::filesystem;

namespace {

struct Failure {
  int code;
  std::string message;
};

/// Runs f, turning library errors into a Failure with the given exit code.
/// Divergence always maps to kExitDivergence.
template <class F>
auto stage(int code, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Failure{e.kind() == ErrorKind::Divergence ? int(kExitDivergence) : code, e.what()};
  } catch (const fs::filesystem_error& e) {
    throw Failure{code, e.what()};
  }
}

TaxonomyPtr share(Taxonomy t) { return std::make_shared<const Taxonomy>(std::move(t)); }

std::pair<RuleBase, RuleBase> split_rules(const RuleBase& all) {
  const RuleKind intra_kinds[] = {RuleKind::IntraCorrection};
  const RuleKind extra_kinds[] = {RuleKind::ExtraShadow, RuleKind::ExtraElevation};
  return {all.filtered(intra_kinds), all.filtered(extra_kinds)};
}

std::pair<RuleBase, RuleBase> load_rules(const std::optional<std::string>& path, TaxonomyPtr tax) {
  if (!path) return {builtin_intra_rules(tax), builtin_extra_rules(tax)};
  return split_rules(parse_rules(read_text(*path), tax));
}

std::string all_rules_text(const RuleBase& intra, const RuleBase& extra) {
  RuleBase all = intra;
  all.append(extra);
  return serialize_rules(all);
}

struct Dataset {
  std::vector<LabeledImage> train, val, test;
};

Dataset load_dataset(const fs::path& dir, TaxonomyPtr tax) {
  Dataset d;
  const auto split = parse_key_values(read_text(dir / "split.txt"));
  for (const auto& [name, which] : split) {
    LabeledImage li{name, image_from_tensor(read_tensor(dir / (name + ".image.cbft"))),
                    read_label_raster(dir / (name + ".labels.pgm"), tax)};
    switch (parse_split(which)) {
      case Split::Train: d.train.push_back(std::move(li)); break;
      case Split::Val: d.val.push_back(std::move(li)); break;
      case Split::Test: d.test.push_back(std::move(li)); break;
    }
  }
  return d;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  int n = 30;
  std::uint64_t seed = 0;
  int size = 96;
  std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.n <= 0) throw Failure{kExitConfig, "--n must be positive"};
  if (a.size < 16) throw Failure{kExitConfig, "--size must be at least 16"};
  const auto bench = stage(kExitConfig, [&] { return default_benchmark(a.n, a.seed, a.size); });
  stage(kExitData, [&] {
    const fs::path dir = a.out;
    KeyValues split;
    for (const auto& s : bench) {
      write_tensor(dir / (s.name + ".image.cbft"), image_tensor(s.scene.image));
      write_label_raster(dir / (s.name + ".labels.pgm"), s.scene.truth);
      write_text(dir / (s.name + ".spec"), serialize_scene_spec(default_scene_spec(s.seed, a.size)));
      split.emplace_back(s.name, to_string(s.split));
    }
    write_text(dir / "split.txt", serialize_key_values(split));
    write_text(dir / "taxonomy.txt", serialize_taxonomy(*bench.front().scene.truth.taxonomy()));
    return 0;
  });
  out << "wrote " << bench.size() << " scenes to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config, data, out, rules;
  std::map<std::string, std::string> overrides;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  ConfigFile cfg = stage(kExitConfig, [&] {
    if (!fs::exists(a.config)) throw Error(ErrorKind::Io, "config file '" + a.config + "' not found");
    ConfigFile c = parse_config(read_text(a.config));
    for (const auto& [k, v] : a.overrides) apply_config_key(c, k, v);
    if (!a.rules.empty()) c.rules_path = a.rules;
    c.pipeline.validate();
    return c;
  });
  const fs::path data = a.data, run = a.out;
  auto tax = stage(kExitConfig, [&] {
    if (cfg.taxonomy_path) return share(parse_taxonomy(read_text(*cfg.taxonomy_path)));
    if (fs::exists(data / "taxonomy.txt")) return share(parse_taxonomy(read_text(data / "taxonomy.txt")));
    return share(Taxonomy::ucm8());
  });
  const auto [intra, extra] = stage(kExitConfig, [&] { return load_rules(cfg.rules_path, tax); });
  const Dataset ds = stage(kExitData, [&] { return load_dataset(data, tax); });

  std::string metrics = "iteration,stage1_oa,stage1_miou,stage2_oa,stage2_miou,corrections,train_loss\n";
  KeyValues manifest;
  manifest.emplace_back("tool_version", kToolVersion);
  manifest.emplace_back("seed", std::to_string(cfg.pipeline.seed));
  manifest.emplace_back("data", fs::absolute(data).lexically_normal().string());
  manifest.emplace_back("config", "config.txt");
  manifest.emplace_back("taxonomy", "taxonomy.txt");
  manifest.emplace_back("rules", "rules.rules");
  manifest.emplace_back("metrics", "metrics.csv");

  auto observer = [&](const IterationReport& r) {
    const auto& rec = r.record;
    const std::string dir = "iter_" + std::to_string(rec.iteration);
    const std::string prefix = "iteration." + std::to_string(rec.iteration);
    write_text(run / dir / "params.cbfp", serialize_params(r.params));
    manifest.emplace_back(prefix + ".checkpoint", dir + "/params.cbfp");
    for (const auto& img : r.validation) {
      const auto& res = img.result;
      write_label_raster(run / dir / (img.name + ".stage1.pgm"), res.stage1.labels);
      write_label_raster(run / dir / (img.name + ".stage2.pgm"), res.intra.labels);
      write_tensor(run / dir / (img.name + ".extra.cbft"), extra_tensor(res.extra));
      write_text(run / dir / (img.name + ".corrections.csv"), correction_log_csv(res.intra.log, *tax));
    }
    manifest.emplace_back(prefix + ".artifacts", dir);
    metrics += std::to_string(rec.iteration) + "," + fmt6(rec.stage1_oa) + "," + fmt6(rec.stage1_miou) +
               "," + fmt6(rec.stage2_oa) + "," + fmt6(rec.stage2_miou) + "," +
               std::to_string(rec.corrections) + "," + fmt6(rec.train_loss) + "\n";
    out << "iteration " << rec.iteration << ": stage1 OA " << fmt6(rec.stage1_oa) << " mIoU "
        << fmt6(rec.stage1_miou) << ", stage2 OA " << fmt6(rec.stage2_oa) << " mIoU "
        << fmt6(rec.stage2_miou) << ", " << rec.corrections << " corrections ("
        << fmt6(rec.wall_seconds) << " s)\n";
  };

  const auto result = stage(kExitData, [&] {
    ConfigFile snapshot = cfg;
    snapshot.taxonomy_path.reset();
    snapshot.rules_path.reset();
    write_text(run / "config.txt", serialize_config(snapshot));
    write_text(run / "taxonomy.txt", serialize_taxonomy(*tax));
    write_text(run / "rules.rules", all_rules_text(intra, extra));
    return cbf_train(ds.train, ds.val, cfg.pipeline, intra, extra, observer);
  });

  stage(kExitData, [&] {
    manifest.emplace_back("iterations", std::to_string(result.history.size()));
    manifest.emplace_back("best_iteration", std::to_string(result.pipeline.best_iteration()));
    write_text(run / "metrics.csv", metrics);
    write_text(run / "manifest.txt", serialize_key_values(manifest));
    return 0;
  });
  out << "best iteration " << result.pipeline.best_iteration() << "; run written to " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- infer

struct InferArgs {
  std::string run, image, out;
  int stage = 0;
};

Pipeline load_pipeline(const fs::path& run) {
  const auto manifest = parse_key_values(read_text(run / "manifest.txt"));
  auto need = [&](const std::string& key) {
    auto v = lookup(manifest, key);
    if (!v) throw Error(ErrorKind::Format, "manifest lacks '" + key + "'");
    return *v;
  };
  Pipeline p;
  p.taxonomy = share(parse_taxonomy(read_text(run / need("taxonomy"))));
  p.config = parse_config(read_text(run / need("config"))).pipeline;
  std::tie(p.intra, p.extra) = split_rules(parse_rules(read_text(run / need("rules")), p.taxonomy));
  const int best = std::stoi(need("best_iteration"));
  if (best < 1) throw Error(ErrorKind::Format, "manifest names no trained iteration");
  for (int i = 1; i <= best; ++i) {
    auto params = parse_params(read_text(run / need("iteration." + std::to_string(i) + ".checkpoint")));
    if (params.n_classes() != p.taxonomy->size())
      throw Error(ErrorKind::Format, "checkpoint class count does not match the taxonomy");
    p.chain.push_back(std::move(params));
  }
  return p;
}

int cmd_infer(const InferArgs& a, std::ostream& out) {
  const Pipeline pipeline = stage(kExitData, [&] { return load_pipeline(a.run); });
  const RasterImage image = stage(kExitData, [&] { return image_from_tensor(read_tensor(a.image)); });
  const auto r = stage(kExitData, [&] {
    if (image.channels() * 3 + 2 != int(pipeline.chain.front().feature_dim()))
      throw Error(ErrorKind::Dimension, "image channel count does not match the classifier");
    return cbf_infer(pipeline, image);
  });
  stage(kExitData, [&] {
    const fs::path dir = a.out;
    if (a.stage != 2) write_label_raster(dir / "stage1.pgm", r.stage1);
    if (a.stage != 1) {
      write_label_raster(dir / "stage2.pgm", r.stage2);
      write_text(dir / "corrections.csv", correction_log_csv(r.log, *pipeline.taxonomy));
    }
    return 0;
  });
  out << r.log.size() << " units corrected; output in " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- refine

struct RefineArgs {
  std::string probs, image, rules, taxonomy, config, out;
  std::map<std::string, std::string> overrides;
};

int cmd_refine(const RefineArgs& a, std::ostream& out) {
  const ConfigFile cfg = stage(kExitConfig, [&] {
    ConfigFile c;
    if (!a.config.empty()) {
      if (!fs::exists(a.config)) throw Error(ErrorKind::Io, "config file '" + a.config + "' not found");
      c = parse_config(read_text(a.config));
    }
    for (const auto& [k, v] : a.overrides) apply_config_key(c, k, v);
    if (!a.rules.empty()) c.rules_path = a.rules;
    if (!a.taxonomy.empty()) c.taxonomy_path = a.taxonomy;
    c.pipeline.validate();
    return c;
  });
  const auto tax = stage(kExitConfig, [&] {
    return cfg.taxonomy_path ? share(parse_taxonomy(read_text(*cfg.taxonomy_path))) : share(Taxonomy::ucm8());
  });
  const auto [intra, extra] = stage(kExitConfig, [&] { return load_rules(cfg.rules_path, tax); });
  const ProbMap probs = stage(kExitData, [&] { return ingest_probmap(read_tensor(a.probs), tax->size()); });
  const RasterImage seg = stage(kExitData, [&] {
    if (a.image.empty()) return RasterImage(probs.width(), probs.height(), probs.classes(), probs.probs());
    RasterImage img = image_from_tensor(read_tensor(a.image));
    if (img.width() != probs.width() || img.height() != probs.height())
      throw Error(ErrorKind::Dimension, "image and probability map differ in size");
    return img;
  });
  const auto r = stage(kExitData, [&] { return reason(probs, seg, tax, cfg.pipeline, intra, extra); });
  stage(kExitData, [&] {
    const fs::path dir = a.out;
    write_label_raster(dir / "stage1.pgm", r.stage1.labels);
    write_label_raster(dir / "labels.pgm", r.intra.labels);
    write_tensor(dir / "extra.cbft", extra_tensor(r.extra));
    write_text(dir / "corrections.csv", correction_log_csv(r.intra.log, *tax));
    return 0;
  });
  out << r.intra.log.size() << " units corrected; output in " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> preds, stages;
  std::string truth, taxonomy, out;
  int iteration = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (!a.stages.empty() && a.stages.size() != a.preds.size())
    throw Failure{kExitConfig, "--stage must be given once per --pred"};
  TaxonomyPtr tax = stage(kExitConfig, [&] {
    return a.taxonomy.empty() ? TaxonomyPtr{} : share(parse_taxonomy(read_text(a.taxonomy)));
  });
  const LabelMap truth = stage(kExitData, [&] { return read_label_raster(a.truth, tax); });
  tax = truth.taxonomy();
  std::string csv = metrics_csv_header(*tax) + "\n";
  for (std::size_t i = 0; i < a.preds.size(); ++i) {
    const auto m = stage(kExitData, [&] {
      return metrics_of(confusion(read_label_raster(a.preds[i], tax), truth));
    });
    const std::string name = a.stages.empty() ? fs::path(a.preds[i]).stem().string() : a.stages[i];
    csv += metrics_csv_row(a.iteration, name, m) + "\n";
    out << name << ": OA " << fmt6(m.oa) << " mIoU " << fmt6(m.miou) << "\n";
  }
  if (!a.out.empty()) stage(kExitData, [&] { write_text(a.out, csv); return 0; });
  else out << csv;
  return kExitOk;
}

void add_overrides(CLI::App* cmd, std::map<std::string, std::string>& o) {
  const std::pair<const char*, const char*> keys[] = {
      {"--k-target", "k_target"},           {"--compactness", "compactness"},
      {"--f-t", "f_t"},                     {"--max-iterations", "max_iterations"},
      {"--epsilon", "convergence_epsilon"}, {"--window-radius", "window_radius"},
      {"--hidden", "hidden"},               {"--learning-rate", "learning_rate"},
      {"--epochs", "epochs"},               {"--batch", "batch"},
      {"--seed", "seed"},                   {"--jobs", "jobs"},
  };
  for (const auto& [flag, key] : keys) {
    std::string k = key;
    cmd->add_option_function<std::string>(flag, [&o, k](const std::string& v) { o[k] = v; },
                                          std::string("override config key ") + key);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop segmentation refinement with spatial rules", "cbf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic benchmark");
  synth->add_option("--n", sa.n, "number of scenes")->capture_default_str();
  synth->add_option("--seed", sa.seed, "benchmark seed")->capture_default_str();
  synth->add_option("--size", sa.size, "scene side length in pixels")->capture_default_str();
  synth->add_option("--out", sa.out, "output directory")->required();

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Run the closed training loop");
  train_cmd->add_option("--config", ta.config, "configuration file")->required();
  train_cmd->add_option("--data", ta.data, "dataset directory")->required();
  train_cmd->add_option("--out", ta.out, "run directory")->required();
  train_cmd->add_option("--rules", ta.rules, "rule file");
  add_overrides(train_cmd, ta.overrides);

  InferArgs ia;
  auto* infer = app.add_subcommand("infer", "Label an image with a trained run");
  infer->add_option("--run", ia.run, "run directory")->required();
  infer->add_option("--image", ia.image, "image tensor")->required();
  infer->add_option("--out", ia.out, "output directory")->required();
  infer->add_option("--stage", ia.stage, "1 or 2 to write only that stage")->check(CLI::IsMember({1, 2}));

  RefineArgs ra;
  auto* refine = app.add_subcommand("refine", "Correct an external probability map");
  refine->add_option("--probs", ra.probs, "probability map tensor")->required();
  refine->add_option("--image", ra.image, "image tensor to segment (default: the probability map)");
  refine->add_option("--rules", ra.rules, "rule file");
  refine->add_option("--taxonomy", ra.taxonomy, "taxonomy file");
  refine->add_option("--config", ra.config, "configuration file");
  refine->add_option("--out", ra.out, "output directory")->required();
  add_overrides(refine, ra.overrides);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score label rasters against the truth");
  eval->add_option("--pred", ea.preds, "predicted raster (repeatable)")->required();
  eval->add_option("--truth", ea.truth, "truth raster")->required();
  eval->add_option("--stage", ea.stages, "row name per prediction");
  eval->add_option("--iteration", ea.iteration, "iteration column value");
  eval->add_option("--taxonomy", ea.taxonomy, "taxonomy file");
  eval->add_option("--out", ea.out, "CSV output path");

  auto* rules_cmd = app.add_subcommand("rules", "Print the built-in rule base");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  if (storage.empty()) storage.push_back("cbf");
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth->parsed()) return cmd_synth(sa, out);
    if (train_cmd->parsed()) return cmd_train(ta, out);
    if (infer->parsed()) return cmd_infer(ia, out);
    if (refine->parsed()) return cmd_refine(ra, out);
    if (eval->parsed()) return cmd_eval(ea, out);
    if (rules_cmd->parsed()) {
      out << builtin_rules_text(Taxonomy::ucm8());
      return kExitOk;
    }
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Divergence ? kExitDivergence : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace cbf
