// Copyright 2026 The CFA Authors.
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

#include "cfa/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cfa/aggregation.hpp"
#include "cfa/errors.hpp"
#include "cfa/gradcheck.hpp"
#include "cfa/harness.hpp"
#include "cfa/synthetic.hpp"
#include "cfa/tensor_io.hpp"

namespace cfa::cli {
namespace {

namespace fs = std::filesystem;

constexpr double kGradcheckTolerance = 1e-4;

// Defaults of every key a subcommand accepts. Keys double as long flags.
Settings defaults_for(const std::string& command) {
  const TrainConfig train;
  const SyntheticSpec synth;
  const EvalOptions eval;
  auto num = [](auto v) {
    char buffer[64];
    const auto end = std::to_chars(buffer, buffer + sizeof buffer, v).ptr;
    return std::string(buffer, end);
  };
  const Settings episode = {
      {"way", num(eval.episode.way)},
      {"shot", num(eval.episode.shot)},
      {"queries", num(eval.episode.queries)},
      {"seed", "0"},
      {"out", ""},
  };
  Settings s = episode;
  if (command == "train") {
    s.insert({{"manifest", ""},
              {"N", num(train.subspaces)},
              {"K", num(train.prototypes)},
              {"alpha", num(train.alpha)},
              {"gamma", num(train.gamma)},
              {"lr", num(train.learning_rate)},
              {"iters", num(train.iterations)},
              {"batch", num(train.batch_size)},
              {"scale", num(train.scale)},
              {"init", "kmeans"},
              {"kmeans_samples", num(train.kmeans_samples)},
              {"val_every", num(train.validation_every)},
              {"val_episodes", num(train.validation_episodes)}});
  } else if (command == "eval") {
    s.insert({{"manifest", ""},
              {"params", ""},
              {"alpha", num(kDefaultAlpha)},
              {"split", "novel"},
              {"episodes", num(eval.episodes)}});
  } else if (command == "baseline-eval") {
    s.insert({{"manifest", ""},
              {"split", "novel"},
              {"episodes", num(eval.episodes)}});
  } else if (command == "gradcheck") {
    s = {{"seed", "0"}, {"instances", "4"}, {"out", ""}};
  } else if (command == "gen-synthetic") {
    s = {{"seed", num(synth.seed)},
         {"out", ""},
         {"classes", num(synth.classes)},
         {"samples", num(synth.samples_per_class)},
         {"channels", num(synth.channels)},
         {"groups", num(synth.groups)},
         {"height", num(synth.height)},
         {"width", num(synth.width)},
         {"vocab", num(synth.vocab)},
         {"noise", num(synth.noise)},
         {"clutter", num(synth.clutter)},
         {"shuffle", synth.location_shuffle ? "true" : "false"},
         {"base_classes", num(synth.base_classes)},
         {"validation_classes", num(synth.validation_classes)}};
  } else {
    throw ConfigError("unknown subcommand '" + command +
                      "' (expected train, eval, baseline-eval, gradcheck or "
                      "gen-synthetic)");
  }
  return s;
}

class Reader {
 public:
  explicit Reader(const Settings& s) : s_(s) {}

  const std::string& text(const std::string& key) const { return s_.at(key); }

  std::string required(const std::string& key) const {
    if (s_.at(key).empty()) throw ConfigError("missing required '" + key + "'");
    return s_.at(key);
  }

  std::size_t size(const std::string& key) const {
    return static_cast<std::size_t>(u64(key));
  }

  std::uint64_t u64(const std::string& key) const {
    const std::string& v = s_.at(key);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
      throw ConfigError("'" + key + "' must be a non-negative integer, got '" +
                        v + "'");
    }
    return out;
  }

  double real(const std::string& key) const {
    const std::string& v = s_.at(key);
    try {
      std::size_t used = 0;
      const double out = std::stod(v, &used);
      if (used == v.size() && std::isfinite(out)) return out;
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "' must be a finite number, got '" + v + "'");
  }

  bool flag(const std::string& key) const {
    const std::string& v = s_.at(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("'" + key + "' must be true or false, got '" + v + "'");
  }

 private:
  const Settings& s_;
};

EpisodeShape episode_shape(const Reader& r) {
  return {r.size("way"), r.size("shot"), r.size("queries")};
}

Split split_of(const Reader& r) {
  try {
    return parse_split(r.text("split"));
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

// Existence is checked up front so a bad path never leaves partial outputs.
fs::path existing_file(const Reader& r, const std::string& key) {
  const fs::path path = r.required(key);
  if (!fs::is_regular_file(path)) {
    throw ConfigError(key + " '" + path.string() + "' does not exist");
  }
  return path;
}

fs::path prepare_out(const Reader& r) {
  const fs::path out = r.required("out");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory " + out.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw DataError("write failure on " + path.string());
}

FeatureMap params_to_tensor(const CfaParams& params) {
  return FeatureMap({params.subspaces, params.prototypes_per_subspace,
                     params.subspace_dim},
                    params.prototypes);
}

CfaParams params_from_tensor(const FeatureMap& map, double alpha) {
  if (map.rank() != 3) {
    throw DataError("parameter tensor must have rank 3 (N x K x dim)");
  }
  CfaParams params = CfaParams::zeros(map.shape()[0], map.shape()[1],
                                      map.shape()[2], alpha);
  params.prototypes.assign(map.values().begin(), map.values().end());
  params.validate();
  return params;
}

void report(std::ostream& out, const std::string& label, const EvalReport& r) {
  out << label << ": " << std::fixed << std::setprecision(2) << r.mean_accuracy
      << " +- " << r.ci95 << " over " << r.episodes << " episodes\n";
  out.unsetf(std::ios::floatfield);
}

int run_train(const Settings& s, std::ostream& out) {
  const Reader r(s);
  const auto manifest_path = existing_file(r, "manifest");
  r.required("out");
  TrainConfig config;
  config.subspaces = r.size("N");
  config.prototypes = r.size("K");
  config.alpha = r.real("alpha");
  config.gamma = r.real("gamma");
  config.learning_rate = r.real("lr");
  config.iterations = r.size("iters");
  config.batch_size = r.size("batch");
  config.scale = r.real("scale");
  config.episode = episode_shape(r);
  config.seed = r.u64("seed");
  config.kmeans_samples = r.size("kmeans_samples");
  config.validation_every = r.size("val_every");
  config.validation_episodes = r.size("val_episodes");
  const std::string init = r.text("init");
  if (init == "kmeans") {
    config.init = PrototypeInit::kKMeans;
  } else if (init == "random") {
    config.init = PrototypeInit::kRandom;
  } else {
    throw ConfigError("'init' must be kmeans or random, got '" + init + "'");
  }
  config.validate();

  const auto manifest = load_manifest(manifest_path);
  const auto features = load_features(manifest);
  const std::size_t every = std::max<std::size_t>(1, config.iterations / 20);
  const auto result = train(manifest, features, config, [&](const CurvePoint& p) {
    if (p.iteration % every == 0 || !std::isnan(p.validation_accuracy)) {
      out << "iter " << p.iteration << " loss " << p.loss;
      if (!std::isnan(p.validation_accuracy)) {
        out << " val " << p.validation_accuracy;
      }
      out << '\n';
    }
  });

  const auto dir = prepare_out(r);
  write_tensor(params_to_tensor(result.params), dir / "params.cfaf");
  write_loss_curve(result.curve, dir / "loss_curve.csv");
  write_text(dir / "config.txt", format_settings(s));
  out << "saved " << (dir / "params.cfaf").string() << " (iteration "
      << result.best_iteration << ")\n";
  return kOk;
}

int run_eval(const Settings& s, std::ostream& out, bool baseline) {
  const Reader r(s);
  const auto manifest_path = existing_file(r, "manifest");
  std::optional<fs::path> params_path;
  if (!baseline) params_path = existing_file(r, "params");
  r.required("out");
  EvalOptions options;
  options.episode = episode_shape(r);
  options.episodes = r.size("episodes");
  options.seed = r.u64("seed");
  const Split split = split_of(r);
  std::optional<double> alpha;
  if (!baseline) alpha = r.real("alpha");

  const auto manifest = load_manifest(manifest_path);
  const auto features = load_features(manifest);
  EvalReport result;
  if (baseline) {
    result = baseline_eval(manifest, features, split, options);
  } else {
    const auto params = params_from_tensor(read_tensor(*params_path), *alpha);
    if (params.channels() != manifest.channels) {
      throw ConfigError("parameters expect " + std::to_string(params.channels()) +
                        " channels, manifest has " +
                        std::to_string(manifest.channels));
    }
    result = evaluate(manifest, features, split, params, options);
  }

  const auto dir = prepare_out(r);
  write_eval_report(result, dir / (baseline ? "baseline_report.csv"
                                            : "eval_report.csv"));
  write_text(dir / "config.txt", format_settings(s));
  report(out, baseline ? "baseline" : "cfa", result);
  return kOk;
}

int run_gradcheck_command(const Settings& s, std::ostream& out) {
  const Reader r(s);
  GradcheckOptions options;
  options.seed = r.u64("seed");
  options.instances = r.size("instances");
  if (options.instances == 0) throw ConfigError("'instances' must be >= 1");
  const auto result = run_gradcheck(options);
  out << "max relative gradient error " << std::scientific
      << std::setprecision(3) << result.max_relative_error << " over "
      << result.entries << " entries\n";
  out.unsetf(std::ios::floatfield);
  if (!r.text("out").empty()) {
    const auto dir = prepare_out(r);
    std::ostringstream text;
    text << "instances,entries,max_relative_error\n"
         << result.instances << ',' << result.entries << ','
         << std::setprecision(17) << result.max_relative_error << '\n';
    write_text(dir / "gradcheck.csv", text.str());
    write_text(dir / "config.txt", format_settings(s));
  }
  return result.max_relative_error < kGradcheckTolerance ? kOk : kNumericError;
}

int run_generate(const Settings& s, std::ostream& out) {
  const Reader r(s);
  SyntheticSpec spec;
  spec.seed = r.u64("seed");
  spec.classes = r.size("classes");
  spec.samples_per_class = r.size("samples");
  spec.channels = r.size("channels");
  spec.groups = r.size("groups");
  spec.height = r.size("height");
  spec.width = r.size("width");
  spec.vocab = r.size("vocab");
  spec.noise = r.real("noise");
  spec.clutter = r.real("clutter");
  spec.location_shuffle = r.flag("shuffle");
  spec.base_classes = r.size("base_classes");
  spec.validation_classes = r.size("validation_classes");
  r.required("out");
  spec.validate();

  const auto data = generate(spec);
  const auto dir = prepare_out(r);
  const auto manifest = write_dataset(data, dir);
  write_text(dir / "config.txt", format_settings(s));
  out << "wrote " << data.features.size() << " samples, manifest "
      << manifest.string() << '\n';
  return kOk;
}

Settings resolve(const std::string& command,
                 const std::vector<std::string>& rest) {
  Settings settings = defaults_for(command);
  std::vector<std::string> keys;
  for (const auto& [key, value] : settings) keys.push_back(key);

  CLI::App app("cfa " + command);
  std::string config_path;
  app.add_option("--config", config_path, "key=value settings file");
  std::map<std::string, std::string> flags;
  for (const auto& key : keys) app.add_option("--" + key, flags[key]);
  std::vector<std::string> reversed(rest.rbegin(), rest.rend());
  app.parse(reversed);

  if (!config_path.empty()) {
    for (const auto& [key, value] : read_settings(config_path, keys)) {
      settings[key] = value;
    }
  }
  for (const auto& key : keys) {
    if (app.count("--" + key) > 0) settings[key] = flags[key];
  }
  return settings;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  if (args.empty() || args.front() == "--help" || args.front() == "-h") {
    (args.empty() ? err : out)
        << "usage: cfa <train|eval|baseline-eval|gradcheck|gen-synthetic> "
           "[--config FILE] [--key value ...]\n";
    return args.empty() ? kConfigError : kOk;
  }
  const std::string command = args.front();
  try {
    Settings settings;
    try {
      settings = resolve(command, {args.begin() + 1, args.end()});
    } catch (const CLI::CallForHelp&) {
      out << "keys for " << command << ":\n";
      for (const auto& [key, value] : defaults_for(command)) {
        out << "  --" << key << " (default '" << value << "')\n";
      }
      return kOk;
    } catch (const CLI::ParseError& e) {
      throw ConfigError(e.what());
    }
    if (command == "train") return run_train(settings, out);
    if (command == "eval") return run_eval(settings, out, false);
    if (command == "baseline-eval") return run_eval(settings, out, true);
    if (command == "gradcheck") return run_gradcheck_command(settings, out);
    return run_generate(settings, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cfa::cli
