#include "fraudrl/errors.hpp"
#include "fraudrl/pipeline.hpp"
#include "fraudrl/run_config.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

namespace {

using fraudrl::ModelKind;
using fraudrl::RewardKind;
using fraudrl::RunConfig;

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const fraudrl::ConfigError*>(&e)) return "config";
  if (dynamic_cast<const fraudrl::ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const fraudrl::InputError*>(&e)) return "input";
  if (dynamic_cast<const fraudrl::SequenceError*>(&e)) return "sequence";
  if (dynamic_cast<const fraudrl::IngestError*>(&e)) return "ingest";
  if (dynamic_cast<const fraudrl::CheckpointError*>(&e)) return "checkpoint";
  return "internal";
}

// Common per-subcommand options; count() on the returned pointers tells
// whether a flag was actually passed.
struct CommonOpts {
  CLI::Option* config = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* out = nullptr;
};

RunConfig make_config(const std::string& config_path, const CommonOpts& opts,
                      std::uint64_t seed, const std::string& out) {
  RunConfig cfg =
      config_path.empty() ? RunConfig{} : fraudrl::run_config_load(config_path);
  if (opts.seed != nullptr && opts.seed->count() > 0) cfg.seed = seed;
  if (opts.out != nullptr && opts.out->count() > 0) cfg.out_dir = out;
  fraudrl::run_config_validate(cfg);
  return cfg;
}

std::vector<double> parse_betas(const std::string& text) {
  std::vector<double> betas;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find(',', begin);
    if (end == std::string::npos) end = text.size();
    std::size_t lo = begin, hi = end;
    while (lo < hi && text[lo] == ' ') ++lo;
    while (hi > lo && text[hi - 1] == ' ') --hi;
    if (lo == hi) throw fraudrl::ConfigError("sweep: empty beta in '" + text + "'");
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data() + lo, text.data() + hi, value);
    if (ec != std::errc{} || ptr != text.data() + hi) {
      throw fraudrl::ConfigError("sweep: cannot parse beta '" +
                                 text.substr(lo, hi - lo) + "'");
    }
    betas.push_back(value);
    begin = end + 1;
    if (end == text.size()) break;
  }
  return betas;
}

// A single base config fans out into the four standard comparison rows; an
// explicit list of two or more is taken as-is.
std::vector<RunConfig> expand_compare(const std::vector<RunConfig>& bases) {
  if (bases.size() > 1) return bases;
  const RunConfig base = bases.empty() ? RunConfig{} : bases.front();
  std::vector<RunConfig> out;
  for (RewardKind kind :
       {RewardKind::Combined, RewardKind::RPrime, RewardKind::RDouble}) {
    RunConfig cfg = base;
    cfg.model = ModelKind::Dqn;
    cfg.reward.kind = kind;
    out.push_back(cfg);
  }
  RunConfig nn = base;
  nn.model = ModelKind::Nn;
  out.push_back(nn);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transaction-stream fraud decisions: synthesize, train, evaluate"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> compare_config_paths;
  std::uint64_t seed = 0;
  std::string out;
  std::string synth_out;
  std::string checkpoint_path;
  std::string betas_text = "0.5,1,3";

  CLI::App* synth = app.add_subcommand("synth", "write a synthetic transaction CSV");
  CommonOpts synth_opts;
  synth_opts.config = synth->add_option("--config", config_path, "JSON run config");
  synth_opts.seed = synth->add_option("--seed", seed, "RNG seed override");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  CLI::App* train =
      app.add_subcommand("train", "train the configured model and evaluate on test");
  CommonOpts train_opts;
  train_opts.config = train->add_option("--config", config_path, "JSON run config");
  train_opts.seed = train->add_option("--seed", seed, "RNG seed override");
  train_opts.out = train->add_option("--out", out, "output directory override");

  CLI::App* eval =
      app.add_subcommand("eval", "evaluate a saved checkpoint on the test split");
  CommonOpts eval_opts;
  eval_opts.config = eval->add_option("--config", config_path, "JSON run config");
  eval_opts.seed = eval->add_option("--seed", seed, "RNG seed override");
  eval_opts.out = eval->add_option("--out", out, "output directory override");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint.json to evaluate")
      ->required();

  CLI::App* compare = app.add_subcommand(
      "compare", "train agent variants and the supervised net side by side");
  compare->add_option("--config", compare_config_paths,
                      "JSON run config (repeat for custom rows; one config fans "
                      "out into DQNR, DQNR', DQNR'' and NN)");
  CommonOpts compare_opts;
  compare_opts.seed = compare->add_option("--seed", seed, "RNG seed override");
  compare_opts.out = compare->add_option("--out", out, "comparison output directory");

  CLI::App* sweep =
      app.add_subcommand("sweep-beta", "re-train across balance-term beta values");
  CommonOpts sweep_opts;
  sweep_opts.config = sweep->add_option("--config", config_path, "JSON run config");
  sweep_opts.seed = sweep->add_option("--seed", seed, "RNG seed override");
  sweep_opts.out = sweep->add_option("--out", out, "output directory override");
  sweep->add_option("--betas", betas_text, "comma-separated beta list");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(synth)) {
      const RunConfig cfg = make_config(config_path, synth_opts, seed, "");
      fraudrl::run_synth(cfg, synth_out);
      std::cout << "wrote " << synth_out << "\n";
    } else if (app.got_subcommand(train)) {
      const RunConfig cfg = make_config(config_path, train_opts, seed, out);
      fraudrl::run_train(cfg, std::cout);
      std::cout << "artifacts in " << cfg.out_dir << "\n";
    } else if (app.got_subcommand(eval)) {
      const RunConfig cfg = make_config(config_path, eval_opts, seed, out);
      fraudrl::run_eval(cfg, checkpoint_path, std::cout);
      std::cout << "artifacts in " << cfg.out_dir << "\n";
    } else if (app.got_subcommand(compare)) {
      std::vector<RunConfig> bases;
      for (const std::string& path : compare_config_paths) {
        bases.push_back(make_config(path, compare_opts, seed, out));
      }
      if (bases.empty()) bases.push_back(make_config("", compare_opts, seed, out));
      const std::vector<RunConfig> runs = expand_compare(bases);
      const std::string compare_dir =
          (compare_opts.out->count() > 0) ? out : bases.front().out_dir;
      fraudrl::run_compare(runs, compare_dir, std::cout);
      std::cout << "artifacts in " << compare_dir << "\n";
    } else if (app.got_subcommand(sweep)) {
      const RunConfig cfg = make_config(config_path, sweep_opts, seed, out);
      fraudrl::run_sweep_beta(cfg, parse_betas(betas_text), std::cout);
      std::cout << "artifacts in " << cfg.out_dir << "\n";
    }
  } catch (const std::exception& e) {
    const nlohmann::json err = {{"error", error_kind(e)}, {"message", e.what()}};
    std::cerr << err.dump() << std::endl;
    return 1;
  }
  return 0;
}
