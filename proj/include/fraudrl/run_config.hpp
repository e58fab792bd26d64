#pragma once

#include "fraudrl/agent.hpp"
#include "fraudrl/baseline.hpp"
#include "fraudrl/data.hpp"
#include "fraudrl/environment.hpp"
#include "fraudrl/rewards.hpp"

#include <cstdint>
#include <string>

namespace fraudrl {

// Which learner a run trains: the decision agent or the supervised net.
enum class ModelKind { Dqn, Nn };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

// Everything a run needs, resolvable from defaults + JSON config + CLI flags.
struct RunConfig {
  ModelKind model = ModelKind::Dqn;

  // Data source: a CSV path, or synthetic generation when the path is empty.
  std::string csv_path;
  SynthConfig synth;
  CsvSpec csv;
  double encoder_smoothing = 20.0;

  EnvConfig env;
  RewardConfig reward;
  AgentConfig agent;
  BaselineConfig baseline;

  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

// Applies a JSON document over the defaults. Unknown keys anywhere are an
// error (ConfigError), as are out-of-range values.
RunConfig run_config_from_json(const std::string& text);
RunConfig run_config_load(const std::string& path);

void run_config_validate(const RunConfig& config);

// Full round-trip dump of the effective configuration.
std::string resolved_config_json(const RunConfig& config);

}  // namespace fraudrl
