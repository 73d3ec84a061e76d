#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "lens/param_space.hpp"
#include "lens/selection.hpp"

namespace lens {

inline constexpr char kScoreCsvHeader[] =
    "scene_id,light_id,param_id,iso,shutter,aperture,score,correct,cost_s";
inline constexpr int kAeParamBase = 27;  // AE companion rows use ids 27..31

struct ScoreRow {
  std::string scene_id;
  std::string light_id;
  int param_id = 0;
  int iso = 0;
  Rational shutter_s{0};
  double aperture_f = 0.0;
  double score = 0.0;
  bool correct = false;
  double cost_s = 0.0;
};

// One (scene_id, light_id) episode: exactly 27 grid rows indexed by param_id,
// plus optional AE rows in rank order (param_id 27 = the AE top-1 shot).
struct ScoreGroup {
  std::string scene_id;
  std::string light_id;
  std::vector<ScoreRow> grid_rows;
  std::vector<ScoreRow> ae_rows;
};

struct ScoreMatrix {
  std::vector<ScoreGroup> groups;  // first-appearance order

  bool has_ae() const;
};

// Strict CSV reader for the interchange format; throws DataError with the
// offending line number (parse) or group (structure).
ScoreMatrix load_scores(const std::string& path);

struct PolicyStats {
  std::string policy_id;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;  // over seeds; 0 for deterministic policies
  double mean_cost_s = 0.0;   // per episode
  std::map<std::string, double> per_light_accuracy;
};

struct ReplayReport {
  int num_groups = 0;
  Csa csa = Csa::kFull;
  int k = 0;
  std::vector<std::uint64_t> seeds;
  std::string ae_mode;
  int oracle_f_param = -1;
  std::vector<PolicyStats> policies;  // lens, random, oracle_s, oracle_f[, ae]

  const PolicyStats* find(const std::string& policy_id) const;
  nlohmann::ordered_json to_json() const;
};

struct ReplayOptions {
  Csa csa = Csa::kFull;
  int k = 27;
  std::vector<std::uint64_t> seeds = {1};
  AeMode ae_mode = AeMode::kTop1;
  bool require_ae = false;  // error out when AE rows are absent
};

// Runs Lens (argmax over score, CSA-subsampled across seeds), Random (mean
// over options), per-episode Oracle-S, pooled Oracle-F, and AE when rows are
// present. Deterministic given (matrix, options).
ReplayReport replay_evaluate(const ScoreMatrix& matrix, const ReplayOptions& options);

}  // namespace lens
