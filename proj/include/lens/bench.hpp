#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lens/config.hpp"
#include "lens/replay.hpp"

namespace lens {

// All per-option products for one (scene, light) episode, computed on the
// shared captures every policy consumes.
struct EpisodeScores {
  std::string scene_id;
  std::string light_id;
  int class_id = 0;
  std::vector<std::vector<double>> scores;  // [scorer in request order][option]
  std::vector<int> predicted;               // [option]
  std::vector<bool> correct;                // [option]
  std::vector<int> ae_indices;              // AE shots in rank order
};

struct SeedEvaluation {
  std::uint64_t seed = 0;
  ClassifierModel model;
  std::vector<EpisodeScores> episodes;  // scene-major, light-minor
};

// Generates scenes, trains the target model, renders one capture per
// (episode, option) and scores it with every requested scorer. Fans episodes
// out over config.jobs threads; results do not depend on the thread count.
SeedEvaluation evaluate_seed(const BenchConfig& config, std::uint64_t seed,
                             const std::vector<ScorerId>& scorers);

struct BenchReport {
  std::uint64_t config_fingerprint = 0;
  std::vector<std::uint64_t> seeds;
  std::string ae_mode;
  std::vector<PolicyStats> policies;
  std::vector<PolicyStats> ablation;    // lens rows, one per scorer (cmd_ablate)
  std::vector<int> oracle_f_params;     // per seed

  const PolicyStats* find(const std::string& policy_id) const;
  nlohmann::ordered_json to_json(const BenchConfig& config) const;
};

// Full pipeline over config.seeds; writes report.json, results.jsonl and one
// scores_seed<seed>.csv replay matrix per seed into config.out.
BenchReport cmd_run(const BenchConfig& config);

// Writes the scene set for seeds[0] under <out>/scenes.
void cmd_gen(const BenchConfig& config);

// Trains on seeds[0] and writes <out>/model.json.
void cmd_train(const BenchConfig& config);

struct SweepRow {
  Csa csa = Csa::kFull;
  int k = 0;
  Rational mean_cost_s{0};
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
};

// Lens accuracy/cost per (csa, k) over config.seeds; writes <out>/sweep.csv.
std::vector<SweepRow> cmd_sweep(const BenchConfig& config, const std::vector<Csa>& csas,
                                const std::vector<int>& ks);

// 3 x 9 score grid (rows: aperture; columns: iso x shutter) for one scene
// under one light with the configured scorer; writes
// <out>/heatmap_<scene>_<light>_<scorer>.csv and returns the 27 scores in
// canonical order.
std::vector<double> cmd_heatmap(const BenchConfig& config, const std::string& scene_id,
                                const std::string& light_id);

// Lens-full with every scorer plus the baselines; writes <out>/ablation.csv.
BenchReport cmd_ablate(const BenchConfig& config);

// Scene set serialization: JSON index + one raw little-endian float32 pattern
// file per scene.
void save_scene_set(const std::vector<Scene>& scenes, const std::string& dir);
std::vector<Scene> load_scene_set(const std::string& dir);

// The replay-format matrix for one evaluated seed (27 grid rows plus 5 AE
// rows per episode).
void write_scores_csv(const std::string& path, const BenchConfig& config,
                      const SeedEvaluation& evaluation, int scorer_index);

}  // namespace lens
