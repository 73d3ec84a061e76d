#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lens/param_space.hpp"
#include "lens/perception.hpp"
#include "lens/rng.hpp"
#include "lens/scene_sim.hpp"

namespace lens {

enum class Csa { kFull, kCsa1, kCsa2, kCsa3 };

std::string csa_to_string(Csa c);
Csa csa_from_string(const std::string& s);

// The candidate subset a selection episode will shoot. `indices` are
// canonical grid indices in ascending order and `chosen` mirrors them;
// total_cost_s is exact (Lens pays for every candidate, not just the winner).
struct CandidatePlan {
  Csa algorithm = Csa::kFull;
  int k = 0;
  std::vector<int> indices;
  std::vector<SensorParams> chosen;
  Rational total_cost_s{0};
};

CandidatePlan plan_full(const ParamGrid& grid, const CaptureCostModel& cost_model);
// Uniform k-subset of the grid.
CandidatePlan plan_csa1(const ParamGrid& grid, int k, const CaptureCostModel& cost_model, Rng& rng);
// Round-robin over partition_grid cells, uniform without replacement inside
// each cell.
CandidatePlan plan_csa2(const ParamGrid& grid, int k, const CaptureCostModel& cost_model, Rng& rng);
// Cheapest k options; ties at the cost boundary picked uniformly at random.
CandidatePlan plan_csa3(const ParamGrid& grid, int k, const CaptureCostModel& cost_model, Rng& rng);
CandidatePlan make_plan(Csa algorithm, const ParamGrid& grid, int k,
                        const CaptureCostModel& cost_model, Rng& rng);

// Stream roots shared by the live benchmark and replay so both draw the same
// plans and the simulator's captures can be reproduced row by row.
std::uint64_t plan_seed(std::uint64_t master_seed, const std::string& scene_id,
                        const std::string& light_id, Csa algorithm, int k);
std::uint64_t capture_seed_base(std::uint64_t master_seed, const std::string& scene_id,
                                const std::string& light_id);

using RenderFn = std::function<CapturedImage(const Scene&, const LightCondition&,
                                             const SensorParams&, std::uint64_t)>;
using ScoreFn = std::function<QualityScore(const ClassifierModel&, const FeatureVector&)>;

struct SelectionResult {
  std::string scene_id;
  std::string light_id;
  std::string policy_id;
  SensorParams chosen_param;
  int chosen_index = 0;
  QualityScore quality;
  int predicted_class = 0;
  bool correct = false;
  int candidates_evaluated = 0;
  Rational capture_cost_s{0};
};

// Shoots every candidate in the plan (noise seed = combine(capture_seed_base,
// canonical index)), scores each capture, and keeps the argmax; score ties go
// to the lower canonical index because the plan is canonically ordered.
SelectionResult lens_select(const Scene& scene, const LightCondition& light,
                            const CandidatePlan& plan, const RenderFn& camera_render,
                            const ScoreFn& scorer, const ClassifierModel& model,
                            std::uint64_t capture_seed_base);

// The paper-style Random baseline: the exact mean correctness over all
// options, not a sampled single pick.
double policy_random(const std::vector<bool>& per_option_correct);

struct OracleSChoice {
  int param_index = 0;
  bool correct = false;
};

// First canonically ordered option that classifies correctly, if any.
OracleSChoice oracle_s(const std::vector<bool>& per_option_correct);

// Single fixed option maximizing mean correctness pooled over every model's
// (scene x option) tensor; ties prefer lower capture cost, then canonical
// order. Rejects tensors whose option axis disagrees with the grid.
int oracle_f(const std::vector<std::vector<std::vector<bool>>>& per_model_scene_option,
             const ParamGrid& grid, const CaptureCostModel& cost_model);

enum class AeMode { kTop1, kBest5 };

std::string ae_mode_to_string(AeMode m);
AeMode ae_mode_from_string(const std::string& s);

// Auto-exposure baseline: shoots the 5 AE-ranked options and pays for all of
// them. kTop1 predicts from the top-1 shot; kBest5 counts the episode correct
// if any of the 5 shots classifies correctly.
SelectionResult policy_ae(const Scene& scene, const LightCondition& light, const ParamGrid& grid,
                          const ExposureConstants& constants, const RenderFn& camera_render,
                          const ScoreFn& scorer, const ClassifierModel& model, AeMode mode,
                          std::uint64_t capture_seed_base, const CaptureCostModel& cost_model);

}  // namespace lens
