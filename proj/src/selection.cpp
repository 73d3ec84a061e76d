#include "lens/selection.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "lens/errors.hpp"

namespace lens {

namespace {

CandidatePlan finalize_plan(Csa algorithm, std::vector<int> indices, const ParamGrid& grid,
                            const CaptureCostModel& cost_model) {
  std::sort(indices.begin(), indices.end());
  CandidatePlan plan;
  plan.algorithm = algorithm;
  plan.k = static_cast<int>(indices.size());
  plan.indices = std::move(indices);
  plan.chosen.reserve(plan.indices.size());
  for (int i : plan.indices) plan.chosen.push_back(grid.options[static_cast<std::size_t>(i)]);
  plan.total_cost_s = total_cost(plan.chosen, cost_model);
  return plan;
}

void check_k(const ParamGrid& grid, int k) {
  if (k < 1 || k > static_cast<int>(grid.size())) {
    throw std::invalid_argument("candidate plan: k out of range");
  }
}

}  // namespace

std::string csa_to_string(Csa c) {
  switch (c) {
    case Csa::kFull: return "full";
    case Csa::kCsa1: return "csa1";
    case Csa::kCsa2: return "csa2";
    case Csa::kCsa3: return "csa3";
  }
  throw InternalError("unknown csa id");
}

Csa csa_from_string(const std::string& s) {
  for (Csa c : {Csa::kFull, Csa::kCsa1, Csa::kCsa2, Csa::kCsa3})
    if (csa_to_string(c) == s) return c;
  throw ConfigError("unknown csa: " + s);
}

CandidatePlan plan_full(const ParamGrid& grid, const CaptureCostModel& cost_model) {
  std::vector<int> indices(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) indices[static_cast<std::size_t>(i)] = i;
  return finalize_plan(Csa::kFull, std::move(indices), grid, cost_model);
}

CandidatePlan plan_csa1(const ParamGrid& grid, int k, const CaptureCostModel& cost_model,
                        Rng& rng) {
  check_k(grid, k);
  std::vector<int> indices = sample_without_replacement(rng, grid.size(), k);
  return finalize_plan(Csa::kCsa1, std::move(indices), grid, cost_model);
}

CandidatePlan plan_csa2(const ParamGrid& grid, int k, const CaptureCostModel& cost_model,
                        Rng& rng) {
  check_k(grid, k);
  std::vector<std::vector<int>> cells;
  for (const std::vector<SensorParams>& cell : partition_grid(grid, k)) {
    std::vector<int> members;
    members.reserve(cell.size());
    for (const SensorParams& p : cell) members.push_back(grid.index_of(p));
    cells.push_back(std::move(members));
  }
  std::vector<int> indices;
  indices.reserve(static_cast<std::size_t>(k));
  while (static_cast<int>(indices.size()) < k) {
    for (std::vector<int>& cell : cells) {
      if (static_cast<int>(indices.size()) == k) break;
      if (cell.empty()) continue;
      const std::size_t pick = static_cast<std::size_t>(
          rng.next_below(static_cast<std::uint64_t>(cell.size())));
      indices.push_back(cell[pick]);
      cell.erase(cell.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  return finalize_plan(Csa::kCsa2, std::move(indices), grid, cost_model);
}

CandidatePlan plan_csa3(const ParamGrid& grid, int k, const CaptureCostModel& cost_model,
                        Rng& rng) {
  check_k(grid, k);
  // Cost tiers in ascending exact order; only the boundary tier is sampled.
  std::map<Rational, std::vector<int>> tiers;
  for (int i = 0; i < grid.size(); ++i) {
    tiers[capture_cost(grid.options[static_cast<std::size_t>(i)], cost_model)].push_back(i);
  }
  std::vector<int> indices;
  indices.reserve(static_cast<std::size_t>(k));
  for (auto& [cost, members] : tiers) {
    const int remaining = k - static_cast<int>(indices.size());
    if (remaining <= 0) break;
    if (static_cast<int>(members.size()) <= remaining) {
      indices.insert(indices.end(), members.begin(), members.end());
    } else {
      for (int pos : sample_without_replacement(rng, static_cast<int>(members.size()), remaining)) {
        indices.push_back(members[static_cast<std::size_t>(pos)]);
      }
    }
  }
  return finalize_plan(Csa::kCsa3, std::move(indices), grid, cost_model);
}

CandidatePlan make_plan(Csa algorithm, const ParamGrid& grid, int k,
                        const CaptureCostModel& cost_model, Rng& rng) {
  switch (algorithm) {
    case Csa::kFull: return plan_full(grid, cost_model);
    case Csa::kCsa1: return plan_csa1(grid, k, cost_model, rng);
    case Csa::kCsa2: return plan_csa2(grid, k, cost_model, rng);
    case Csa::kCsa3: return plan_csa3(grid, k, cost_model, rng);
  }
  throw InternalError("unknown csa id");
}

std::uint64_t plan_seed(std::uint64_t master_seed, const std::string& scene_id,
                        const std::string& light_id, Csa algorithm, int k) {
  return derive_seed(master_seed,
                     {tag(SeedPurpose::kPlan), fnv1a64(scene_id), fnv1a64(light_id),
                      fnv1a64(csa_to_string(algorithm)), static_cast<std::uint64_t>(k)});
}

std::uint64_t capture_seed_base(std::uint64_t master_seed, const std::string& scene_id,
                                const std::string& light_id) {
  return derive_seed(master_seed,
                     {tag(SeedPurpose::kCapture), fnv1a64(scene_id), fnv1a64(light_id)});
}

SelectionResult lens_select(const Scene& scene, const LightCondition& light,
                            const CandidatePlan& plan, const RenderFn& camera_render,
                            const ScoreFn& scorer, const ClassifierModel& model,
                            std::uint64_t capture_seed_base) {
  if (plan.indices.empty()) throw std::invalid_argument("lens_select: empty plan");
  int best_pos = -1;
  QualityScore best_score;
  FeatureVector best_features;
  for (std::size_t pos = 0; pos < plan.indices.size(); ++pos) {
    const std::uint64_t noise_seed =
        combine_seed(capture_seed_base, static_cast<std::uint64_t>(plan.indices[pos]));
    const CapturedImage capture =
        camera_render(scene, light, plan.chosen[pos], noise_seed);
    const FeatureVector features = extract_features(capture);
    const QualityScore score = scorer(model, features);
    if (best_pos < 0 || score.value > best_score.value) {
      best_pos = static_cast<int>(pos);
      best_score = score;
      best_features = features;
    }
  }
  SelectionResult result;
  result.scene_id = scene.scene_id;
  result.light_id = light.id;
  result.policy_id = "lens";
  result.chosen_index = plan.indices[static_cast<std::size_t>(best_pos)];
  result.chosen_param = plan.chosen[static_cast<std::size_t>(best_pos)];
  result.quality = best_score;
  result.predicted_class = model.predict(best_features);
  result.correct = result.predicted_class == scene.class_id;
  result.candidates_evaluated = plan.k;
  result.capture_cost_s = plan.total_cost_s;
  return result;
}

double policy_random(const std::vector<bool>& per_option_correct) {
  if (per_option_correct.empty()) throw std::invalid_argument("policy_random: empty options");
  std::size_t hits = 0;
  for (bool c : per_option_correct) hits += c ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(per_option_correct.size());
}

OracleSChoice oracle_s(const std::vector<bool>& per_option_correct) {
  if (per_option_correct.empty()) throw std::invalid_argument("oracle_s: empty options");
  for (std::size_t i = 0; i < per_option_correct.size(); ++i) {
    if (per_option_correct[i]) return {static_cast<int>(i), true};
  }
  return {0, false};
}

int oracle_f(const std::vector<std::vector<std::vector<bool>>>& per_model_scene_option,
             const ParamGrid& grid, const CaptureCostModel& cost_model) {
  const auto n = static_cast<std::size_t>(grid.size());
  std::vector<std::int64_t> hits(n, 0);
  std::int64_t rows = 0;
  for (const auto& model_tensor : per_model_scene_option) {
    for (const auto& scene_row : model_tensor) {
      if (scene_row.size() != n) throw std::invalid_argument("oracle_f: option axis mismatch");
      for (std::size_t p = 0; p < n; ++p) hits[p] += scene_row[p] ? 1 : 0;
      ++rows;
    }
  }
  if (rows == 0) throw std::invalid_argument("oracle_f: no scenes");
  int best = 0;
  for (std::size_t p = 1; p < n; ++p) {
    if (hits[p] > hits[best]) {
      best = static_cast<int>(p);
    } else if (hits[p] == hits[best]) {
      const Rational cp = capture_cost(grid.options[p], cost_model);
      const Rational cb = capture_cost(grid.options[static_cast<std::size_t>(best)], cost_model);
      if (cp < cb) best = static_cast<int>(p);
    }
  }
  return best;
}

std::string ae_mode_to_string(AeMode m) {
  return m == AeMode::kTop1 ? "top1" : "best5";
}

AeMode ae_mode_from_string(const std::string& s) {
  if (s == "top1") return AeMode::kTop1;
  if (s == "best5") return AeMode::kBest5;
  throw ConfigError("unknown ae mode: " + s);
}

SelectionResult policy_ae(const Scene& scene, const LightCondition& light, const ParamGrid& grid,
                          const ExposureConstants& constants, const RenderFn& camera_render,
                          const ScoreFn& scorer, const ClassifierModel& model, AeMode mode,
                          std::uint64_t capture_seed_base, const CaptureCostModel& cost_model) {
  const std::vector<SensorParams> shots = auto_expose(scene, light, grid, constants);
  SelectionResult result;
  result.scene_id = scene.scene_id;
  result.light_id = light.id;
  result.policy_id = "ae";
  result.candidates_evaluated = static_cast<int>(shots.size());
  result.capture_cost_s = total_cost(shots, cost_model);

  bool reported = false;
  for (std::size_t rank = 0; rank < shots.size(); ++rank) {
    const int index = grid.index_of(shots[rank]);
    const std::uint64_t noise_seed =
        combine_seed(capture_seed_base, static_cast<std::uint64_t>(index));
    const CapturedImage capture = camera_render(scene, light, shots[rank], noise_seed);
    const FeatureVector features = extract_features(capture);
    const int predicted = model.predict(features);
    const bool correct = predicted == scene.class_id;
    if (rank == 0) {
      // Top-1 shot is the default report; best-of-5 may overwrite it below.
      result.chosen_index = index;
      result.chosen_param = shots[rank];
      result.quality = scorer(model, features);
      result.predicted_class = predicted;
      result.correct = correct;
      reported = mode == AeMode::kTop1 || correct;
    } else if (mode == AeMode::kBest5 && !reported && correct) {
      result.chosen_index = index;
      result.chosen_param = shots[rank];
      result.quality = scorer(model, features);
      result.predicted_class = predicted;
      result.correct = true;
      reported = true;
    }
    if (reported && mode == AeMode::kTop1) break;
  }
  return result;
}

}  // namespace lens
