#include "lens/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "lens/errors.hpp"
#include "lens/format.hpp"
#include "lens/rng.hpp"

namespace lens {

namespace {

namespace fs = std::filesystem;

void parallel_for(int jobs, std::size_t count, const std::function<void(std::size_t)>& body) {
  if (jobs < 1) throw InternalError("parallel_for: jobs < 1");
  const int workers =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Fractional tally: Random contributes per-episode expectations, the other
// policies contribute 0/1 outcomes.
struct Tally {
  double hits = 0.0;
  int total = 0;
  std::map<std::string, std::pair<double, int>> per_light;

  void add(const std::string& light_id, double value) {
    hits += value;
    ++total;
    auto& [h, t] = per_light[light_id];
    h += value;
    ++t;
  }
  double accuracy() const { return total == 0 ? 0.0 : hits / static_cast<double>(total); }
  std::map<std::string, double> light_accuracy() const {
    std::map<std::string, double> out;
    for (const auto& [id, ht] : per_light) out[id] = ht.first / static_cast<double>(ht.second);
    return out;
  }
};

// One policy's end-to-end product for a single seed.
struct EpisodeOutcome {
  int param_index = -1;
  double score = 0.0;
  int predicted = -1;
  bool correct = false;
  int candidates = 0;
  Rational cost{0};
};

struct SeedPolicyStats {
  std::string policy_id;
  double accuracy = 0.0;
  std::map<std::string, double> per_light;
  Rational cost_sum{0};                  // over episodes
  std::vector<EpisodeOutcome> outcomes;  // empty for random
};

EpisodeOutcome lens_outcome(const EpisodeScores& episode, int scorer_index,
                            const std::vector<int>& plan_indices, const Rational& plan_cost) {
  const std::vector<double>& scores = episode.scores[static_cast<std::size_t>(scorer_index)];
  int best = plan_indices.front();
  for (const int idx : plan_indices) {
    if (scores[static_cast<std::size_t>(idx)] > scores[static_cast<std::size_t>(best)]) best = idx;
  }
  EpisodeOutcome out;
  out.param_index = best;
  out.score = scores[static_cast<std::size_t>(best)];
  out.predicted = episode.predicted[static_cast<std::size_t>(best)];
  out.correct = episode.correct[static_cast<std::size_t>(best)];
  out.candidates = static_cast<int>(plan_indices.size());
  out.cost = plan_cost;
  return out;
}

std::vector<Rational> option_costs(const ParamGrid& grid, const CaptureCostModel& cost_model) {
  std::vector<Rational> costs;
  costs.reserve(grid.options.size());
  for (const SensorParams& p : grid.options) costs.push_back(capture_cost(p, cost_model));
  return costs;
}

int pick_oracle_f(const std::vector<EpisodeScores>& episodes, const std::vector<Rational>& costs) {
  const std::size_t n = costs.size();
  std::vector<std::int64_t> hits(n, 0);
  for (const EpisodeScores& e : episodes) {
    for (std::size_t p = 0; p < n; ++p) hits[p] += e.correct[p] ? 1 : 0;
  }
  int best = 0;
  for (std::size_t p = 1; p < n; ++p) {
    if (hits[p] > hits[static_cast<std::size_t>(best)] ||
        (hits[p] == hits[static_cast<std::size_t>(best)] &&
         costs[p] < costs[static_cast<std::size_t>(best)])) {
      best = static_cast<int>(p);
    }
  }
  return best;
}

// Runs every configured policy over one evaluated seed; returned in
// config.policies order. `oracle_f_param` receives the seed's pooled pick.
std::vector<SeedPolicyStats> evaluate_seed_policies(const BenchConfig& config,
                                                    const SeedEvaluation& ev, int scorer_index,
                                                    int* oracle_f_param) {
  const ParamGrid grid = config.grid();
  const CaptureCostModel cost_model = config.cost_model();
  const std::vector<Rational> costs = option_costs(grid, cost_model);
  Rational full_cost{0};
  for (const Rational& c : costs) full_cost += c;
  const int n = grid.size();

  const int fixed_param = pick_oracle_f(ev.episodes, costs);
  if (oracle_f_param != nullptr) *oracle_f_param = fixed_param;

  std::vector<SeedPolicyStats> out;
  for (const std::string& policy : config.policies) {
    SeedPolicyStats stats;
    stats.policy_id = policy;
    Tally tally;
    if (policy == "lens") {
      std::vector<int> full_indices(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) full_indices[static_cast<std::size_t>(i)] = i;
      for (const EpisodeScores& e : ev.episodes) {
        EpisodeOutcome o;
        if (config.csa == Csa::kFull) {
          o = lens_outcome(e, scorer_index, full_indices, full_cost);
        } else {
          Rng rng(plan_seed(ev.seed, e.scene_id, e.light_id, config.csa, config.k));
          const CandidatePlan plan = make_plan(config.csa, grid, config.k, cost_model, rng);
          o = lens_outcome(e, scorer_index, plan.indices, plan.total_cost_s);
        }
        tally.add(e.light_id, o.correct ? 1.0 : 0.0);
        stats.cost_sum += o.cost;
        stats.outcomes.push_back(o);
      }
    } else if (policy == "random") {
      for (const EpisodeScores& e : ev.episodes) {
        tally.add(e.light_id, policy_random(std::vector<bool>(e.correct.begin(), e.correct.end())));
        stats.cost_sum += full_cost / n;
      }
    } else if (policy == "oracle_s") {
      for (const EpisodeScores& e : ev.episodes) {
        const OracleSChoice choice =
            oracle_s(std::vector<bool>(e.correct.begin(), e.correct.end()));
        EpisodeOutcome o;
        o.param_index = choice.param_index;
        o.score = e.scores[static_cast<std::size_t>(scorer_index)]
                          [static_cast<std::size_t>(choice.param_index)];
        o.predicted = e.predicted[static_cast<std::size_t>(choice.param_index)];
        o.correct = choice.correct;
        o.candidates = n;
        o.cost = costs[static_cast<std::size_t>(choice.param_index)];
        tally.add(e.light_id, o.correct ? 1.0 : 0.0);
        stats.cost_sum += o.cost;
        stats.outcomes.push_back(o);
      }
    } else if (policy == "oracle_f") {
      for (const EpisodeScores& e : ev.episodes) {
        EpisodeOutcome o;
        o.param_index = fixed_param;
        o.score =
            e.scores[static_cast<std::size_t>(scorer_index)][static_cast<std::size_t>(fixed_param)];
        o.predicted = e.predicted[static_cast<std::size_t>(fixed_param)];
        o.correct = e.correct[static_cast<std::size_t>(fixed_param)];
        o.candidates = 1;
        o.cost = costs[static_cast<std::size_t>(fixed_param)];
        tally.add(e.light_id, o.correct ? 1.0 : 0.0);
        stats.cost_sum += o.cost;
        stats.outcomes.push_back(o);
      }
    } else if (policy == "ae") {
      for (const EpisodeScores& e : ev.episodes) {
        Rational ae_cost{0};
        for (int idx : e.ae_indices) ae_cost += costs[static_cast<std::size_t>(idx)];
        // Report the top-1 shot unless best-of-5 finds a correct one.
        int report_idx = e.ae_indices.front();
        bool correct = e.correct[static_cast<std::size_t>(report_idx)];
        if (config.ae_mode == AeMode::kBest5 && !correct) {
          for (int idx : e.ae_indices) {
            if (e.correct[static_cast<std::size_t>(idx)]) {
              report_idx = idx;
              correct = true;
              break;
            }
          }
        }
        EpisodeOutcome o;
        o.param_index = report_idx;
        o.score =
            e.scores[static_cast<std::size_t>(scorer_index)][static_cast<std::size_t>(report_idx)];
        o.predicted = e.predicted[static_cast<std::size_t>(report_idx)];
        o.correct = correct;
        o.candidates = static_cast<int>(e.ae_indices.size());
        o.cost = ae_cost;
        tally.add(e.light_id, correct ? 1.0 : 0.0);
        stats.cost_sum += o.cost;
        stats.outcomes.push_back(o);
      }
    } else {
      throw ConfigError("unknown policy: " + policy);
    }
    stats.accuracy = tally.accuracy();
    stats.per_light = tally.light_accuracy();
    out.push_back(std::move(stats));
  }
  return out;
}

PolicyStats aggregate_policy(const std::string& policy_id,
                             const std::vector<SeedPolicyStats>& per_seed, int episodes_per_seed) {
  PolicyStats stats;
  stats.policy_id = policy_id;
  std::vector<double> accuracies;
  Rational cost_sum{0};
  std::map<std::string, std::pair<double, int>> light_sums;
  for (const SeedPolicyStats& s : per_seed) {
    accuracies.push_back(s.accuracy);
    cost_sum += s.cost_sum;
    for (const auto& [id, acc] : s.per_light) {
      auto& [sum, count] = light_sums[id];
      sum += acc;
      ++count;
    }
  }
  stats.accuracy_mean = mean(accuracies);
  stats.accuracy_std = population_std(accuracies);
  const auto total_episodes =
      static_cast<std::int64_t>(per_seed.size()) * static_cast<std::int64_t>(episodes_per_seed);
  stats.mean_cost_s =
      total_episodes == 0 ? 0.0 : rational_to_double(cost_sum / Rational(total_episodes));
  for (const auto& [id, sc] : light_sums) {
    stats.per_light_accuracy[id] = sc.first / static_cast<double>(sc.second);
  }
  return stats;
}

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fp));
  return std::string(buf);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << text;
  if (!out) throw DataError("failed writing: " + path);
}

nlohmann::ordered_json outcome_record(std::uint64_t seed, const EpisodeScores& episode,
                                      const std::string& policy, const EpisodeOutcome& o,
                                      const ParamGrid& grid) {
  const SensorParams& p = grid.options[static_cast<std::size_t>(o.param_index)];
  nlohmann::ordered_json rec;
  rec["seed"] = seed;
  rec["scene_id"] = episode.scene_id;
  rec["light_id"] = episode.light_id;
  rec["policy"] = policy;
  rec["param_id"] = o.param_index;
  rec["iso"] = p.iso;
  rec["shutter"] = rational_to_string(p.shutter_s);
  rec["aperture"] = p.aperture_f;
  rec["score"] = o.score;
  rec["predicted_class"] = o.predicted;
  rec["correct"] = o.correct;
  rec["candidates_evaluated"] = o.candidates;
  rec["cost_s"] = rational_to_double(o.cost);
  return rec;
}

}  // namespace

SeedEvaluation evaluate_seed(const BenchConfig& config, std::uint64_t seed,
                             const std::vector<ScorerId>& scorers) {
  if (scorers.empty()) throw InternalError("evaluate_seed: no scorers requested");
  const ParamGrid grid = config.grid();
  const ExposureConstants constants = config.constants();
  const std::vector<LightCondition> lights = config.lights();
  const std::vector<Scene> scenes = generate_dataset(
      config.num_classes, config.samples_per_class, config.mode, seed, config.scene_size);

  SeedEvaluation ev;
  ev.seed = seed;
  ev.model = train(scenes, lights, grid, constants, config.hyper, seed);

  const std::size_t num_episodes = scenes.size() * lights.size();
  ev.episodes.resize(num_episodes);
  const auto n = static_cast<std::size_t>(grid.size());

  parallel_for(config.jobs, num_episodes, [&](std::size_t index) {
    const Scene& scene = scenes[index / lights.size()];
    const LightCondition& light = lights[index % lights.size()];
    EpisodeScores episode;
    episode.scene_id = scene.scene_id;
    episode.light_id = light.id;
    episode.class_id = scene.class_id;
    episode.scores.assign(scorers.size(), std::vector<double>(n, 0.0));
    episode.predicted.resize(n);
    episode.correct.resize(n);

    const std::uint64_t base = capture_seed_base(seed, scene.scene_id, light.id);
    for (std::size_t p = 0; p < n; ++p) {
      const CapturedImage capture =
          render(scene, light, grid.options[p], constants,
                 combine_seed(base, static_cast<std::uint64_t>(p)));
      const FeatureVector features = extract_features(capture);
      episode.predicted[p] = ev.model.predict(features);
      episode.correct[p] = episode.predicted[p] == scene.class_id;
      for (std::size_t s = 0; s < scorers.size(); ++s) {
        episode.scores[s][p] = score_with(scorers[s], ev.model, features).value;
      }
    }
    for (const SensorParams& shot : auto_expose(scene, light, grid, constants)) {
      episode.ae_indices.push_back(grid.index_of(shot));
    }
    ev.episodes[index] = std::move(episode);
  });
  return ev;
}

const PolicyStats* BenchReport::find(const std::string& policy_id) const {
  for (const PolicyStats& p : policies)
    if (p.policy_id == policy_id) return &p;
  for (const PolicyStats& p : ablation)
    if (p.policy_id == policy_id) return &p;
  return nullptr;
}

nlohmann::ordered_json BenchReport::to_json(const BenchConfig& config) const {
  nlohmann::ordered_json doc;
  doc["format"] = "lens-report";
  doc["version"] = 1;
  doc["config_fingerprint"] = fingerprint_hex(config_fingerprint);
  doc["config"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config.canonical_entries()) doc["config"][key] = value;
  doc["seeds"] = seeds;
  doc["ae_mode"] = ae_mode;
  doc["oracle_f_params"] = oracle_f_params;
  auto stats_row = [](const PolicyStats& p) {
    nlohmann::ordered_json row;
    row["policy"] = p.policy_id;
    row["accuracy_mean"] = p.accuracy_mean;
    row["accuracy_std"] = p.accuracy_std;
    row["mean_cost_s"] = p.mean_cost_s;
    row["per_light_accuracy"] = p.per_light_accuracy;
    return row;
  };
  doc["policies"] = nlohmann::ordered_json::array();
  for (const PolicyStats& p : policies) doc["policies"].push_back(stats_row(p));
  doc["ablation"] = nlohmann::ordered_json::array();
  for (const PolicyStats& p : ablation) doc["ablation"].push_back(stats_row(p));
  return doc;
}

void write_scores_csv(const std::string& path, const BenchConfig& config,
                      const SeedEvaluation& evaluation, int scorer_index) {
  const ParamGrid grid = config.grid();
  const CaptureCostModel cost_model = config.cost_model();
  std::ostringstream out;
  out << kScoreCsvHeader << "\n";
  for (const EpisodeScores& e : evaluation.episodes) {
    auto emit = [&](int param_id, int option_index) {
      const SensorParams& p = grid.options[static_cast<std::size_t>(option_index)];
      out << e.scene_id << ',' << e.light_id << ',' << param_id << ',' << p.iso << ','
          << rational_to_string(p.shutter_s) << ',' << format_double(p.aperture_f) << ','
          << format_double(
                 e.scores[static_cast<std::size_t>(scorer_index)][static_cast<std::size_t>(
                     option_index)])
          << ',' << (e.correct[static_cast<std::size_t>(option_index)] ? '1' : '0') << ','
          << format_double(rational_to_double(capture_cost(p, cost_model))) << "\n";
    };
    for (int p = 0; p < grid.size(); ++p) emit(p, p);
    for (std::size_t rank = 0; rank < e.ae_indices.size(); ++rank) {
      emit(kAeParamBase + static_cast<int>(rank), e.ae_indices[rank]);
    }
  }
  write_text_file(path, out.str());
}

BenchReport cmd_run(const BenchConfig& config) {
  config.validate();
  fs::create_directories(config.out);

  BenchReport report;
  report.config_fingerprint = config.fingerprint();
  report.seeds = config.seeds;
  report.ae_mode = ae_mode_to_string(config.ae_mode);

  const ParamGrid grid = config.grid();
  std::map<std::string, std::vector<SeedPolicyStats>> per_policy;
  std::ostringstream jsonl;
  int episodes_per_seed = 0;

  for (const std::uint64_t seed : config.seeds) {
    const SeedEvaluation ev = evaluate_seed(config, seed, {config.scorer});
    episodes_per_seed = static_cast<int>(ev.episodes.size());
    int oracle_param = -1;
    const std::vector<SeedPolicyStats> seed_stats =
        evaluate_seed_policies(config, ev, 0, &oracle_param);
    report.oracle_f_params.push_back(oracle_param);
    for (const SeedPolicyStats& s : seed_stats) per_policy[s.policy_id].push_back(s);

    for (std::size_t e = 0; e < ev.episodes.size(); ++e) {
      for (const SeedPolicyStats& s : seed_stats) {
        if (s.outcomes.empty()) continue;  // random has no single selection
        jsonl << outcome_record(seed, ev.episodes[e], s.policy_id, s.outcomes[e], grid).dump()
              << "\n";
      }
    }
    write_scores_csv(config.out + "/scores_seed" + std::to_string(seed) + ".csv", config, ev, 0);
  }

  for (const std::string& policy : config.policies) {
    report.policies.push_back(aggregate_policy(policy, per_policy[policy], episodes_per_seed));
  }

  write_text_file(config.out + "/report.json", report.to_json(config).dump(2) + "\n");
  write_text_file(config.out + "/results.jsonl", jsonl.str());
  return report;
}

void cmd_gen(const BenchConfig& config) {
  config.validate();
  const std::vector<Scene> scenes = generate_dataset(
      config.num_classes, config.samples_per_class, config.mode, config.seeds.front(),
      config.scene_size);
  save_scene_set(scenes, config.out + "/scenes");
}

void cmd_train(const BenchConfig& config) {
  config.validate();
  fs::create_directories(config.out);
  const std::vector<Scene> scenes = generate_dataset(
      config.num_classes, config.samples_per_class, config.mode, config.seeds.front(),
      config.scene_size);
  const ClassifierModel model = train(scenes, config.lights(), config.grid(), config.constants(),
                                      config.hyper, config.seeds.front());
  model.save(config.out + "/model.json");
}

std::vector<SweepRow> cmd_sweep(const BenchConfig& config, const std::vector<Csa>& csas,
                                const std::vector<int>& ks) {
  config.validate();
  if (csas.empty() || ks.empty()) throw ConfigError("sweep: csa and k lists must be non-empty");
  fs::create_directories(config.out);

  const ParamGrid grid = config.grid();
  const CaptureCostModel cost_model = config.cost_model();
  const int n = grid.size();
  for (int k : ks) {
    if (k < 1 || k > n) throw ConfigError("sweep: k out of range: " + std::to_string(k));
  }

  std::vector<SeedEvaluation> evaluations;
  evaluations.reserve(config.seeds.size());
  for (const std::uint64_t seed : config.seeds) {
    evaluations.push_back(evaluate_seed(config, seed, {config.scorer}));
  }
  const auto episodes =
      static_cast<std::int64_t>(evaluations.front().episodes.size());

  std::vector<SweepRow> rows;
  for (const Csa csa : csas) {
    const std::vector<int> row_ks = csa == Csa::kFull ? std::vector<int>{n} : ks;
    for (const int k : row_ks) {
      SweepRow row;
      row.csa = csa;
      row.k = k;
      std::vector<double> accuracies;
      Rational cost_sum{0};
      for (const SeedEvaluation& ev : evaluations) {
        Tally tally;
        for (const EpisodeScores& e : ev.episodes) {
          std::vector<int> indices;
          Rational plan_cost{0};
          if (csa == Csa::kFull) {
            const CandidatePlan plan = plan_full(grid, cost_model);
            indices = plan.indices;
            plan_cost = plan.total_cost_s;
          } else {
            Rng rng(plan_seed(ev.seed, e.scene_id, e.light_id, csa, k));
            const CandidatePlan plan = make_plan(csa, grid, k, cost_model, rng);
            indices = plan.indices;
            plan_cost = plan.total_cost_s;
          }
          const EpisodeOutcome o = lens_outcome(e, 0, indices, plan_cost);
          tally.add(e.light_id, o.correct ? 1.0 : 0.0);
          cost_sum += plan_cost;
        }
        accuracies.push_back(tally.accuracy());
      }
      row.accuracy_mean = mean(accuracies);
      row.accuracy_std = population_std(accuracies);
      row.mean_cost_s =
          cost_sum / Rational(episodes * static_cast<std::int64_t>(evaluations.size()));
      rows.push_back(row);
    }
  }

  std::ostringstream out;
  out << "csa,k,mean_cost_s,accuracy_mean,accuracy_std\n";
  for (const SweepRow& row : rows) {
    out << csa_to_string(row.csa) << ',' << row.k << ',' << rational_to_decimal(row.mean_cost_s)
        << ',' << format_double(row.accuracy_mean) << ',' << format_double(row.accuracy_std)
        << "\n";
  }
  write_text_file(config.out + "/sweep.csv", out.str());
  return rows;
}

std::vector<double> cmd_heatmap(const BenchConfig& config, const std::string& scene_id,
                                const std::string& light_id) {
  config.validate();
  fs::create_directories(config.out);
  LightCondition light;
  try {
    light = light_by_id(light_id);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("heatmap: ") + e.what());
  }

  const std::uint64_t seed = config.seeds.front();
  const std::vector<Scene> scenes = generate_dataset(
      config.num_classes, config.samples_per_class, config.mode, seed, config.scene_size);
  const Scene* scene = nullptr;
  for (const Scene& s : scenes) {
    if (s.scene_id == scene_id) {
      scene = &s;
      break;
    }
  }
  if (scene == nullptr) throw ConfigError("heatmap: unknown scene id: " + scene_id);

  const ParamGrid grid = config.grid();
  const ExposureConstants constants = config.constants();
  const ClassifierModel model =
      train(scenes, config.lights(), grid, constants, config.hyper, seed);

  const std::uint64_t base = capture_seed_base(seed, scene->scene_id, light.id);
  std::vector<double> scores;
  scores.reserve(grid.options.size());
  for (int p = 0; p < grid.size(); ++p) {
    const CapturedImage capture =
        render(*scene, light, grid.options[static_cast<std::size_t>(p)], constants,
               combine_seed(base, static_cast<std::uint64_t>(p)));
    scores.push_back(score_with(config.scorer, model, extract_features(capture)).value);
  }

  // Rows: aperture. Columns: iso x shutter in canonical order.
  std::ostringstream out;
  out << "aperture";
  for (int iso : grid.iso_levels) {
    for (const Rational& shutter : grid.shutter_levels) {
      out << ',' << iso << '@' << rational_to_string(shutter);
    }
  }
  out << "\n";
  const int num_shutters = static_cast<int>(grid.shutter_levels.size());
  const int num_apertures = static_cast<int>(grid.aperture_levels.size());
  for (int a = 0; a < num_apertures; ++a) {
    out << format_double(grid.aperture_levels[static_cast<std::size_t>(a)]);
    for (int i = 0; i < static_cast<int>(grid.iso_levels.size()); ++i) {
      for (int s = 0; s < num_shutters; ++s) {
        const int index = (i * num_shutters + s) * num_apertures + a;
        out << ',' << format_double(scores[static_cast<std::size_t>(index)]);
      }
    }
    out << "\n";
  }
  const std::string path = config.out + "/heatmap_" + scene_id + "_" + light.id + "_" +
                           scorer_to_string(config.scorer) + ".csv";
  write_text_file(path, out.str());
  return scores;
}

BenchReport cmd_ablate(const BenchConfig& config) {
  config.validate();
  fs::create_directories(config.out);

  BenchReport report;
  report.config_fingerprint = config.fingerprint();
  report.seeds = config.seeds;
  report.ae_mode = ae_mode_to_string(config.ae_mode);

  const std::vector<ScorerId>& scorers = all_scorers();
  const ParamGrid grid = config.grid();
  const CaptureCostModel cost_model = config.cost_model();
  const std::vector<Rational> costs = option_costs(grid, cost_model);
  Rational full_cost{0};
  for (const Rational& c : costs) full_cost += c;
  const int n = grid.size();
  std::vector<int> full_indices(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) full_indices[static_cast<std::size_t>(i)] = i;

  std::vector<std::vector<SeedPolicyStats>> lens_per_scorer(scorers.size());
  std::map<std::string, std::vector<SeedPolicyStats>> baselines;
  int episodes_per_seed = 0;

  for (const std::uint64_t seed : config.seeds) {
    const SeedEvaluation ev = evaluate_seed(config, seed, scorers);
    episodes_per_seed = static_cast<int>(ev.episodes.size());
    for (std::size_t s = 0; s < scorers.size(); ++s) {
      SeedPolicyStats stats;
      stats.policy_id = "lens_" + scorer_to_string(scorers[s]);
      Tally tally;
      for (const EpisodeScores& e : ev.episodes) {
        const EpisodeOutcome o = lens_outcome(e, static_cast<int>(s), full_indices, full_cost);
        tally.add(e.light_id, o.correct ? 1.0 : 0.0);
        stats.cost_sum += o.cost;
      }
      stats.accuracy = tally.accuracy();
      stats.per_light = tally.light_accuracy();
      lens_per_scorer[s].push_back(std::move(stats));
    }
    int oracle_param = -1;
    BenchConfig baseline_config = config;
    baseline_config.policies.clear();
    for (const std::string& p : config.policies) {
      if (p != "lens") baseline_config.policies.push_back(p);
    }
    for (SeedPolicyStats& s : evaluate_seed_policies(baseline_config, ev, 0, &oracle_param)) {
      baselines[s.policy_id].push_back(std::move(s));
    }
    report.oracle_f_params.push_back(oracle_param);
  }

  for (std::size_t s = 0; s < scorers.size(); ++s) {
    report.ablation.push_back(aggregate_policy("lens_" + scorer_to_string(scorers[s]),
                                               lens_per_scorer[s], episodes_per_seed));
  }
  for (const std::string& policy : config.policies) {
    if (policy == "lens") continue;
    report.policies.push_back(aggregate_policy(policy, baselines[policy], episodes_per_seed));
  }

  std::ostringstream out;
  out << "policy,accuracy_mean,accuracy_std,mean_cost_s\n";
  auto emit = [&](const PolicyStats& p) {
    out << p.policy_id << ',' << format_double(p.accuracy_mean) << ','
        << format_double(p.accuracy_std) << ',' << format_double(p.mean_cost_s) << "\n";
  };
  for (const PolicyStats& p : report.ablation) emit(p);
  for (const PolicyStats& p : report.policies) emit(p);
  write_text_file(config.out + "/ablation.csv", out.str());
  return report;
}

void save_scene_set(const std::vector<Scene>& scenes, const std::string& dir) {
  if (scenes.empty()) throw DataError("save_scene_set: no scenes");
  fs::create_directories(dir);
  nlohmann::ordered_json index;
  index["format"] = "lens-scenes";
  index["version"] = 1;
  index["mode"] = mode_to_string(scenes.front().mode);
  index["height"] = scenes.front().height;
  index["width"] = scenes.front().width;
  index["scenes"] = nlohmann::ordered_json::array();
  for (const Scene& scene : scenes) {
    const std::string file = scene.scene_id + ".f32";
    nlohmann::ordered_json entry;
    entry["scene_id"] = scene.scene_id;
    entry["class_id"] = scene.class_id;
    entry["file"] = file;
    index["scenes"].push_back(std::move(entry));

    std::vector<float> values(scene.pattern.begin(), scene.pattern.end());
    std::ofstream out(dir + "/" + file, std::ios::binary);
    if (!out) throw DataError("cannot write scene pattern: " + file);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (!out) throw DataError("failed writing scene pattern: " + file);
  }
  write_text_file(dir + "/index.json", index.dump(2) + "\n");
}

std::vector<Scene> load_scene_set(const std::string& dir) {
  std::ifstream in(dir + "/index.json", std::ios::binary);
  if (!in) throw DataError("cannot open scene index: " + dir + "/index.json");
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("scene index: ") + e.what());
  }
  try {
    if (index.at("format").get<std::string>() != "lens-scenes") {
      throw DataError("scene index: unknown format tag");
    }
    if (index.at("version").get<int>() != 1) throw DataError("scene index: unsupported version");
    const SceneMode mode = mode_from_string(index.at("mode").get<std::string>());
    const int height = index.at("height").get<int>();
    const int width = index.at("width").get<int>();
    if (height < 1 || width < 1) throw DataError("scene index: bad dimensions");
    std::vector<Scene> scenes;
    for (const auto& entry : index.at("scenes")) {
      Scene scene;
      scene.scene_id = entry.at("scene_id").get<std::string>();
      scene.class_id = entry.at("class_id").get<int>();
      scene.height = height;
      scene.width = width;
      scene.mode = mode;
      const std::string path = dir + "/" + entry.at("file").get<std::string>();
      std::ifstream pattern_in(path, std::ios::binary);
      if (!pattern_in) throw DataError("cannot open scene pattern: " + path);
      const std::size_t count =
          static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
      std::vector<float> values(count);
      pattern_in.read(reinterpret_cast<char*>(values.data()),
                      static_cast<std::streamsize>(count * sizeof(float)));
      if (pattern_in.gcount() != static_cast<std::streamsize>(count * sizeof(float))) {
        throw DataError("scene pattern truncated: " + path);
      }
      char extra;
      if (pattern_in.read(&extra, 1)) throw DataError("scene pattern has trailing bytes: " + path);
      scene.pattern.assign(values.begin(), values.end());
      for (double v : scene.pattern) {
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("scene pattern out of range: " + path);
      }
      scenes.push_back(std::move(scene));
    }
    if (scenes.empty()) throw DataError("scene index: empty scene list");
    return scenes;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("scene index: ") + e.what());
  }
}

}  // namespace lens
