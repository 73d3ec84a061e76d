#include "lens/replay.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <utility>

#include "lens/errors.hpp"
#include "lens/rng.hpp"

namespace lens {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw DataError("scores csv line " + std::to_string(line_no) + ": " + what);
}

int parse_int(const std::string& s, std::size_t line_no, const std::string& field) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail_line(line_no, "bad integer in " + field + ": '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, std::size_t line_no, const std::string& field) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail_line(line_no, "bad decimal in " + field + ": '" + s + "'");
  }
  return v;
}

std::string group_name(const ScoreGroup& g) {
  return "(" + g.scene_id + ", " + g.light_id + ")";
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

// Accumulates per-light and pooled hit fractions over episodes.
struct AccuracyTally {
  std::int64_t hits = 0;
  std::int64_t total = 0;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_light;

  void add(const std::string& light_id, bool correct) {
    hits += correct ? 1 : 0;
    ++total;
    auto& [h, t] = per_light[light_id];
    h += correct ? 1 : 0;
    ++t;
  }
  double accuracy() const {
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
  }
  std::map<std::string, double> light_accuracy() const {
    std::map<std::string, double> out;
    for (const auto& [id, ht] : per_light) {
      out[id] = ht.second == 0 ? 0.0 : static_cast<double>(ht.first) /
                                           static_cast<double>(ht.second);
    }
    return out;
  }
};

}  // namespace

bool ScoreMatrix::has_ae() const {
  if (groups.empty()) return false;
  for (const ScoreGroup& g : groups) {
    if (g.ae_rows.empty()) return false;
  }
  return true;
}

ScoreMatrix load_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open scores csv: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("scores csv is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kScoreCsvHeader) {
    throw DataError("scores csv has unknown header: '" + line + "'");
  }

  const ParamGrid grid = build_default_grid();
  const auto n_options = static_cast<std::size_t>(grid.size());
  ScoreMatrix matrix;
  std::map<std::pair<std::string, std::string>, std::size_t> group_index;
  std::vector<std::vector<bool>> seen_grid;  // per group, param_id 0..26

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 9) fail_line(line_no, "expected 9 fields, got " + std::to_string(f.size()));

    ScoreRow row;
    row.scene_id = f[0];
    row.light_id = f[1];
    if (row.scene_id.empty() || row.light_id.empty()) fail_line(line_no, "empty id field");
    row.param_id = parse_int(f[2], line_no, "param_id");
    if (row.param_id < 0 || row.param_id >= kAeParamBase + 5) {
      fail_line(line_no, "param_id out of range: " + f[2]);
    }
    row.iso = parse_int(f[3], line_no, "iso");
    try {
      row.shutter_s = parse_rational(f[4]);
    } catch (const std::exception& e) {
      fail_line(line_no, std::string("bad shutter: ") + e.what());
    }
    if (row.shutter_s <= Rational(0)) fail_line(line_no, "shutter must be positive");
    row.aperture_f = parse_double(f[5], line_no, "aperture");
    row.score = parse_double(f[6], line_no, "score");
    if (!std::isfinite(row.score)) fail_line(line_no, "non-finite score");
    if (f[7] == "0") {
      row.correct = false;
    } else if (f[7] == "1") {
      row.correct = true;
    } else {
      fail_line(line_no, "correct must be 0 or 1, got '" + f[7] + "'");
    }
    row.cost_s = parse_double(f[8], line_no, "cost_s");
    if (!std::isfinite(row.cost_s) || row.cost_s <= 0.0) {
      fail_line(line_no, "cost_s must be positive and finite");
    }

    const SensorParams as_params{row.iso, row.shutter_s, row.aperture_f};
    const int grid_index = grid.index_of(as_params);
    if (row.param_id < kAeParamBase) {
      if (grid_index != row.param_id) {
        fail_line(line_no, "param fields do not match default-grid param_id " +
                               std::to_string(row.param_id));
      }
    } else if (grid_index < 0) {
      fail_line(line_no, "AE row params not in the default grid");
    }

    const auto key = std::make_pair(row.scene_id, row.light_id);
    auto it = group_index.find(key);
    if (it == group_index.end()) {
      it = group_index.emplace(key, matrix.groups.size()).first;
      ScoreGroup g;
      g.scene_id = row.scene_id;
      g.light_id = row.light_id;
      g.grid_rows.resize(n_options);
      matrix.groups.push_back(std::move(g));
      seen_grid.emplace_back(n_options, false);
    }
    ScoreGroup& group = matrix.groups[it->second];
    if (row.param_id < kAeParamBase) {
      if (seen_grid[it->second][static_cast<std::size_t>(row.param_id)]) {
        throw DataError("scores csv group " + group_name(group) + ": duplicate param_id " +
                        std::to_string(row.param_id));
      }
      seen_grid[it->second][static_cast<std::size_t>(row.param_id)] = true;
      group.grid_rows[static_cast<std::size_t>(row.param_id)] = row;
    } else {
      for (const ScoreRow& ae : group.ae_rows) {
        if (ae.param_id == row.param_id) {
          throw DataError("scores csv group " + group_name(group) + ": duplicate param_id " +
                          std::to_string(row.param_id));
        }
      }
      group.ae_rows.push_back(row);
    }
  }

  if (matrix.groups.empty()) throw DataError("scores csv has no data rows: " + path);

  std::size_t ae_count = matrix.groups.front().ae_rows.size();
  for (std::size_t gi = 0; gi < matrix.groups.size(); ++gi) {
    ScoreGroup& group = matrix.groups[gi];
    for (std::size_t p = 0; p < n_options; ++p) {
      if (!seen_grid[gi][p]) {
        throw DataError("scores csv group " + group_name(group) + ": missing param_id " +
                        std::to_string(p));
      }
    }
    std::sort(group.ae_rows.begin(), group.ae_rows.end(),
              [](const ScoreRow& a, const ScoreRow& b) { return a.param_id < b.param_id; });
    for (std::size_t r = 0; r < group.ae_rows.size(); ++r) {
      if (group.ae_rows[r].param_id != kAeParamBase + static_cast<int>(r)) {
        throw DataError("scores csv group " + group_name(group) +
                        ": AE rows must be contiguous from param_id 27");
      }
    }
    if (group.ae_rows.size() != ae_count) {
      throw DataError("scores csv: groups disagree on AE row count (group " + group_name(group) +
                      ")");
    }
  }
  return matrix;
}

const PolicyStats* ReplayReport::find(const std::string& policy_id) const {
  for (const PolicyStats& p : policies)
    if (p.policy_id == policy_id) return &p;
  return nullptr;
}

nlohmann::ordered_json ReplayReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["num_groups"] = num_groups;
  doc["csa"] = csa_to_string(csa);
  doc["k"] = k;
  doc["seeds"] = seeds;
  doc["ae_mode"] = ae_mode;
  doc["oracle_f_param"] = oracle_f_param;
  doc["policies"] = nlohmann::ordered_json::array();
  for (const PolicyStats& p : policies) {
    nlohmann::ordered_json row;
    row["policy"] = p.policy_id;
    row["accuracy_mean"] = p.accuracy_mean;
    row["accuracy_std"] = p.accuracy_std;
    row["mean_cost_s"] = p.mean_cost_s;
    row["per_light_accuracy"] = p.per_light_accuracy;
    doc["policies"].push_back(std::move(row));
  }
  return doc;
}

ReplayReport replay_evaluate(const ScoreMatrix& matrix, const ReplayOptions& options) {
  if (matrix.groups.empty()) throw DataError("replay: empty score matrix");
  if (options.seeds.empty()) throw ConfigError("replay: seed list must be non-empty");
  if (options.require_ae && !matrix.has_ae()) {
    throw DataError("replay: AE requested but the matrix has no AE rows");
  }
  const ParamGrid grid = build_default_grid();
  const CaptureCostModel cost_model;  // zero overhead; only used for planning
  const int n = grid.size();
  const int k = options.csa == Csa::kFull ? n : options.k;
  if (k < 1 || k > n) throw ConfigError("replay: k out of range");

  ReplayReport report;
  report.num_groups = static_cast<int>(matrix.groups.size());
  report.csa = options.csa;
  report.k = k;
  report.seeds = options.seeds;
  report.ae_mode = ae_mode_to_string(options.ae_mode);

  // Lens: argmax score over the plan; ties fall to the lower param_id since
  // plan indices are ascending.
  {
    const bool subsampled = options.csa != Csa::kFull;
    const std::vector<std::uint64_t> seeds =
        subsampled ? options.seeds : std::vector<std::uint64_t>{0};
    std::vector<double> seed_accuracies;
    std::vector<double> seed_costs;
    std::map<std::string, std::pair<double, int>> light_acc_sums;
    for (const std::uint64_t seed : seeds) {
      AccuracyTally tally;
      double cost_sum = 0.0;
      for (const ScoreGroup& g : matrix.groups) {
        std::vector<int> indices;
        if (subsampled) {
          Rng rng(plan_seed(seed, g.scene_id, g.light_id, options.csa, k));
          indices = make_plan(options.csa, grid, k, cost_model, rng).indices;
        } else {
          indices.resize(static_cast<std::size_t>(n));
          for (int i = 0; i < n; ++i) indices[static_cast<std::size_t>(i)] = i;
        }
        int best = indices.front();
        double plan_cost = 0.0;
        for (const int idx : indices) {
          const ScoreRow& row = g.grid_rows[static_cast<std::size_t>(idx)];
          plan_cost += row.cost_s;
          if (row.score > g.grid_rows[static_cast<std::size_t>(best)].score) best = idx;
        }
        tally.add(g.light_id, g.grid_rows[static_cast<std::size_t>(best)].correct);
        cost_sum += plan_cost;
      }
      seed_accuracies.push_back(tally.accuracy());
      seed_costs.push_back(cost_sum / static_cast<double>(matrix.groups.size()));
      for (const auto& [id, acc] : tally.light_accuracy()) {
        auto& [sum, count] = light_acc_sums[id];
        sum += acc;
        ++count;
      }
    }
    PolicyStats lens;
    lens.policy_id = "lens";
    lens.accuracy_mean = mean(seed_accuracies);
    lens.accuracy_std = population_std(seed_accuracies);
    lens.mean_cost_s = mean(seed_costs);
    for (const auto& [id, sc] : light_acc_sums) {
      lens.per_light_accuracy[id] = sc.first / static_cast<double>(sc.second);
    }
    report.policies.push_back(std::move(lens));
  }

  // Random: exact mean over all options.
  {
    PolicyStats random_stats;
    random_stats.policy_id = "random";
    double acc_sum = 0.0;
    double cost_sum = 0.0;
    std::map<std::string, std::pair<double, int>> light_sums;
    for (const ScoreGroup& g : matrix.groups) {
      std::vector<bool> corrects;
      double group_cost = 0.0;
      corrects.reserve(g.grid_rows.size());
      for (const ScoreRow& row : g.grid_rows) {
        corrects.push_back(row.correct);
        group_cost += row.cost_s;
      }
      const double acc = policy_random(corrects);
      acc_sum += acc;
      cost_sum += group_cost / static_cast<double>(g.grid_rows.size());
      auto& [sum, count] = light_sums[g.light_id];
      sum += acc;
      ++count;
    }
    random_stats.accuracy_mean = acc_sum / static_cast<double>(matrix.groups.size());
    random_stats.mean_cost_s = cost_sum / static_cast<double>(matrix.groups.size());
    for (const auto& [id, sc] : light_sums) {
      random_stats.per_light_accuracy[id] = sc.first / static_cast<double>(sc.second);
    }
    report.policies.push_back(std::move(random_stats));
  }

  // Oracle-S: one shot at the first correct option, if any.
  {
    PolicyStats stats;
    stats.policy_id = "oracle_s";
    AccuracyTally tally;
    double cost_sum = 0.0;
    for (const ScoreGroup& g : matrix.groups) {
      std::vector<bool> corrects;
      corrects.reserve(g.grid_rows.size());
      for (const ScoreRow& row : g.grid_rows) corrects.push_back(row.correct);
      const OracleSChoice choice = oracle_s(corrects);
      tally.add(g.light_id, choice.correct);
      cost_sum += g.grid_rows[static_cast<std::size_t>(choice.param_index)].cost_s;
    }
    stats.accuracy_mean = tally.accuracy();
    stats.mean_cost_s = cost_sum / static_cast<double>(matrix.groups.size());
    stats.per_light_accuracy = tally.light_accuracy();
    report.policies.push_back(std::move(stats));
  }

  // Oracle-F: best fixed param pooled over every group; ties prefer the
  // cheaper row (mean cost), then the lower param_id.
  {
    const auto n_options = static_cast<std::size_t>(n);
    std::vector<std::int64_t> hits(n_options, 0);
    std::vector<double> costs(n_options, 0.0);
    for (const ScoreGroup& g : matrix.groups) {
      for (std::size_t p = 0; p < n_options; ++p) {
        hits[p] += g.grid_rows[p].correct ? 1 : 0;
        costs[p] += g.grid_rows[p].cost_s;
      }
    }
    int best = 0;
    for (std::size_t p = 1; p < n_options; ++p) {
      if (hits[p] > hits[static_cast<std::size_t>(best)] ||
          (hits[p] == hits[static_cast<std::size_t>(best)] &&
           costs[p] < costs[static_cast<std::size_t>(best)])) {
        best = static_cast<int>(p);
      }
    }
    report.oracle_f_param = best;
    PolicyStats stats;
    stats.policy_id = "oracle_f";
    AccuracyTally tally;
    for (const ScoreGroup& g : matrix.groups) {
      tally.add(g.light_id, g.grid_rows[static_cast<std::size_t>(best)].correct);
    }
    stats.accuracy_mean = tally.accuracy();
    stats.mean_cost_s = costs[static_cast<std::size_t>(best)] /
                        static_cast<double>(matrix.groups.size());
    stats.per_light_accuracy = tally.light_accuracy();
    report.policies.push_back(std::move(stats));
  }

  if (matrix.has_ae()) {
    PolicyStats stats;
    stats.policy_id = "ae";
    AccuracyTally tally;
    double cost_sum = 0.0;
    for (const ScoreGroup& g : matrix.groups) {
      bool correct = g.ae_rows.front().correct;
      if (options.ae_mode == AeMode::kBest5) {
        for (const ScoreRow& row : g.ae_rows) correct = correct || row.correct;
      }
      tally.add(g.light_id, correct);
      for (const ScoreRow& row : g.ae_rows) cost_sum += row.cost_s;
    }
    stats.accuracy_mean = tally.accuracy();
    stats.mean_cost_s = cost_sum / static_cast<double>(matrix.groups.size());
    stats.per_light_accuracy = tally.light_accuracy();
    report.policies.push_back(std::move(stats));
  }

  return report;
}

}  // namespace lens
