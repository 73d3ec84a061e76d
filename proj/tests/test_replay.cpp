#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lens/errors.hpp"
#include "lens/format.hpp"
#include "lens/replay.hpp"

using lens::Csa;
using lens::DataError;
using lens::ParamGrid;
using lens::Rational;
using lens::ReplayOptions;
using lens::ReplayReport;
using lens::Rng;
using lens::ScoreGroup;
using lens::ScoreMatrix;
using lens::ScoreRow;
using lens::SensorParams;

namespace {

const ParamGrid& grid() {
  static ParamGrid g = lens::build_default_grid();
  return g;
}

struct GroupSpec {
  std::string scene;
  std::string light;
  std::array<double, 27> score{};
  std::array<bool, 27> correct{};
  std::vector<std::pair<int, bool>> ae;  // (grid index of the shot, correct)
};

std::vector<std::string> group_lines(const GroupSpec& spec) {
  std::vector<std::string> lines;
  for (int p = 0; p < 27; ++p) {
    const SensorParams& sp = grid().options[static_cast<std::size_t>(p)];
    std::ostringstream out;
    out << spec.scene << ',' << spec.light << ',' << p << ',' << sp.iso << ','
        << lens::rational_to_string(sp.shutter_s) << ',' << lens::format_double(sp.aperture_f)
        << ',' << lens::format_double(spec.score[static_cast<std::size_t>(p)]) << ','
        << (spec.correct[static_cast<std::size_t>(p)] ? 1 : 0) << ','
        << lens::format_double(lens::rational_to_double(sp.shutter_s));
    lines.push_back(out.str());
  }
  int id = lens::kAeParamBase;
  for (const auto& [shot, ok] : spec.ae) {
    const SensorParams& sp = grid().options[static_cast<std::size_t>(shot)];
    std::ostringstream out;
    out << spec.scene << ',' << spec.light << ',' << id++ << ',' << sp.iso << ','
        << lens::rational_to_string(sp.shutter_s) << ',' << lens::format_double(sp.aperture_f)
        << ",0.5," << (ok ? 1 : 0) << ','
        << lens::format_double(lens::rational_to_double(sp.shutter_s));
    lines.push_back(out.str());
  }
  return lines;
}

std::string make_csv(const std::vector<GroupSpec>& specs) {
  std::string text = std::string(lens::kScoreCsvHeader) + "\n";
  for (const GroupSpec& spec : specs)
    for (const std::string& line : group_lines(spec)) text += line + "\n";
  return text;
}

ScoreMatrix load_text(const std::string& text, const std::string& name = "test_scores.csv") {
  {
    std::ofstream out(name, std::ios::binary | std::ios::trunc);
    out << text;
  }
  ScoreMatrix m = lens::load_scores(name);
  std::remove(name.c_str());
  return m;
}

std::string load_error(const std::string& text) {
  const std::string name = "test_scores_bad.csv";
  {
    std::ofstream out(name, std::ios::binary | std::ios::trunc);
    out << text;
  }
  std::string message;
  try {
    lens::load_scores(name);
  } catch (const DataError& e) {
    message = e.what();
  }
  std::remove(name.c_str());
  REQUIRE(!message.empty());
  return message;
}

// Direct in-memory group for replay_evaluate tests.
ScoreGroup build_group(const GroupSpec& spec) {
  ScoreGroup g;
  g.scene_id = spec.scene;
  g.light_id = spec.light;
  for (int p = 0; p < 27; ++p) {
    const SensorParams& sp = grid().options[static_cast<std::size_t>(p)];
    ScoreRow row;
    row.scene_id = spec.scene;
    row.light_id = spec.light;
    row.param_id = p;
    row.iso = sp.iso;
    row.shutter_s = sp.shutter_s;
    row.aperture_f = sp.aperture_f;
    row.score = spec.score[static_cast<std::size_t>(p)];
    row.correct = spec.correct[static_cast<std::size_t>(p)];
    row.cost_s = lens::rational_to_double(sp.shutter_s);
    g.grid_rows.push_back(row);
  }
  int id = lens::kAeParamBase;
  for (const auto& [shot, ok] : spec.ae) {
    ScoreRow row = g.grid_rows[static_cast<std::size_t>(shot)];
    row.param_id = id++;
    row.score = 0.5;
    row.correct = ok;
    g.ae_rows.push_back(row);
  }
  return g;
}

GroupSpec basic_spec(const std::string& scene, const std::string& light) {
  GroupSpec spec;
  spec.scene = scene;
  spec.light = light;
  for (int p = 0; p < 27; ++p) spec.score[static_cast<std::size_t>(p)] = 0.1 + 0.01 * p;
  spec.correct[20] = true;
  spec.ae = {{12, false}, {13, true}, {14, false}, {4, false}, {22, false}};
  return spec;
}

}  // namespace

TEST_SUITE("replay") {

TEST_CASE("well-formed matrix round-trips") {
  GroupSpec a = basic_spec("c000_s00", "L1");
  GroupSpec b = basic_spec("c001_s00", "L3");
  b.score[5] = 9.0;
  ScoreMatrix m = load_text(make_csv({a, b}));
  REQUIRE(m.groups.size() == 2);
  CHECK(m.groups[0].scene_id == "c000_s00");
  CHECK(m.groups[1].scene_id == "c001_s00");
  CHECK(m.has_ae());
  for (int p = 0; p < 27; ++p) {
    const ScoreRow& row = m.groups[0].grid_rows[static_cast<std::size_t>(p)];
    CHECK(row.param_id == p);
    CHECK(SensorParams{row.iso, row.shutter_s, row.aperture_f} ==
          grid().options[static_cast<std::size_t>(p)]);
    CHECK(row.score == a.score[static_cast<std::size_t>(p)]);
    CHECK(row.correct == a.correct[static_cast<std::size_t>(p)]);
  }
  CHECK(m.groups[1].grid_rows[5].score == 9.0);
  REQUIRE(m.groups[0].ae_rows.size() == 5);
  for (int r = 0; r < 5; ++r)
    CHECK(m.groups[0].ae_rows[static_cast<std::size_t>(r)].param_id == 27 + r);
  CHECK(m.groups[0].ae_rows[1].correct);
}

TEST_CASE("row order within the file does not matter") {
  GroupSpec a = basic_spec("sA", "L1");
  GroupSpec b = basic_spec("sB", "L2");
  auto la = group_lines(a);
  auto lb = group_lines(b);
  std::string text = std::string(lens::kScoreCsvHeader) + "\n";
  for (std::size_t i = 0; i < la.size(); ++i) {
    text += lb[i] + "\n";  // interleave the two groups
    text += la[i] + "\n";
  }
  ScoreMatrix m = load_text(text);
  REQUIRE(m.groups.size() == 2);
  CHECK(m.groups[0].scene_id == "sB");  // first appearance wins
  CHECK(m.groups[1].scene_id == "sA");
  CHECK(m.groups[1].grid_rows[20].correct);
}

TEST_CASE("loader rejects malformed input with precise messages") {
  const std::string good = make_csv({basic_spec("s", "L1")});

  SUBCASE("header") {
    std::string text = good;
    text[0] = 'S';
    CHECK(load_error(text).find("unknown header") != std::string::npos);
  }
  SUBCASE("field count") {
    std::string text = good;
    const auto pos = text.find('\n') + 1;
    const auto end = text.find('\n', pos);
    std::string line = text.substr(pos, end - pos);
    line = line.substr(0, line.rfind(','));
    text = text.substr(0, pos) + line + text.substr(end);
    const std::string msg = load_error(text);
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("expected 9 fields") != std::string::npos);
  }
  SUBCASE("param_id range") {
    std::string text = good;
    text.replace(text.find("s,L1,26,"), 8, "s,L1,32,");
    CHECK(load_error(text).find("param_id out of range") != std::string::npos);
  }
  SUBCASE("grid mismatch") {
    std::string text = good;
    // param_id 0 claims ISO 250; forge it to 2000.
    text.replace(text.find("s,L1,0,250"), 10, "s,L1,0,2000");
    CHECK(load_error(text).find("do not match default-grid param_id 0") != std::string::npos);
  }
  SUBCASE("nan score") {
    GroupSpec spec = basic_spec("s", "L1");
    spec.score[3] = 0.125;
    std::string text = make_csv({spec});
    text.replace(text.find(",0.125,"), 7, ",nan,");
    const std::string msg = load_error(text);
    CHECK(msg.find("non-finite score") != std::string::npos);
    CHECK(msg.find("line 5") != std::string::npos);  // header + rows 0..2 before it
  }
  SUBCASE("correct flag") {
    GroupSpec spec = basic_spec("s", "L1");
    spec.score[0] = 7.5;
    std::string text = make_csv({spec});
    text.replace(text.find(",7.5,0,"), 7, ",7.5,2,");
    CHECK(load_error(text).find("correct must be 0 or 1") != std::string::npos);
  }
  SUBCASE("cost must be positive") {
    GroupSpec spec = basic_spec("s", "L1");
    spec.score[0] = 7.5;
    std::string text = make_csv({spec});
    const auto line_end = text.find('\n', text.find(",7.5,"));
    const auto cost_start = text.rfind(',', line_end - 1) + 1;
    text.replace(cost_start, line_end - cost_start, "0");
    CHECK(load_error(text).find("cost_s must be positive") != std::string::npos);
  }
  SUBCASE("bad shutter") {
    GroupSpec spec = basic_spec("s", "L1");
    std::string text = make_csv({spec});
    text.replace(text.find("1/4"), 3, "1/0");
    CHECK(load_error(text).find("bad shutter") != std::string::npos);
  }
  SUBCASE("duplicate param") {
    std::string text = good;
    const auto pos = text.find('\n') + 1;
    const auto end = text.find('\n', pos);
    text += text.substr(pos, end - pos + 1);
    CHECK(load_error(text).find("duplicate param_id 0") != std::string::npos);
  }
  SUBCASE("missing param") {
    GroupSpec spec = basic_spec("s", "L1");
    spec.ae.clear();
    auto lines = group_lines(spec);
    std::string text = std::string(lens::kScoreCsvHeader) + "\n";
    for (std::size_t i = 0; i < lines.size(); ++i)
      if (i != 13) text += lines[i] + "\n";
    const std::string msg = load_error(text);
    CHECK(msg.find("missing param_id 13") != std::string::npos);
    CHECK(msg.find("(s, L1)") != std::string::npos);
  }
  SUBCASE("ae rows must be contiguous from 27") {
    GroupSpec spec = basic_spec("s", "L1");
    spec.ae.clear();
    auto lines = group_lines(basic_spec("s", "L1"));
    std::string text = std::string(lens::kScoreCsvHeader) + "\n";
    for (std::size_t i = 0; i < 27; ++i) text += lines[i] + "\n";
    std::string ae_line = lines[28];  // param_id 28 without 27
    text += ae_line + "\n";
    CHECK(load_error(text).find("contiguous") != std::string::npos);
  }
  SUBCASE("groups must agree on AE rows") {
    GroupSpec a = basic_spec("sA", "L1");
    GroupSpec b = basic_spec("sB", "L1");
    b.ae.pop_back();
    CHECK(load_error(make_csv({a, b})).find("disagree on AE row count") != std::string::npos);
  }
  SUBCASE("empty and header-only files") {
    CHECK(load_error("").find("empty") != std::string::npos);
    CHECK(load_error(std::string(lens::kScoreCsvHeader) + "\n").find("no data rows") !=
          std::string::npos);
  }
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(lens::load_scores("no_such_scores.csv"), DataError);
}

TEST_CASE("crlf line endings are accepted") {
  std::string text = make_csv({basic_spec("s", "L1")});
  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += "\r\n";
    else crlf += c;
  }
  ScoreMatrix m = load_text(crlf);
  CHECK(m.groups.size() == 1);
}

TEST_CASE("full replay: argmax lens, exact random, both oracles, ae") {
  // Score peaks at param 20, which is also the only correct option.
  ScoreMatrix m;
  GroupSpec a = basic_spec("c000_s00", "L1");
  GroupSpec b = basic_spec("c001_s00", "L3");
  b.correct[20] = false;  // second group: nothing correct except param 4
  b.correct[4] = true;
  b.ae = {{12, true}, {13, false}, {14, false}, {4, false}, {22, false}};
  m.groups = {build_group(a), build_group(b)};

  ReplayReport report = lens::replay_evaluate(m, ReplayOptions{});
  CHECK(report.num_groups == 2);
  CHECK(report.k == 27);

  const auto* lens_row = report.find("lens");
  REQUIRE(lens_row != nullptr);
  // Argmax score is param 26 (scores ramp up), correct only in neither group.
  CHECK(lens_row->accuracy_mean == 0.0);
  CHECK(lens_row->accuracy_std == 0.0);
  CHECK(lens_row->mean_cost_s == doctest::Approx(2.409).epsilon(1e-9));

  const auto* random_row = report.find("random");
  REQUIRE(random_row != nullptr);
  CHECK(random_row->accuracy_mean == doctest::Approx(1.0 / 27.0).epsilon(1e-12));
  CHECK(random_row->mean_cost_s == doctest::Approx(2.409 / 27.0).epsilon(1e-9));
  CHECK(random_row->per_light_accuracy.at("L1") == doctest::Approx(1.0 / 27.0));

  const auto* os = report.find("oracle_s");
  REQUIRE(os != nullptr);
  CHECK(os->accuracy_mean == 1.0);  // every group has one correct option
  // Costs: param 20 is (16000, 1/4, f16); param 4 is (250, 1/60, f9).
  CHECK(os->mean_cost_s == doctest::Approx((1.0 / 4.0 + 1.0 / 60.0) / 2.0).epsilon(1e-9));

  const auto* of = report.find("oracle_f");
  REQUIRE(of != nullptr);
  // Params 20 and 4 each hit once; the 1/60 option is cheaper than the 1/4.
  CHECK(report.oracle_f_param == 4);
  CHECK(of->accuracy_mean == 0.5);
  CHECK(of->per_light_accuracy.at("L1") == 0.0);
  CHECK(of->per_light_accuracy.at("L3") == 1.0);

  const auto* ae = report.find("ae");
  REQUIRE(ae != nullptr);
  // Top-1 shots: group a rank0 incorrect, group b rank0 correct.
  CHECK(ae->accuracy_mean == 0.5);
  // All five AE shots of basic_spec use 1/60 shutters.
  CHECK(ae->mean_cost_s == doctest::Approx(5.0 / 60.0).epsilon(1e-9));

  ReplayOptions best5;
  best5.ae_mode = lens::AeMode::kBest5;
  ReplayReport r5 = lens::replay_evaluate(m, best5);
  CHECK(r5.find("ae")->accuracy_mean == 1.0);  // rank-1 shot of group a is correct
}

TEST_CASE("lens replay prefers the lower param on score ties") {
  GroupSpec spec;
  spec.scene = "s";
  spec.light = "L1";
  spec.score.fill(0.25);
  spec.correct[0] = true;
  ScoreMatrix m;
  m.groups = {build_group(spec)};
  ReplayReport report = lens::replay_evaluate(m, ReplayOptions{});
  CHECK(report.find("lens")->accuracy_mean == 1.0);
}

TEST_CASE("subsampled replay reproduces an independent plan walk") {
  // Seeded CSA plans must make replay's lens row recomputable from the same
  // plan_seed streams.
  std::vector<GroupSpec> specs;
  Rng rng(2024);
  for (int s = 0; s < 8; ++s) {
    GroupSpec spec;
    spec.scene = "c00" + std::to_string(s) + "_s00";
    spec.light = s % 2 == 0 ? "L1" : "L4";
    for (int p = 0; p < 27; ++p) {
      spec.score[static_cast<std::size_t>(p)] = rng.next_unit();
      spec.correct[static_cast<std::size_t>(p)] = rng.next_unit() < 0.4;
    }
    specs.push_back(spec);
  }
  ScoreMatrix m;
  for (const GroupSpec& spec : specs) m.groups.push_back(build_group(spec));

  ReplayOptions options;
  options.csa = Csa::kCsa1;
  options.k = 6;
  options.seeds = {11, 12, 13};
  ReplayReport report = lens::replay_evaluate(m, options);

  std::vector<double> expected_acc;
  for (std::uint64_t seed : options.seeds) {
    int hits = 0;
    for (const ScoreGroup& g : m.groups) {
      Rng plan_rng(lens::plan_seed(seed, g.scene_id, g.light_id, Csa::kCsa1, 6));
      const auto plan = lens::make_plan(Csa::kCsa1, grid(), 6, lens::CaptureCostModel{}, plan_rng);
      int best = plan.indices[0];
      for (int idx : plan.indices)
        if (g.grid_rows[static_cast<std::size_t>(idx)].score >
            g.grid_rows[static_cast<std::size_t>(best)].score)
          best = idx;
      hits += g.grid_rows[static_cast<std::size_t>(best)].correct ? 1 : 0;
    }
    expected_acc.push_back(hits / 8.0);
  }
  const double expected_mean = (expected_acc[0] + expected_acc[1] + expected_acc[2]) / 3.0;
  CHECK(report.find("lens")->accuracy_mean == doctest::Approx(expected_mean).epsilon(1e-12));
  CHECK(report.seeds == options.seeds);

  // k = 27 subsampling collapses to the full grid.
  ReplayOptions all;
  all.csa = Csa::kCsa1;
  all.k = 27;
  all.seeds = {1, 2};
  ReplayReport full = lens::replay_evaluate(m, ReplayOptions{});
  ReplayReport k27 = lens::replay_evaluate(m, all);
  CHECK(k27.find("lens")->accuracy_mean ==
        doctest::Approx(full.find("lens")->accuracy_mean).epsilon(1e-12));
  CHECK(k27.find("lens")->accuracy_std == 0.0);
}

TEST_CASE("oracle_s dominates every policy on random matrices") {
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng(900 + static_cast<std::uint64_t>(trial));
    ScoreMatrix m;
    for (int s = 0; s < 12; ++s) {
      GroupSpec spec;
      spec.scene = "s" + std::to_string(s);
      spec.light = "L" + std::to_string(1 + s % 4);
      for (int p = 0; p < 27; ++p) {
        spec.score[static_cast<std::size_t>(p)] = rng.next_unit();
        spec.correct[static_cast<std::size_t>(p)] = rng.next_unit() < 0.5;
      }
      spec.ae = {{0, rng.next_unit() < 0.5},
                 {5, rng.next_unit() < 0.5},
                 {13, rng.next_unit() < 0.5},
                 {14, rng.next_unit() < 0.5},
                 {22, rng.next_unit() < 0.5}};
      m.groups.push_back(build_group(spec));
    }
    for (Csa csa : {Csa::kFull, Csa::kCsa1, Csa::kCsa2, Csa::kCsa3}) {
      ReplayOptions options;
      options.csa = csa;
      options.k = 9;
      options.seeds = {1, 2, 3, 4};
      ReplayReport report = lens::replay_evaluate(m, options);
      const double oracle = report.find("oracle_s")->accuracy_mean;
      for (const auto& policy : report.policies) {
        CHECK(policy.accuracy_mean <= oracle + 1e-12);
      }
    }
  }
}

TEST_CASE("replay is deterministic") {
  GroupSpec spec = basic_spec("s", "L1");
  ScoreMatrix m;
  m.groups = {build_group(spec)};
  ReplayOptions options;
  options.csa = Csa::kCsa2;
  options.k = 9;
  options.seeds = {3, 4};
  const std::string a = lens::replay_evaluate(m, options).to_json().dump(2);
  const std::string b = lens::replay_evaluate(m, options).to_json().dump(2);
  CHECK(a == b);
}

TEST_CASE("replay input validation") {
  ScoreMatrix empty;
  CHECK_THROWS_AS(lens::replay_evaluate(empty, ReplayOptions{}), DataError);

  ScoreMatrix m;
  GroupSpec spec = basic_spec("s", "L1");
  spec.ae.clear();
  m.groups = {build_group(spec)};

  ReplayOptions no_seeds;
  no_seeds.seeds.clear();
  CHECK_THROWS_AS(lens::replay_evaluate(m, no_seeds), lens::ConfigError);

  ReplayOptions bad_k;
  bad_k.csa = Csa::kCsa1;
  bad_k.k = 0;
  CHECK_THROWS_AS(lens::replay_evaluate(m, bad_k), lens::ConfigError);

  ReplayOptions want_ae;
  want_ae.require_ae = true;
  CHECK_THROWS_AS(lens::replay_evaluate(m, want_ae), DataError);

  // Without AE rows the report simply has no ae policy.
  ReplayReport report = lens::replay_evaluate(m, ReplayOptions{});
  CHECK(report.find("ae") == nullptr);
  CHECK(report.find("lens") != nullptr);
}

}  // TEST_SUITE
