#include "lens/param_space.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

namespace lens {

std::string SensorParams::label() const {
  std::ostringstream os;
  os << "iso" << iso << " " << rational_to_string(shutter_s) << "s f" << aperture_f;
  return os.str();
}

ParamGrid ParamGrid::from_levels(std::vector<int> iso, std::vector<Rational> shutter,
                                 std::vector<double> aperture) {
  if (iso.empty() || shutter.empty() || aperture.empty())
    throw std::invalid_argument("param grid: every axis needs at least one level");
  for (int v : iso)
    if (v <= 0) throw std::invalid_argument("param grid: iso levels must be positive");
  for (const Rational& s : shutter)
    if (s <= Rational(0)) throw std::invalid_argument("param grid: shutter levels must be positive");
  for (double a : aperture)
    if (a <= 0) throw std::invalid_argument("param grid: aperture levels must be positive");
  if (std::set<int>(iso.begin(), iso.end()).size() != iso.size() ||
      std::set<Rational>(shutter.begin(), shutter.end()).size() != shutter.size() ||
      std::set<double>(aperture.begin(), aperture.end()).size() != aperture.size())
    throw std::invalid_argument("param grid: duplicate level on an axis");

  ParamGrid g;
  g.iso_levels = std::move(iso);
  g.shutter_levels = std::move(shutter);
  g.aperture_levels = std::move(aperture);
  g.options.reserve(g.iso_levels.size() * g.shutter_levels.size() * g.aperture_levels.size());
  for (int i : g.iso_levels)
    for (const Rational& s : g.shutter_levels)
      for (double a : g.aperture_levels) g.options.push_back(SensorParams{i, s, a});
  return g;
}

int ParamGrid::index_of(const SensorParams& p) const {
  for (std::size_t i = 0; i < options.size(); ++i)
    if (options[i] == p) return static_cast<int>(i);
  return -1;
}

nlohmann::ordered_json ParamGrid::to_json() const {
  nlohmann::ordered_json j;
  j["iso_levels"] = iso_levels;
  std::vector<std::string> shutters;
  for (const Rational& s : shutter_levels) shutters.push_back(rational_to_string(s));
  j["shutter_levels"] = shutters;
  j["aperture_levels"] = aperture_levels;
  return j;
}

ParamGrid ParamGrid::from_json(const nlohmann::json& j) {
  std::vector<int> iso = j.at("iso_levels").get<std::vector<int>>();
  std::vector<Rational> shutter;
  for (const auto& s : j.at("shutter_levels")) shutter.push_back(parse_rational(s.get<std::string>()));
  std::vector<double> aperture = j.at("aperture_levels").get<std::vector<double>>();
  return from_levels(std::move(iso), std::move(shutter), std::move(aperture));
}

ParamGrid build_default_grid() {
  return ParamGrid::from_levels({250, 2000, 16000},
                                {Rational(1, 4), Rational(1, 60), Rational(1, 1000)},
                                {5.0, 9.0, 16.0});
}

Rational capture_cost(const SensorParams& p, const CaptureCostModel& m) {
  return p.shutter_s + m.per_shot_overhead_s;
}

Rational total_cost(std::span<const SensorParams> params, const CaptureCostModel& m) {
  Rational sum{0};
  for (const SensorParams& p : params) sum += capture_cost(p, m);
  return sum;
}

std::vector<std::vector<SensorParams>> partition_grid(const ParamGrid& grid, int k) {
  if (grid.iso_levels.size() != 3 || grid.shutter_levels.size() != 3 ||
      grid.aperture_levels.size() != 3)
    throw std::invalid_argument("partition_grid: requires a 3x3x3 grid");
  int n = grid.size();
  if (k < 1 || k > n) throw std::invalid_argument("partition_grid: k out of range [1, 27]");

  std::vector<std::vector<SensorParams>> cells;
  if (k <= 7) {
    cells.push_back(grid.options);
    return cells;
  }
  if (k <= 26) {
    // Axis bins {level 0} and {levels 1, 2}; cells in the same row-major
    // nesting as the option order.
    const std::vector<std::vector<int>> bins = {{0}, {1, 2}};
    for (const auto& ib : bins)
      for (const auto& sb : bins)
        for (const auto& ab : bins) {
          std::vector<SensorParams> cell;
          for (int i : ib)
            for (int s : sb)
              for (int a : ab) cell.push_back(grid.options[(i * 3 + s) * 3 + a]);
          cells.push_back(std::move(cell));
        }
    return cells;
  }
  for (const SensorParams& p : grid.options) cells.push_back({p});
  return cells;
}

}  // namespace lens
