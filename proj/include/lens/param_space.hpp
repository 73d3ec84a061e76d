#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lens/rational.hpp"

namespace lens {

// One camera sensor configuration: gain, exposure duration, lens opening.
struct SensorParams {
  int iso = 0;
  Rational shutter_s;    // exposure duration, seconds
  double aperture_f = 0; // f-number

  friend bool operator==(const SensorParams&, const SensorParams&) = default;
  std::string label() const;
};

// The discrete option space. Options are stored in canonical row-major order
// (iso outer, shutter middle, aperture inner); that order is total and stable
// and defines tie-breaking everywhere downstream. The canonical index of an
// option is its param_id in every external format.
struct ParamGrid {
  std::vector<int> iso_levels;
  std::vector<Rational> shutter_levels;
  std::vector<double> aperture_levels;
  std::vector<SensorParams> options;

  static ParamGrid from_levels(std::vector<int> iso, std::vector<Rational> shutter,
                               std::vector<double> aperture);

  int size() const { return static_cast<int>(options.size()); }
  // Canonical index, or -1 when the option is not in the grid.
  int index_of(const SensorParams& p) const;

  nlohmann::ordered_json to_json() const;
  static ParamGrid from_json(const nlohmann::json& j);
};

// ISO {250, 2000, 16000} x shutter {1/4, 1/60, 1/1000} s x f/{5.0, 9.0, 16.0}.
ParamGrid build_default_grid();

// cost(p) = shutter_s(p) + per_shot_overhead_s. Zero overhead reproduces the
// published capture times (2.409 s for the full grid).
struct CaptureCostModel {
  Rational per_shot_overhead_s{0};
};

Rational capture_cost(const SensorParams& p, const CaptureCostModel& m);
Rational total_cost(std::span<const SensorParams> params, const CaptureCostModel& m);

// Partition geometry for grid-based candidate selection: one cell for
// k in [1,7], a 2x2x2 split for k in [8,26] (each axis split into
// {lowest level} and {middle, highest}), singleton cells for k = 27.
// Requires a 3x3x3 grid; rejects k outside [1, 27].
std::vector<std::vector<SensorParams>> partition_grid(const ParamGrid& grid, int k);

}  // namespace lens
