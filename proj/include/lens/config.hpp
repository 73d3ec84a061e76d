#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lens/param_space.hpp"
#include "lens/perception.hpp"
#include "lens/scene_sim.hpp"
#include "lens/selection.hpp"

namespace lens {

// Everything a benchmark run needs, parsed from a key=value config file with
// CLI overrides on top. `out` and `jobs` are execution details and stay out
// of the fingerprint.
struct BenchConfig {
  int num_classes = 20;
  int samples_per_class = 5;
  int scene_size = 32;
  SceneMode mode = SceneMode::kReflective;
  std::vector<std::string> light_ids = {"L1", "L2", "L3", "L4", "L6", "L7"};

  std::vector<int> iso_levels = {250, 2000, 16000};
  std::vector<Rational> shutter_levels = {Rational(1, 4), Rational(1, 60), Rational(1, 1000)};
  std::vector<double> aperture_levels = {5.0, 9.0, 16.0};
  Rational overhead_s{0};

  double f_ref = 9.0;
  double sigma_read = 0.01;
  double sigma_shot = 0.02;
  double emissive_scale = 30.0;
  double ambient_coupling = 0.05;

  TrainHyper hyper;
  ScorerId scorer = ScorerId::kConfidence;
  std::vector<std::string> policies = {"lens", "random", "oracle_s", "oracle_f", "ae"};
  Csa csa = Csa::kFull;
  int k = 6;
  std::vector<int> ks = {1, 3, 6, 9, 12, 18, 27};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  AeMode ae_mode = AeMode::kTop1;

  std::string out = "out";
  int jobs = 1;

  ParamGrid grid() const;
  ExposureConstants constants() const;
  CaptureCostModel cost_model() const;
  std::vector<LightCondition> lights() const;

  // Every semantic field as normalized key/value text, sorted by key. The
  // fingerprint is the FNV-1a 64 hash of canonical_text().
  std::map<std::string, std::string> canonical_entries() const;
  std::string canonical_text() const;
  std::uint64_t fingerprint() const;

  // Throws ConfigError when any invariant is broken.
  void validate() const;
};

// One `key = value` assignment; unknown keys and malformed values throw
// ConfigError. `origin` names the source in error messages.
void apply_config_entry(BenchConfig& config, const std::string& key, const std::string& value,
                        const std::string& origin);

// '#' comments and blank lines are ignored.
BenchConfig parse_config_text(const std::string& text, const std::string& origin);
BenchConfig parse_config_file(const std::string& path);

}  // namespace lens
