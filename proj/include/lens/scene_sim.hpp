#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lens/param_space.hpp"
#include "lens/rng.hpp"

namespace lens {

// Two-source studio lighting; left/right drive levels in {0, 127, 255}.
// (0, 0) is excluded, matching the six usable conditions L1-L7 (w/o L5).
struct LightCondition {
  int left = 255;
  int right = 255;
  std::string id = "L1";
};

const std::vector<LightCondition>& default_lights();
LightCondition light_by_id(const std::string& id);

enum class SceneMode { kLuminous, kReflective };

std::string mode_to_string(SceneMode m);
SceneMode mode_from_string(const std::string& s);

// Ground-truth scene content. The pattern is reflectance in reflective mode
// and emissive radiance in luminous mode, values in [0, 1], row-major.
struct Scene {
  std::string scene_id;
  int class_id = 0;
  int height = 32;
  int width = 32;
  std::vector<double> pattern;
  SceneMode mode = SceneMode::kReflective;

  double at(int y, int x) const { return pattern[static_cast<std::size_t>(y) * width + x]; }
};

// An 8-bit rendered capture; every pixel is k/255 for k in [0, 255].
struct CapturedImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
  SensorParams params;
  LightCondition light;
  std::string scene_id;
  SceneMode mode = SceneMode::kReflective;

  double pixel_unit(int y, int x) const {
    return pixels[static_cast<std::size_t>(y) * width + x] / 255.0;
  }
};

// Radiometric constants of the simulated camera. exposure_scale is solved at
// construction so that a uniform reflectance-0.5 scene under (255, 255) at
// (ISO 2000, 1/60 s, f/9) lands at mean pre-noise exposure 0.5.
struct ExposureConstants {
  double f_ref = 9.0;
  std::map<int, double> iso_gain = {{250, 0.125}, {2000, 1.0}, {16000, 8.0}};
  double exposure_scale = 60.0;
  double sigma_read = 0.01;
  double sigma_shot = 0.02;
  double emissive_scale = 30.0;
  double ambient_coupling = 0.05;

  static ExposureConstants calibrated();
  // Re-solves exposure_scale for the current gains/f_ref.
  void solve_exposure_scale();

  double gain(int iso) const;
  // shutter * gain * (f_ref / f)^2 — the exposure product AE reasons about.
  double exposure_product(const SensorParams& p) const;
};

// Mid-gray target the auto-exposure baseline meters for.
inline constexpr double kAutoExposeTarget = 0.18;

// num_classes x samples_per_class scenes, reproducible from master_seed.
// Class templates are random low-frequency fields, resampled until every
// pair differs by > 0.1 in at least 10% of pixels; samples add low-frequency
// jitter on top of their class template.
std::vector<Scene> generate_dataset(int num_classes, int samples_per_class, SceneMode mode,
                                    std::uint64_t master_seed, int size = 32);

// Pre-noise exposure H per pixel (row-major).
std::vector<double> exposure_map(const Scene& scene, const LightCondition& light,
                                 const SensorParams& params, const ExposureConstants& constants);

double mean_radiance(const Scene& scene, const LightCondition& light,
                     const ExposureConstants& constants);

// Full pipeline: lighting, radiance, exposure, read+shot noise, clip to
// [0, 1], 8-bit quantization. Deterministic given noise_seed.
CapturedImage render(const Scene& scene, const LightCondition& light, const SensorParams& params,
                     const ExposureConstants& constants, std::uint64_t noise_seed);

// The five options whose exposure products are log-closest to the mid-gray
// target, best first; ties prefer lower ISO, then canonical order. Emulates
// the five auto-exposure shots of the capture rig.
std::vector<SensorParams> auto_expose(const Scene& scene, const LightCondition& light,
                                      const ParamGrid& grid, const ExposureConstants& constants);

// 8-bit PGM export for eyeballing captures.
void write_pgm(const CapturedImage& image, const std::string& path);

}  // namespace lens
