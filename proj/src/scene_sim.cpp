#include "lens/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace lens {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

const std::vector<LightCondition>& default_lights() {
  static const std::vector<LightCondition> lights = {
      {255, 255, "L1"}, {127, 127, "L2"}, {255, 0, "L3"},
      {0, 255, "L4"},   {127, 0, "L6"},   {0, 127, "L7"},
  };
  return lights;
}

LightCondition light_by_id(const std::string& id) {
  for (const LightCondition& l : default_lights())
    if (l.id == id) return l;
  throw std::invalid_argument("unknown light condition: '" + id + "'");
}

std::string mode_to_string(SceneMode m) {
  return m == SceneMode::kLuminous ? "luminous" : "reflective";
}

SceneMode mode_from_string(const std::string& s) {
  if (s == "luminous") return SceneMode::kLuminous;
  if (s == "reflective") return SceneMode::kReflective;
  throw std::invalid_argument("unknown scene mode: '" + s + "'");
}

ExposureConstants ExposureConstants::calibrated() {
  ExposureConstants c;
  c.solve_exposure_scale();
  return c;
}

void ExposureConstants::solve_exposure_scale() {
  // 0.5 * (1/60) * gain(2000) * (f_ref/9)^2 * X = 0.5
  double g = iso_gain.count(2000) ? iso_gain.at(2000) : 1.0;
  double f = (f_ref / 9.0) * (f_ref / 9.0);
  exposure_scale = 1.0 / ((1.0 / 60.0) * g * f);
}

double ExposureConstants::gain(int iso) const {
  auto it = iso_gain.find(iso);
  if (it == iso_gain.end())
    throw std::invalid_argument("no gain configured for ISO " + std::to_string(iso));
  return it->second;
}

double ExposureConstants::exposure_product(const SensorParams& p) const {
  double fr = f_ref / p.aperture_f;
  return rational_to_double(p.shutter_s) * gain(p.iso) * fr * fr;
}

namespace {

// Random low-frequency field in [0, 1]: a handful of cosine modes with
// frequencies up to 3 cycles per image, min-max normalized.
std::vector<double> low_frequency_field(Rng& rng, int size) {
  constexpr int kModes = 6;
  std::vector<double> field(static_cast<std::size_t>(size) * size, 0.0);
  for (int m = 0; m < kModes; ++m) {
    int fu = 0, fv = 0;
    while (fu == 0 && fv == 0) {
      fu = static_cast<int>(rng.next_below(4));
      fv = static_cast<int>(rng.next_below(4));
    }
    double amplitude = rng.next_gaussian() / (1.0 + 0.5 * (fu + fv));
    double phase = kTwoPi * rng.next_unit();
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        field[static_cast<std::size_t>(y) * size + x] +=
            amplitude * std::cos(kTwoPi * (fu * x + fv * y) / size + phase);
  }
  auto [lo, hi] = std::minmax_element(field.begin(), field.end());
  double span = *hi - *lo;
  if (span < 1e-9) return {};  // degenerate, caller resamples
  for (double& v : field) v = (v - *lo) / span;
  return field;
}

// Fraction of pixels where the two fields differ by more than 0.1.
double separation(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 0.1) ++hits;
  return static_cast<double>(hits) / static_cast<double>(a.size());
}

// Class identity lives in a horizontal band profile: the template varies
// only along y, so clipping fronts, quantization banding and the lighting
// ramp — all x-structured — read as class-neutral offsets instead of fake
// class evidence. The band sits on a high base so its top-to-bottom ratio is
// small: once exposure starts clipping the band, one more grid step
// saturates it completely, and partially clipped profiles — the captures
// that read as a wrong class with high confidence — exist for at most one
// exposure step per episode.
//
// Each sample gets a bright vertical stripe and a black one, class-neutral
// distractors keyed by sample index alone and shared by every class: with a
// handful of samples per class, per-scene geometry would hand the classifier
// a memorizable scene fingerprint that survives exposures where the real
// class signal is gone. The bright stripe drags mid-gray metering down so
// auto-exposed captures render the band dim, and it anchors per-image
// contrast at low exposure so underexposed frames standardize into low,
// flat scores instead of amplified noise. The black stripe never clips, so
// heavily overexposed frames keep a wide dark area and residual ramps and
// speckle stay small after standardization instead of blowing up into
// confident garbage. Sample jitter sets the within-class spread against the
// between-class profile margin.
constexpr double kInfoBase = 0.24;
constexpr double kProfileContrast = 0.30;
constexpr double kStripeLevel = 0.95;
constexpr double kStripeMinFrac = 0.45;
constexpr double kStripeMaxFrac = 0.60;
constexpr double kDarkMinFrac = 0.08;
constexpr double kDarkMaxFrac = 0.15;
constexpr double kSampleJitter = 0.15;
constexpr double kSampleSepMin = 0.12;

// Random smooth band profile: a few cosine modes along y, min-max
// normalized, then banded onto [kInfoBase, kInfoBase + kProfileContrast].
std::vector<double> low_frequency_profile(Rng& rng, int size) {
  constexpr int kModes = 4;
  std::vector<double> prof(static_cast<std::size_t>(size), 0.0);
  for (int m = 0; m < kModes; ++m) {
    int f = 1 + static_cast<int>(rng.next_below(3));
    double amplitude = rng.next_gaussian() / (1.0 + 0.5 * f);
    double phase = kTwoPi * rng.next_unit();
    for (int y = 0; y < size; ++y)
      prof[static_cast<std::size_t>(y)] += amplitude * std::cos(kTwoPi * f * y / size + phase);
  }
  auto [lo, hi] = std::minmax_element(prof.begin(), prof.end());
  double span = *hi - *lo;
  if (span < 1e-9) return {};  // degenerate, caller resamples
  for (double& v : prof) v = kInfoBase + kProfileContrast * (v - *lo) / span;
  return prof;
}

// Per-sample geometry drawn independently of the class template, so the
// template can be resampled without moving stripes or jitter fields.
struct SampleGeometry {
  std::vector<double> jitter;
  int stripe_x = 0;
  int stripe_w = 1;
  int dark_x = 0;
  int dark_w = 1;
};

SampleGeometry sample_geometry(std::uint64_t master_seed, int s, int size) {
  Rng rng(derive_seed(master_seed, {tag(SeedPurpose::kJitter), static_cast<std::uint64_t>(s)}));
  SampleGeometry geo;
  geo.jitter = low_frequency_field(rng, size);
  geo.stripe_w = static_cast<int>(std::lround(
      (kStripeMinFrac + (kStripeMaxFrac - kStripeMinFrac) * rng.next_unit()) * size));
  geo.stripe_w = std::clamp(geo.stripe_w, 1, size - 4);
  geo.stripe_x = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(size - geo.stripe_w + 1)));
  geo.dark_w = static_cast<int>(
      std::lround((kDarkMinFrac + (kDarkMaxFrac - kDarkMinFrac) * rng.next_unit()) * size));
  int widest_side = std::max(geo.stripe_x, size - (geo.stripe_x + geo.stripe_w));
  geo.dark_w = std::clamp(geo.dark_w, 1, std::max(1, widest_side));
  // The dark stripe lands left or right of the bright one, never overlapping.
  int left_slots = std::max(0, geo.stripe_x - geo.dark_w + 1);
  int right_slots = std::max(0, size - geo.dark_w - (geo.stripe_x + geo.stripe_w) + 1);
  int pick = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(left_slots + right_slots)));
  geo.dark_x = pick < left_slots ? pick : geo.stripe_x + geo.stripe_w + (pick - left_slots);
  return geo;
}

std::vector<double> render_sample_pattern(const std::vector<double>& profile,
                                          const SampleGeometry& geo, int size) {
  std::vector<double> out(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * size + x;
      if (x >= geo.stripe_x && x < geo.stripe_x + geo.stripe_w) {
        out[i] = kStripeLevel;
      } else if (x >= geo.dark_x && x < geo.dark_x + geo.dark_w) {
        out[i] = 0.0;
      } else {
        double v = profile[static_cast<std::size_t>(y)];
        if (!geo.jitter.empty()) v += kSampleJitter * (geo.jitter[i] - 0.5);
        // The info band stays dim: jitter never pushes it near the stripe.
        out[i] = std::clamp(v, 0.06, 0.62);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Scene> generate_dataset(int num_classes, int samples_per_class, SceneMode mode,
                                    std::uint64_t master_seed, int size) {
  if (num_classes < 2) throw std::invalid_argument("generate_dataset: need at least 2 classes");
  if (samples_per_class < 1)
    throw std::invalid_argument("generate_dataset: need at least 1 sample per class");
  if (size < 8) throw std::invalid_argument("generate_dataset: pattern size too small");

  std::vector<SampleGeometry> geometry;
  geometry.reserve(static_cast<std::size_t>(samples_per_class));
  for (int s = 0; s < samples_per_class; ++s)
    geometry.push_back(sample_geometry(master_seed, s, size));

  // Cross-class separation is enforced on the finished sample patterns, with
  // headroom over the 10%-of-pixels guarantee; a class whose samples sit too
  // close to an earlier class gets its template resampled.
  std::vector<std::vector<std::vector<double>>> patterns;
  patterns.reserve(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    std::vector<std::vector<double>> candidate;
    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 500 && !ok; ++attempt) {
      Rng rng(derive_seed(master_seed,
                          {tag(SeedPurpose::kTemplate), static_cast<std::uint64_t>(c), attempt}));
      std::vector<double> profile = low_frequency_profile(rng, size);
      if (profile.empty()) continue;
      candidate.clear();
      for (int s = 0; s < samples_per_class; ++s)
        candidate.push_back(
            render_sample_pattern(profile, geometry[static_cast<std::size_t>(s)], size));
      ok = true;
      for (const auto& other_class : patterns) {
        for (const auto& other : other_class) {
          for (const auto& mine : candidate)
            if (separation(mine, other) < kSampleSepMin) {
              ok = false;
              break;
            }
          if (!ok) break;
        }
        if (!ok) break;
      }
    }
    if (!ok)
      throw std::runtime_error("generate_dataset: could not separate class patterns");
    patterns.push_back(std::move(candidate));
  }

  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(num_classes) * samples_per_class);
  for (int c = 0; c < num_classes; ++c) {
    for (int s = 0; s < samples_per_class; ++s) {
      Scene scene;
      char buf[32];
      std::snprintf(buf, sizeof buf, "c%03d_s%02d", c, s);
      scene.scene_id = buf;
      scene.class_id = c;
      scene.height = scene.width = size;
      scene.mode = mode;
      scene.pattern = std::move(patterns[static_cast<std::size_t>(c)][s]);
      scenes.push_back(std::move(scene));
    }
  }
  return scenes;
}

namespace {

inline double irradiance_at(const LightCondition& light, int x, int width) {
  double wl = 1.0 - static_cast<double>(x) / (width - 1);
  double wr = static_cast<double>(x) / (width - 1);
  return (light.left / 255.0) * wl + (light.right / 255.0) * wr;
}

inline double radiance_at(const Scene& scene, double irradiance, double pattern,
                          const ExposureConstants& c) {
  if (scene.mode == SceneMode::kReflective) return pattern * irradiance;
  return c.emissive_scale * pattern + c.ambient_coupling * irradiance;
}

}  // namespace

std::vector<double> exposure_map(const Scene& scene, const LightCondition& light,
                                 const SensorParams& params, const ExposureConstants& constants) {
  double product = constants.exposure_product(params) * constants.exposure_scale;
  std::vector<double> out(scene.pattern.size());
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x) {
      double irr = irradiance_at(light, x, scene.width);
      out[static_cast<std::size_t>(y) * scene.width + x] =
          radiance_at(scene, irr, scene.at(y, x), constants) * product;
    }
  return out;
}

double mean_radiance(const Scene& scene, const LightCondition& light,
                     const ExposureConstants& constants) {
  double sum = 0.0;
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x)
      sum += radiance_at(scene, irradiance_at(light, x, scene.width), scene.at(y, x), constants);
  return sum / static_cast<double>(scene.pattern.size());
}

CapturedImage render(const Scene& scene, const LightCondition& light, const SensorParams& params,
                     const ExposureConstants& constants, std::uint64_t noise_seed) {
  CapturedImage img;
  img.height = scene.height;
  img.width = scene.width;
  img.params = params;
  img.light = light;
  img.scene_id = scene.scene_id;
  img.mode = scene.mode;
  img.pixels.resize(scene.pattern.size());

  double gain = constants.gain(params.iso);
  double product = constants.exposure_product(params) * constants.exposure_scale;
  Rng rng(noise_seed);
  // Row-major noise draw order is part of the determinism contract.
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x) {
      double irr = irradiance_at(light, x, scene.width);
      double exposure = radiance_at(scene, irr, scene.at(y, x), constants) * product;
      double sigma = constants.sigma_read * gain +
                     constants.sigma_shot * std::sqrt(std::max(exposure, 0.0));
      double value = std::clamp(exposure + sigma * rng.next_gaussian(), 0.0, 1.0);
      img.pixels[static_cast<std::size_t>(y) * scene.width + x] =
          static_cast<std::uint8_t>(std::lround(value * 255.0));
    }
  return img;
}

std::vector<SensorParams> auto_expose(const Scene& scene, const LightCondition& light,
                                      const ParamGrid& grid, const ExposureConstants& constants) {
  if (grid.options.empty()) throw std::invalid_argument("auto_expose: empty grid");
  double radiance = std::max(mean_radiance(scene, light, constants), 1e-12);
  // Product that would land mean pre-noise exposure on the mid-gray target.
  double target = kAutoExposeTarget / (radiance * constants.exposure_scale);

  struct Ranked {
    double distance;
    int iso;
    int index;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(grid.options.size());
  for (int i = 0; i < grid.size(); ++i) {
    const SensorParams& p = grid.options[i];
    double d = std::abs(std::log(constants.exposure_product(p)) - std::log(target));
    ranked.push_back({d, p.iso, i});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.iso != b.iso) return a.iso < b.iso;
    return a.index < b.index;
  });
  std::vector<SensorParams> out;
  int shots = std::min<int>(5, grid.size());
  for (int i = 0; i < shots; ++i) out.push_back(grid.options[ranked[i].index]);
  return out;
}

void write_pgm(const CapturedImage& image, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "P5\n" << image.width << " " << image.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
}

}  // namespace lens
