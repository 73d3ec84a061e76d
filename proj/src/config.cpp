#include "lens/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "lens/errors.hpp"
#include "lens/format.hpp"
#include "lens/rng.hpp"

namespace lens {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(s.substr(start)));
      break;
    }
    out.push_back(trim(s.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("bad " + what + ": '" + s + "'");
  }
  return v;
}

double parse_decimal(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("bad " + what + ": '" + s + "'");
  }
  return v;
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& s, const F& one) {
  std::vector<T> out;
  for (const std::string& item : split_list(s)) out.push_back(one(item));
  if (out.empty()) throw ConfigError("empty list value");
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ",";
    out += items[i];
  }
  return out;
}

}  // namespace

ParamGrid BenchConfig::grid() const {
  return ParamGrid::from_levels(iso_levels, shutter_levels, aperture_levels);
}

ExposureConstants BenchConfig::constants() const {
  ExposureConstants c;
  c.f_ref = f_ref;
  c.sigma_read = sigma_read;
  c.sigma_shot = sigma_shot;
  c.emissive_scale = emissive_scale;
  c.ambient_coupling = ambient_coupling;
  c.solve_exposure_scale();
  return c;
}

CaptureCostModel BenchConfig::cost_model() const { return CaptureCostModel{overhead_s}; }

std::vector<LightCondition> BenchConfig::lights() const {
  std::vector<LightCondition> out;
  out.reserve(light_ids.size());
  for (const std::string& id : light_ids) out.push_back(light_by_id(id));
  return out;
}

std::map<std::string, std::string> BenchConfig::canonical_entries() const {
  std::map<std::string, std::string> kv;
  kv["num_classes"] = std::to_string(num_classes);
  kv["samples_per_class"] = std::to_string(samples_per_class);
  kv["scene_size"] = std::to_string(scene_size);
  kv["mode"] = mode_to_string(mode);
  kv["lights"] = join(light_ids);
  {
    std::vector<std::string> items;
    for (int v : iso_levels) items.push_back(std::to_string(v));
    kv["iso_levels"] = join(items);
    items.clear();
    for (const Rational& v : shutter_levels) items.push_back(rational_to_string(v));
    kv["shutter_levels"] = join(items);
    items.clear();
    for (double v : aperture_levels) items.push_back(format_double(v));
    kv["aperture_levels"] = join(items);
    items.clear();
    for (std::uint64_t v : seeds) items.push_back(std::to_string(v));
    kv["seeds"] = join(items);
    items.clear();
    for (int v : ks) items.push_back(std::to_string(v));
    kv["ks"] = join(items);
  }
  kv["overhead_s"] = rational_to_string(overhead_s);
  kv["f_ref"] = format_double(f_ref);
  kv["sigma_read"] = format_double(sigma_read);
  kv["sigma_shot"] = format_double(sigma_shot);
  kv["emissive_scale"] = format_double(emissive_scale);
  kv["ambient_coupling"] = format_double(ambient_coupling);
  kv["train_steps"] = std::to_string(hyper.steps);
  kv["train_lr"] = format_double(hyper.learning_rate);
  kv["train_l2"] = format_double(hyper.l2);
  kv["scorer"] = scorer_to_string(scorer);
  kv["policies"] = join(policies);
  kv["csa"] = csa_to_string(csa);
  kv["k"] = std::to_string(k);
  kv["ae_mode"] = ae_mode_to_string(ae_mode);
  return kv;
}

std::string BenchConfig::canonical_text() const {
  std::string text;
  for (const auto& [key, value] : canonical_entries()) text += key + "=" + value + "\n";
  return text;
}

std::uint64_t BenchConfig::fingerprint() const { return fnv1a64(canonical_text()); }

void BenchConfig::validate() const {
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (samples_per_class < 1) throw ConfigError("samples_per_class must be >= 1");
  if (scene_size < 8) throw ConfigError("scene_size must be >= 8");
  if (light_ids.empty()) throw ConfigError("lights must be non-empty");
  try {
    (void)lights();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad light id: ") + e.what());
  }
  ParamGrid g;
  try {
    g = grid();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad grid spec: ") + e.what());
  }
  ExposureConstants c;
  try {
    c = constants();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad exposure constants: ") + e.what());
  }
  for (int iso : iso_levels) {
    try {
      (void)c.gain(iso);
    } catch (const std::exception&) {
      throw ConfigError("no sensor gain defined for ISO " + std::to_string(iso));
    }
  }
  if (overhead_s < Rational(0)) throw ConfigError("overhead_s must be >= 0");
  if (sigma_read < 0 || sigma_shot < 0) throw ConfigError("noise sigmas must be >= 0");
  if (f_ref <= 0 || emissive_scale <= 0 || ambient_coupling < 0) {
    throw ConfigError("exposure constants must be positive");
  }
  if (hyper.steps < 1 || hyper.learning_rate <= 0 || hyper.l2 < 0) {
    throw ConfigError("bad training hyperparameters");
  }
  if (policies.empty()) throw ConfigError("policies must be non-empty");
  for (const std::string& p : policies) {
    if (p != "lens" && p != "random" && p != "oracle_s" && p != "oracle_f" && p != "ae") {
      throw ConfigError("unknown policy: " + p);
    }
  }
  const int n = static_cast<int>(g.size());
  if (k < 1 || k > n) throw ConfigError("k must be in [1, " + std::to_string(n) + "]");
  for (int kv : ks) {
    if (kv < 1 || kv > n) throw ConfigError("ks entries must be in [1, " + std::to_string(n) + "]");
  }
  if (seeds.empty()) throw ConfigError("seeds must be non-empty");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (out.empty()) throw ConfigError("out must be non-empty");
}

void apply_config_entry(BenchConfig& config, const std::string& key, const std::string& value,
                        const std::string& origin) {
  try {
    if (key == "num_classes") {
      config.num_classes = parse_number<int>(value, key);
    } else if (key == "samples_per_class") {
      config.samples_per_class = parse_number<int>(value, key);
    } else if (key == "scene_size") {
      config.scene_size = parse_number<int>(value, key);
    } else if (key == "mode") {
      config.mode = mode_from_string(value);
    } else if (key == "lights") {
      config.light_ids = parse_list<std::string>(value, [](const std::string& s) { return s; });
    } else if (key == "iso_levels") {
      config.iso_levels =
          parse_list<int>(value, [&](const std::string& s) { return parse_number<int>(s, key); });
    } else if (key == "shutter_levels") {
      config.shutter_levels =
          parse_list<Rational>(value, [](const std::string& s) { return parse_rational(s); });
    } else if (key == "aperture_levels") {
      config.aperture_levels =
          parse_list<double>(value, [&](const std::string& s) { return parse_decimal(s, key); });
    } else if (key == "overhead_s") {
      config.overhead_s = parse_rational(value);
    } else if (key == "f_ref") {
      config.f_ref = parse_decimal(value, key);
    } else if (key == "sigma_read") {
      config.sigma_read = parse_decimal(value, key);
    } else if (key == "sigma_shot") {
      config.sigma_shot = parse_decimal(value, key);
    } else if (key == "emissive_scale") {
      config.emissive_scale = parse_decimal(value, key);
    } else if (key == "ambient_coupling") {
      config.ambient_coupling = parse_decimal(value, key);
    } else if (key == "train_steps") {
      config.hyper.steps = parse_number<int>(value, key);
    } else if (key == "train_lr") {
      config.hyper.learning_rate = parse_decimal(value, key);
    } else if (key == "train_l2") {
      config.hyper.l2 = parse_decimal(value, key);
    } else if (key == "scorer") {
      config.scorer = scorer_from_string(value);
    } else if (key == "policies") {
      config.policies = parse_list<std::string>(value, [](const std::string& s) { return s; });
    } else if (key == "csa") {
      config.csa = csa_from_string(value);
    } else if (key == "k") {
      config.k = parse_number<int>(value, key);
    } else if (key == "ks") {
      config.ks =
          parse_list<int>(value, [&](const std::string& s) { return parse_number<int>(s, key); });
    } else if (key == "seeds") {
      config.seeds = parse_list<std::uint64_t>(
          value, [&](const std::string& s) { return parse_number<std::uint64_t>(s, key); });
    } else if (key == "ae_mode") {
      config.ae_mode = ae_mode_from_string(value);
    } else if (key == "out") {
      config.out = value;
    } else if (key == "jobs") {
      config.jobs = parse_number<int>(value, key);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": bad value for '" + key + "': " + e.what());
  }
}

BenchConfig parse_config_text(const std::string& text, const std::string& origin) {
  BenchConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + " line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + " line " + std::to_string(line_no) + ": empty key");
    }
    apply_config_entry(config, key, value, origin + " line " + std::to_string(line_no));
  }
  return config;
}

BenchConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace lens
