#pragma once

// Flat "key = value" run configuration. Unknown keys are rejected so a typo
// never silently falls back to a default.

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "maniprim/error.hpp"
#include "maniprim/extraction.hpp"
#include "maniprim/gaussian_hmm.hpp"
#include "maniprim/hmm.hpp"
#include "maniprim/synth.hpp"
#include "maniprim/text.hpp"

namespace maniprim {

struct Config {
  // signals / extraction
  double rate = kDefaultRate;
  ExtractionConfig extraction;
  std::string profile;  // tabulated profile CSV; empty = minimum jerk

  // discrete HMM search
  std::size_t hmm_states_min = 3;
  std::size_t hmm_states_max = 10;
  std::vector<Topology> hmm_topologies{Topology::bakis, Topology::ergodic};
  std::size_t hmm_restarts = 5;
  double hmm_epsilon = 0.01;
  std::size_t hmm_max_iter = 100;
  double hmm_tol = 1e-6;

  // raw Gaussian baseline
  std::size_t gmm_components = 2;
  std::size_t gmm_states_min = 3;
  std::size_t gmm_states_max = 6;
  std::vector<Topology> gmm_topologies{Topology::bakis, Topology::ergodic};
  std::size_t gmm_restarts = 2;
  std::size_t gmm_max_iter = 50;
  double gmm_tol = 1e-6;
  bool raw_full = false;
  std::size_t raw_decimate = 2;

  // synth
  std::size_t n_subjects = 5;
  std::size_t trials_per_action = 6;
  NoiseSigma noise = default_noise();
  double noise_scale = 1.0;  // multiplies all four sigmas
  double subject_jitter = 0.1;
  bool extreme_subjects = false;

  // evaluation split and seeding
  std::vector<std::string> test_subjects{"s4", "s5"};
  std::uint64_t seed = 42;

  SelectionOptions selection() const {
    SelectionOptions s;
    s.states.clear();
    for (auto n = hmm_states_min; n <= hmm_states_max; ++n) s.states.push_back(n);
    s.topologies = hmm_topologies;
    s.restarts = hmm_restarts;
    s.train.epsilon = hmm_epsilon;
    s.train.max_iter = hmm_max_iter;
    s.train.tol = hmm_tol;
    s.train.seed = seed;
    return s;
  }

  GaussianSelectionOptions gaussian_selection() const {
    GaussianSelectionOptions s;
    s.states.clear();
    for (auto n = gmm_states_min; n <= gmm_states_max; ++n) s.states.push_back(n);
    s.topologies = gmm_topologies;
    s.restarts = gmm_restarts;
    s.train.components = gmm_components;
    s.train.max_iter = gmm_max_iter;
    s.train.tol = gmm_tol;
    s.train.seed = seed;
    return s;
  }

  DatasetConfig dataset() const {
    DatasetConfig d;
    d.n_subjects = n_subjects;
    d.trials_per_action = trials_per_action;
    d.noise = noise.scaled(noise_scale);
    d.jitter = subject_jitter;
    d.extreme_subjects = extreme_subjects;
    d.rate = rate;
    d.seed = seed;
    return d;
  }

  void validate() const;
};

namespace detail {

inline std::string config_where(const std::string& origin, std::size_t line) {
  return origin + ":" + std::to_string(line);
}

inline double config_real(const std::string& key, const std::string& v) {
  const auto d = text::parse_double(v);
  if (!d || !std::isfinite(*d)) throw ArgumentError("config: '" + key + "' expects a number, got '" + v + "'");
  return *d;
}

inline std::uint64_t config_uint(const std::string& key, const std::string& v) {
  const auto s = text::trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ArgumentError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

inline bool config_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ArgumentError("config: '" + key + "' expects true/false, got '" + v + "'");
}

inline std::vector<std::string> config_list(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& item : text::split(v, ','))
    if (const auto s = text::trim(item); !s.empty()) out.emplace_back(s);
  return out;
}

inline std::vector<Topology> config_topologies(const std::string& key, const std::string& v) {
  std::vector<Topology> out;
  for (const auto& s : config_list(v)) {
    if (s != "bakis" && s != "ergodic") throw ArgumentError("config: '" + key + "' has unknown topology '" + s + "'");
    out.push_back(parse_topology(s));
  }
  return out;
}

using ConfigSetter = std::function<void(Config&, const std::string&, const std::string&)>;

inline const std::map<std::string, ConfigSetter>& config_keys() {
  static const std::map<std::string, ConfigSetter> keys = [] {
    std::map<std::string, ConfigSetter> k;
    auto real = [](double Config::*f) {
      return [f](Config& c, const std::string& key, const std::string& v) { c.*f = config_real(key, v); };
    };
    auto size = [](std::size_t Config::*f) {
      return [f](Config& c, const std::string& key, const std::string& v) { c.*f = config_uint(key, v); };
    };
    k["rate"] = real(&Config::rate);
    k["profile"] = [](Config& c, const std::string&, const std::string& v) { c.profile = v; };
    k["smooth_window"] = [](Config& c, const std::string& key, const std::string& v) {
      c.extraction.smooth_window = config_uint(key, v);
    };
    k["min_reach_magnitude"] = [](Config& c, const std::string& key, const std::string& v) {
      c.extraction.min_reach_magnitude = config_real(key, v);
    };
    k["min_rotate_magnitude"] = [](Config& c, const std::string& key, const std::string& v) {
      c.extraction.min_rotate_magnitude = config_real(key, v);
    };
    k["debounce"] = [](Config& c, const std::string& key, const std::string& v) {
      c.extraction.debounce = config_uint(key, v);
    };
    k["peak_min_prominence"] = [](Config& c, const std::string& key, const std::string& v) {
      c.extraction.peak_min_prominence = config_real(key, v);
    };
    k["fit_max_sweeps"] = [](Config& c, const std::string& key, const std::string& v) {
      c.extraction.max_sweeps = config_uint(key, v);
    };
    k["fit_tolerance"] = [](Config& c, const std::string& key, const std::string& v) {
      c.extraction.fit_tolerance = config_real(key, v);
    };

    k["hmm_states_min"] = size(&Config::hmm_states_min);
    k["hmm_states_max"] = size(&Config::hmm_states_max);
    k["hmm_topologies"] = [](Config& c, const std::string& key, const std::string& v) {
      c.hmm_topologies = config_topologies(key, v);
    };
    k["hmm_restarts"] = size(&Config::hmm_restarts);
    k["hmm_epsilon"] = real(&Config::hmm_epsilon);
    k["hmm_max_iter"] = size(&Config::hmm_max_iter);
    k["hmm_tol"] = real(&Config::hmm_tol);

    k["gmm_components"] = size(&Config::gmm_components);
    k["gmm_states_min"] = size(&Config::gmm_states_min);
    k["gmm_states_max"] = size(&Config::gmm_states_max);
    k["gmm_topologies"] = [](Config& c, const std::string& key, const std::string& v) {
      c.gmm_topologies = config_topologies(key, v);
    };
    k["gmm_restarts"] = size(&Config::gmm_restarts);
    k["gmm_max_iter"] = size(&Config::gmm_max_iter);
    k["gmm_tol"] = real(&Config::gmm_tol);
    k["raw_features"] = [](Config& c, const std::string& key, const std::string& v) {
      if (v != "reduced" && v != "full") throw ArgumentError("config: '" + key + "' must be reduced or full");
      c.raw_full = v == "full";
    };
    k["raw_decimate"] = size(&Config::raw_decimate);

    k["n_subjects"] = size(&Config::n_subjects);
    k["trials_per_action"] = size(&Config::trials_per_action);
    k["noise_velocity"] = [](Config& c, const std::string& key, const std::string& v) {
      c.noise.velocity = config_real(key, v);
    };
    k["noise_angular"] = [](Config& c, const std::string& key, const std::string& v) {
      c.noise.angular = config_real(key, v);
    };
    k["noise_pressure"] = [](Config& c, const std::string& key, const std::string& v) {
      c.noise.pressure = config_real(key, v);
    };
    k["noise_bend"] = [](Config& c, const std::string& key, const std::string& v) {
      c.noise.bend = config_real(key, v);
    };
    k["noise_scale"] = real(&Config::noise_scale);
    k["subject_jitter"] = real(&Config::subject_jitter);
    k["extreme_subjects"] = [](Config& c, const std::string& key, const std::string& v) {
      c.extreme_subjects = config_bool(key, v);
    };

    k["test_subjects"] = [](Config& c, const std::string&, const std::string& v) { c.test_subjects = config_list(v); };
    k["seed"] = [](Config& c, const std::string& key, const std::string& v) { c.seed = config_uint(key, v); };
    return k;
  }();
  return keys;
}

}  // namespace detail

inline std::vector<std::string> config_key_names() {
  std::vector<std::string> out;
  for (const auto& [k, _] : detail::config_keys()) out.push_back(k);
  return out;
}

inline void set_config_value(Config& cfg, const std::string& key, const std::string& value) {
  const auto& keys = detail::config_keys();
  const auto it = keys.find(key);
  if (it == keys.end()) throw ArgumentError("config: unknown key '" + key + "'");
  it->second(cfg, key, value);
}

inline void Config::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ArgumentError("config: " + what);
  };
  require(rate > 0.0, "rate must be positive");
  require(extraction.smooth_window % 2 == 1, "smooth_window must be odd");
  require(extraction.min_reach_magnitude > 0.0, "min_reach_magnitude must be positive");
  require(extraction.min_rotate_magnitude > 0.0, "min_rotate_magnitude must be positive");
  require(extraction.debounce >= 1, "debounce must be at least 1");
  require(extraction.peak_min_prominence > 0.0, "peak_min_prominence must be positive");
  require(extraction.max_sweeps >= 1, "fit_max_sweeps must be at least 1");
  require(extraction.fit_tolerance > 0.0, "fit_tolerance must be positive");
  require(hmm_states_min >= 1 && hmm_states_min <= hmm_states_max, "hmm state range is empty");
  require(!hmm_topologies.empty(), "hmm_topologies is empty");
  require(hmm_restarts >= 1, "hmm_restarts must be at least 1");
  require(hmm_epsilon >= 0.0, "hmm_epsilon must be non-negative");
  require(hmm_max_iter >= 1, "hmm_max_iter must be at least 1");
  require(hmm_tol >= 0.0, "hmm_tol must be non-negative");
  require(gmm_components >= 1, "gmm_components must be at least 1");
  require(gmm_states_min >= 1 && gmm_states_min <= gmm_states_max, "gmm state range is empty");
  require(!gmm_topologies.empty(), "gmm_topologies is empty");
  require(gmm_restarts >= 1, "gmm_restarts must be at least 1");
  require(gmm_max_iter >= 1, "gmm_max_iter must be at least 1");
  require(raw_decimate >= 1, "raw_decimate must be at least 1");
  require(n_subjects >= 2, "n_subjects must be at least 2");
  require(trials_per_action >= 1, "trials_per_action must be at least 1");
  require(noise.velocity >= 0.0 && noise.angular >= 0.0 && noise.pressure >= 0.0 && noise.bend >= 0.0 &&
              noise_scale >= 0.0,
          "noise sigmas must be non-negative");
  require(subject_jitter >= 0.0 && subject_jitter <= 0.3, "subject_jitter must lie in [0, 0.3]");
}

inline Config parse_config(const std::string& content, const std::string& origin = "config") {
  Config cfg;
  std::set<std::string> seen;
  std::size_t n = 0;
  for (const auto& raw : text::lines(content)) {
    ++n;
    auto line = std::string_view(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ArgumentError(detail::config_where(origin, n) + ": expected 'key = value'");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    if (key.empty()) throw ArgumentError(detail::config_where(origin, n) + ": missing key");
    if (!seen.insert(key).second)
      throw ArgumentError(detail::config_where(origin, n) + ": duplicate key '" + key + "'");
    try {
      set_config_value(cfg, key, value);
    } catch (const ArgumentError& e) {
      throw ArgumentError(detail::config_where(origin, n) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

inline Config load_config(const std::string& path) { return parse_config(text::read_file(path), path); }

// Writes every key with its current value; parse_config(config_to_text(c)) == c.
inline std::string config_to_text(const Config& c) {
  auto topo = [](const std::vector<Topology>& ts) {
    std::string out;
    for (auto t : ts) out += (out.empty() ? "" : ",") + std::string(topology_name(t));
    return out;
  };
  std::string subjects;
  for (const auto& s : c.test_subjects) subjects += (subjects.empty() ? "" : ",") + s;
  std::string out;
  auto put = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  put("rate", text::fmt_exact(c.rate));
  if (!c.profile.empty()) put("profile", c.profile);
  put("smooth_window", std::to_string(c.extraction.smooth_window));
  put("min_reach_magnitude", text::fmt_exact(c.extraction.min_reach_magnitude));
  put("min_rotate_magnitude", text::fmt_exact(c.extraction.min_rotate_magnitude));
  put("debounce", std::to_string(c.extraction.debounce));
  put("peak_min_prominence", text::fmt_exact(c.extraction.peak_min_prominence));
  put("fit_max_sweeps", std::to_string(c.extraction.max_sweeps));
  put("fit_tolerance", text::fmt_exact(c.extraction.fit_tolerance));
  put("hmm_states_min", std::to_string(c.hmm_states_min));
  put("hmm_states_max", std::to_string(c.hmm_states_max));
  put("hmm_topologies", topo(c.hmm_topologies));
  put("hmm_restarts", std::to_string(c.hmm_restarts));
  put("hmm_epsilon", text::fmt_exact(c.hmm_epsilon));
  put("hmm_max_iter", std::to_string(c.hmm_max_iter));
  put("hmm_tol", text::fmt_exact(c.hmm_tol));
  put("gmm_components", std::to_string(c.gmm_components));
  put("gmm_states_min", std::to_string(c.gmm_states_min));
  put("gmm_states_max", std::to_string(c.gmm_states_max));
  put("gmm_topologies", topo(c.gmm_topologies));
  put("gmm_restarts", std::to_string(c.gmm_restarts));
  put("gmm_max_iter", std::to_string(c.gmm_max_iter));
  put("gmm_tol", text::fmt_exact(c.gmm_tol));
  put("raw_features", c.raw_full ? "full" : "reduced");
  put("raw_decimate", std::to_string(c.raw_decimate));
  put("n_subjects", std::to_string(c.n_subjects));
  put("trials_per_action", std::to_string(c.trials_per_action));
  put("noise_velocity", text::fmt_exact(c.noise.velocity));
  put("noise_angular", text::fmt_exact(c.noise.angular));
  put("noise_pressure", text::fmt_exact(c.noise.pressure));
  put("noise_bend", text::fmt_exact(c.noise.bend));
  put("noise_scale", text::fmt_exact(c.noise_scale));
  put("subject_jitter", text::fmt_exact(c.subject_jitter));
  put("extreme_subjects", c.extreme_subjects ? "true" : "false");
  put("test_subjects", subjects);
  put("seed", std::to_string(c.seed));
  return out;
}

}  // namespace maniprim
