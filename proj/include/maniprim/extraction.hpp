#pragma once

// Trial -> token sequence: level-crossing quantization of the composite force
// and bend signals, bell fitting on the six motion channels, magnitude
// pruning, and merging of concurrent bells into compound tokens.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "maniprim/error.hpp"
#include "maniprim/profile.hpp"
#include "maniprim/signals.hpp"
#include "maniprim/tokens.hpp"

namespace maniprim {

struct LevelSet {
  double A = 0.0;
  double low = 0.0;
  double mid = 0.0;
  double high = 0.0;

  static LevelSet from_average(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw NumericError("level set needs a positive average maximum");
    return LevelSet{a, 0.15 * a, 0.45 * a, 0.75 * a};
  }

  // Thresholds no finite signal can reach; used when a channel group shows
  // no activity anywhere in the training set.
  static LevelSet inactive() {
    const double inf = std::numeric_limits<double>::infinity();
    return LevelSet{inf, inf, inf, inf};
  }
  bool active() const { return std::isfinite(A); }

  double at(Level l) const {
    switch (l) {
      case Level::low: return low;
      case Level::mid: return mid;
      case Level::high: return high;
    }
    return high;
  }
};

struct ExtractionConfig {
  double min_reach_magnitude = 0.10;  // m
  double min_rotate_magnitude = 0.5;  // rad
  std::size_t debounce = 5;           // samples
  double peak_min_prominence = 0.2;   // fraction of max |channel|
  std::size_t smooth_window = 5;      // samples
  std::size_t max_sweeps = 50;
  double fit_tolerance = 1e-6;        // MSE improvement that ends the sweeps
};

// A = mean over trials of the per-trial maximum composite signal.
inline LevelSet compute_levels(std::span<const Trial> trials, ChannelGroup group) {
  if (trials.empty()) throw ArgumentError("compute_levels: empty training set");
  double sum = 0.0;
  for (const auto& trial : trials) {
    double m = 0.0;
    for (const auto& f : trial.frames) m = std::max(m, group_norm(f, group));
    sum += m;
  }
  const double a = sum / static_cast<double>(trials.size());
  if (!(a > 0.0)) throw NumericError("compute_levels: degenerate levels, every composite signal is zero");
  return LevelSet::from_average(a);
}

// Rising crossings give grasp/bend tokens, falling ones release/extend. A
// crossing counts only when the next `debounce` samples (starting at the
// crossing sample) stay on the far side of the level.
inline std::vector<Token> detect_crossings(const Series& series, const LevelSet& levels, Family family,
                                           std::size_t debounce) {
  struct Event {
    double t;
    bool rising;
    Level level;
  };
  std::vector<Event> events;
  const auto& y = series.values;
  const std::size_t n = y.size();
  if (n == 0) return {};
  debounce = std::max<std::size_t>(debounce, 1);

  for (Level lv : {Level::low, Level::mid, Level::high}) {
    const double L = levels.at(lv);
    bool above = y[0] >= L;
    for (std::size_t i = 1; i < n; ++i) {
      const bool now_above = y[i] >= L;
      if (now_above == above) continue;
      if (i + debounce > n) break;
      bool held = true;
      for (std::size_t k = i; k < i + debounce; ++k) {
        if ((y[k] >= L) != now_above) {
          held = false;
          break;
        }
      }
      if (!held) continue;
      // Crossing instant by linear interpolation between samples i-1 and i.
      const double frac = (L - y[i - 1]) / (y[i] - y[i - 1]);
      const double t = series.time(i - 1) + std::clamp(frac, 0.0, 1.0) * series.dt();
      events.push_back({t, now_above, lv});
      above = now_above;
    }
  }

  std::vector<Token> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(Token{{crossing_symbol(family, e.rising, e.level)}, e.t});
  std::stable_sort(out.begin(), out.end(), [](const Token& a, const Token& b) {
    if (a.t_s != b.t_s) return a.t_s < b.t_s;
    return a.symbols < b.symbols;
  });
  return out;
}

struct Peak {
  std::size_t index = 0;
  double value = 0.0;  // signed series value at the peak
};

// Local maxima of |series| whose topographic prominence is at least
// min_prominence * max|series|. Flat tops report their middle sample.
inline std::vector<Peak> detect_peaks(const Series& series, double min_prominence) {
  const auto& y = series.values;
  const std::size_t n = y.size();
  std::vector<double> a(n);
  double amax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::abs(y[i]);
    amax = std::max(amax, a[i]);
  }
  std::vector<Peak> out;
  if (n < 3 || !(amax > 0.0)) return out;
  const double threshold = min_prominence * amax;

  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(a[i] > a[i - 1])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && a[j + 1] == a[i]) ++j;
    if (j + 1 >= n || !(a[j + 1] < a[i])) {
      i = j + 1;
      continue;
    }
    const std::size_t left_edge = i;
    const std::size_t right_edge = j;
    const std::size_t peak = (left_edge + right_edge) / 2;
    const double h = a[peak];

    double left_min = h;
    for (std::size_t k = left_edge; k-- > 0;) {
      if (a[k] > h) break;
      left_min = std::min(left_min, a[k]);
    }
    double right_min = h;
    for (std::size_t k = right_edge + 1; k < n; ++k) {
      if (a[k] > h) break;
      right_min = std::min(right_min, a[k]);
    }
    const double prominence = h - std::max(left_min, right_min);
    if (h > 0.0 && prominence >= threshold) out.push_back({peak, y[peak]});
    i = j + 1;
  }
  return out;
}

struct BellInstance {
  BellParams params;
  std::size_t channel = 0;  // 0..2 linear velocity, 3..5 angular velocity
  double residual = 0.0;    // share of the final MSE inside this bell's support

  Family family() const { return channel < 3 ? Family::reach : Family::rotate; }
  std::string symbol() const { return motion_symbol(family(), params.axis, params.sign); }
};

struct BellFit {
  std::vector<BellInstance> instances;
  double mse = 0.0;
  std::size_t sweeps = 0;
  bool converged = true;
};

namespace detail {

// Anchored bell: peak fixed at (t_peak, value); only the duration varies.
struct AnchoredBell {
  double t_peak;
  double value;
  double T;
};

inline double anchored_value(const AnchoredBell& b, const ProfileModel& model, double t) {
  const double tau = model.peak_tau() + (t - b.t_peak) / b.T;
  return b.value / model.peak_value() * model.density(tau);
}

inline std::pair<std::size_t, std::size_t> anchored_support(const AnchoredBell& b, const ProfileModel& model,
                                                            const Series& s) {
  const double start = b.t_peak - model.peak_tau() * b.T;
  const double end = start + b.T;
  const double n = static_cast<double>(s.size());
  const double lo = std::clamp(std::floor((start - s.t0) * s.rate), 0.0, n);
  const double hi = std::clamp(std::ceil((end - s.t0) * s.rate) + 1.0, 0.0, n);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// Width of the profile at half its peak, as a fraction of the duration.
inline double half_max_fraction(const ProfileModel& model) {
  const double half = 0.5 * model.peak_value();
  const int steps = 4000;
  double first = 0.0, last = 1.0;
  bool seen = false;
  for (int k = 0; k <= steps; ++k) {
    const double tau = static_cast<double>(k) / steps;
    if (model.density(tau) >= half) {
      if (!seen) first = tau;
      seen = true;
      last = tau;
    }
  }
  return std::max(last - first, 1e-3);
}

}  // namespace detail

// Fits one bell per peak. Peak location and height are fixed; durations are
// chosen by coordinate-wise golden-section search to minimize the MSE of the
// additive reconstruction. Each coordinate step scans a coarse log grid
// first and refines the best bracket.
inline BellFit fit_bells(const Series& series, const std::vector<Peak>& peaks, const ProfileModel& model,
                         std::size_t channel = 0, std::size_t max_sweeps = 50, double tolerance = 1e-6) {
  BellFit fit;
  const std::size_t n = series.size();
  if (n == 0) return fit;
  std::vector<double> resid = series.values;
  auto total_mse = [&] {
    double acc = 0.0;
    for (double r : resid) acc += r * r;
    return acc / static_cast<double>(n);
  };
  if (peaks.empty()) {
    fit.mse = total_mse();
    return fit;
  }

  const double dt = series.dt();
  const double t_lo = 4.0 * dt;
  const double t_hi = std::max(static_cast<double>(n - 1) * dt, t_lo * 1.0001);
  const double hm = detail::half_max_fraction(model);

  std::vector<detail::AnchoredBell> bells;
  for (const auto& p : peaks) {
    // Half-max width around the peak gives the starting duration.
    const double v = p.value;
    std::size_t l = p.index, r = p.index;
    while (l > 0 && series.values[l - 1] * (v > 0 ? 1 : -1) >= 0.5 * std::abs(v)) --l;
    while (r + 1 < n && series.values[r + 1] * (v > 0 ? 1 : -1) >= 0.5 * std::abs(v)) ++r;
    const double width = static_cast<double>(r - l + 1) * dt;
    bells.push_back({series.time(p.index), v, std::clamp(width / hm, t_lo, t_hi)});
  }

  auto add_bell = [&](const detail::AnchoredBell& b, double sign) {
    const auto [lo, hi] = detail::anchored_support(b, model, series);
    for (std::size_t k = lo; k < hi; ++k) resid[k] -= sign * detail::anchored_value(b, model, series.time(k));
  };
  for (const auto& b : bells) add_bell(b, 1.0);

  // Change in sum of squares when bell b (with duration T) is subtracted from
  // the current residual (which excludes b).
  auto delta_cost = [&](detail::AnchoredBell b, double T) {
    b.T = T;
    const auto [lo, hi] = detail::anchored_support(b, model, series);
    double acc = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const double bv = detail::anchored_value(b, model, series.time(k));
      const double r = resid[k];
      acc += (r - bv) * (r - bv) - r * r;
    }
    return acc;
  };

  constexpr double kInvPhi = 0.6180339887498949;
  constexpr int kGrid = 24;
  double mse = total_mse();
  fit.converged = false;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    for (auto& b : bells) {
      add_bell(b, -1.0);
      const double current = delta_cost(b, b.T);
      // Coarse log-spaced scan.
      double grid[kGrid];
      double best_cost = std::numeric_limits<double>::infinity();
      int best = 0;
      for (int g = 0; g < kGrid; ++g) {
        grid[g] = t_lo * std::pow(t_hi / t_lo, static_cast<double>(g) / (kGrid - 1));
        const double c = delta_cost(b, grid[g]);
        if (c < best_cost) {
          best_cost = c;
          best = g;
        }
      }
      double lo = grid[std::max(best - 1, 0)];
      double hi = grid[std::min(best + 1, kGrid - 1)];
      double x1 = hi - kInvPhi * (hi - lo);
      double x2 = lo + kInvPhi * (hi - lo);
      double f1 = delta_cost(b, x1);
      double f2 = delta_cost(b, x2);
      while (hi - lo > 1e-6 * (1.0 + hi)) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - kInvPhi * (hi - lo);
          f1 = delta_cost(b, x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + kInvPhi * (hi - lo);
          f2 = delta_cost(b, x2);
        }
      }
      double cand = 0.5 * (lo + hi);
      double cand_cost = delta_cost(b, cand);
      if (best_cost < cand_cost) {
        cand = grid[best];
        cand_cost = best_cost;
      }
      if (cand_cost < current) b.T = cand;
      add_bell(b, 1.0);
    }
    fit.sweeps = sweep + 1;
    const double next = total_mse();
    const double improvement = mse - next;
    mse = next;
    if (improvement < tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.mse = mse;

  for (const auto& b : bells) {
    BellInstance inst;
    inst.channel = channel;
    inst.params.axis = static_cast<Axis>(channel % 3);
    inst.params.sign = b.value >= 0.0 ? +1 : -1;
    inst.params.T = b.T;
    inst.params.t_s = b.t_peak - model.peak_tau() * b.T;
    inst.params.magnitude = std::abs(b.value) * b.T / model.peak_value();
    const auto [lo, hi] = detail::anchored_support(b, model, series);
    double acc = 0.0;
    for (std::size_t k = lo; k < hi; ++k) acc += resid[k] * resid[k];
    inst.residual = acc / static_cast<double>(n);
    fit.instances.push_back(inst);
  }
  return fit;
}

// Drops bells below the distance / angle thresholds (boundary kept).
inline std::vector<BellInstance> prune_bells(const std::vector<BellInstance>& instances,
                                             const ExtractionConfig& config) {
  std::vector<BellInstance> out;
  for (const auto& inst : instances) {
    const double floor = inst.family() == Family::reach ? config.min_reach_magnitude : config.min_rotate_magnitude;
    if (inst.params.magnitude >= floor) out.push_back(inst);
  }
  return out;
}

// Groups bells of one family whose starts fall within the first half of the
// group's earliest bell. One symbol per axis; a same-axis bell opens a new
// token.
inline std::vector<Token> merge_concurrent(std::vector<BellInstance> instances, Family family) {
  for (const auto& inst : instances)
    if (inst.family() != family) throw ArgumentError("merge_concurrent: instance from another family");
  std::stable_sort(instances.begin(), instances.end(), [](const BellInstance& a, const BellInstance& b) {
    if (a.params.t_s != b.params.t_s) return a.params.t_s < b.params.t_s;
    return a.symbol() < b.symbol();
  });

  std::vector<Token> out;
  const BellInstance* head = nullptr;
  std::vector<std::string> members;
  std::vector<Axis> axes;
  auto flush = [&] {
    if (head) out.push_back(make_token(members, head->params.t_s));
    members.clear();
    axes.clear();
  };
  for (const auto& inst : instances) {
    const bool joinable = head && inst.params.t_s >= head->params.t_s &&
                          inst.params.t_s < head->params.t_s + 0.5 * head->params.T &&
                          std::find(axes.begin(), axes.end(), inst.params.axis) == axes.end();
    if (!joinable) {
      flush();
      head = &inst;
    }
    members.push_back(inst.symbol());
    axes.push_back(inst.params.axis);
  }
  flush();
  return out;
}

struct Extraction {
  TokenSequence tokens;             // ordered by (t_s, name)
  std::vector<BellInstance> bells;  // after pruning
  std::vector<std::string> names() const { return token_names(tokens); }
};

inline std::size_t effective_window(std::size_t window, std::size_t n) {
  if (n == 0) return 1;
  window = std::max<std::size_t>(window, 1);
  if (window % 2 == 0) ++window;
  while (window > n) window -= 2;
  return window;
}

inline Extraction extract_sequence(const Trial& trial, const LevelSet& levels_force, const LevelSet& levels_bend,
                                   const ProfileModel& model, const ExtractionConfig& config) {
  Extraction ex;
  if (trial.frames.empty()) return ex;
  const std::size_t window = effective_window(config.smooth_window, trial.frames.size());

  auto crossings = [&](ChannelGroup g, const LevelSet& lv, Family fam) {
    const Series s = smooth(composite_norm(trial, g), window);
    for (auto& tok : detect_crossings(s, lv, fam, config.debounce)) ex.tokens.push_back(std::move(tok));
  };
  crossings(ChannelGroup::pressure, levels_force, Family::grasp_release);
  crossings(ChannelGroup::bend, levels_bend, Family::bend_extend);

  std::vector<BellInstance> reach, rotate;
  for (std::size_t ch = 0; ch < 6; ++ch) {
    const Series s = smooth(motion_channel(trial, ch), window);
    const auto peaks = detect_peaks(s, config.peak_min_prominence);
    const auto fit = fit_bells(s, peaks, model, ch, config.max_sweeps, config.fit_tolerance);
    for (const auto& inst : prune_bells(fit.instances, config)) (ch < 3 ? reach : rotate).push_back(inst);
  }
  for (auto& tok : merge_concurrent(reach, Family::reach)) ex.tokens.push_back(std::move(tok));
  for (auto& tok : merge_concurrent(rotate, Family::rotate)) ex.tokens.push_back(std::move(tok));
  ex.bells = reach;
  ex.bells.insert(ex.bells.end(), rotate.begin(), rotate.end());

  std::stable_sort(ex.tokens.begin(), ex.tokens.end(), [](const Token& a, const Token& b) {
    if (a.t_s != b.t_s) return a.t_s < b.t_s;
    return a.name() < b.name();
  });
  return ex;
}

}  // namespace maniprim
