#pragma once

// Bell-shaped speed profiles for the reach and rotate primitives.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "maniprim/error.hpp"
#include "maniprim/signals.hpp"
#include "maniprim/text.hpp"

namespace maniprim {

enum class Axis { x = 0, y = 1, z = 2 };

inline char axis_char(Axis a) { return "xyz"[static_cast<int>(a)]; }

// One occurrence of a reach (magnitude in m) or rotate (magnitude in rad).
struct BellParams {
  Axis axis = Axis::x;
  int sign = +1;  // +1 or -1
  double magnitude = 0.0;
  double t_s = 0.0;
  double T = 1.0;
};

// Minimum-jerk speed density 30 tau^2 (1 - tau)^2 on [0, 1]; unit area,
// peak 1.875 at tau = 0.5.
inline double min_jerk_speed(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ArgumentError("min_jerk_speed: tau outside [0, 1]");
  const double u = tau * (1.0 - tau);
  return 30.0 * u * u;
}

inline constexpr double kMinJerkPeak = 1.875;

// Normalized speed profile on [0, 1]: either the analytic minimum-jerk curve
// or a user table (piecewise linear, renormalized to unit area).
class ProfileModel {
 public:
  enum class Kind { analytic_min_jerk, tabulated };

  ProfileModel() = default;

  static ProfileModel min_jerk() { return ProfileModel(); }

  // Validates and normalizes a table. Throws ValidationError naming the first
  // violated invariant.
  static ProfileModel from_table(std::vector<double> tau, std::vector<double> value) {
    if (tau.size() != value.size() || tau.size() < 3)
      throw ValidationError("profile table needs at least 3 (tau, value) rows");
    if (std::abs(tau.front()) > 1e-9 || std::abs(tau.back() - 1.0) > 1e-9)
      throw ValidationError("profile table must cover tau from 0 to 1");
    tau.front() = 0.0;
    tau.back() = 1.0;
    for (std::size_t i = 1; i < tau.size(); ++i)
      if (!(tau[i] > tau[i - 1]))
        throw ValidationError("profile tau not strictly increasing at row " + std::to_string(i + 1));
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!std::isfinite(value[i])) throw ValidationError("profile value not finite at row " + std::to_string(i + 1));
      if (value[i] < 0.0) throw ValidationError("profile value negative at row " + std::to_string(i + 1));
    }
    const auto peak_it = std::max_element(value.begin(), value.end());
    const double peak = *peak_it;
    if (!(peak > 0.0)) throw ValidationError("profile is identically zero");
    const double endpoint_tol = 1e-6 * peak;
    if (value.front() > endpoint_tol) throw ValidationError("profile not zero at tau = 0");
    if (value.back() > endpoint_tol) throw ValidationError("profile not zero at tau = 1");
    value.front() = 0.0;
    value.back() = 0.0;
    const std::size_t ipeak = static_cast<std::size_t>(peak_it - value.begin());
    const double flat_tol = 1e-12 * peak;
    for (std::size_t i = 1; i <= ipeak; ++i)
      if (value[i] + flat_tol < value[i - 1])
        throw ValidationError("profile not unimodal: decreases before peak at row " + std::to_string(i + 1));
    for (std::size_t i = ipeak + 1; i < value.size(); ++i)
      if (value[i] > value[i - 1] + flat_tol)
        throw ValidationError("profile not unimodal: increases after peak at row " + std::to_string(i + 1));

    double area = 0.0;
    for (std::size_t i = 1; i < tau.size(); ++i)
      area += 0.5 * (value[i] + value[i - 1]) * (tau[i] - tau[i - 1]);
    for (double& v : value) v /= area;

    ProfileModel m;
    m.kind_ = Kind::tabulated;
    m.tau_ = std::move(tau);
    m.value_ = std::move(value);
    m.peak_value_ = m.value_[ipeak];
    m.peak_tau_ = m.tau_[ipeak];
    return m;
  }

  Kind kind() const { return kind_; }

  // Unit-area density; zero outside [0, 1].
  double density(double tau) const {
    if (!(tau > 0.0 && tau < 1.0)) return 0.0;
    if (kind_ == Kind::analytic_min_jerk) return min_jerk_speed(tau);
    const auto it = std::upper_bound(tau_.begin(), tau_.end(), tau);
    const std::size_t j = static_cast<std::size_t>(it - tau_.begin());
    const double a = (tau - tau_[j - 1]) / (tau_[j] - tau_[j - 1]);
    return value_[j - 1] + a * (value_[j] - value_[j - 1]);
  }

  // Integral of the density over [0, tau] (normalized progress, 0 -> 1).
  double cumulative(double tau) const {
    if (tau <= 0.0) return 0.0;
    if (tau >= 1.0) return 1.0;
    if (kind_ == Kind::analytic_min_jerk) {
      const double t3 = tau * tau * tau;
      return t3 * (10.0 - 15.0 * tau + 6.0 * tau * tau);
    }
    double acc = 0.0;
    for (std::size_t i = 1; i < tau_.size(); ++i) {
      if (tau_[i] >= tau) {
        const double v = density(tau);
        acc += 0.5 * (value_[i - 1] + v) * (tau - tau_[i - 1]);
        break;
      }
      acc += 0.5 * (value_[i - 1] + value_[i]) * (tau_[i] - tau_[i - 1]);
    }
    return acc;
  }

  double peak_value() const { return kind_ == Kind::analytic_min_jerk ? kMinJerkPeak : peak_value_; }
  double peak_tau() const { return kind_ == Kind::analytic_min_jerk ? 0.5 : peak_tau_; }

  const std::vector<double>& table_tau() const { return tau_; }
  const std::vector<double>& table_value() const { return value_; }

 private:
  Kind kind_ = Kind::analytic_min_jerk;
  std::vector<double> tau_;
  std::vector<double> value_;
  double peak_value_ = kMinJerkPeak;
  double peak_tau_ = 0.5;
};

// Profile CSV: header "tau,value".
inline ProfileModel load_profile(const std::string& path) {
  const auto all = text::lines(text::read_file(path));
  if (all.empty()) throw SchemaError(path + ": empty profile file");
  const auto header = text::split(all[0], ',');
  if (header.size() != 2 || text::trim(header[0]) != "tau" || text::trim(header[1]) != "value")
    throw SchemaError(path + ": profile header must be 'tau,value'");
  std::vector<double> tau, value;
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (text::trim(all[i]).empty()) continue;
    const auto cells = text::split(all[i], ',');
    if (cells.size() != 2) throw SchemaError(path + ": row " + std::to_string(i) + " needs 2 fields");
    const auto a = text::parse_double(cells[0]);
    const auto b = text::parse_double(cells[1]);
    if (!a || !b) throw ValueError(path + ": unparsable value at row " + std::to_string(i), i);
    tau.push_back(*a);
    value.push_back(*b);
  }
  return ProfileModel::from_table(std::move(tau), std::move(value));
}

// Signed speed of a bell at absolute time t.
inline double bell_value(const BellParams& p, const ProfileModel& model, double t) {
  const double tau = (t - p.t_s) / p.T;
  return static_cast<double>(p.sign) * p.magnitude / p.T * model.density(tau);
}

// Samples one bell on [t_s, t_s + T] at `rate`. Each sample is the mean
// speed over its own sampling cell, so sum(values) / rate equals the signed
// magnitude exactly even when a bell spans only a few samples.
inline Series render_bell(const BellParams& p, const ProfileModel& model, double rate) {
  if (!(p.T > 0.0) || !(p.magnitude > 0.0)) throw ArgumentError("render_bell: T and magnitude must be > 0");
  if (!(rate > 0.0) || rate * p.T < 2.0) throw ArgumentError("render_bell: fewer than 2 samples per bell");
  const double n = rate * p.T;  // samples per bell
  const auto last = static_cast<std::size_t>(std::ceil(n - 1e-9));
  Series s;
  s.t0 = p.t_s;
  s.rate = rate;
  s.values.resize(last + 1);
  for (std::size_t k = 0; k <= last; ++k) {
    const double a = (static_cast<double>(k) - 0.5) / n;
    const double b = (static_cast<double>(k) + 0.5) / n;
    s.values[k] = static_cast<double>(p.sign) * p.magnitude * rate * (model.cumulative(b) - model.cumulative(a));
  }
  return s;
}

}  // namespace maniprim
