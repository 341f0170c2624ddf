#pragma once

// HMMs with diagonal-covariance Gaussian-mixture emissions over raw frame
// feature vectors; the baseline recognizer that skips symbolization.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "maniprim/error.hpp"
#include "maniprim/hmm.hpp"
#include "maniprim/rng.hpp"
#include "maniprim/signals.hpp"

namespace maniprim {

using FeatureSequence = std::vector<std::vector<double>>;

inline constexpr double kVarianceFloor = 1e-6;

struct GaussianMixture {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> vars;

  std::size_t components() const { return weights.size(); }

  double log_density(const std::vector<double>& x) const {
    const std::size_t D = x.size();
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(components());
    for (std::size_t m = 0; m < components(); ++m) {
      double acc = std::log(weights[m]) - 0.5 * static_cast<double>(D) * std::log(2.0 * std::numbers::pi);
      for (std::size_t d = 0; d < D; ++d) {
        const double diff = x[d] - means[m][d];
        acc -= 0.5 * (std::log(vars[m][d]) + diff * diff / vars[m][d]);
      }
      terms[m] = acc;
      best = std::max(best, acc);
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - best);
    return best + std::log(s);
  }

  bool operator==(const GaussianMixture&) const = default;
};

struct GaussianHmm {
  Topology topology = Topology::ergodic;
  std::vector<double> pi;
  Matrix A;
  std::vector<GaussianMixture> emissions;  // one per state

  std::size_t states() const { return pi.size(); }
  std::size_t dims() const { return emissions.empty() ? 0 : emissions[0].means[0].size(); }
  bool operator==(const GaussianHmm&) const = default;
};

// Raw feature vector per frame: v, w, ||F||, ||b|| (8) or all 32 channels.
inline std::vector<double> raw_features(const Frame& f, bool full) {
  std::vector<double> x(f.v.begin(), f.v.end());
  x.insert(x.end(), f.w.begin(), f.w.end());
  if (full) {
    x.insert(x.end(), f.F.begin(), f.F.end());
    x.insert(x.end(), f.b.begin(), f.b.end());
  } else {
    x.push_back(group_norm(f, ChannelGroup::pressure));
    x.push_back(group_norm(f, ChannelGroup::bend));
  }
  return x;
}

inline FeatureSequence raw_feature_sequence(const Trial& trial, bool full = false, std::size_t decimate = 1) {
  FeatureSequence out;
  decimate = std::max<std::size_t>(decimate, 1);
  for (std::size_t i = 0; i < trial.frames.size(); i += decimate) out.push_back(raw_features(trial.frames[i], full));
  return out;
}

namespace detail {

// log b_i(x_t) for all t, i.
inline Matrix log_emissions(const GaussianHmm& m, const FeatureSequence& seq) {
  Matrix out(seq.size(), m.states());
  for (std::size_t t = 0; t < seq.size(); ++t)
    for (std::size_t i = 0; i < m.states(); ++i) out(t, i) = m.emissions[i].log_density(seq[t]);
  return out;
}

}  // namespace detail

inline double gaussian_forward_loglik(const GaussianHmm& m, const FeatureSequence& seq) {
  if (seq.empty()) return 0.0;
  const std::size_t N = m.states();
  const Matrix logb = detail::log_emissions(m, seq);
  std::vector<double> alpha(N), next(N), b(N);
  double loglik = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < N; ++i) mx = std::max(mx, logb(t, i));
    for (std::size_t i = 0; i < N; ++i) b[i] = std::exp(logb(t, i) - mx);
    double c = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      double acc = 0.0;
      if (t == 0) {
        acc = m.pi[j];
      } else {
        for (std::size_t i = 0; i < N; ++i) acc += alpha[i] * m.A(i, j);
      }
      c += (next[j] = acc * b[j]);
    }
    if (!(c > 0.0)) return -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < N; ++j) alpha[j] = next[j] / c;
    loglik += std::log(c) + mx;
  }
  return loglik;
}

struct GaussianTrainOptions {
  std::size_t components = 2;
  std::size_t max_iter = 50;
  double tol = 1e-6;
  std::uint64_t seed = 1;
  double var_floor = kVarianceFloor;
};

struct GaussianTrainResult {
  GaussianHmm model;
  double loglik = 0.0;
  std::vector<double> loglik_trace;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t pruned_components = 0;
};

// Initialization: each sequence is cut into N equal segments; state i is
// seeded from the pooled frames of segment i, components spread around the
// segment mean by a random fraction of its standard deviation.
inline GaussianHmm init_gaussian_hmm(const std::vector<FeatureSequence>& seqs, std::size_t N, std::size_t M,
                                     Topology topo, double var_floor, Rng& rng) {
  const std::size_t D = seqs.front().front().size();
  DiscreteHmm shape = random_discrete_hmm(N, 1, topo, rng);
  GaussianHmm m;
  m.topology = topo;
  m.pi = shape.pi;
  m.A = shape.A;
  m.emissions.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<double> mean(D, 0.0), var(D, 0.0);
    double count = 0.0;
    for (const auto& s : seqs) {
      const std::size_t lo = i * s.size() / N;
      const std::size_t hi = std::max(lo + 1, (i + 1) * s.size() / N);
      for (std::size_t t = lo; t < std::min(hi, s.size()); ++t) {
        for (std::size_t d = 0; d < D; ++d) mean[d] += s[t][d];
        count += 1.0;
      }
    }
    for (auto& x : mean) x /= std::max(count, 1.0);
    for (const auto& s : seqs) {
      const std::size_t lo = i * s.size() / N;
      const std::size_t hi = std::max(lo + 1, (i + 1) * s.size() / N);
      for (std::size_t t = lo; t < std::min(hi, s.size()); ++t)
        for (std::size_t d = 0; d < D; ++d) var[d] += (s[t][d] - mean[d]) * (s[t][d] - mean[d]);
    }
    for (auto& v : var) v = std::max(v / std::max(count, 1.0), var_floor);
    GaussianMixture& g = m.emissions[i];
    g.weights.assign(M, 1.0 / static_cast<double>(M));
    g.means.assign(M, mean);
    g.vars.assign(M, var);
    if (M > 1)
      for (std::size_t c = 0; c < M; ++c)
        for (std::size_t d = 0; d < D; ++d) g.means[c][d] += rng.uniform(-0.5, 0.5) * std::sqrt(var[d]);
  }
  return m;
}

inline GaussianTrainResult gaussian_baum_welch(const std::vector<FeatureSequence>& seqs, std::size_t N,
                                               Topology topo, const GaussianTrainOptions& opt = {}) {
  if (N == 0 || opt.components == 0) throw ArgumentError("gaussian_baum_welch: N and M must be >= 1");
  if (seqs.empty()) throw ArgumentError("gaussian_baum_welch: no training sequences");
  std::size_t D = 0;
  for (const auto& s : seqs) {
    if (s.empty()) throw ArgumentError("gaussian_baum_welch: empty training sequence");
    for (const auto& x : s) {
      if (D == 0) D = x.size();
      if (x.size() != D) throw ArgumentError("gaussian_baum_welch: inconsistent feature dimension");
      for (double v : x)
        if (!std::isfinite(v)) throw ValueError("gaussian_baum_welch: non-finite feature");
    }
  }

  Rng rng(opt.seed);
  GaussianTrainResult res;
  GaussianHmm m = init_gaussian_hmm(seqs, N, opt.components, topo, opt.var_floor, rng);

  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
    std::vector<double> pi_acc(N, 0.0);
    Matrix a_acc(N, N);
    // Sufficient statistics per (state, component).
    std::vector<std::vector<double>> occ(N);
    std::vector<std::vector<std::vector<double>>> s1(N);
    for (std::size_t i = 0; i < N; ++i) {
      occ[i].assign(m.emissions[i].components(), 0.0);
      s1[i].assign(m.emissions[i].components(), std::vector<double>(D, 0.0));
    }
    auto s2 = s1;
    double loglik = 0.0;

    for (const auto& seq : seqs) {
      const std::size_t L = seq.size();
      const Matrix logb = detail::log_emissions(m, seq);
      Matrix b(L, N), alpha(L, N), beta(L, N);
      std::vector<double> scale(L);
      for (std::size_t t = 0; t < L; ++t) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < N; ++i) mx = std::max(mx, logb(t, i));
        for (std::size_t i = 0; i < N; ++i) b(t, i) = std::exp(logb(t, i) - mx);
        double c = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
          double acc = 0.0;
          if (t == 0) {
            acc = m.pi[j];
          } else {
            for (std::size_t i = 0; i < N; ++i) acc += alpha(t - 1, i) * m.A(i, j);
          }
          c += (alpha(t, j) = acc * b(t, j));
        }
        for (std::size_t j = 0; j < N; ++j) alpha(t, j) /= c;
        scale[t] = c;
        loglik += std::log(c) + mx;
      }
      for (std::size_t i = 0; i < N; ++i) beta(L - 1, i) = 1.0;
      for (std::size_t t = L - 1; t-- > 0;)
        for (std::size_t i = 0; i < N; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < N; ++j) acc += m.A(i, j) * b(t + 1, j) * beta(t + 1, j);
          beta(t, i) = acc / scale[t + 1];
        }

      std::vector<double> comp;
      for (std::size_t t = 0; t < L; ++t) {
        for (std::size_t i = 0; i < N; ++i) {
          const double g = alpha(t, i) * beta(t, i);
          if (t == 0) pi_acc[i] += g;
          if (t + 1 < L && alpha(t, i) > 0.0)
            for (std::size_t j = 0; j < N; ++j)
              if (m.A(i, j) > 0.0)
                a_acc(i, j) += alpha(t, i) * m.A(i, j) * b(t + 1, j) * beta(t + 1, j) / scale[t + 1];
          if (g == 0.0) continue;
          // Component responsibilities within state i.
          const auto& gm = m.emissions[i];
          const std::size_t M = gm.components();
          comp.resize(M);
          double mx = -std::numeric_limits<double>::infinity();
          for (std::size_t c = 0; c < M; ++c) {
            double acc = std::log(gm.weights[c]);
            for (std::size_t d = 0; d < D; ++d) {
              const double diff = seq[t][d] - gm.means[c][d];
              acc -= 0.5 * (std::log(gm.vars[c][d]) + diff * diff / gm.vars[c][d]);
            }
            comp[c] = acc;
            mx = std::max(mx, acc);
          }
          double cs = 0.0;
          for (auto& c : comp) cs += (c = std::exp(c - mx));
          for (std::size_t c = 0; c < M; ++c) {
            const double r = g * comp[c] / cs;
            occ[i][c] += r;
            for (std::size_t d = 0; d < D; ++d) {
              s1[i][c][d] += r * seq[t][d];
              s2[i][c][d] += r * seq[t][d] * seq[t][d];
            }
          }
        }
      }
    }

    res.loglik_trace.push_back(loglik);
    res.iterations = iter + 1;
    if (iter > 0 && std::abs(loglik - prev) <= opt.tol * std::abs(prev)) {
      res.converged = true;
      break;
    }
    prev = loglik;

    double pis = 0.0;
    for (double p : pi_acc) pis += p;
    if (pis > 0.0)
      for (std::size_t i = 0; i < N; ++i) m.pi[i] = pi_acc[i] / pis;
    for (std::size_t i = 0; i < N; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < N; ++j) s += a_acc(i, j);
      if (s > 0.0)
        for (std::size_t j = 0; j < N; ++j) m.A(i, j) = a_acc(i, j) / s;

      auto& gm = m.emissions[i];
      double state_occ = 0.0;
      for (double o : occ[i]) state_occ += o;
      if (!(state_occ > 0.0)) continue;
      for (std::size_t c = 0; c < gm.components(); ++c) {
        gm.weights[c] = occ[i][c] / state_occ;
        if (!(occ[i][c] > 0.0)) continue;
        for (std::size_t d = 0; d < D; ++d) {
          const double mu = s1[i][c][d] / occ[i][c];
          // Centered second moment, computed around the new mean.
          const double var = s2[i][c][d] / occ[i][c] - mu * mu;
          gm.means[c][d] = mu;
          gm.vars[c][d] = std::max(var, opt.var_floor);
        }
      }
      // Collapsed components: negligible weight and pinned at the floor.
      for (std::size_t c = gm.components(); c-- > 0;) {
        if (gm.components() == 1) break;
        const bool at_floor =
            std::any_of(gm.vars[c].begin(), gm.vars[c].end(), [&](double v) { return v <= opt.var_floor; });
        if (gm.weights[c] < 1e-8 && at_floor) {
          gm.weights.erase(gm.weights.begin() + static_cast<std::ptrdiff_t>(c));
          gm.means.erase(gm.means.begin() + static_cast<std::ptrdiff_t>(c));
          gm.vars.erase(gm.vars.begin() + static_cast<std::ptrdiff_t>(c));
          ++res.pruned_components;
        }
      }
      double ws = 0.0;
      for (double w : gm.weights) ws += w;
      for (double& w : gm.weights) w /= ws;
    }
  }

  double total = 0.0;
  for (const auto& s : seqs) total += gaussian_forward_loglik(m, s);
  res.loglik = total;
  res.model = std::move(m);
  return res;
}

struct GaussianSelectionOptions {
  std::vector<std::size_t> states{3, 4, 5, 6};
  std::vector<Topology> topologies{Topology::bakis, Topology::ergodic};
  std::size_t restarts = 2;
  GaussianTrainOptions train;
};

struct SelectedGaussianModel {
  GaussianHmm model;
  double loglik = -std::numeric_limits<double>::infinity();
};

// Same selection rule as the discrete path.
inline SelectedGaussianModel select_gaussian_model(const std::vector<FeatureSequence>& seqs,
                                                   const GaussianSelectionOptions& opt) {
  SelectedGaussianModel best;
  bool have = false;
  std::uint64_t candidate = 0;
  for (auto topo : opt.topologies)
    for (auto N : opt.states)
      for (std::size_t r = 0; r < opt.restarts; ++r) {
        auto to = opt.train;
        to.seed = derive_seed(opt.train.seed, candidate++);
        auto res = gaussian_baum_welch(seqs, N, topo, to);
        bool better = !have || res.loglik > best.loglik;
        if (have && res.loglik == best.loglik) {
          const auto bn = best.model.states();
          better = N < bn || (N == bn && topo == Topology::bakis && best.model.topology == Topology::ergodic);
        }
        if (better) {
          best.model = std::move(res.model);
          best.loglik = res.loglik;
          have = true;
        }
      }
  return best;
}

}  // namespace maniprim
