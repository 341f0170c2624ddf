#pragma once

// Discrete-emission HMMs over token sequences: Baum-Welch training, scaled
// forward likelihood, model selection over topologies and state counts, and
// the per-action model bank used for maximum-likelihood classification.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "maniprim/error.hpp"
#include "maniprim/rng.hpp"

namespace maniprim {

enum class Topology { bakis, ergodic };

inline const char* topology_name(Topology t) { return t == Topology::bakis ? "bakis" : "ergodic"; }

inline Topology parse_topology(const std::string& s) {
  if (s == "bakis") return Topology::bakis;
  if (s == "ergodic") return Topology::ergodic;
  throw ArgumentError("unknown topology '" + s + "'");
}

// Self, next and skip-one transitions.
inline bool transition_allowed(Topology topo, std::size_t from, std::size_t to) {
  if (topo == Topology::ergodic) return true;
  return to >= from && to <= from + 2;
}

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double v = 0.0) : rows(r), cols(c), data(r * c, v) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  bool operator==(const Matrix&) const = default;
};

// Token string -> dense id, lexicographic; the unknown id is the last one.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    std::sort(tokens_.begin(), tokens_.end());
    tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
    for (std::size_t i = 0; i < tokens_.size(); ++i) ids_[tokens_[i]] = i;
  }

  std::size_t size() const { return tokens_.size() + 1; }
  std::size_t unknown_id() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::size_t encode(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? unknown_id() : it->second;
  }

  std::vector<std::size_t> encode(const std::vector<std::string>& seq) const {
    std::vector<std::size_t> out;
    out.reserve(seq.size());
    for (const auto& t : seq) out.push_back(encode(t));
    return out;
  }

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t> ids_;
};

inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& sequences) {
  std::vector<std::string> all;
  for (const auto& s : sequences) all.insert(all.end(), s.begin(), s.end());
  return Vocabulary(std::move(all));
}

using EncodedSequence = std::vector<std::size_t>;

struct DiscreteHmm {
  Topology topology = Topology::ergodic;
  std::vector<double> pi;
  Matrix A;  // N x N
  Matrix B;  // N x V

  std::size_t states() const { return pi.size(); }
  std::size_t symbols() const { return B.cols; }
  bool operator==(const DiscreteHmm&) const = default;
};

// Log P(sequence | model) by the scaled forward recursion. The empty
// sequence has probability 1. Ids outside the emission alphabet map to the
// last (unknown) column.
inline double forward_loglik(const DiscreteHmm& m, const EncodedSequence& seq) {
  const std::size_t N = m.states();
  const std::size_t V = m.symbols();
  if (seq.empty()) return 0.0;
  auto sym = [&](std::size_t o) { return o < V ? o : V - 1; };
  std::vector<double> alpha(N), next(N);
  double loglik = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    alpha[i] = m.pi[i] * m.B(i, sym(seq[0]));
    c += alpha[i];
  }
  if (!(c > 0.0)) return -std::numeric_limits<double>::infinity();
  for (double& a : alpha) a /= c;
  loglik += std::log(c);
  for (std::size_t t = 1; t < seq.size(); ++t) {
    const std::size_t o = sym(seq[t]);
    c = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < N; ++i) acc += alpha[i] * m.A(i, j);
      next[j] = acc * m.B(j, o);
      c += next[j];
    }
    if (!(c > 0.0)) return -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < N; ++j) alpha[j] = next[j] / c;
    loglik += std::log(c);
  }
  return loglik;
}

struct TrainOptions {
  double epsilon = 0.01;  // additive emission pseudo-count
  std::size_t max_iter = 100;
  double tol = 1e-6;  // relative improvement
  std::uint64_t seed = 1;
};

struct TrainResult {
  DiscreteHmm model;
  double loglik = 0.0;  // total training log-likelihood of the final model
  // Per iteration, evaluated at the parameters entering that iteration.
  std::vector<double> loglik_trace;
  // loglik + epsilon * sum log B: the quantity EM with pseudo-counts ascends.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  bool converged = false;
  bool short_sequence_warning = false;
};

inline DiscreteHmm random_discrete_hmm(std::size_t N, std::size_t V, Topology topo, Rng& rng) {
  DiscreteHmm m;
  m.topology = topo;
  m.pi.assign(N, 0.0);
  if (topo == Topology::bakis) {
    m.pi[0] = 1.0;
  } else {
    double s = 0.0;
    for (auto& p : m.pi) s += (p = rng.uniform(0.5, 1.5));
    for (auto& p : m.pi) p /= s;
  }
  m.A = Matrix(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j)
      if (transition_allowed(topo, i, j)) s += (m.A(i, j) = rng.uniform(0.5, 1.5));
    for (std::size_t j = 0; j < N; ++j) m.A(i, j) /= s;
  }
  m.B = Matrix(N, V);
  for (std::size_t i = 0; i < N; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < V; ++k) s += (m.B(i, k) = rng.uniform(0.5, 1.5));
    for (std::size_t k = 0; k < V; ++k) m.B(i, k) /= s;
  }
  return m;
}

namespace detail {

inline double emission_log_prior(const DiscreteHmm& m, double eps) {
  if (eps == 0.0) return 0.0;
  double acc = 0.0;
  for (double b : m.B.data) acc += std::log(b);
  return eps * acc;
}

}  // namespace detail

// Baum-Welch from a seeded random start. Structural zeros of the topology
// stay exactly zero: their expected counts are zero at every iteration.
inline TrainResult baum_welch(const std::vector<EncodedSequence>& sequences, std::size_t V, std::size_t N,
                              Topology topo, const TrainOptions& opt = {}) {
  if (N == 0) throw ArgumentError("baum_welch: N must be >= 1");
  if (V == 0) throw ArgumentError("baum_welch: empty alphabet");
  if (sequences.empty()) throw ArgumentError("baum_welch: no training sequences");
  std::size_t shortest = std::numeric_limits<std::size_t>::max();
  for (const auto& s : sequences) {
    if (s.empty()) throw ArgumentError("baum_welch: empty training sequence");
    for (auto o : s)
      if (o >= V) throw ArgumentError("baum_welch: symbol id out of range");
    shortest = std::min(shortest, s.size());
  }

  TrainResult res;
  res.short_sequence_warning = topo == Topology::bakis && N > shortest;
  Rng rng(opt.seed);
  DiscreteHmm m = random_discrete_hmm(N, V, topo, rng);

  std::size_t max_len = 0;
  for (const auto& s : sequences) max_len = std::max(max_len, s.size());
  Matrix alpha(max_len, N), beta(max_len, N);
  std::vector<double> scale(max_len);

  double prev_obj = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
    std::vector<double> pi_acc(N, 0.0);
    Matrix a_acc(N, N), b_acc(N, V);
    double loglik = 0.0;

    for (const auto& seq : sequences) {
      const std::size_t L = seq.size();
      // Forward with per-step normalization.
      double c = 0.0;
      for (std::size_t i = 0; i < N; ++i) c += (alpha(0, i) = m.pi[i] * m.B(i, seq[0]));
      for (std::size_t i = 0; i < N; ++i) alpha(0, i) /= c;
      scale[0] = c;
      for (std::size_t t = 1; t < L; ++t) {
        c = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < N; ++i) acc += alpha(t - 1, i) * m.A(i, j);
          c += (alpha(t, j) = acc * m.B(j, seq[t]));
        }
        for (std::size_t j = 0; j < N; ++j) alpha(t, j) /= c;
        scale[t] = c;
      }
      for (std::size_t t = 0; t < L; ++t) loglik += std::log(scale[t]);

      for (std::size_t i = 0; i < N; ++i) beta(L - 1, i) = 1.0;
      for (std::size_t t = L - 1; t-- > 0;) {
        for (std::size_t i = 0; i < N; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < N; ++j) acc += m.A(i, j) * m.B(j, seq[t + 1]) * beta(t + 1, j);
          beta(t, i) = acc / scale[t + 1];
        }
      }

      for (std::size_t t = 0; t < L; ++t) {
        for (std::size_t i = 0; i < N; ++i) {
          const double g = alpha(t, i) * beta(t, i);
          if (t == 0) pi_acc[i] += g;
          b_acc(i, seq[t]) += g;
        }
        if (t + 1 < L) {
          for (std::size_t i = 0; i < N; ++i) {
            if (alpha(t, i) == 0.0) continue;
            for (std::size_t j = 0; j < N; ++j) {
              if (m.A(i, j) == 0.0) continue;
              a_acc(i, j) += alpha(t, i) * m.A(i, j) * m.B(j, seq[t + 1]) * beta(t + 1, j) / scale[t + 1];
            }
          }
        }
      }
    }

    const double obj = loglik + detail::emission_log_prior(m, opt.epsilon);
    res.loglik_trace.push_back(loglik);
    res.objective_trace.push_back(obj);
    res.iterations = iter + 1;
    if (iter > 0 && std::abs(obj - prev_obj) <= opt.tol * std::abs(prev_obj)) {
      res.converged = true;
      break;
    }
    prev_obj = obj;

    // M-step.
    double pis = 0.0;
    for (double p : pi_acc) pis += p;
    if (pis > 0.0)
      for (std::size_t i = 0; i < N; ++i) m.pi[i] = pi_acc[i] / pis;
    for (std::size_t i = 0; i < N; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < N; ++j) s += a_acc(i, j);
      if (s > 0.0)
        for (std::size_t j = 0; j < N; ++j) m.A(i, j) = a_acc(i, j) / s;
      double bs = 0.0;
      for (std::size_t k = 0; k < V; ++k) bs += b_acc(i, k);
      const double denom = bs + opt.epsilon * static_cast<double>(V);
      if (denom > 0.0)
        for (std::size_t k = 0; k < V; ++k) m.B(i, k) = (b_acc(i, k) + opt.epsilon) / denom;
    }
  }

  double total = 0.0;
  for (const auto& s : sequences) total += forward_loglik(m, s);
  res.loglik = total;
  res.model = std::move(m);
  return res;
}

struct SelectionOptions {
  std::vector<std::size_t> states{3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<Topology> topologies{Topology::bakis, Topology::ergodic};
  std::size_t restarts = 5;
  TrainOptions train;
};

struct SelectedModel {
  DiscreteHmm model;
  double loglik = -std::numeric_limits<double>::infinity();
  std::size_t candidates = 0;
};

// Trains every (topology, N, restart) candidate and keeps the one with the
// highest training log-likelihood; ties go to smaller N, then bakis.
inline SelectedModel select_model(const std::vector<EncodedSequence>& sequences, std::size_t V,
                                  const SelectionOptions& opt) {
  if (opt.states.empty() || opt.topologies.empty() || opt.restarts == 0)
    throw ArgumentError("select_model: empty search space");
  SelectedModel best;
  bool have = false;
  std::uint64_t candidate = 0;
  for (auto topo : opt.topologies) {
    for (auto N : opt.states) {
      for (std::size_t r = 0; r < opt.restarts; ++r) {
        TrainOptions to = opt.train;
        to.seed = derive_seed(opt.train.seed, candidate++);
        auto res = baum_welch(sequences, V, N, topo, to);
        ++best.candidates;
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
    }
  }
  return best;
}

}  // namespace maniprim
