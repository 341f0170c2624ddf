#pragma once

// Per-action model banks, maximum-likelihood classification, and the
// versioned text serialization of trained banks.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "maniprim/error.hpp"
#include "maniprim/gaussian_hmm.hpp"
#include "maniprim/hmm.hpp"
#include "maniprim/text.hpp"

namespace maniprim {

struct Classification {
  std::string label;
  std::map<std::string, double> logliks;
};

// Argmax over labels; on equal scores the lexicographically first label wins.
inline std::string argmax_label(const std::map<std::string, double>& scores) {
  std::string best;
  double best_score = 0.0;
  bool have = false;
  for (const auto& [label, s] : scores) {
    if (!have || s > best_score) {
      best = label;
      best_score = s;
      have = true;
    }
  }
  return best;
}

template <typename Model>
struct BankEntry {
  Model model;
  double loglik = 0.0;  // training log-likelihood of the selected candidate
};

// Token-sequence bank: shared vocabulary plus one discrete HMM per action.
struct ActionModelBank {
  Vocabulary vocabulary;
  std::vector<std::string> required;  // labels that must be present
  std::map<std::string, BankEntry<DiscreteHmm>> models;

  bool complete() const {
    for (const auto& l : required)
      if (!models.count(l)) return false;
    return !models.empty();
  }

  void ensure_complete() const {
    for (const auto& l : required)
      if (!models.count(l)) throw StateError("model bank incomplete: no model for '" + l + "'");
    if (models.empty()) throw StateError("model bank is empty");
  }
};

inline Classification classify(const ActionModelBank& bank, const std::vector<std::string>& tokens) {
  bank.ensure_complete();
  const auto encoded = bank.vocabulary.encode(tokens);
  Classification c;
  for (const auto& [label, entry] : bank.models) c.logliks[label] = forward_loglik(entry.model, encoded);
  c.label = argmax_label(c.logliks);
  return c;
}

// Raw-frame bank for the Gaussian-mixture baseline.
struct GaussianModelBank {
  bool full_features = false;
  std::size_t decimate = 1;
  std::vector<std::string> required;
  std::map<std::string, BankEntry<GaussianHmm>> models;

  void ensure_complete() const {
    for (const auto& l : required)
      if (!models.count(l)) throw StateError("model bank incomplete: no model for '" + l + "'");
    if (models.empty()) throw StateError("model bank is empty");
  }
};

inline Classification classify(const GaussianModelBank& bank, const FeatureSequence& frames) {
  bank.ensure_complete();
  Classification c;
  for (const auto& [label, entry] : bank.models) c.logliks[label] = gaussian_forward_loglik(entry.model, frames);
  c.label = argmax_label(c.logliks);
  return c;
}

// ---------------------------------------------------------------------------
// Text serialization. Every real number is written with 17 significant
// digits so a load/save round trip is exact.

inline constexpr const char* kBankMagic = "maniprim-bank";
inline constexpr int kBankVersion = 1;

namespace detail {

inline void put_row(std::ostringstream& out, const std::string& tag, const double* v, std::size_t n) {
  out << tag;
  for (std::size_t i = 0; i < n; ++i) out << ' ' << text::fmt_exact(v[i]);
  out << '\n';
}

inline void put_matrix(std::ostringstream& out, const std::string& tag, const Matrix& m) {
  for (std::size_t r = 0; r < m.rows; ++r) put_row(out, tag, &m.data[r * m.cols], m.cols);
}

class BankReader {
 public:
  explicit BankReader(const std::string& content) : lines_(text::lines(content)) {}

  std::vector<std::string> next(const std::string& tag) {
    while (pos_ < lines_.size() && text::trim(lines_[pos_]).empty()) ++pos_;
    if (pos_ >= lines_.size()) throw SchemaError("model bank: unexpected end of file, expected '" + tag + "'");
    auto fields = text::split(lines_[pos_], ' ');
    if (fields.empty() || fields[0] != tag)
      throw SchemaError("model bank line " + std::to_string(pos_ + 1) + ": expected '" + tag + "'");
    ++pos_;
    fields.erase(fields.begin());
    return fields;
  }

  std::string scalar(const std::string& tag) {
    auto f = next(tag);
    if (f.size() != 1) throw SchemaError("model bank: '" + tag + "' takes one value");
    return f[0];
  }

  std::size_t count(const std::string& tag) { return static_cast<std::size_t>(std::stoull(scalar(tag))); }
  double real(const std::string& tag) { return number(scalar(tag)); }

  std::vector<double> row(const std::string& tag, std::size_t n) {
    const auto f = next(tag);
    if (f.size() != n) throw SchemaError("model bank: '" + tag + "' row has wrong length");
    std::vector<double> out;
    for (const auto& s : f) out.push_back(number(s));
    return out;
  }

  Matrix matrix(const std::string& tag, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto v = row(tag, cols);
      std::copy(v.begin(), v.end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * cols));
    }
    return m;
  }

  static double number(const std::string& s) {
    const auto v = text::parse_double(s);
    if (!v || !std::isfinite(*v)) throw SchemaError("model bank: bad number '" + s + "'");
    return *v;
  }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

inline void check_header(BankReader& r, const std::string& kind) {
  const auto h = r.next(kBankMagic);
  if (h.size() != 1 || h[0] != std::to_string(kBankVersion)) throw SchemaError("model bank: unsupported version");
  if (r.scalar("kind") != kind) throw SchemaError("model bank: expected kind '" + kind + "'");
}

}  // namespace detail

inline std::string bank_to_text(const ActionModelBank& bank) {
  std::ostringstream out;
  out << kBankMagic << ' ' << kBankVersion << '\n';
  out << "kind discrete\n";
  out << "required";
  for (const auto& l : bank.required) out << ' ' << l;
  out << '\n';
  out << "vocabulary";
  for (const auto& t : bank.vocabulary.tokens()) out << ' ' << t;
  out << '\n';
  out << "actions " << bank.models.size() << '\n';
  for (const auto& [label, e] : bank.models) {
    const auto& m = e.model;
    out << "action " << label << '\n';
    out << "topology " << topology_name(m.topology) << '\n';
    out << "states " << m.states() << '\n';
    out << "loglik " << text::fmt_exact(e.loglik) << '\n';
    detail::put_row(out, "pi", m.pi.data(), m.pi.size());
    detail::put_matrix(out, "A", m.A);
    detail::put_matrix(out, "B", m.B);
  }
  return out.str();
}

inline ActionModelBank bank_from_text(const std::string& content) {
  detail::BankReader r(content);
  detail::check_header(r, "discrete");
  ActionModelBank bank;
  bank.required = r.next("required");
  bank.vocabulary = Vocabulary(r.next("vocabulary"));
  const std::size_t V = bank.vocabulary.size();
  const std::size_t K = r.count("actions");
  for (std::size_t k = 0; k < K; ++k) {
    const std::string label = r.scalar("action");
    BankEntry<DiscreteHmm> e;
    e.model.topology = parse_topology(r.scalar("topology"));
    const std::size_t N = r.count("states");
    e.loglik = r.real("loglik");
    e.model.pi = r.row("pi", N);
    e.model.A = r.matrix("A", N, N);
    e.model.B = r.matrix("B", N, V);
    bank.models[label] = std::move(e);
  }
  return bank;
}

inline std::string bank_to_text(const GaussianModelBank& bank) {
  std::ostringstream out;
  out << kBankMagic << ' ' << kBankVersion << '\n';
  out << "kind gaussian\n";
  out << "features " << (bank.full_features ? "full" : "reduced") << '\n';
  out << "decimate " << bank.decimate << '\n';
  out << "required";
  for (const auto& l : bank.required) out << ' ' << l;
  out << '\n';
  out << "actions " << bank.models.size() << '\n';
  for (const auto& [label, e] : bank.models) {
    const auto& m = e.model;
    out << "action " << label << '\n';
    out << "topology " << topology_name(m.topology) << '\n';
    out << "states " << m.states() << '\n';
    out << "dims " << m.dims() << '\n';
    out << "loglik " << text::fmt_exact(e.loglik) << '\n';
    detail::put_row(out, "pi", m.pi.data(), m.pi.size());
    detail::put_matrix(out, "A", m.A);
    for (const auto& g : m.emissions) {
      out << "components " << g.components() << '\n';
      detail::put_row(out, "weights", g.weights.data(), g.weights.size());
      for (std::size_t c = 0; c < g.components(); ++c) {
        detail::put_row(out, "mean", g.means[c].data(), g.means[c].size());
        detail::put_row(out, "var", g.vars[c].data(), g.vars[c].size());
      }
    }
  }
  return out.str();
}

inline GaussianModelBank gaussian_bank_from_text(const std::string& content) {
  detail::BankReader r(content);
  detail::check_header(r, "gaussian");
  GaussianModelBank bank;
  bank.full_features = r.scalar("features") == "full";
  bank.decimate = r.count("decimate");
  bank.required = r.next("required");
  const std::size_t K = r.count("actions");
  for (std::size_t k = 0; k < K; ++k) {
    const std::string label = r.scalar("action");
    BankEntry<GaussianHmm> e;
    e.model.topology = parse_topology(r.scalar("topology"));
    const std::size_t N = r.count("states");
    const std::size_t D = r.count("dims");
    e.loglik = r.real("loglik");
    e.model.pi = r.row("pi", N);
    e.model.A = r.matrix("A", N, N);
    for (std::size_t i = 0; i < N; ++i) {
      GaussianMixture g;
      const std::size_t M = r.count("components");
      g.weights = r.row("weights", M);
      for (std::size_t c = 0; c < M; ++c) {
        g.means.push_back(r.row("mean", D));
        g.vars.push_back(r.row("var", D));
      }
      e.model.emissions.push_back(std::move(g));
    }
    bank.models[label] = std::move(e);
  }
  return bank;
}

// Peeks at the "kind" line of a serialized bank.
inline std::string bank_kind(const std::string& content) {
  detail::BankReader r(content);
  r.next(kBankMagic);
  return r.scalar("kind");
}

}  // namespace maniprim
