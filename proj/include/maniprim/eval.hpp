#pragma once

// Leave-subjects-out splits, confusion matrices, F1 reports, and the
// one-sample t-test used to compare two recognizers fold by fold.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "maniprim/error.hpp"
#include "maniprim/text.hpp"

namespace maniprim {

struct SubjectSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Partitions item indices by subject id.
inline SubjectSplit split_by_subjects(const std::vector<std::string>& item_subjects,
                                      const std::set<std::string>& test_subjects) {
  if (test_subjects.empty()) throw ArgumentError("split_by_subjects: no test subjects");
  const std::set<std::string> all(item_subjects.begin(), item_subjects.end());
  for (const auto& s : test_subjects)
    if (!all.count(s)) throw ArgumentError("split_by_subjects: unknown subject '" + s + "'");
  if (test_subjects.size() >= all.size())
    throw ArgumentError("split_by_subjects: test subjects must be a proper subset");
  SubjectSplit split;
  for (std::size_t i = 0; i < item_subjects.size(); ++i)
    (test_subjects.count(item_subjects[i]) ? split.test : split.train).push_back(i);
  return split;
}

struct ConfusionMatrix {
  std::vector<std::string> labels;          // lexicographic
  std::vector<std::vector<std::size_t>> counts;  // [truth][prediction]

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& row : counts)
      for (auto c : row) n += c;
    return n;
  }
};

// `extra_labels` forces rows for classes absent from both lists.
inline ConfusionMatrix confusion(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                                 const std::vector<std::string>& extra_labels = {}) {
  if (preds.size() != truths.size()) throw ArgumentError("confusion: predictions and truths differ in length");
  std::set<std::string> labels(extra_labels.begin(), extra_labels.end());
  labels.insert(preds.begin(), preds.end());
  labels.insert(truths.begin(), truths.end());
  ConfusionMatrix cm;
  cm.labels.assign(labels.begin(), labels.end());
  cm.counts.assign(cm.labels.size(), std::vector<std::size_t>(cm.labels.size(), 0));
  auto idx = [&](const std::string& l) {
    return static_cast<std::size_t>(std::lower_bound(cm.labels.begin(), cm.labels.end(), l) - cm.labels.begin());
  };
  for (std::size_t i = 0; i < preds.size(); ++i) ++cm.counts[idx(truths[i])][idx(preds[i])];
  return cm;
}

struct ClassScore {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ScoreReport {
  std::vector<ClassScore> classes;
  double macro_f1 = 0.0;
  double overall_f1 = 0.0;  // support-weighted
};

inline double safe_ratio(double a, double b) { return b > 0.0 ? a / b : 0.0; }

inline ScoreReport f1_report(const ConfusionMatrix& cm) {
  ScoreReport r;
  const std::size_t K = cm.labels.size();
  double total_support = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double tp = static_cast<double>(cm.counts[k][k]);
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      row += static_cast<double>(cm.counts[k][j]);
      col += static_cast<double>(cm.counts[j][k]);
    }
    ClassScore c;
    c.label = cm.labels[k];
    c.precision = safe_ratio(tp, col);
    c.recall = safe_ratio(tp, row);
    c.f1 = safe_ratio(2.0 * c.precision * c.recall, c.precision + c.recall);
    c.support = static_cast<std::size_t>(row);
    r.macro_f1 += c.f1;
    r.overall_f1 += c.f1 * row;
    total_support += row;
    r.classes.push_back(c);
  }
  if (K > 0) r.macro_f1 /= static_cast<double>(K);
  r.overall_f1 = safe_ratio(r.overall_f1, total_support);
  return r;
}

// ---------------------------------------------------------------------------
// Student t distribution.

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps,
                               double whole, double fa, double fb, double fm, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, 0.5 * eps, left, fa, fm, flm, depth - 1) +
         adaptive_simpson(f, m, b, 0.5 * eps, right, fm, fb, frm, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double eps = 1e-10) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, eps, whole, fa, fb, fm, 50);
}

}  // namespace detail

inline double student_t_density(double x, double df) {
  const double logc = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi);
  return std::exp(logc - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

// P(|T| >= |t|) for T ~ t(df). The integral runs over x = tan(theta) so the
// infinite tail maps to a finite interval.
inline double student_t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double a = std::atan(std::abs(t));
  const double half = std::numbers::pi / 2.0;
  if (a >= half) return 0.0;
  auto g = [df](double theta) {
    const double c = std::cos(theta);
    if (c <= 0.0) return 0.0;
    const double x = std::tan(theta);
    return student_t_density(x, df) / (c * c);
  };
  const double tail = detail::integrate(g, a, half);
  return std::clamp(2.0 * tail, 0.0, 1.0);
}

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool zero_variance = false;
};

// Stand-in for an infinite t statistic when all differences are equal and
// nonzero.
inline constexpr double kInfiniteT = 1e300;

// H0: mean difference is zero.
inline TTestResult one_sample_ttest(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  if (n < 2) throw ArgumentError("one_sample_ttest: need at least 2 values");
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  TTestResult r;
  r.df = static_cast<double>(n - 1);
  // Spread below rounding noise of the mean counts as zero variance.
  if (sd == 0.0 || sd <= 1e-12 * std::abs(mean)) {
    r.zero_variance = true;
    if (mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = mean > 0 ? kInfiniteT : -kInfiniteT;
      r.p = 0.0;
    }
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

// 1 - Levenshtein distance / longer length (1 for two empty sequences).
inline double edit_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 && m == 0) return 1.0;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return 1.0 - static_cast<double>(prev[m]) / static_cast<double>(std::max(n, m));
}

// ---------------------------------------------------------------------------
// Report files.

inline constexpr const char* kReportHeader = "fold\tlabel\tprecision\trecall\tf1\tsupport";
inline constexpr const char* kMacroRow = "__macro__";
inline constexpr const char* kOverallRow = "__overall__";

inline std::string report_to_tsv(const ScoreReport& r, const std::string& fold, bool header = true) {
  std::ostringstream out;
  if (header) out << kReportHeader << '\n';
  std::size_t total = 0;
  for (const auto& c : r.classes) {
    out << fold << '\t' << c.label << '\t' << text::fmt(c.precision) << '\t' << text::fmt(c.recall) << '\t'
        << text::fmt(c.f1) << '\t' << c.support << '\n';
    total += c.support;
  }
  out << fold << '\t' << kMacroRow << "\t\t\t" << text::fmt(r.macro_f1) << '\t' << total << '\n';
  out << fold << '\t' << kOverallRow << "\t\t\t" << text::fmt(r.overall_f1) << '\t' << total << '\n';
  return out.str();
}

// fold -> overall F1, in file order of first appearance.
inline std::vector<std::pair<std::string, double>> load_report_folds(const std::string& path) {
  const auto all = text::lines(text::read_file(path));
  if (all.empty()) throw SchemaError(path + ": empty report");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& line : all) {
    if (line.empty() || line == kReportHeader) continue;
    const auto f = text::split(line, '\t');
    if (f.size() != 6) throw SchemaError(path + ": report row needs 6 fields");
    if (f[1] != kOverallRow) continue;
    const auto v = text::parse_double(f[4]);
    if (!v) throw SchemaError(path + ": bad F1 value");
    for (const auto& [fold, _] : out)
      if (fold == f[0]) throw SchemaError(path + ": duplicate fold '" + fold + "'");
    out.emplace_back(f[0], *v);
  }
  if (out.empty()) throw SchemaError(path + ": no fold summaries");
  return out;
}

inline std::string report_to_text(const ScoreReport& r, const ConfusionMatrix& cm) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %9s %9s %9s %8s\n", "action", "precision", "recall", "f1", "support");
  out << buf;
  for (const auto& c : r.classes) {
    std::snprintf(buf, sizeof buf, "%-14s %9.3f %9.3f %9.3f %8zu\n", c.label.c_str(), c.precision, c.recall, c.f1,
                  c.support);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "macro F1   %.3f\noverall F1 %.3f\n", r.macro_f1, r.overall_f1);
  out << buf << "\nconfusion (rows = truth, columns = prediction)\n";
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-14s", cm.labels[i].c_str());
    out << buf;
    for (auto c : cm.counts[i]) {
      std::snprintf(buf, sizeof buf, " %4zu", c);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

// Binary PGM, one cell per class pair scaled to `cell` pixels; darker = more.
inline std::string confusion_to_pgm(const ConfusionMatrix& cm, std::size_t cell = 16) {
  const std::size_t K = cm.labels.size();
  const std::size_t side = std::max<std::size_t>(K * cell, 1);
  std::size_t peak = 0;
  for (const auto& row : cm.counts)
    for (auto c : row) peak = std::max(peak, c);
  std::string out = "P5\n" + std::to_string(side) + " " + std::to_string(side) + "\n255\n";
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x) {
      unsigned char px = 255;
      if (K > 0 && peak > 0) {
        const double frac = static_cast<double>(cm.counts[y / cell][x / cell]) / static_cast<double>(peak);
        px = static_cast<unsigned char>(std::lround(255.0 * (1.0 - frac)));
      }
      out.push_back(static_cast<char>(px));
    }
  return out;
}

}  // namespace maniprim
