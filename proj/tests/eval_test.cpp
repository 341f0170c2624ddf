#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "maniprim/eval.hpp"
#include "test_util.hpp"

using namespace maniprim;

namespace {

const ClassScore& score_of(const ScoreReport& r, const std::string& label) {
  for (const auto& c : r.classes)
    if (c.label == label) return c;
  throw std::runtime_error("no class " + label);
}

}  // namespace

TEST(Split, HeldOutSubjects) {
  const std::vector<std::string> subj{"s1", "s2", "s3", "s4", "s5", "s1", "s4"};
  const auto sp = split_by_subjects(subj, {"s4", "s5"});
  EXPECT_EQ(sp.train, (std::vector<std::size_t>{0, 1, 2, 5}));
  EXPECT_EQ(sp.test, (std::vector<std::size_t>{3, 4, 6}));
  std::vector<std::size_t> both = sp.train;
  both.insert(both.end(), sp.test.begin(), sp.test.end());
  std::sort(both.begin(), both.end());
  EXPECT_EQ(std::adjacent_find(both.begin(), both.end()), both.end());
  EXPECT_EQ(both.size(), subj.size());
}

TEST(Split, Errors) {
  const std::vector<std::string> subj{"s1", "s2", "s3"};
  EXPECT_THROW(split_by_subjects(subj, {"s1", "s2", "s3"}), ArgumentError);
  EXPECT_THROW(split_by_subjects(subj, {}), ArgumentError);
  EXPECT_THROW(split_by_subjects(subj, {"s9"}), ArgumentError);
}

TEST(Confusion, HandCounted) {
  const auto cm = confusion({"A", "B", "B"}, {"A", "A", "B"});
  EXPECT_EQ(cm.labels, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(cm.counts, (std::vector<std::vector<std::size_t>>{{1, 1}, {0, 1}}));
}

TEST(Confusion, PerfectIsDiagonal) {
  const std::vector<std::string> x{"Pour", "Stir", "Pour", "Spray"};
  const auto cm = confusion(x, x);
  for (std::size_t i = 0; i < cm.labels.size(); ++i)
    for (std::size_t j = 0; j < cm.labels.size(); ++j)
      EXPECT_EQ(cm.counts[i][j], i == j ? cm.counts[i][i] : 0u);
  EXPECT_EQ(cm.total(), 4u);
  EXPECT_DOUBLE_EQ(f1_report(cm).macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(f1_report(cm).overall_f1, 1.0);
}

TEST(Confusion, EmptyAndExtraLabels) {
  const auto cm = confusion({}, {}, {"A", "B"});
  EXPECT_EQ(cm.labels.size(), 2u);
  EXPECT_EQ(cm.total(), 0u);
  EXPECT_TRUE(confusion({}, {}).labels.empty());
  EXPECT_THROW(confusion({"A"}, {}), ArgumentError);
}

TEST(F1, HandComputed) {
  const auto r = f1_report(confusion({"A", "B", "B"}, {"A", "A", "B"}));
  EXPECT_NEAR(score_of(r, "A").f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(score_of(r, "B").f1, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(score_of(r, "A").precision, 1.0);
  EXPECT_DOUBLE_EQ(score_of(r, "A").recall, 0.5);
  EXPECT_EQ(score_of(r, "A").support, 2u);
  EXPECT_NEAR(r.macro_f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.overall_f1, 2.0 / 3.0, 1e-12);
}

TEST(F1, ZeroSupportZeroPredictionsIsZero) {
  const auto r = f1_report(confusion({"A", "A"}, {"A", "A"}, {"Z"}));
  EXPECT_EQ(score_of(r, "Z").f1, 0.0);
  EXPECT_EQ(score_of(r, "Z").support, 0u);
  EXPECT_DOUBLE_EQ(r.macro_f1, 0.5);
  EXPECT_DOUBLE_EQ(r.overall_f1, 1.0);
}

TEST(F1, PermutationInvariant) {
  std::vector<std::string> preds{"A", "B", "C", "A", "C", "B", "A"};
  std::vector<std::string> truths{"A", "C", "C", "B", "C", "B", "A"};
  const auto ref = f1_report(confusion(preds, truths));
  std::vector<std::size_t> order{6, 2, 4, 0, 5, 1, 3};
  std::vector<std::string> p2, t2;
  for (auto i : order) p2.push_back(preds[i]), t2.push_back(truths[i]);
  const auto cm2 = confusion(p2, t2);
  EXPECT_EQ(cm2.counts, confusion(preds, truths).counts);
  const auto r2 = f1_report(cm2);
  EXPECT_EQ(r2.macro_f1, ref.macro_f1);
  EXPECT_EQ(r2.overall_f1, ref.overall_f1);
}

TEST(TTest, OneToFive) {
  // mean 3, sd sqrt(2.5); p from scipy.stats.ttest_1samp
  const auto r = one_sample_ttest({1, 2, 3, 4, 5});
  EXPECT_NEAR(r.t, 3.0 / std::sqrt(2.5 / 5.0), 1e-12);
  EXPECT_NEAR(r.t, 4.2426, 1e-4);
  EXPECT_EQ(r.df, 4.0);
  EXPECT_NEAR(r.p, 0.013235599563682695, 1e-8);
  EXPECT_FALSE(r.zero_variance);
}

TEST(TTest, SymmetricIsNull) {
  const auto r = one_sample_ttest({-1, 1});
  EXPECT_EQ(r.t, 0.0);
  EXPECT_NEAR(r.p, 1.0, 1e-9);
}

TEST(TTest, ScipyReferenceValues) {
  struct Case {
    std::vector<double> d;
    double t, p;
  };
  const std::vector<Case> cases{
      {{0.1, -0.3, 0.25, 0.05, 0.2, 0.15}, 0.933256525257383, 0.3935270470900041},
      {{-0.02, -0.05, -0.01, -0.04, -0.03, -0.06}, -4.58257569495584, 0.00593354451759226},
      {{3, 1}, 2.0, 0.2951672353008664},
      {{0.5, 0.7, 0.2}, 3.2118202741878648, 0.08479136935514117},
  };
  for (const auto& c : cases) {
    const auto r = one_sample_ttest(c.d);
    EXPECT_NEAR(r.t, c.t, 1e-9 * std::abs(c.t));
    EXPECT_NEAR(r.p, c.p, 1e-8);
  }
}

TEST(TTest, TailProbabilityClosedForms) {
  // df = 1 is Cauchy; df = 2 has an algebraic CDF.
  for (double t : {0.0, 0.3, 1.0, 2.5, 12.706, 100.0}) {
    EXPECT_NEAR(student_t_two_sided_p(t, 1), 1.0 - 2.0 / std::numbers::pi * std::atan(t), 1e-9) << t;
    EXPECT_NEAR(student_t_two_sided_p(t, 2), 1.0 - t / std::sqrt(2.0 + t * t), 1e-9) << t;
  }
  EXPECT_NEAR(student_t_two_sided_p(2.776445105, 4), 0.05, 1e-8);
  EXPECT_NEAR(student_t_two_sided_p(4.032, 5), 0.01000141259359976, 1e-8);
  EXPECT_NEAR(student_t_two_sided_p(0.5, 30), 0.6207230048851273, 1e-8);
}

TEST(TTest, AntisymmetricAndScaleFree) {
  const std::vector<double> d{0.12, 0.03, -0.02, 0.08, 0.05, 0.1};
  const auto r = one_sample_ttest(d);
  std::vector<double> neg, scaled;
  for (double x : d) neg.push_back(-x), scaled.push_back(7.5 * x);
  const auto rn = one_sample_ttest(neg);
  const auto rs = one_sample_ttest(scaled);
  EXPECT_NEAR(rn.t, -r.t, 1e-12);
  EXPECT_NEAR(rn.p, r.p, 1e-12);
  EXPECT_NEAR(rs.t, r.t, 1e-9);
  EXPECT_NEAR(rs.p, r.p, 1e-9);
}

TEST(TTest, ZeroVariance) {
  const auto same = one_sample_ttest({0.1, 0.1, 0.1});
  EXPECT_TRUE(same.zero_variance);
  EXPECT_EQ(same.t, kInfiniteT);
  EXPECT_EQ(same.p, 0.0);
  EXPECT_EQ(one_sample_ttest({-0.2, -0.2}).t, -kInfiniteT);
  const auto zero = one_sample_ttest({0, 0, 0, 0});
  EXPECT_TRUE(zero.zero_variance);
  EXPECT_EQ(zero.t, 0.0);
  EXPECT_EQ(zero.p, 1.0);
  EXPECT_THROW(one_sample_ttest({1.0}), ArgumentError);
}

TEST(EditSimilarity, Levenshtein) {
  EXPECT_EQ(edit_similarity({}, {}), 1.0);
  EXPECT_EQ(edit_similarity({"a", "b"}, {"a", "b"}), 1.0);
  EXPECT_DOUBLE_EQ(edit_similarity({"a", "b", "c"}, {"a", "c"}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(edit_similarity({"x"}, {}), 0.0);
  EXPECT_DOUBLE_EQ(edit_similarity({"k", "i", "t", "t", "e", "n"}, {"s", "i", "t", "t", "i", "n", "g"}), 1.0 - 3.0 / 7.0);
}

TEST(Report, TsvRoundTrip) {
  testutil::TempDir dir("eval");
  const auto r0 = f1_report(confusion({"A", "B", "B"}, {"A", "A", "B"}));
  const auto r1 = f1_report(confusion({"A", "B"}, {"A", "B"}));
  testutil::write(dir.file("r.tsv"), report_to_tsv(r0, "f0") + report_to_tsv(r1, "f1", false));
  const auto folds = load_report_folds(dir.file("r.tsv"));
  ASSERT_EQ(folds.size(), 2u);
  EXPECT_EQ(folds[0].first, "f0");
  EXPECT_NEAR(folds[0].second, 2.0 / 3.0, 1e-6);
  EXPECT_EQ(folds[1].first, "f1");
  EXPECT_NEAR(folds[1].second, 1.0, 1e-12);

  testutil::write(dir.file("dup.tsv"), report_to_tsv(r0, "f0") + report_to_tsv(r1, "f0", false));
  EXPECT_THROW(load_report_folds(dir.file("dup.tsv")), SchemaError);
  testutil::write(dir.file("empty.tsv"), "");
  EXPECT_THROW(load_report_folds(dir.file("empty.tsv")), SchemaError);
}

TEST(Report, TextAndPgm) {
  const auto cm = confusion({"A", "B", "B"}, {"A", "A", "B"});
  const auto txt = report_to_text(f1_report(cm), cm);
  EXPECT_NE(txt.find("macro F1   0.667"), std::string::npos) << txt;
  const auto pgm = confusion_to_pgm(cm, 4);
  const std::string head = "P5\n8 8\n255\n";
  ASSERT_EQ(pgm.size(), head.size() + 64);
  EXPECT_EQ(pgm.substr(0, head.size()), head);
  EXPECT_EQ(static_cast<unsigned char>(pgm[head.size()]), 0);           // A,A holds the peak count
  EXPECT_EQ(static_cast<unsigned char>(pgm[head.size() + 8 * 4]), 255);  // B,A is empty
}
