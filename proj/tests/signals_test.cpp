#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "maniprim/signals.hpp"
#include "test_util.hpp"

using namespace maniprim;

namespace {

std::string header() {
  std::string h;
  for (const auto& c : trial_csv_columns()) h += (h.empty() ? "" : ",") + c;
  return h + "\n";
}

// One row with every channel zero except the ones given by (column, value).
std::string row(double t, std::vector<std::pair<std::string, double>> set = {}) {
  std::string out = std::to_string(t);
  const auto& cols = trial_csv_columns();
  for (std::size_t c = 1; c < cols.size(); ++c) {
    double v = 0.0;
    for (const auto& [name, val] : set)
      if (name == cols[c]) v = val;
    out += "," + std::to_string(v);
  }
  return out + "\n";
}

Trial constant_trial(double rate, std::size_t n, double value) {
  Trial t;
  t.rate = rate;
  for (std::size_t i = 0; i < n; ++i) {
    Frame f;
    f.t = static_cast<double>(i) / rate;
    f.v.fill(value);
    f.w.fill(-value);
    f.F.fill(value);
    f.b.fill(2 * value);
    t.frames.push_back(f);
  }
  return t;
}

}  // namespace

TEST(LoadTrial, ThreeZeroRowsInferFiftyHertz) {
  testutil::TempDir dir("signals");
  testutil::write(dir.file("a.csv"), header() + row(0) + row(0.02) + row(0.04));
  const auto trial = load_trial(dir.file("a.csv"));
  ASSERT_EQ(trial.frames.size(), 3u);
  EXPECT_NEAR(trial.rate, 50.0, 1e-9);
  EXPECT_FALSE(trial.action_label.has_value());
}

TEST(LoadTrial, NonMonotoneTimeReportsRowThree) {
  testutil::TempDir dir("signals");
  testutil::write(dir.file("a.csv"), header() + row(0) + row(0.02) + row(0.01));
  try {
    load_trial(dir.file("a.csv"));
    FAIL() << "expected OrderingError";
  } catch (const OrderingError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.code(), ErrorCode::data);
  }
}

TEST(LoadTrial, ConstantPressureHasUnitCompositeNorm) {
  testutil::TempDir dir("signals");
  std::string content = header();
  for (int i = 0; i <= 100; ++i) content += row(i / 100.0, {{"F1", 1.0}});
  testutil::write(dir.file("a.csv"), content);
  const auto trial = load_trial(dir.file("a.csv"));
  ASSERT_EQ(trial.frames.size(), 101u);
  EXPECT_NEAR(trial.duration(), 1.0, 1e-12);
  EXPECT_NEAR(trial.rate, 100.0, 1e-9);
  for (double v : composite_norm(trial, ChannelGroup::pressure).values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(LoadTrial, MissingColumnNamesIt) {
  testutil::TempDir dir("signals");
  auto h = header();
  h.replace(h.find(",F7"), 3, "");
  std::string r = row(0);
  r.erase(r.rfind(','));  // one value fewer
  testutil::write(dir.file("a.csv"), h + r + "\n");
  try {
    load_trial(dir.file("a.csv"));
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("F7"), std::string::npos) << e.what();
  }
}

TEST(LoadTrial, NonFiniteValueReportsRowAndColumn) {
  testutil::TempDir dir("signals");
  std::string bad = row(0.02);
  // vy is the third field
  auto p1 = bad.find(',');
  auto p2 = bad.find(',', p1 + 1);
  auto p3 = bad.find(',', p2 + 1);
  bad.replace(p2 + 1, p3 - p2 - 1, "nan");
  testutil::write(dir.file("a.csv"), header() + row(0) + bad);
  try {
    load_trial(dir.file("a.csv"));
    FAIL() << "expected ValueError";
  } catch (const ValueError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "vy");
  }
}

TEST(LoadTrial, NegativePressureRejected) {
  testutil::TempDir dir("signals");
  testutil::write(dir.file("a.csv"), header() + row(0) + row(0.02, {{"F3", -0.5}}));
  EXPECT_THROW(load_trial(dir.file("a.csv")), ValueError);
}

TEST(LoadTrial, HeaderOrderDoesNotMatter) {
  testutil::TempDir dir("signals");
  const auto& cols = trial_csv_columns();
  std::vector<std::string> perm(cols.begin(), cols.end());
  std::reverse(perm.begin(), perm.end());
  std::string content;
  for (std::size_t i = 0; i < perm.size(); ++i) content += (i ? "," : "") + perm[i];
  content += "\n";
  for (int r = 0; r < 2; ++r) {
    for (std::size_t i = 0; i < perm.size(); ++i) {
      double v = perm[i] == "t" ? r * 0.02 : perm[i] == "b2" ? 7.0 : 0.0;
      content += (i ? "," : "") + std::to_string(v);
    }
    content += "\n";
  }
  testutil::write(dir.file("a.csv"), content);
  const auto trial = load_trial(dir.file("a.csv"));
  EXPECT_DOUBLE_EQ(trial.frames[1].b[1], 7.0);
  EXPECT_DOUBLE_EQ(trial.frames[1].t, 0.02);
}

TEST(LoadTrial, SidecarMetadataAndRoundTrip) {
  testutil::TempDir dir("signals");
  Trial t = constant_trial(50.0, 4, 0.25);
  t.id = "trial-7";
  t.subject = "s3";
  t.action_label = "Pour";
  save_trial(t, dir.file("x.csv"));
  const auto back = load_trial(dir.file("x.csv"));
  EXPECT_EQ(back.id, "trial-7");
  EXPECT_EQ(back.subject, "s3");
  ASSERT_TRUE(back.action_label);
  EXPECT_EQ(*back.action_label, "Pour");
  ASSERT_EQ(back.frames.size(), t.frames.size());
  for (std::size_t i = 0; i < t.frames.size(); ++i) {
    EXPECT_EQ(back.frames[i].t, t.frames[i].t);
    EXPECT_EQ(back.frames[i].F, t.frames[i].F);
    EXPECT_EQ(back.frames[i].w, t.frames[i].w);
  }
}

TEST(LoadTrial, MissingFileIsIoError) { EXPECT_THROW(load_trial("/nonexistent/dir/x.csv"), IoError); }

TEST(LoadModalities, MergesOntoPressureGrid) {
  testutil::TempDir dir("signals");
  // motion at 4 Hz with vx = t, pressure at 8 Hz, bend at 2 Hz with b1 = 2t
  std::string motion = "t,vx,vy,vz,wx,wy,wz\n";
  for (int i = 0; i <= 4; ++i) motion += std::to_string(i / 4.0) + "," + std::to_string(i / 4.0) + ",0,0,0,0,0\n";
  std::string pressure = "t";
  for (int c = 1; c <= 18; ++c) pressure += ",F" + std::to_string(c);
  pressure += "\n";
  for (int i = 0; i <= 8; ++i) {
    pressure += std::to_string(i / 8.0);
    for (int c = 1; c <= 18; ++c) pressure += c == 1 ? ",1" : ",0";
    pressure += "\n";
  }
  std::string bend = "t,b1,b2,b3,b4,b5,b6,b7,b8\n";
  for (int i = 0; i <= 2; ++i) bend += std::to_string(i / 2.0) + "," + std::to_string(i) + ",0,0,0,0,0,0,0\n";
  testutil::write(dir.file("m.csv"), motion);
  testutil::write(dir.file("p.csv"), pressure);
  testutil::write(dir.file("b.csv"), bend);
  const auto trial = load_trial_modalities(dir.file("m.csv"), dir.file("p.csv"), dir.file("b.csv"));
  ASSERT_EQ(trial.frames.size(), 9u);
  EXPECT_NEAR(trial.rate, 8.0, 1e-9);
  for (const auto& f : trial.frames) {
    EXPECT_NEAR(f.v[0], f.t, 1e-12);
    EXPECT_NEAR(f.b[0], 2.0 * f.t, 1e-12);
    EXPECT_DOUBLE_EQ(f.F[0], 1.0);
  }
}

TEST(Resample, ConstantTrialStaysConstant) {
  const auto t = constant_trial(100.0, 101, 0.3);
  const auto r = resample(t, 50.0);
  ASSERT_EQ(r.frames.size(), 51u);
  EXPECT_DOUBLE_EQ(r.rate, 50.0);
  for (const auto& f : r.frames) {
    EXPECT_NEAR(f.v[1], 0.3, 1e-15);
    EXPECT_NEAR(f.b[7], 0.6, 1e-15);
  }
}

TEST(Resample, TwoFramesAtFourHertz) {
  Trial t;
  Frame a, b;
  a.t = 0;
  b.t = 1;
  b.v[0] = 1;
  t.frames = {a, b};
  t.rate = 1;
  const auto r = resample(t, 4.0);
  const std::vector<double> expect{0, 0.25, 0.5, 0.75, 1.0};
  ASSERT_EQ(r.frames.size(), expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    EXPECT_NEAR(r.frames[i].v[0], expect[i], 1e-15);
    EXPECT_NEAR(r.frames[i].t, 0.25 * static_cast<double>(i), 1e-15);
  }
}

TEST(Resample, OwnRateIsIdentity) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Trial t = constant_trial(50.0, 37, 0.0);
  for (auto& f : t.frames) {
    for (auto& x : f.v) x = u(gen);
    for (auto& x : f.F) x = u(gen);
  }
  const auto r = resample(t, 50.0);
  ASSERT_EQ(r.frames.size(), t.frames.size());
  for (std::size_t i = 0; i < t.frames.size(); ++i) {
    EXPECT_NEAR(r.frames[i].t, t.frames[i].t, 1e-12);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(r.frames[i].v[c], t.frames[i].v[c], 1e-12);
    for (int c = 0; c < 18; ++c) EXPECT_NEAR(r.frames[i].F[c], t.frames[i].F[c], 1e-12);
  }
  // idempotent
  const auto rr = resample(r, 50.0);
  for (std::size_t i = 0; i < r.frames.size(); ++i) EXPECT_NEAR(rr.frames[i].v[2], r.frames[i].v[2], 1e-12);
}

TEST(Resample, UniformSpacingAndEndpoints) {
  Trial t;
  for (double s : {0.0, 0.013, 0.05, 0.31, 0.7, 1.234}) {
    Frame f;
    f.t = s;
    f.v[0] = s * s;
    t.frames.push_back(f);
  }
  const auto r = resample(t, 50.0);
  EXPECT_DOUBLE_EQ(r.frames.front().t, 0.0);
  EXPECT_NEAR(r.frames.front().v[0], 0.0, 0);
  for (std::size_t i = 1; i < r.frames.size(); ++i)
    EXPECT_LT(std::abs(r.frames[i].t - r.frames[i - 1].t - 0.02), 1e-9);
}

TEST(Resample, RejectsNonPositiveRate) {
  const auto t = constant_trial(50.0, 5, 1.0);
  EXPECT_THROW(resample(t, 0.0), ArgumentError);
  EXPECT_THROW(resample(t, -2.0), ArgumentError);
}

TEST(CompositeNorm, Examples) {
  Trial t = constant_trial(50.0, 3, 0.0);
  for (double v : composite_norm(t, ChannelGroup::pressure).values) EXPECT_EQ(v, 0.0);
  t.frames[1].F[0] = 3;
  t.frames[1].F[1] = 4;
  t.frames[2].F.fill(1.0);
  const auto s = composite_norm(t, ChannelGroup::pressure);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s.values[1], 5.0);
  EXPECT_NEAR(s.values[2], std::sqrt(18.0), 1e-12);
  EXPECT_NEAR(s.values[2], 4.2426, 1e-4);
  EXPECT_DOUBLE_EQ(s.rate, 50.0);
}

TEST(CompositeNorm, PermutationInvarianceAndHomogeneity) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Trial t = constant_trial(50.0, 20, 0.0);
  for (auto& f : t.frames) {
    for (auto& x : f.F) x = u(gen);
    for (auto& x : f.b) x = u(gen);
  }
  Trial perm = t, scaled = t;
  for (auto& f : perm.frames) {
    std::shuffle(f.F.begin(), f.F.end(), gen);
    std::reverse(f.b.begin(), f.b.end());
  }
  const double c = 3.7;
  for (auto& f : scaled.frames) {
    for (auto& x : f.F) x *= c;
    for (auto& x : f.b) x *= c;
  }
  for (auto g : {ChannelGroup::pressure, ChannelGroup::bend}) {
    const auto a = composite_norm(t, g), b = composite_norm(perm, g), s = composite_norm(scaled, g);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a.values[i], b.values[i], 1e-12);
      EXPECT_NEAR(s.values[i], c * a.values[i], 1e-12);
      EXPECT_GE(a.values[i], 0.0);
    }
  }
}

TEST(Smooth, Examples) {
  Series s{0.0, 50.0, {0, 0, 3, 0, 0}};
  EXPECT_EQ(smooth(s, 1).values, s.values);
  const auto r = smooth(s, 3);
  const std::vector<double> expect{0, 1, 1, 1, 0};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(r.values[i], expect[i], 1e-15);
  Series c{0.0, 50.0, std::vector<double>(9, 2.5)};
  for (double v : smooth(c, 5).values) EXPECT_NEAR(v, 2.5, 1e-15);
}

TEST(Smooth, RejectsEvenOrOversizeWindow) {
  Series s{0.0, 50.0, {1, 2, 3}};
  EXPECT_THROW(smooth(s, 2), ArgumentError);
  EXPECT_THROW(smooth(s, 5), ArgumentError);
  EXPECT_THROW(smooth(s, 0), ArgumentError);
}

TEST(Smooth, BoundedByExtremesAndMatchesDirectAverage) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  Series s{0.0, 50.0, {}};
  for (int i = 0; i < 60; ++i) s.values.push_back(n(gen));
  const double lo = *std::min_element(s.values.begin(), s.values.end());
  const double hi = *std::max_element(s.values.begin(), s.values.end());
  for (std::size_t w : {1u, 3u, 5u, 9u, 59u}) {
    const auto r = smooth(s, w);
    ASSERT_EQ(r.size(), s.size());
    const long half = static_cast<long>(w / 2);
    for (long i = 0; i < static_cast<long>(s.size()); ++i) {
      EXPECT_GE(r.values[i], lo - 1e-12);
      EXPECT_LE(r.values[i], hi + 1e-12);
      // direct oracle: symmetric window shrunk at the edges
      const long h = std::min({half, i, static_cast<long>(s.size()) - 1 - i});
      double acc = 0;
      for (long k = i - h; k <= i + h; ++k) acc += s.values[k];
      EXPECT_NEAR(r.values[i], acc / static_cast<double>(2 * h + 1), 1e-12);
    }
  }
}

TEST(Smooth, InteriorMeanPreservedForPeriodicSeries) {
  // Period equal to the window: every interior average equals the period mean.
  Series s{0.0, 50.0, {}};
  for (int i = 0; i < 25; ++i) s.values.push_back(static_cast<double>(i % 5));
  const auto r = smooth(s, 5);
  for (std::size_t i = 2; i + 2 < s.size(); ++i) EXPECT_NEAR(r.values[i], 2.0, 1e-12);
}
