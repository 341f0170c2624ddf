#include <gtest/gtest.h>

#include "maniprim/config.hpp"
#include "test_util.hpp"

using namespace maniprim;

namespace {

std::string error_of(const std::string& content) {
  try {
    parse_config(content, "run.cfg");
  } catch (const ArgumentError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  const Config c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.test_subjects, (std::vector<std::string>{"s4", "s5"}));
  const auto sel = c.selection();
  EXPECT_EQ(sel.states, (std::vector<std::size_t>{3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_EQ(sel.restarts, 5u);
  EXPECT_EQ(sel.train.epsilon, 0.01);
  const auto g = c.gaussian_selection();
  EXPECT_EQ(g.states, (std::vector<std::size_t>{3, 4, 5, 6}));
  EXPECT_EQ(g.train.components, 2u);
}

TEST(Config, ParsesKeysCommentsAndBlankLines) {
  const auto c = parse_config(
      "# experiment\n"
      "seed = 7\n"
      "\n"
      "hmm_states_min=4   # inline\n"
      "hmm_states_max = 5\n"
      "hmm_topologies = bakis\n"
      "test_subjects = s1, s3\n"
      "raw_features = full\n"
      "noise_scale = 2\n"
      "extreme_subjects = true\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.selection().states, (std::vector<std::size_t>{4, 5}));
  EXPECT_EQ(c.hmm_topologies, std::vector<Topology>{Topology::bakis});
  EXPECT_EQ(c.test_subjects, (std::vector<std::string>{"s1", "s3"}));
  EXPECT_TRUE(c.raw_full);
  EXPECT_TRUE(c.extreme_subjects);
  EXPECT_DOUBLE_EQ(c.dataset().noise.velocity, 2 * default_noise().velocity);
  EXPECT_TRUE(c.dataset().extreme_subjects);
}

TEST(Config, UnknownKeyNamesFileAndLine) {
  const auto msg = error_of("seed = 1\nsmoth_window = 5\n");
  EXPECT_NE(msg.find("run.cfg:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("smoth_window"), std::string::npos) << msg;
}

TEST(Config, DuplicateKeyRejected) {
  const auto msg = error_of("seed = 1\nseed = 2\n");
  EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
  EXPECT_NE(msg.find("run.cfg:2"), std::string::npos) << msg;
}

TEST(Config, BadValuesRejected) {
  EXPECT_NE(error_of("seed = -3\n"), "");
  EXPECT_NE(error_of("rate = fast\n"), "");
  EXPECT_NE(error_of("smooth_window = 4\n"), "");
  EXPECT_NE(error_of("subject_jitter = 0.5\n"), "");
  EXPECT_NE(error_of("hmm_states_min = 6\nhmm_states_max = 3\n"), "");
  EXPECT_NE(error_of("hmm_topologies = linear\n"), "");
  EXPECT_NE(error_of("raw_features = some\n"), "");
  EXPECT_NE(error_of("extreme_subjects = maybe\n"), "");
  EXPECT_NE(error_of("just words\n"), "");
  EXPECT_NE(error_of("n_subjects = 1\n"), "");
}

TEST(Config, TextRoundTrip) {
  Config c;
  set_config_value(c, "seed", "123");
  set_config_value(c, "fit_tolerance", "0.0003");
  set_config_value(c, "gmm_topologies", "ergodic");
  set_config_value(c, "test_subjects", "s2");
  set_config_value(c, "noise_angular", "0.1");
  const auto text = config_to_text(c);
  const auto back = parse_config(text);
  EXPECT_EQ(config_to_text(back), text);
  EXPECT_EQ(back.seed, 123u);
  EXPECT_EQ(back.extraction.fit_tolerance, 0.0003);
  EXPECT_EQ(back.noise.angular, 0.1);
  EXPECT_EQ(config_to_text(parse_config(config_to_text(Config{}))), config_to_text(Config{}));
}

TEST(Config, EveryKeyAppearsInText) {
  const auto text = config_to_text(Config{});
  for (const auto& k : config_key_names()) {
    if (k == "profile") continue;  // omitted while empty
    EXPECT_NE(text.find(k + " = "), std::string::npos) << k;
  }
}

TEST(Config, LoadFromFile) {
  testutil::TempDir dir("config");
  testutil::write(dir.file("a.cfg"), "trials_per_action = 3\n");
  EXPECT_EQ(load_config(dir.file("a.cfg")).trials_per_action, 3u);
  EXPECT_THROW(load_config(dir.file("missing.cfg")), IoError);
}
