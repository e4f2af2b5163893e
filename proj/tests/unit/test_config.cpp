#include <gtest/gtest.h>

#include "clothtrack/config.hpp"

using namespace clothtrack;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST(FlatConfig, ParsesCommentsAndWhitespace) {
  const FlatConfig c = parse_flat_config(
      "# header\n"
      "  tto1.beta = 12.5   # trailing\n"
      "\n"
      "scenario.policy=drag\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.at("tto1.beta"), "12.5");
  EXPECT_EQ(c.at("scenario.policy"), "drag");
}

TEST(FlatConfig, RejectsMalformedAndDuplicates) {
  EXPECT_EQ(kind_of([] { parse_flat_config("tto1.beta 3\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { parse_flat_config(" = 3\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { parse_flat_config("a = 1\na = 2\n"); }), ErrorKind::kConfig);
}

TEST(ApplyConfig, UnknownKeyAndBadValue) {
  Settings s;
  EXPECT_EQ(kind_of([&] { apply_setting(s, "tto1.betta", "1"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([&] { apply_setting(s, "tto1.beta", "many"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([&] { apply_setting(s, "scenario.num_x", "2.5"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([&] { apply_setting(s, "tracker.calibration", "sometimes"); }),
            ErrorKind::kConfig);
}

TEST(ApplyConfig, SetsFields) {
  Settings s;
  apply_config(s, parse_flat_config("tto1.beta = 3\n"
                                    "tracker.gamma = 0.5\n"
                                    "tracker.calibration = offline\n"
                                    "scenario.num_x = 9\n"
                                    "scenario.policy = fold-in-half\n"
                                    "sim.stiffness = 1.1\n"));
  EXPECT_EQ(s.tracker.tto1.beta, 3.0);
  EXPECT_EQ(s.tracker.gamma, 0.5);
  EXPECT_EQ(s.tracker.calibration_mode, CalibrationMode::kOffline);
  EXPECT_EQ(s.scenario.num_x, 9);
  EXPECT_EQ(s.scenario.policy, PickPolicy::kFoldInHalf);
  EXPECT_EQ(s.tracker.base_params.stiffness, 1.1);
  s.validate();
}

TEST(ApplyConfig, ValidationIsSeparate) {
  Settings s;
  apply_setting(s, "tracker.gamma", "1.0");
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::kConfig);
}

TEST(FormatConfig, RoundTripsEveryKey) {
  Settings a;
  apply_config(a, parse_flat_config("tto2.alpha = 0.25\n"
                                    "tto2.learning_rate = 0.0037\n"
                                    "tracker.explosion_threshold = 3.5\n"
                                    "scenario.seed = 99\n"
                                    "scenario.spacing = 0.0125\n"));
  const std::string text = format_config(a);
  const FlatConfig flat = parse_flat_config(text);
  EXPECT_EQ(flat.size(), config_keys().size());
  for (const std::string& k : config_keys()) EXPECT_TRUE(flat.count(k)) << k;

  Settings b;
  apply_config(b, flat);
  EXPECT_EQ(format_config(b), text);
  EXPECT_EQ(b.tracker.tto2.alpha, 0.25);
  EXPECT_EQ(b.tracker.tto2.learning_rate, 0.0037);
  EXPECT_EQ(b.scenario.rng_seed, 99u);
  EXPECT_EQ(b.scenario.spacing, 0.0125);
}

TEST(SimParamsText, RoundTrip) {
  SimParams p;
  p.stiffness = 0.9;
  p.dynamic_friction = 1.0 / 3.0;
  p.particle_friction = 4.1;
  const SimParams q = parse_sim_params(format_sim_params(p));
  EXPECT_EQ(q.stiffness, p.stiffness);
  EXPECT_EQ(q.dynamic_friction, p.dynamic_friction);
  EXPECT_EQ(q.particle_friction, p.particle_friction);
  EXPECT_EQ(q.dt, p.dt);
  EXPECT_EQ(kind_of([] { parse_sim_params("tto1.beta = 1\n"); }), ErrorKind::kConfig);
}
