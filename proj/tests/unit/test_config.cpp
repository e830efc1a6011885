#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "test_paths.hpp"
#include "vlio/config.hpp"
#include "vlio/error.hpp"

namespace vlio {
namespace {

std::string config_error(const std::string& text) {
  try {
    KeyValueConfig kv = KeyValueConfig::parse_string(text, "test.cfg");
    parse_run_config(kv);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << text;
  return {};
}

std::string scenario_error(const std::string& text) {
  try {
    KeyValueConfig kv = KeyValueConfig::parse_string(text, "scen.cfg");
    parse_scenario(kv);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << text;
  return {};
}

TEST(RunConfigParse, Defaults) {
  KeyValueConfig kv = KeyValueConfig::parse_string("", "empty");
  const RunConfig c = parse_run_config(kv);
  EXPECT_EQ(c.uncertainty.gamma, 0.1);
  EXPECT_EQ(c.ikf.k_neighbors, 5u);
  EXPECT_EQ(c.ikf.k_candidates, 10u);
  EXPECT_EQ(c.ikf.max_iterations, 4);
  EXPECT_EQ(c.map_resolution, 0.5);
  EXPECT_EQ(c.downsample_stride, 4u);
  EXPECT_EQ(c.uncertainty.deviation_mode, DeviationMode::kMad);
  EXPECT_TRUE(c.uncertainty_enabled);
  EXPECT_TRUE(c.ikf.guided_matching);
}

TEST(RunConfigParse, CandidatesFollowK) {
  KeyValueConfig kv = KeyValueConfig::parse_string("matching.k = 7\n", "t");
  EXPECT_EQ(parse_run_config(kv).ikf.k_candidates, 14u);
}

TEST(RunConfigParse, ValuesAndComments) {
  KeyValueConfig kv = KeyValueConfig::parse_string(
      "# comment\n"
      "uncertainty.gamma = 0.2   # trailing\n"
      "uncertainty.deviation_mode = lls\n"
      "matching.guided = off\n"
      "extrinsics.translation = 0.1 0 0.05\n"
      "extrinsics.quaternion = 0 0 0.7071067811865476 0.7071067811865476\n",
      "t");
  const RunConfig c = parse_run_config(kv);
  EXPECT_EQ(c.uncertainty.gamma, 0.2);
  EXPECT_EQ(c.uncertainty.deviation_mode, DeviationMode::kLls);
  EXPECT_FALSE(c.ikf.guided_matching);
  EXPECT_EQ(c.extrinsics.translation, Vec3(0.1, 0, 0.05));
  EXPECT_LT((c.extrinsics.rotation * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-12);
}

TEST(RunConfigParse, UnknownKeyNamesLineAndField) {
  const std::string msg = config_error("map.resolution = 0.5\nmap.resolutoin = 0.4\n");
  EXPECT_NE(msg.find("test.cfg:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("map.resolutoin"), std::string::npos) << msg;
}

TEST(RunConfigParse, Errors) {
  EXPECT_NE(config_error("map.resolution = -1\n").find("test.cfg:1"), std::string::npos);
  EXPECT_NE(config_error("\n\nikf.max_iterations = four\n").find("test.cfg:3"), std::string::npos);
  config_error("this line has no equals\n");
  config_error("matching.k = 5\nmatching.k = 6\n");
  config_error("uncertainty.deviation_mode = median\n");
  config_error("uncertainty.enabled = maybe\n");
  config_error("extrinsics.quaternion = 0 0 0 2\n");
  config_error("extrinsics.translation = 1 2\n");
  config_error("matching.k = 5\nmatching.k_candidates = 3\n");
  config_error("preprocess.downsample_stride = 0\n");
}

TEST(RunConfigParse, RoundTrip) {
  KeyValueConfig kv = KeyValueConfig::parse_string(
      "uncertainty.gamma = 0.123456789012345\n"
      "uncertainty.enabled = false\n"
      "matching.k = 6\n"
      "beam.sigma_range = 0.015\n"
      "imu.sigma_gyro = 0.0021\n"
      "init.duration = 0.75\n"
      "extrinsics.quaternion = 0.1 0.2 0.3 0.9273618495495703\n",
      "t");
  const RunConfig a = parse_run_config(kv);
  const std::string text = emit_run_config(a);
  KeyValueConfig kv2 = KeyValueConfig::parse_string(text, "emitted");
  const RunConfig b = parse_run_config(kv2);
  EXPECT_EQ(emit_run_config(b), text);
  EXPECT_EQ(b.uncertainty.gamma, a.uncertainty.gamma);
  EXPECT_EQ(b.uncertainty_enabled, a.uncertainty_enabled);
  EXPECT_EQ(b.ikf.k_neighbors, 6u);
  EXPECT_EQ(b.beam.sigma_range, a.beam.sigma_range);
  EXPECT_EQ(b.imu_noise.sigma_gyro, a.imu_noise.sigma_gyro);
  EXPECT_EQ(b.init.duration, 0.75);
  EXPECT_LT(rotation_angle(a.extrinsics.rotation, b.extrinsics.rotation), 1e-15);
}

TEST(RunConfigLoad, MissingFile) {
  try {
    load_run_config(test::scratch_dir("cfg_missing") / "none.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
}

TEST(ScenarioParse, RoomBoxesTermsAndRoundTrip) {
  KeyValueConfig kv = KeyValueConfig::parse_string(
      "duration = 20\n"
      "motion.type = linear\n"
      "motion.direction = 1 0 0\n"
      "motion.speed = 0.5\n"
      "motion.window = 2 18 1\n"
      "world.room = 10 8 3\n"
      "world.box.0 = 1 1 0 1 1 1\n"
      "vibration.window = 3 17 0.5\n"
      "vibration.term.1 = roll 0.05 3 1.0\n"
      "vibration.term.0 = z 0.05 1 0\n"
      "lidar.channels = 16\n"
      "imu.rate = 200\n"
      "imu.vib_noise_gyro = 0.05\n",
      "scen.cfg");
  const sim::Scenario s = parse_scenario(kv);
  EXPECT_EQ(s.profile.duration, 20.0);
  EXPECT_EQ(s.profile.motion, sim::BaseMotion::kLinear);
  EXPECT_EQ(s.world.patches.size(), 12u);
  ASSERT_EQ(s.profile.terms.size(), 2u);
  EXPECT_EQ(s.profile.terms[0].axis, sim::VibAxis::kZ);
  EXPECT_EQ(s.profile.terms[1].axis, sim::VibAxis::kRoll);
  EXPECT_EQ(s.rig.lidar.channels, 16);
  EXPECT_EQ(s.rig.imu.rate, 200.0);

  const std::string text = emit_scenario(s);
  KeyValueConfig kv2 = KeyValueConfig::parse_string(text, "emitted");
  const sim::Scenario r = parse_scenario(kv2);
  EXPECT_EQ(emit_scenario(r), text);
  const sim::Dataset a = sim::generate_dataset(s, 1);
  const sim::Dataset b = sim::generate_dataset(r, 1);
  ASSERT_EQ(a.scans.size(), b.scans.size());
  EXPECT_EQ(a.scans[50].points.size(), b.scans[50].points.size());
  EXPECT_EQ(a.scans[50].points[10].position, b.scans[50].points[10].position);
  EXPECT_EQ(a.imu[700].accel, b.imu[700].accel);
}

TEST(ScenarioParse, Errors) {
  EXPECT_NE(scenario_error("vibration.term.0 = spin 1 1 0\n").find("vibration.term.0"),
            std::string::npos);
  scenario_error("duration = -5\n");
  scenario_error("vibration.term.0 = z 0.05 1\n");
  scenario_error("motion.type = zigzag\n");
  scenario_error("world.box.0 = 0 0 0 1 -1 1\n");
  scenario_error("world.patch.0 = 0 0 0 1 0 0 2 0 0\n");
  scenario_error("vibration.window = 5 3 0.5\n");
  scenario_error("imu.rate = 5\n");
  scenario_error("lidar.fov_up_deg = -50\n");
  scenario_error("nonsense = 1\n");
}

TEST(ScenarioFiles, ShippedScenariosLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(test::source_dir() / "scenarios")) {
    if (entry.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(load_scenario(entry.path())) << entry.path();
  }
}

}  // namespace
}  // namespace vlio
