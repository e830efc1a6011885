#include <cstring>
#include <functional>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "test_paths.hpp"
#include "vlio/error.hpp"
#include "vlio/io.hpp"

namespace vlio::io {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kInvalidArgument;
}

RawScan sample_scan() {
  RawScan s;
  s.t0 = 12.345678901234;
  for (int i = 0; i < 7; ++i) s.points.push_back({Vec3(i, -0.5 * i, 0.25), 0.01f * i});
  return s;
}

TEST(ScanFormat, HeaderLayout) {
  std::ostringstream os;
  write_scan(os, sample_scan());
  const std::string b = os.str();
  ASSERT_EQ(b.size(), 4u + 4u + 4u + 8u + 7u * 16u);
  EXPECT_EQ(b.substr(0, 4), "VLSC");
  std::uint32_t version, count;
  double t0;
  std::memcpy(&version, b.data() + 4, 4);
  std::memcpy(&count, b.data() + 8, 4);
  std::memcpy(&t0, b.data() + 12, 8);
  EXPECT_EQ(version, 1u);
  EXPECT_EQ(count, 7u);
  EXPECT_EQ(t0, 12.345678901234);
  float x3;
  std::memcpy(&x3, b.data() + 20 + 3 * 16, 4);
  EXPECT_EQ(x3, 3.0f);
}

TEST(ScanFormat, RoundTripFloat32) {
  std::stringstream ss;
  const RawScan s = sample_scan();
  write_scan(ss, s);
  const RawScan r = read_scan(ss);
  EXPECT_EQ(r.t0, s.t0);
  ASSERT_EQ(r.points.size(), s.points.size());
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    EXPECT_EQ(r.points[i].position, s.points[i].position.cast<float>().cast<double>());
    EXPECT_EQ(r.points[i].dt, static_cast<double>(static_cast<float>(s.points[i].dt)));
  }
}

TEST(ScanFormat, RejectsCorruption) {
  std::ostringstream os;
  write_scan(os, sample_scan());
  std::string b = os.str();
  std::string bad_magic = b;
  bad_magic[0] = 'X';
  std::string bad_version = b;
  bad_version[4] = 2;
  std::string truncated = b.substr(0, b.size() - 3);
  std::string trailing = b + "zz";
  for (const std::string& s : {bad_magic, bad_version, truncated, trailing}) {
    std::istringstream is(s);
    EXPECT_EQ(code_of([&] { read_scan(is); }), ErrorCode::kFormatError);
  }
}

TEST(ImuCsv, RoundTripExact) {
  ImuWindow w;
  for (int k = 0; k < 5; ++k) {
    w.push_back({0.01 * k, Vec3(1e-3 * k, -0.1, 1.0 / 3.0), Vec3(0.2, 9.80665, -1e-9)});
  }
  std::stringstream ss;
  write_imu_csv(ss, w);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "t,gx,gy,gz,ax,ay,az");
  const ImuWindow r = read_imu_csv(ss);
  ASSERT_EQ(r.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(r[i].t, w[i].t);
    EXPECT_EQ(r[i].gyro, w[i].gyro);
    EXPECT_EQ(r[i].accel, w[i].accel);
  }
}

TEST(ImuCsv, Errors) {
  std::istringstream bad_header("t,gx,gy\n0,1,2\n");
  EXPECT_EQ(code_of([&] { read_imu_csv(bad_header); }), ErrorCode::kFormatError);
  std::istringstream bad_field("t,gx,gy,gz,ax,ay,az\n0,1,2,3,4,5,x\n");
  EXPECT_EQ(code_of([&] { read_imu_csv(bad_field); }), ErrorCode::kFormatError);
  std::istringstream backwards("t,gx,gy,gz,ax,ay,az\n1,0,0,0,0,0,0\n0.5,0,0,0,0,0,0\n");
  EXPECT_THROW(read_imu_csv(backwards), Error);
}

TEST(Tum, RoundTrip) {
  Trajectory t;
  for (int i = 0; i < 4; ++i) {
    TimedPose p;
    p.t = 0.1 * i;
    p.pose = {so3_exp(Vec3(0.1 * i, -0.2, 0.3)), Vec3(i, 2.0 * i, -1.0)};
    t.push_back(p);
  }
  std::stringstream ss;
  ss << "# header comment\n";
  write_tum(ss, t);
  const Trajectory r = read_tum(ss);
  ASSERT_EQ(r.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(r[i].t, t[i].t, 1e-9);
    EXPECT_EQ(r[i].pose.translation, t[i].pose.translation);
    EXPECT_LT(rotation_angle(r[i].pose.rotation, t[i].pose.rotation), 1e-14);
  }
  std::istringstream bad("0 1 2 3 0 0 0\n");
  EXPECT_EQ(code_of([&] { read_tum(bad); }), ErrorCode::kFormatError);
}

TEST(Tum, QuaternionIsWLast) {
  Trajectory t(1);
  t[0].pose.rotation = so3_exp(Vec3(0, 0, std::acos(-1.0) / 2));
  std::ostringstream os;
  write_tum(os, t);
  std::istringstream is(os.str());
  double v[8];
  for (double& x : v) is >> x;
  EXPECT_NEAR(v[6], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(v[7], std::sqrt(0.5), 1e-15);
}

TEST(ScanIndex, RoundTrip) {
  const std::vector<ScanIndexEntry> e = {{0, 0.0, 10, "scans/000000.bin"},
                                         {1, 0.1, 12, "scans/000001.bin"}};
  std::stringstream ss;
  write_scan_index(ss, e);
  const auto r = read_scan_index(ss);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[1].file, "scans/000001.bin");
  EXPECT_EQ(r[1].count, 12u);
  EXPECT_EQ(r[1].t0, 0.1);
  EXPECT_EQ(scan_file_name(42), "000042.bin");
}

TEST(CovarianceCsv, Header) {
  UndistortedScan s;
  UndistortedPoint p;
  p.cov = Mat3::Identity();
  s.points.push_back(p);
  std::ostringstream os;
  write_covariance_csv(os, s);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "x,y,z,dt,cov_xx,cov_xy,cov_xz,cov_yy,cov_yz,cov_zz");
}

TEST(Dataset, SaveLoad) {
  const std::filesystem::path dir = test::scratch_dir("io_dataset");
  sim::Dataset ds;
  ds.imu = {{0.0, Vec3::Zero(), Vec3(0, 0, 9.81)}, {0.01, Vec3::Zero(), Vec3(0, 0, 9.81)}};
  ds.scans = {sample_scan(), sample_scan()};
  ds.scans[1].t0 += 0.1;
  ds.truth = {{ds.scans[0].t0, {}}, {ds.scans[1].t0, {}}};
  save_dataset(dir, ds);
  for (const char* f : {"imu.csv", "truth.tum", "scan_index.csv", "scans/000000.bin",
                        "scans/000001.bin"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const sim::Dataset r = load_dataset(dir);
  EXPECT_EQ(r.scans.size(), 2u);
  EXPECT_EQ(r.imu.size(), 2u);
  EXPECT_EQ(r.scans[1].t0, ds.scans[1].t0);
}

TEST(Dataset, EmptyScanDirectory) {
  const std::filesystem::path dir = test::scratch_dir("io_empty");
  sim::Dataset ds;
  ds.imu = {{0.0, Vec3::Zero(), Vec3(0, 0, 9.81)}};
  save_dataset(dir, ds);
  std::filesystem::create_directories(dir / "scans");
  EXPECT_EQ(code_of([&] { load_dataset(dir); }), ErrorCode::kFormatError);
}

TEST(Dataset, MissingDirectory) {
  EXPECT_EQ(code_of([&] { load_dataset(test::scratch_dir("io_missing") / "nope"); }),
            ErrorCode::kIoError);
}

}  // namespace
}  // namespace vlio::io
