#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vlio/propagation.hpp"
#include "vlio/scan.hpp"
#include "vlio/sim.hpp"
#include "vlio/trajectory.hpp"

namespace vlio::io {

namespace fs = std::filesystem;

/// "VLSC" scan file: little-endian header (magic, uint32 version = 1,
/// uint32 count, float64 t0) followed by float32 x, y, z, dt records.
inline constexpr char kScanMagic[4] = {'V', 'L', 'S', 'C'};
inline constexpr std::uint32_t kScanVersion = 1;

void write_scan(std::ostream& os, const RawScan& scan);
RawScan read_scan(std::istream& is);
void write_scan_file(const fs::path& path, const RawScan& scan);
RawScan read_scan_file(const fs::path& path);

/// Header `t,gx,gy,gz,ax,ay,az`, 17 significant digits.
void write_imu_csv(std::ostream& os, const ImuWindow& imu);
ImuWindow read_imu_csv(std::istream& is);

/// `t tx ty tz qx qy qz qw` per line; '#' lines are comments.
void write_tum(std::ostream& os, const Trajectory& traj);
Trajectory read_tum(std::istream& is);
Trajectory read_tum_file(const fs::path& path);
void write_tum_file(const fs::path& path, const Trajectory& traj);

struct ScanIndexEntry {
  std::size_t index = 0;
  double t0 = 0.0;
  std::size_t count = 0;
  std::string file;  // relative to the dataset root
};

/// Header `index,t0,count,file`.
void write_scan_index(std::ostream& os, const std::vector<ScanIndexEntry>& entries);
std::vector<ScanIndexEntry> read_scan_index(std::istream& is);

/// `x,y,z,dt,cov_xx,cov_xy,cov_xz,cov_yy,cov_yz,cov_zz` per point.
void write_covariance_csv(std::ostream& os, const UndistortedScan& scan);

/// Writes imu.csv, scans/NNNNNN.bin, truth.tum and scan_index.csv.
void save_dataset(const fs::path& dir, const sim::Dataset& dataset);

/// Reads a dataset written by save_dataset. Throws kFormatError on malformed
/// content and on a dataset without scans, kIoError on unreadable files.
sim::Dataset load_dataset(const fs::path& dir);

std::string scan_file_name(std::size_t index);

}  // namespace vlio::io
