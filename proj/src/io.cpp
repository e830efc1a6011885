#include "vlio/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vlio/error.hpp"

namespace vlio::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "scan I/O assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
bool get(std::istream& is, T& v) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) return false;
  std::memcpy(&v, buf, sizeof(T));
  return true;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t b = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, const std::string& where) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::kFormatError, where + ": cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_size(std::string_view s, const std::string& where) {
  s = trim(s);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::kFormatError,
                where + ": cannot parse integer '" + std::string(s) + "'");
  }
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ifstream open_in(const fs::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string scan_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.bin", index);
  return buf;
}

// ---------------------------------------------------------------- scans

void write_scan(std::ostream& os, const RawScan& scan) {
  os.write(kScanMagic, 4);
  put<std::uint32_t>(os, kScanVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(scan.points.size()));
  put<double>(os, scan.t0);
  for (const RawPoint& p : scan.points) {
    put<float>(os, static_cast<float>(p.position.x()));
    put<float>(os, static_cast<float>(p.position.y()));
    put<float>(os, static_cast<float>(p.position.z()));
    put<float>(os, static_cast<float>(p.dt));
  }
}

RawScan read_scan(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kScanMagic, 4) != 0) {
    throw Error(ErrorCode::kFormatError, "bad scan magic");
  }
  std::uint32_t version = 0, count = 0;
  RawScan scan;
  if (!get(is, version) || !get(is, count) || !get(is, scan.t0)) {
    throw Error(ErrorCode::kFormatError, "truncated scan header");
  }
  if (version != kScanVersion) {
    throw Error(ErrorCode::kFormatError, "unsupported scan version " + std::to_string(version));
  }
  scan.points.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    float v[4];
    for (float& f : v) {
      if (!get(is, f)) {
        throw Error(ErrorCode::kFormatError, "scan truncated at record " + std::to_string(i));
      }
    }
    scan.points[i].position = Vec3(v[0], v[1], v[2]);
    scan.points[i].dt = v[3];
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kFormatError, "trailing bytes after scan records");
  }
  return scan;
}

void write_scan_file(const fs::path& path, const RawScan& scan) {
  std::ofstream out = open_out(path, true);
  write_scan(out, scan);
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

RawScan read_scan_file(const fs::path& path) {
  std::ifstream in = open_in(path, true);
  try {
    return read_scan(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- IMU

void write_imu_csv(std::ostream& os, const ImuWindow& imu) {
  os << "t,gx,gy,gz,ax,ay,az\n";
  char buf[512];
  for (const ImuSample& s : imu) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                  s.gyro.x(), s.gyro.y(), s.gyro.z(), s.accel.x(), s.accel.y(), s.accel.z());
    os << buf;
  }
}

ImuWindow read_imu_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "t,gx,gy,gz,ax,ay,az") {
    throw Error(ErrorCode::kFormatError, "imu.csv: expected header t,gx,gy,gz,ax,ay,az");
  }
  ImuWindow out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = "imu.csv:" + std::to_string(lineno);
    const auto f = split(line, ',');
    if (f.size() != 7) throw Error(ErrorCode::kFormatError, where + ": expected 7 fields");
    ImuSample s;
    s.t = parse_double(f[0], where);
    for (int i = 0; i < 3; ++i) s.gyro[i] = parse_double(f[1 + i], where);
    for (int i = 0; i < 3; ++i) s.accel[i] = parse_double(f[4 + i], where);
    if (!out.empty() && !(s.t > out.back().t)) {
      throw Error(ErrorCode::kFormatError, where + ": timestamps must increase");
    }
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------- TUM

void write_tum(std::ostream& os, const Trajectory& traj) {
  char buf[512];
  for (const TimedPose& p : traj) {
    const Eigen::Quaterniond q = p.pose.rotation.quaternion();
    const Vec3& t = p.pose.translation;
    std::snprintf(buf, sizeof(buf), "%.9f %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", p.t,
                  t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
    os << buf;
  }
}

Trajectory read_tum(std::istream& is) {
  Trajectory out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const std::string where = "tum:" + std::to_string(lineno);
    const auto f = split_ws(s);
    if (f.size() != 8) throw Error(ErrorCode::kFormatError, where + ": expected 8 fields");
    double v[8];
    for (int i = 0; i < 8; ++i) v[i] = parse_double(f[i], where);
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (!(q.norm() > 1e-6)) throw Error(ErrorCode::kFormatError, where + ": zero quaternion");
    TimedPose p;
    p.t = v[0];
    p.pose.translation = Vec3(v[1], v[2], v[3]);
    p.pose.rotation = Rot3::from_quaternion(q.normalized());
    out.push_back(p);
  }
  return out;
}

Trajectory read_tum_file(const fs::path& path) {
  std::ifstream in = open_in(path, false);
  return read_tum(in);
}

void write_tum_file(const fs::path& path, const Trajectory& traj) {
  std::ofstream out = open_out(path, false);
  write_tum(out, traj);
}

// ---------------------------------------------------------------- index

void write_scan_index(std::ostream& os, const std::vector<ScanIndexEntry>& entries) {
  os << "index,t0,count,file\n";
  for (const ScanIndexEntry& e : entries) {
    os << e.index << ',' << fmt17(e.t0) << ',' << e.count << ',' << e.file << '\n';
  }
}

std::vector<ScanIndexEntry> read_scan_index(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "index,t0,count,file") {
    throw Error(ErrorCode::kFormatError, "scan_index.csv: expected header index,t0,count,file");
  }
  std::vector<ScanIndexEntry> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = "scan_index.csv:" + std::to_string(lineno);
    const auto f = split(line, ',');
    if (f.size() != 4) throw Error(ErrorCode::kFormatError, where + ": expected 4 fields");
    ScanIndexEntry e;
    e.index = parse_size(f[0], where);
    e.t0 = parse_double(f[1], where);
    e.count = parse_size(f[2], where);
    e.file = std::string(trim(f[3]));
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------- covariances

void write_covariance_csv(std::ostream& os, const UndistortedScan& scan) {
  os << "x,y,z,dt,cov_xx,cov_xy,cov_xz,cov_yy,cov_yz,cov_zz\n";
  char buf[512];
  for (const UndistortedPoint& p : scan.points) {
    const Mat3& c = p.cov;
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  p.position.x(), p.position.y(), p.position.z(), p.dt, c(0, 0), c(0, 1),
                  c(0, 2), c(1, 1), c(1, 2), c(2, 2));
    os << buf;
  }
}

// ---------------------------------------------------------------- datasets

void save_dataset(const fs::path& dir, const sim::Dataset& dataset) {
  std::error_code ec;
  fs::create_directories(dir / "scans", ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + (dir / "scans").string());

  {
    std::ofstream out = open_out(dir / "imu.csv", false);
    write_imu_csv(out, dataset.imu);
  }
  std::vector<ScanIndexEntry> index;
  for (std::size_t i = 0; i < dataset.scans.size(); ++i) {
    const std::string name = scan_file_name(i);
    write_scan_file(dir / "scans" / name, dataset.scans[i]);
    index.push_back({i, dataset.scans[i].t0, dataset.scans[i].points.size(), "scans/" + name});
  }
  {
    std::ofstream out = open_out(dir / "scan_index.csv", false);
    write_scan_index(out, index);
  }
  write_tum_file(dir / "truth.tum", dataset.truth);
}

sim::Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, "dataset directory " + dir.string() + " does not exist");
  }
  sim::Dataset ds;
  {
    std::ifstream in = open_in(dir / "imu.csv", false);
    ds.imu = read_imu_csv(in);
  }
  std::vector<ScanIndexEntry> index;
  if (fs::exists(dir / "scan_index.csv")) {
    std::ifstream in = open_in(dir / "scan_index.csv", false);
    index = read_scan_index(in);
  } else if (fs::is_directory(dir / "scans")) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir / "scans")) {
      if (entry.path().extension() == ".bin") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (std::size_t i = 0; i < files.size(); ++i) {
      index.push_back({i, 0.0, 0, fs::relative(files[i], dir).string()});
    }
  }
  if (index.empty()) {
    throw Error(ErrorCode::kFormatError, "dataset " + dir.string() + " contains no scans");
  }
  for (const ScanIndexEntry& e : index) {
    RawScan scan = read_scan_file(dir / e.file);
    if (!ds.scans.empty() && !(scan.t0 > ds.scans.back().t0)) {
      throw Error(ErrorCode::kFormatError, e.file + ": scan start times must increase");
    }
    ds.scans.push_back(std::move(scan));
  }
  if (fs::exists(dir / "truth.tum")) ds.truth = read_tum_file(dir / "truth.tum");
  return ds;
}

}  // namespace vlio::io
