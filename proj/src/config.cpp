#include "vlio/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vlio/error.hpp"

namespace vlio {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

bool to_double(std::string_view s, double& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty() && std::isfinite(v);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string nums(std::initializer_list<double> vs) {
  std::string out;
  for (double v : vs) {
    if (!out.empty()) out += ' ';
    out += num(v);
  }
  return out;
}

std::string vec(const Vec3& v) { return nums({v.x(), v.y(), v.z()}); }

// Wraps library validation failures as config errors.
template <class F>
void validated(const KeyValueConfig& kv, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidArgument) throw;
    kv.fail("", e.what());
  }
}

RigidTransform read_extrinsics(KeyValueConfig& kv) {
  RigidTransform x;
  x.translation = kv.get_vec3("extrinsics.translation", Vec3::Zero());
  if (kv.has("extrinsics.quaternion")) {
    const auto q = kv.get_doubles("extrinsics.quaternion", 4);
    const Eigen::Quaterniond quat(q[3], q[0], q[1], q[2]);
    if (std::abs(quat.norm() - 1.0) > 1e-6) {
      kv.fail("extrinsics.quaternion", "quaternion (qx qy qz qw) must have unit norm");
    }
    x.rotation = Rot3::from_quaternion(quat.normalized());
  }
  return x;
}

void emit_extrinsics(std::ostream& os, const RigidTransform& x) {
  const Eigen::Quaterniond q = x.rotation.quaternion();
  os << "extrinsics.translation = " << vec(x.translation) << '\n';
  os << "extrinsics.quaternion = " << nums({q.x(), q.y(), q.z(), q.w()}) << '\n';
}

double non_negative(KeyValueConfig& kv, const std::string& key, double fallback) {
  const double v = kv.get_double(key, fallback);
  if (v < 0.0) kv.fail(key, "must be >= 0");
  return v;
}

double positive(KeyValueConfig& kv, const std::string& key, double fallback) {
  const double v = kv.get_double(key, fallback);
  if (!(v > 0.0)) kv.fail(key, "must be > 0");
  return v;
}

sim::Envelope read_window(KeyValueConfig& kv, const std::string& key,
                          const sim::Envelope& fallback) {
  if (!kv.has(key)) return fallback;
  const auto v = kv.get_doubles(key, 3);
  sim::Envelope e{v[0], v[1], v[2]};
  if (!(e.ramp >= 0.0) || e.stop - e.start < 2.0 * e.ramp) {
    kv.fail(key, "expected 'start stop ramp' with stop - start >= 2 * ramp >= 0");
  }
  return e;
}

}  // namespace

// ---------------------------------------------------------------- parser

KeyValueConfig KeyValueConfig::parse(std::istream& is, const std::string& source) {
  KeyValueConfig kv;
  kv.source_ = source;
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfigError, where + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || words(key).size() != 1) {
      throw Error(ErrorCode::kConfigError, where + ": malformed key '" + key + "'");
    }
    if (value.empty()) {
      throw Error(ErrorCode::kConfigError, where + ": field '" + key + "': missing value");
    }
    const auto [it, fresh] = kv.entries_.try_emplace(key, Entry{value, lineno, false});
    if (!fresh) {
      throw Error(ErrorCode::kConfigError, where + ": field '" + key +
                                               "': duplicate of line " +
                                               std::to_string(it->second.line));
    }
  }
  return kv;
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  return parse(is, source);
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open config " + path.string());
  return parse(in, path.string());
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

const KeyValueConfig::Entry* KeyValueConfig::lookup(const std::string& key) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

void KeyValueConfig::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  if (it != entries_.end()) {
    throw Error(ErrorCode::kConfigError, source_ + ":" + std::to_string(it->second.line) +
                                             ": field '" + key + "': " + message);
  }
  if (!key.empty()) {
    throw Error(ErrorCode::kConfigError, source_ + ": field '" + key + "': " + message);
  }
  throw Error(ErrorCode::kConfigError, source_ + ": " + message);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) {
  const Entry* e = lookup(key);
  if (!e) return fallback;
  double v = 0.0;
  if (!to_double(e->value, v)) fail(key, "expected a number, got '" + e->value + "'");
  return v;
}

long KeyValueConfig::get_int(const std::string& key, long fallback) {
  const Entry* e = lookup(key);
  if (!e) return fallback;
  long v = 0;
  const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
  if (ec != std::errc() || ptr != e->value.data() + e->value.size()) {
    fail(key, "expected an integer, got '" + e->value + "'");
  }
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
  const Entry* e = lookup(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "on") return true;
  if (e->value == "false" || e->value == "0" || e->value == "off") return false;
  fail(key, "expected true/false, got '" + e->value + "'");
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) {
  const Entry* e = lookup(key);
  return e ? e->value : fallback;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key, std::size_t count) {
  const Entry* e = lookup(key);
  if (!e) fail(key, "missing");
  const auto w = words(e->value);
  if (w.size() != count) {
    fail(key, "expected " + std::to_string(count) + " numbers, got " + std::to_string(w.size()));
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!to_double(w[i], out[i])) fail(key, "expected a number, got '" + w[i] + "'");
  }
  return out;
}

std::vector<std::string> KeyValueConfig::get_words(const std::string& key) {
  const Entry* e = lookup(key);
  if (!e) fail(key, "missing");
  return words(e->value);
}

Vec3 KeyValueConfig::get_vec3(const std::string& key, const Vec3& fallback) {
  if (!has(key)) return fallback;
  const auto v = get_doubles(key, 3);
  return Vec3(v[0], v[1], v[2]);
}

std::vector<std::string> KeyValueConfig::indexed_keys(const std::string& prefix) const {
  std::vector<std::pair<long, std::string>> found;
  for (const auto& [key, entry] : entries_) {
    if (key.size() <= prefix.size() || key.compare(0, prefix.size(), prefix) != 0) continue;
    const std::string_view tail = std::string_view(key).substr(prefix.size());
    long n = 0;
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), n);
    if (ec == std::errc() && ptr == tail.data() + tail.size() && n >= 0) {
      found.emplace_back(n, key);
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

void KeyValueConfig::finish() const {
  const Entry* first = nullptr;
  std::string first_key;
  for (const auto& [key, entry] : entries_) {
    if (!entry.used && (!first || entry.line < first->line)) {
      first = &entry;
      first_key = key;
    }
  }
  if (first) fail(first_key, "unknown key");
}

// ---------------------------------------------------------------- run config

RunConfig parse_run_config(KeyValueConfig& kv) {
  RunConfig c;
  c.uncertainty_enabled = kv.get_bool("uncertainty.enabled", c.uncertainty_enabled);
  c.uncertainty.gamma = non_negative(kv, "uncertainty.gamma", c.uncertainty.gamma);
  if (kv.has("uncertainty.deviation_mode")) {
    const std::string mode = kv.get_string("uncertainty.deviation_mode", "");
    try {
      c.uncertainty.deviation_mode = deviation_mode_from_string(mode);
    } catch (const Error&) {
      kv.fail("uncertainty.deviation_mode", "expected mad, std or lls, got '" + mode + "'");
    }
  }

  const long k = kv.get_int("matching.k", static_cast<long>(c.ikf.k_neighbors));
  if (k < 3) kv.fail("matching.k", "must be >= 3");
  c.ikf.k_neighbors = static_cast<std::size_t>(k);
  const long kc = kv.get_int("matching.k_candidates", 2 * k);
  if (kc < k) kv.fail("matching.k_candidates", "must be >= matching.k");
  c.ikf.k_candidates = static_cast<std::size_t>(kc);
  c.ikf.guided_matching = kv.get_bool("matching.guided", c.ikf.guided_matching);
  c.ikf.plane_threshold = positive(kv, "matching.plane_threshold", c.ikf.plane_threshold);
  c.ikf.max_neighbor_distance =
      positive(kv, "matching.max_neighbor_distance", c.ikf.max_neighbor_distance);
  c.ikf.min_plane_extent = non_negative(kv, "matching.min_plane_extent", c.ikf.min_plane_extent);
  c.ikf.cov_floor = non_negative(kv, "matching.cov_floor", c.ikf.cov_floor);
  const long min_valid = kv.get_int("matching.min_valid", static_cast<long>(c.ikf.min_valid));
  if (min_valid < 1) kv.fail("matching.min_valid", "must be >= 1");
  c.ikf.min_valid = static_cast<std::size_t>(min_valid);

  const long iters = kv.get_int("ikf.max_iterations", c.ikf.max_iterations);
  if (iters < 1) kv.fail("ikf.max_iterations", "must be >= 1");
  c.ikf.max_iterations = static_cast<int>(iters);
  c.ikf.eps_rot = positive(kv, "ikf.eps_rot", c.ikf.eps_rot);
  c.ikf.eps_pos = positive(kv, "ikf.eps_pos", c.ikf.eps_pos);
  const long threads = kv.get_int("ikf.threads", c.ikf.threads);
  if (threads < 1) kv.fail("ikf.threads", "must be >= 1");
  c.ikf.threads = static_cast<int>(threads);

  c.map_resolution = positive(kv, "map.resolution", c.map_resolution);
  const long stride =
      kv.get_int("preprocess.downsample_stride", static_cast<long>(c.downsample_stride));
  if (stride < 1) kv.fail("preprocess.downsample_stride", "must be >= 1");
  c.downsample_stride = static_cast<std::size_t>(stride);
  c.min_range = non_negative(kv, "preprocess.min_range", c.min_range);

  c.beam.sigma_range = non_negative(kv, "beam.sigma_range", c.beam.sigma_range);
  c.beam.sigma_bearing = non_negative(kv, "beam.sigma_bearing", c.beam.sigma_bearing);

  c.imu_noise.sigma_gyro = non_negative(kv, "imu.sigma_gyro", c.imu_noise.sigma_gyro);
  c.imu_noise.sigma_accel = non_negative(kv, "imu.sigma_accel", c.imu_noise.sigma_accel);
  c.imu_noise.sigma_bias_gyro_walk =
      non_negative(kv, "imu.sigma_bias_gyro_walk", c.imu_noise.sigma_bias_gyro_walk);
  c.imu_noise.sigma_bias_accel_walk =
      non_negative(kv, "imu.sigma_bias_accel_walk", c.imu_noise.sigma_bias_accel_walk);

  c.extrinsics = read_extrinsics(kv);

  c.init.duration = positive(kv, "init.duration", c.init.duration);
  c.init.rot_std = non_negative(kv, "init.rot_std", c.init.rot_std);
  c.init.pos_std = non_negative(kv, "init.pos_std", c.init.pos_std);
  c.init.vel_std = non_negative(kv, "init.vel_std", c.init.vel_std);
  c.init.bias_gyro_std = non_negative(kv, "init.bias_gyro_std", c.init.bias_gyro_std);
  c.init.bias_accel_std = non_negative(kv, "init.bias_accel_std", c.init.bias_accel_std);

  kv.finish();
  validated(kv, [&] { c.validate(); });
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  KeyValueConfig kv = KeyValueConfig::load(path);
  return parse_run_config(kv);
}

std::string emit_run_config(const RunConfig& c) {
  std::ostringstream os;
  os << "uncertainty.enabled = " << (c.uncertainty_enabled ? "true" : "false") << '\n';
  os << "uncertainty.gamma = " << num(c.uncertainty.gamma) << '\n';
  os << "uncertainty.deviation_mode = " << to_string(c.uncertainty.deviation_mode) << '\n';
  os << "matching.k = " << c.ikf.k_neighbors << '\n';
  os << "matching.k_candidates = " << c.ikf.k_candidates << '\n';
  os << "matching.guided = " << (c.ikf.guided_matching ? "true" : "false") << '\n';
  os << "matching.plane_threshold = " << num(c.ikf.plane_threshold) << '\n';
  os << "matching.max_neighbor_distance = " << num(c.ikf.max_neighbor_distance) << '\n';
  os << "matching.min_plane_extent = " << num(c.ikf.min_plane_extent) << '\n';
  os << "matching.cov_floor = " << num(c.ikf.cov_floor) << '\n';
  os << "matching.min_valid = " << c.ikf.min_valid << '\n';
  os << "ikf.max_iterations = " << c.ikf.max_iterations << '\n';
  os << "ikf.eps_rot = " << num(c.ikf.eps_rot) << '\n';
  os << "ikf.eps_pos = " << num(c.ikf.eps_pos) << '\n';
  os << "ikf.threads = " << c.ikf.threads << '\n';
  os << "map.resolution = " << num(c.map_resolution) << '\n';
  os << "preprocess.downsample_stride = " << c.downsample_stride << '\n';
  os << "preprocess.min_range = " << num(c.min_range) << '\n';
  os << "beam.sigma_range = " << num(c.beam.sigma_range) << '\n';
  os << "beam.sigma_bearing = " << num(c.beam.sigma_bearing) << '\n';
  os << "imu.sigma_gyro = " << num(c.imu_noise.sigma_gyro) << '\n';
  os << "imu.sigma_accel = " << num(c.imu_noise.sigma_accel) << '\n';
  os << "imu.sigma_bias_gyro_walk = " << num(c.imu_noise.sigma_bias_gyro_walk) << '\n';
  os << "imu.sigma_bias_accel_walk = " << num(c.imu_noise.sigma_bias_accel_walk) << '\n';
  emit_extrinsics(os, c.extrinsics);
  os << "init.duration = " << num(c.init.duration) << '\n';
  os << "init.rot_std = " << num(c.init.rot_std) << '\n';
  os << "init.pos_std = " << num(c.init.pos_std) << '\n';
  os << "init.vel_std = " << num(c.init.vel_std) << '\n';
  os << "init.bias_gyro_std = " << num(c.init.bias_gyro_std) << '\n';
  os << "init.bias_accel_std = " << num(c.init.bias_accel_std) << '\n';
  return os.str();
}

// ---------------------------------------------------------------- scenario

sim::Scenario parse_scenario(KeyValueConfig& kv) {
  sim::Scenario s;
  sim::VibrationProfile& p = s.profile;
  p.duration = positive(kv, "duration", p.duration);

  if (kv.has("motion.type")) {
    const std::string m = kv.get_string("motion.type", "");
    try {
      p.motion = sim::base_motion_from_string(m);
    } catch (const Error&) {
      kv.fail("motion.type", "expected static, linear or circle, got '" + m + "'");
    }
  }
  p.direction = kv.get_vec3("motion.direction", p.direction);
  if (!(p.direction.norm() > 0.0)) kv.fail("motion.direction", "must be non-zero");
  p.direction.normalize();
  p.speed = non_negative(kv, "motion.speed", p.speed);
  p.radius = positive(kv, "motion.radius", p.radius);
  p.motion_window = read_window(kv, "motion.window", {0.0, p.duration, 0.0});
  p.vibration_window = read_window(kv, "vibration.window", {0.0, p.duration, 0.0});
  for (const std::string& key : kv.indexed_keys("vibration.term.")) {
    const auto w = kv.get_words(key);
    if (w.size() != 4) kv.fail(key, "expected 'axis amplitude frequency phase'");
    sim::VibrationTerm term;
    try {
      term.axis = sim::vib_axis_from_string(w[0]);
    } catch (const Error&) {
      kv.fail(key, "unknown axis '" + w[0] + "' (x, y, z, roll, pitch or yaw)");
    }
    double v[3];
    for (int i = 0; i < 3; ++i) {
      if (!to_double(w[1 + i], v[i])) kv.fail(key, "expected a number, got '" + w[1 + i] + "'");
    }
    term.amplitude = v[0];
    term.frequency = v[1];
    term.phase = v[2];
    if (term.frequency < 0.0) kv.fail(key, "frequency must be >= 0");
    p.terms.push_back(term);
  }

  const double floor_z = kv.get_double("world.floor_z", -1.0);
  if (kv.has("world.room")) {
    const Vec3 size = kv.get_vec3("world.room", Vec3::Zero());
    if (!(size.minCoeff() > 0.0)) kv.fail("world.room", "room dimensions must be positive");
    s.world = sim::SimWorld::room(size, floor_z);
  }
  for (const std::string& key : kv.indexed_keys("world.box.")) {
    const auto v = kv.get_doubles(key, 6);
    const Vec3 size(v[3], v[4], v[5]);
    if (!(size.minCoeff() > 0.0)) kv.fail(key, "box size must be positive");
    s.world.add_box(Vec3(v[0], v[1], v[2]), size);
  }
  for (const std::string& key : kv.indexed_keys("world.patch.")) {
    const auto v = kv.get_doubles(key, 9);
    sim::Patch patch{Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]), Vec3(v[6], v[7], v[8])};
    const double area = patch.edge_u.cross(patch.edge_v).norm();
    if (!(area > 1e-12 * patch.edge_u.norm() * patch.edge_v.norm()) || !(area > 0.0)) {
      kv.fail(key, "patch edges must be non-parallel");
    }
    s.world.patches.push_back(patch);
  }
  if (s.world.patches.empty()) s.world = sim::SimWorld::room(Vec3(6.0, 6.0, 3.0), floor_z);

  sim::LidarModel& l = s.rig.lidar;
  const long channels = kv.get_int("lidar.channels", l.channels);
  if (channels < 1) kv.fail("lidar.channels", "must be >= 1");
  l.channels = static_cast<int>(channels);
  const long columns = kv.get_int("lidar.columns", l.columns);
  if (columns < 1) kv.fail("lidar.columns", "must be >= 1");
  l.columns = static_cast<int>(columns);
  l.fov_up_deg = kv.get_double("lidar.fov_up_deg", l.fov_up_deg);
  l.fov_down_deg = kv.get_double("lidar.fov_down_deg", l.fov_down_deg);
  if (l.fov_up_deg < l.fov_down_deg) kv.fail("lidar.fov_up_deg", "must be >= lidar.fov_down_deg");
  l.scan_period = positive(kv, "lidar.scan_period", l.scan_period);
  l.min_range = non_negative(kv, "lidar.min_range", l.min_range);
  l.max_range = positive(kv, "lidar.max_range", l.max_range);
  l.beam.sigma_range = non_negative(kv, "lidar.sigma_range", l.beam.sigma_range);
  l.beam.sigma_bearing = non_negative(kv, "lidar.sigma_bearing", l.beam.sigma_bearing);

  sim::ImuModel& im = s.rig.imu;
  im.rate = positive(kv, "imu.rate", im.rate);
  if (im.rate * l.scan_period < 10.0 - 1e-9) {
    kv.fail("imu.rate", "must be at least 10x the scan rate");
  }
  im.noise.sigma_gyro = non_negative(kv, "imu.sigma_gyro", im.noise.sigma_gyro);
  im.noise.sigma_accel = non_negative(kv, "imu.sigma_accel", im.noise.sigma_accel);
  im.noise.sigma_bias_gyro_walk =
      non_negative(kv, "imu.sigma_bias_gyro_walk", im.noise.sigma_bias_gyro_walk);
  im.noise.sigma_bias_accel_walk =
      non_negative(kv, "imu.sigma_bias_accel_walk", im.noise.sigma_bias_accel_walk);
  im.bias_gyro = kv.get_vec3("imu.bias_gyro", im.bias_gyro);
  im.bias_accel = kv.get_vec3("imu.bias_accel", im.bias_accel);
  im.vib_noise_gyro = non_negative(kv, "imu.vib_noise_gyro", im.vib_noise_gyro);
  im.vib_noise_accel = non_negative(kv, "imu.vib_noise_accel", im.vib_noise_accel);
  im.vib_noise_tau = non_negative(kv, "imu.vib_noise_tau", im.vib_noise_tau);

  s.rig.extrinsics = read_extrinsics(kv);

  kv.finish();
  validated(kv, [&] {
    s.world.validate();
    s.profile.validate();
    s.rig.validate();
  });
  return s;
}

sim::Scenario load_scenario(const std::filesystem::path& path) {
  KeyValueConfig kv = KeyValueConfig::load(path);
  return parse_scenario(kv);
}

std::string emit_scenario(const sim::Scenario& s) {
  std::ostringstream os;
  const sim::VibrationProfile& p = s.profile;
  os << "duration = " << num(p.duration) << '\n';
  os << "motion.type = " << sim::to_string(p.motion) << '\n';
  os << "motion.direction = " << vec(p.direction) << '\n';
  os << "motion.speed = " << num(p.speed) << '\n';
  os << "motion.radius = " << num(p.radius) << '\n';
  os << "motion.window = "
     << nums({p.motion_window.start, p.motion_window.stop, p.motion_window.ramp}) << '\n';
  os << "vibration.window = "
     << nums({p.vibration_window.start, p.vibration_window.stop, p.vibration_window.ramp})
     << '\n';
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const sim::VibrationTerm& t = p.terms[i];
    os << "vibration.term." << i << " = " << sim::to_string(t.axis) << ' '
       << nums({t.amplitude, t.frequency, t.phase}) << '\n';
  }
  for (std::size_t i = 0; i < s.world.patches.size(); ++i) {
    const sim::Patch& q = s.world.patches[i];
    os << "world.patch." << i << " = " << vec(q.corner) << ' ' << vec(q.edge_u) << ' '
       << vec(q.edge_v) << '\n';
  }
  const sim::LidarModel& l = s.rig.lidar;
  os << "lidar.channels = " << l.channels << '\n';
  os << "lidar.columns = " << l.columns << '\n';
  os << "lidar.fov_up_deg = " << num(l.fov_up_deg) << '\n';
  os << "lidar.fov_down_deg = " << num(l.fov_down_deg) << '\n';
  os << "lidar.scan_period = " << num(l.scan_period) << '\n';
  os << "lidar.min_range = " << num(l.min_range) << '\n';
  os << "lidar.max_range = " << num(l.max_range) << '\n';
  os << "lidar.sigma_range = " << num(l.beam.sigma_range) << '\n';
  os << "lidar.sigma_bearing = " << num(l.beam.sigma_bearing) << '\n';
  const sim::ImuModel& im = s.rig.imu;
  os << "imu.rate = " << num(im.rate) << '\n';
  os << "imu.sigma_gyro = " << num(im.noise.sigma_gyro) << '\n';
  os << "imu.sigma_accel = " << num(im.noise.sigma_accel) << '\n';
  os << "imu.sigma_bias_gyro_walk = " << num(im.noise.sigma_bias_gyro_walk) << '\n';
  os << "imu.sigma_bias_accel_walk = " << num(im.noise.sigma_bias_accel_walk) << '\n';
  os << "imu.bias_gyro = " << vec(im.bias_gyro) << '\n';
  os << "imu.bias_accel = " << vec(im.bias_accel) << '\n';
  os << "imu.vib_noise_gyro = " << num(im.vib_noise_gyro) << '\n';
  os << "imu.vib_noise_accel = " << num(im.vib_noise_accel) << '\n';
  os << "imu.vib_noise_tau = " << num(im.vib_noise_tau) << '\n';
  emit_extrinsics(os, s.rig.extrinsics);
  return os.str();
}

}  // namespace vlio
