#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vlio/odometry.hpp"
#include "vlio/sim.hpp"

namespace vlio {

/// `key = value` lines; '#' starts a comment. Every key must be consumed by
/// a getter before finish(), otherwise it is reported as unknown. All
/// failures are kConfigError with "source:line: field 'key': ..." messages.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is, const std::string& source);
  static KeyValueConfig parse_string(const std::string& text, const std::string& source);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const;

  double get_double(const std::string& key, double fallback);
  long get_int(const std::string& key, long fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);
  Vec3 get_vec3(const std::string& key, const Vec3& fallback);
  std::vector<double> get_doubles(const std::string& key, std::size_t count);
  std::vector<std::string> get_words(const std::string& key);

  /// Keys of the form prefix + N (N = 0, 1, ...) in numeric order.
  std::vector<std::string> indexed_keys(const std::string& prefix) const;

  /// Throws on the first key no getter consumed.
  void finish() const;

  /// Throws a kConfigError pointing at `key` (or the source if absent).
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
  };
  const Entry* lookup(const std::string& key);

  std::string source_;
  std::map<std::string, Entry> entries_;
};

RunConfig parse_run_config(KeyValueConfig& kv);
RunConfig load_run_config(const std::filesystem::path& path);
/// Every field, in a form parse_run_config reads back to the same values.
std::string emit_run_config(const RunConfig& cfg);

sim::Scenario parse_scenario(KeyValueConfig& kv);
sim::Scenario load_scenario(const std::filesystem::path& path);
std::string emit_scenario(const sim::Scenario& scenario);

}  // namespace vlio
