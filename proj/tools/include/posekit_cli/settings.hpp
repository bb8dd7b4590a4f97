#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace posekit::cli {

/// Flat key=value configuration. A JSON file is loaded first (nested objects
/// flatten to dotted keys), then --set overrides; dedicated flags win over both.
class Settings {
 public:
  void load_file(const std::string& path);
  /// "key=value"
  void assign(const std::string& pair);
  void put(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  double number(const std::string& key, double fallback);
  long long integer(const std::string& key, long long fallback);
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);

  /// Throws UsageError naming every key that no reader asked for.
  void require_all_used() const;

 private:
  std::optional<std::string> take(const std::string& key);

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

}  // namespace posekit::cli
