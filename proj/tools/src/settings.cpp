#include "posekit_cli/settings.hpp"

#include <charconv>

#include <json.hpp>

#include "posekit/error.hpp"
#include "posekit/pose_json.hpp"

namespace posekit::cli {
namespace {

void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(*it, prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
    return;
  }
  if (prefix.empty()) throw ConfigError("config file must contain a JSON object");
  if (j.is_string()) {
    out[prefix] = j.get<std::string>();
  } else if (j.is_boolean() || j.is_number()) {
    out[prefix] = j.dump();
  } else {
    throw ConfigError(prefix + ": expected a string, number or boolean");
  }
}

}  // namespace

void Settings::load_file(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  std::map<std::string, std::string> flat;
  flatten(doc, "", flat);
  for (auto& [k, v] : flat) values_[k] = v;
}

void Settings::assign(const std::string& pair) {
  const auto eq = pair.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + pair + "'");
  values_[pair.substr(0, eq)] = pair.substr(eq + 1);
}

std::optional<std::string> Settings::take(const std::string& key) {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

double Settings::number(const std::string& key, double fallback) {
  const auto v = take(key);
  if (!v) return fallback;
  double out = 0.0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
    throw ConfigError(key + ": expected a number, got '" + *v + "'");
  }
  return out;
}

long long Settings::integer(const std::string& key, long long fallback) {
  const auto v = take(key);
  if (!v) return fallback;
  long long out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
    throw ConfigError(key + ": expected an integer, got '" + *v + "'");
  }
  return out;
}

std::uint64_t Settings::unsigned_integer(const std::string& key, std::uint64_t fallback) {
  const long long v = integer(key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(key + ": must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool Settings::boolean(const std::string& key, bool fallback) {
  const auto v = take(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + *v + "'");
}

std::string Settings::text(const std::string& key, const std::string& fallback) {
  const auto v = take(key);
  return v ? *v : fallback;
}

void Settings::require_all_used() const {
  std::string unknown;
  for (const auto& [k, v] : values_) {
    if (used_.count(k)) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += k;
  }
  if (!unknown.empty()) throw ConfigError("unknown or inapplicable keys: " + unknown);
}

}  // namespace posekit::cli
