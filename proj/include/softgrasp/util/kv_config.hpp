#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace softgrasp::util {

/// Plain-text `key=value` configuration.  Blank lines and `#` comments are
/// ignored; surrounding whitespace is trimmed from keys and values.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse(std::string_view text);
  static KvConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Throws std::invalid_argument naming the first key not in `known`.
  void require_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

std::string_view trim(std::string_view s);

}  // namespace softgrasp::util
