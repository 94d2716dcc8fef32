#ifndef TMPREDICT_CONFIG_FILE_HPP
#define TMPREDICT_CONFIG_FILE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tmpredict {

/// Flat `key = value` configuration. Blank lines and `#` comments are ignored;
/// keys may contain dots (`arma.p`). Later duplicates overwrite earlier ones.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  /// Comma-separated list, whitespace trimmed, empty items dropped.
  std::vector<std::string> get_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  /// Keys in sorted order, one `key = value` per line.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace tmpredict

#endif  // TMPREDICT_CONFIG_FILE_HPP
