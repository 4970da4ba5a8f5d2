#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace metafill::cli {

enum class ValueKind { kString, kInt, kReal, kBool };

struct KeySpec {
  std::string key;  // "section.name"
  ValueKind kind;
  std::string default_value;  // canonical text form
  std::string help;
};

// Every recognised key with its default.
const std::vector<KeySpec>& config_schema();

// Flat key/value configuration. Files use a TOML subset: `[section]`
// headers, `key = value` lines, dotted keys, `#` comments, double-quoted
// strings, integers, reals and booleans.
class Config {
 public:
  Config();  // all defaults

  static Config load(const std::filesystem::path& file);
  // Merges `text` (same syntax as a file) over the current values.
  void merge_text(const std::string& text, const std::string& origin);
  // "section.key=value"; value syntax as in files, bare words allowed.
  void set(const std::string& assignment);
  void set_value(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;  // rejects negatives
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // Resolved values, sorted by key; the hash covers this text.
  std::string canonical() const;
  std::string hash() const;  // hex SHA-256 of canonical()
  std::string to_json() const;

 private:
  const KeySpec& spec(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& file);

}  // namespace metafill::cli
