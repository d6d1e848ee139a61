#ifndef ODECERT_CONFIG_HPP
#define ODECERT_CONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "odecert/manufactured.hpp"
#include "odecert/trainer.hpp"

namespace odecert {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Value of one config key: scalar or (possibly nested) array.
struct ConfigValue {
  std::variant<double, bool, std::string, std::vector<ConfigValue>> v;

  double as_number(const std::string& key) const;
  int as_int(const std::string& key) const;
  bool as_bool(const std::string& key) const;
  const std::string& as_string(const std::string& key) const;
  const std::vector<ConfigValue>& as_array(const std::string& key) const;
};

/// Minimal TOML-style document: `[section]` headers, `key = value` lines,
/// `#` comments; values are numbers, booleans, "strings" and [arrays].
/// Keys are exposed as "section.key".
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);

  bool has(const std::string& dotted_key) const;
  const ConfigValue& get(const std::string& dotted_key) const;
  std::vector<std::string> keys_in(const std::string& section) const;

 private:
  std::map<std::string, ConfigValue> values_;
};

/// A problem loaded from a config file; `mcase.exact` is null when the
/// config supplies only a forcing identifier.
struct LoadedCase {
  ManufacturedCase mcase;
  bool has_exact = false;
  bool has_train = false;
  TrainConfig train;
};

LoadedCase load_case_config(const std::string& path);
LoadedCase case_config_from_text(const std::string& text);

}  // namespace odecert

#endif  // ODECERT_CONFIG_HPP
