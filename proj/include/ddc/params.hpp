#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace ddc {

/// Flat `key = value` file; `#` starts a comment, blank lines are ignored.
class ParamFile {
 public:
  ParamFile() = default;

  static ParamFile parse(std::istream& in, const std::string& source = "<stream>");
  static ParamFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated numbers.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

double parse_double(const std::string& text, const std::string& context);
long long parse_int(const std::string& text, const std::string& context);
std::vector<double> parse_list(const std::string& text, const std::string& context);

}  // namespace ddc
