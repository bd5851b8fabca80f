#include "ddc/params.hpp"

#include <charconv>
#include <fstream>

#include "ddc/error.hpp"

namespace ddc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

double parse_double(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InvalidArgument(context + ": expected a number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InvalidArgument(context + ": expected an integer, got '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& context) {
  std::vector<double> out;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(parse_double(item, context));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

ParamFile ParamFile::parse(std::istream& in, const std::string& source) {
  ParamFile pf;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidArgument(source + ":" + std::to_string(lineno) + ": empty key");
    pf.values_[key] = value;
  }
  return pf;
}

ParamFile ParamFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open parameter file " + path.string());
  return parse(in, path.string());
}

const std::string& ParamFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("missing parameter '" + key + "'");
  return it->second;
}

std::string ParamFile::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double ParamFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_double(get(key), key) : fallback;
}

long long ParamFile::get_int(const std::string& key, long long fallback) const {
  return has(key) ? parse_int(get(key), key) : fallback;
}

bool ParamFile::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw InvalidArgument(key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> ParamFile::get_list(const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? parse_list(get(key), key) : fallback;
}

}  // namespace ddc
