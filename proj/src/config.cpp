#include "config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace nsgld {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0;
  std::size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
          c == '.'))
      return false;
  }
  return true;
}

double parse_double(const std::string& raw, const std::string& key,
                    const std::string& origin) {
  const std::string v = trim(raw);
  double out = 0.0;
  const char* begin = v.data();
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    fail(ErrorCode::config, origin + ": key '" + key +
                                "' has non-numeric value '" + v + "'");
  return out;
}

long parse_long(const std::string& raw, const std::string& key,
                const std::string& origin) {
  const std::string v = trim(raw);
  long out = 0;
  const char* begin = v.data();
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    fail(ErrorCode::config, origin + ": key '" + key +
                                "' has non-integer value '" + v + "'");
  return out;
}

}  // namespace

Config Config::parse_string(const std::string& text,
                            const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::config, origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" +
                                  stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (!valid_key(key))
      fail(ErrorCode::config, origin + ":" + std::to_string(lineno) +
                                  ": invalid key '" + key + "'");
    if (const Entry* prior = cfg.find(key))
      fail(ErrorCode::config,
           origin + ":" + std::to_string(lineno) + ": duplicate key '" + key +
               "' (first set at line " + std::to_string(prior->line) + ")");
    cfg.entries_.push_back({key, value, lineno});
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::io, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

const Config::Entry* Config::find(const std::string& key) const {
  for (const Entry& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

const Config::Entry& Config::require(const std::string& key) const {
  touched_.insert(key);
  if (const Entry* e = find(key)) return *e;
  fail(ErrorCode::config, origin_ + ": missing required key '" + key + "'");
}

bool Config::has(const std::string& key) const {
  touched_.insert(key);
  return find(key) != nullptr;
}

std::string Config::get_string(const std::string& key) const {
  return require(key).value;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  touched_.insert(key);
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

double Config::get_double(const std::string& key) const {
  return parse_double(require(key).value, key, origin_);
}

double Config::get_double(const std::string& key, double fallback) const {
  touched_.insert(key);
  const Entry* e = find(key);
  return e ? parse_double(e->value, key, origin_) : fallback;
}

long Config::get_long(const std::string& key) const {
  return parse_long(require(key).value, key, origin_);
}

long Config::get_long(const std::string& key, long fallback) const {
  touched_.insert(key);
  const Entry* e = find(key);
  return e ? parse_long(e->value, key, origin_) : fallback;
}

std::uint64_t Config::get_seed(const std::string& key,
                               std::uint64_t fallback) const {
  touched_.insert(key);
  const Entry* e = find(key);
  if (!e) return fallback;
  const std::string v = trim(e->value);
  std::uint64_t out = 0;
  const char* begin = v.data();
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    fail(ErrorCode::config, origin_ + ": key '" + key +
                                "' has non-integer value '" + v + "'");
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  touched_.insert(key);
  const Entry* e = find(key);
  if (!e) return fallback;
  const std::string v = trim(e->value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorCode::config, origin_ + ": key '" + key +
                              "' must be true/false/1/0, got '" + v + "'");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  const std::string raw = require(key).value;
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= raw.size()) {
    const std::size_t comma = raw.find(',', start);
    const std::string piece =
        raw.substr(start, comma == std::string::npos ? std::string::npos
                                                     : comma - start);
    out.push_back(parse_double(piece, key, origin_));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> Config::untouched_keys() const {
  std::vector<std::string> out;
  for (const Entry& e : entries_)
    if (!touched_.count(e.key)) out.push_back(e.key);
  return out;
}

void Config::reject_untouched() const {
  const std::vector<std::string> unknown = untouched_keys();
  if (unknown.empty()) return;
  std::string joined;
  for (const std::string& k : unknown) {
    if (!joined.empty()) joined += ", ";
    joined += k;
  }
  fail(ErrorCode::config, origin_ + ": unknown keys: " + joined);
}

}  // namespace nsgld
