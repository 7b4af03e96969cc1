// Line-oriented key=value configuration: one `key = value` pair per line,
// dotted keys for nesting (solver.eta=1.0), '#' starts a comment, blank
// lines ignored. Values run to end of line, so they may contain spaces but
// not '#'. Duplicate keys are errors, as are lines without '='.
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace nsgld {

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text,
                             const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  // Getters record every key they touch so unused keys can be rejected
  // afterwards; the single-argument forms error when the key is absent.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated list of doubles; errors on empty or malformed entries.
  std::vector<double> get_double_list(const std::string& key) const;

  // Keys present in the file that no getter has touched; call after the
  // last getter and fail on a nonempty result to reject unknown keys.
  std::vector<std::string> untouched_keys() const;
  void reject_untouched() const;  // config error listing unknown keys

  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };
  const Entry* find(const std::string& key) const;
  const Entry& require(const std::string& key) const;

  std::string origin_;
  std::vector<Entry> entries_;
  mutable std::set<std::string> touched_;
};

}  // namespace nsgld
