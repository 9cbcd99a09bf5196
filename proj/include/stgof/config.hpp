#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stgof/common.hpp"

namespace stgof {

// Flat dotted-key config files: one "section.key = value" per line, '#'
// comments, values are scalars or whitespace-separated lists. Writing dumps
// keys in insertion order so configs round-trip losslessly.
class KvFile {
 public:
  KvFile() = default;

  static KvFile parse_file(const std::string& path);
  static KvFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, const std::vector<double>& values);

  std::string to_string() const;
  void write_file(const std::string& path) const;

  // keys actually present, in insertion order
  const std::vector<std::string>& keys() const { return order_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

// exact decimal round trip for doubles
std::string format_double(double v);

}  // namespace stgof
