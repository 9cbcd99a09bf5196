#include "stgof/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace stgof {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

KvFile KvFile::parse_string(const std::string& text, const std::string& origin) {
  KvFile kv;
  std::istringstream in(text);
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty())
      throw ParseError(origin + ":" + std::to_string(line_no) + ": empty key");
    kv.set(key, value);
  }
  return kv;
}

std::string KvFile::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error("config: missing key '" + key + "'");
  return it->second;
}

std::string KvFile::get_string_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KvFile::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("config: key '" + key + "' is not a number: " + s);
  }
}

double KvFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KvFile::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("config: key '" + key + "' is not an integer: " + s);
  }
}

long long KvFile::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> KvFile::get_doubles(const std::string& key) const {
  std::istringstream in(get_string(key));
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error("config: key '" + key + "' has a non-numeric entry: " + tok);
    }
  }
  if (out.empty()) throw Error("config: key '" + key + "' is an empty list");
  return out;
}

void KvFile::set(const std::string& key, const std::string& value) {
  if (values_.emplace(key, value).second) {
    order_.push_back(key);
  } else {
    values_[key] = value;
  }
}

void KvFile::set(const std::string& key, double value) { set(key, format_double(value)); }

void KvFile::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

void KvFile::set(const std::string& key, const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ' ';
    s += format_double(values[i]);
  }
  set(key, s);
}

std::string KvFile::to_string() const {
  std::string out;
  for (const auto& key : order_) {
    out += key;
    out += " = ";
    out += values_.at(key);
    out += '\n';
  }
  return out;
}

void KvFile::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write config file: " + path);
  out << to_string();
}

}  // namespace stgof
