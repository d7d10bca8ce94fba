// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace licq {

namespace {
std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}
}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: missing '=' on line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config: empty key on line " + std::to_string(lineno));
    c.values_[key] = value;
  }
  return c;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (...) {
    throw std::runtime_error("config: " + key + " is not a number: " + it->second);
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (...) {
    throw std::runtime_error("config: " + key + " is not an integer: " + it->second);
  }
}

uint64_t Config::get_u64(const std::string& key, uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (...) {
    throw std::runtime_error("config: " + key + " is not an integer: " + it->second);
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config: " + key + " is not a boolean: " + v);
}

std::string Config::to_string() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

std::vector<std::pair<std::string, std::string>> Config::as_meta() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : values_) out.emplace_back("config." + k, v);
  return out;
}

std::string resolve_data_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (path.empty() || fs::path(path).is_absolute()) return path;
  const char* root = std::getenv("LICQ_DATA_ROOT");
  if (!root || !*root) return path;
  return (fs::path(root) / path).string();
}

}  // namespace licq
