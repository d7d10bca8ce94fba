// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

namespace licq {

// Flat key = value configuration ('#' starts a comment). Later assignments
// win, so files compose with command-line overrides.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::string to_string() const;
  // Entries as "config.<key>" metadata pairs for embedding in artifacts.
  std::vector<std::pair<std::string, std::string>> as_meta() const;

 private:
  std::map<std::string, std::string> values_;
};

// Resolves a data path against LICQ_DATA_ROOT when it is set and the path is
// relative; absolute paths pass through.
std::string resolve_data_path(const std::string& path);

}  // namespace licq
