#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sparsedp/gabor.hpp"

namespace sparsedp {

/// Flat key=value settings. '#' starts a comment; blank lines are ignored.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& source = "<config>");
  static Config from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.contains(key); }
  /// Entries of `overrides` replace ours.
  void merge(const Config& overrides);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated integers.
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Reads rho, alpha1..alpha3, beta1..beta3 over `defaults`.
CopulaModel copula_from_config(const Config& config, CopulaModel defaults = {});

}  // namespace sparsedp
