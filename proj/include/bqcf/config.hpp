#pragma once

#include <map>
#include <string>
#include <vector>

namespace bqcf {

// Flat key=value configuration. '#' starts a comment; blank lines are ignored.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  long long get_int(const std::string& key, long long def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& def) const;
  std::vector<long long> get_ints(const std::string& key, const std::vector<long long>& def) const;
  // Lattice sizes given either as N list ("8,16") or as eps range ("1/128..1/2048").
  std::vector<long long> get_sizes(const std::string& key, const std::vector<long long>& def) const;

  // Every key must be one of the documented keys.
  void validate_keys() const;

 private:
  std::map<std::string, std::string> kv_;
  std::string origin_;
};

const std::vector<std::string>& known_config_keys();

}  // namespace bqcf
