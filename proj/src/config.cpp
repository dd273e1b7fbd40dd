#include "bqcf/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bqcf/error.hpp"

namespace bqcf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_fail(const std::string& msg) { throw Error(Status::config_error, msg); }

double parse_number(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    const double a = parse_number(s.substr(0, slash), key);
    const double b = parse_number(s.substr(slash + 1), key);
    if (b == 0.0) config_fail("key '" + key + "': division by zero in '" + raw + "'");
    return a / b;
  }
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    config_fail("key '" + key + "': expected a number, got '" + raw + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

long long to_int(double v, const std::string& key) {
  if (std::abs(v - std::round(v)) > 1e-9 * std::max(1.0, std::abs(v)))
    config_fail("key '" + key + "': expected an integer, got " + std::to_string(v));
  return static_cast<long long>(std::llround(v));
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "potential.kind", "potential.phiF", "potential.phi2F", "potential.alpha", "strain.F", "strain.B",
      "model2d.kind", "model2d.k_nn", "model2d.lambda", "model2d.delta", "model2d.Ha1", "model2d.Ha2", "model2d.Ha3",
      "model2d.Hb1", "model2d.Hb2", "model2d.Hb3", "lattice.N", "lattice.dim", "operator.kind", "blend.profile",
      "blend.K", "blend.center", "blend.Ra", "blend.Rb", "blend.margin", "solver.method", "solver.tol",
      "solver.max_iter", "solver.block", "solver.dense_threshold", "sweep.N", "sweep.eps", "sweep.K_min",
      "sweep.K_max", "sweep2d.case", "sweep2d.alpha", "sweep2d.c", "sweep2d.Ra", "sharp.N", "sharp.K",
      "sharp.coercivity", "bounds.C_S", "bounds.draws", "ltilde.weight", "trace.gauge", "trace.r0", "trace.r1",
      "trace.quad_n", "trace.samples", "poincare.N", "verify.suite", "verify.draws", "export.matrix_market"};
  return keys;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) config_fail(where + "expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_fail(where + "empty key");
    for (char ch : key)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_'))
        config_fail(where + "invalid character in key '" + key + "'");
    if (value.empty()) config_fail(where + "empty value for key '" + key + "'");
    if (c.kv_.count(key)) config_fail(where + "duplicate key '" + key + "'");
    c.kv_[key] = value;
  }
  c.validate_keys();
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Status::config_error, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) { kv_[trim(key)] = trim(value); }

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

void Config::validate_keys() const {
  const auto& known = known_config_keys();
  for (const auto& [k, v] : kv_)
    if (std::find(known.begin(), known.end(), k) == known.end())
      config_fail((origin_.empty() ? std::string() : origin_ + ": ") + "unknown key '" + k + "'");
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double Config::get_double(const std::string& key, double def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : parse_number(it->second, key);
}

long long Config::get_int(const std::string& key, long long def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : to_int(parse_number(it->second, key), key);
}

bool Config::get_bool(const std::string& key, bool def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  config_fail("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<double> out;
  for (const auto& tok : split_list(it->second)) out.push_back(parse_number(tok, key));
  if (out.empty()) config_fail("key '" + key + "': empty list");
  return out;
}

std::vector<long long> Config::get_ints(const std::string& key, const std::vector<long long>& def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<long long> out;
  for (const auto& tok : split_list(it->second)) out.push_back(to_int(parse_number(tok, key), key));
  if (out.empty()) config_fail("key '" + key + "': empty list");
  return out;
}

std::vector<long long> Config::get_sizes(const std::string& key, const std::vector<long long>& def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string v = it->second;
  auto as_size = [&](const std::string& tok) {
    const double x = parse_number(tok, key);
    if (!(x > 0.0)) config_fail("key '" + key + "': sizes must be positive");
    return x < 1.0 ? to_int(1.0 / x, key) : to_int(x, key);
  };
  std::vector<long long> out;
  const auto dots = v.find("..");
  if (dots != std::string::npos) {
    long long a = as_size(v.substr(0, dots)), b = as_size(v.substr(dots + 2));
    if (a > b) std::swap(a, b);
    for (long long n = a; n <= b; n *= 2) out.push_back(n);
  } else {
    for (const auto& tok : split_list(v)) out.push_back(as_size(tok));
  }
  if (out.empty()) config_fail("key '" + key + "': empty size list");
  return out;
}

}  // namespace bqcf
