#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bqcf/bqcf.h"

namespace {

constexpr int kExitFailedChecks = 1;
constexpr int kExitConfig = 2;
constexpr int kExitOther = 3;

struct Options {
  std::string config;
  std::string out;
  int threads = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> sets;
  std::string phiF, phi2F, eps, suite, N;
};

int report_error(const char* what) {
  const bqcf_status s = bqcf_last_error_code();
  std::fprintf(stderr, "bqcf: %s: %s (%s)\n", what, bqcf_last_error_message(), bqcf_status_name(s));
  return s == BQCF_CONFIG_ERROR ? kExitConfig : kExitOther;
}

int execute(const std::string& name, const Options& o) {
  bqcf_config* cfg = nullptr;
  const bqcf_status st = o.config.empty() ? bqcf_config_new(&cfg) : bqcf_config_parse_file(o.config.c_str(), &cfg);
  if (st != BQCF_OK) return report_error("configuration");

  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "bqcf: configuration: --set expects key=value, got '%s'\n", kv.c_str());
      bqcf_config_free(cfg);
      return kExitConfig;
    }
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.phiF.empty()) overrides.emplace_back("potential.phiF", o.phiF);
  if (!o.phi2F.empty()) overrides.emplace_back("potential.phi2F", o.phi2F);
  if (!o.eps.empty()) overrides.emplace_back("sweep.eps", o.eps);
  if (!o.suite.empty()) overrides.emplace_back("verify.suite", o.suite);
  if (!o.N.empty()) overrides.emplace_back("lattice.N", o.N);
  for (const auto& [k, v] : overrides)
    if (bqcf_config_set(cfg, k.c_str(), v.c_str()) != BQCF_OK) {
      bqcf_config_free(cfg);
      return report_error("configuration");
    }

  bqcf_result* res = nullptr;
  const std::string out = o.out.empty() ? "bqcf_out/" + name : o.out;
  if (bqcf_run(name.c_str(), cfg, o.threads, o.seed, out.c_str(), &res) != BQCF_OK) {
    bqcf_config_free(cfg);
    return report_error(name.c_str());
  }
  bqcf_config_free(cfg);
  std::fputs(bqcf_result_summary(res), stdout);
  const size_t n = bqcf_result_check_count(res);
  for (size_t i = 0; i < n; ++i) {
    const char* cname = nullptr;
    const char* detail = nullptr;
    int passed = 0;
    bqcf_result_check(res, i, &cname, &passed, &detail);
    std::printf("%s %s: %s\n", passed ? "PASS" : "FAIL", cname, detail);
  }
  if (bqcf_result_write(res, out.c_str()) != BQCF_OK) {
    bqcf_result_free(res);
    return report_error("output");
  }
  const bool ok = bqcf_result_passed(res) != 0;
  std::printf("%s: %s (outputs in %s)\n", name.c_str(), ok ? "PASS" : "FAIL", out.c_str());
  bqcf_result_free(res);
  return ok ? 0 : kExitFailedChecks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability laboratory for blended force-based atomistic-to-continuum coupling"};
  app.require_subcommand(1);
  Options o;
  std::string chosen;
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"verify", "Run invariant suites (identities, bounds, blend properties)"},
      {"sweep1d", "Locate the 1D blending-width threshold K*(eps) and fit its exponent"},
      {"sweep2d", "Locate the 2D blending-width threshold for a radius scaling case"},
      {"sharp1d", "Evaluate the 1D sharpness test function"},
      {"sharp2d", "Evaluate the layered 2D sharpness probe"},
      {"poincare", "Discrete Poincare constant on the blending annulus"},
      {"trace", "Quadrature check of the annular trace inequality"},
      {"stability", "Coercivity constant of a single operator"}};
  for (const auto& [name, help] : cmds) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "Flat key=value configuration file");
    sub->add_option("--out", o.out, "Output directory (default bqcf_out/<subcommand>)");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--set", o.sets, "Override a configuration key (key=value), repeatable");
    sub->add_option("--phiF", o.phiF, "Shortcut for potential.phiF");
    sub->add_option("--phi2F", o.phi2F, "Shortcut for potential.phi2F");
    sub->add_option("--eps", o.eps, "Shortcut for sweep.eps (list or a..b doubling range)");
    sub->add_option("--N", o.N, "Shortcut for lattice.N");
    if (name == "verify") sub->add_option("--suite", o.suite, "identities-1d, identities-2d, bounds-1d, bounds-2d, blend, all");
    sub->callback([&chosen, name = name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  return execute(chosen, o);
}
