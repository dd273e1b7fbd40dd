#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "bqcf/bqcf.h"

namespace {

bool contains(const char* s, const std::string& part) { return s && std::string(s).find(part) != std::string::npos; }

std::vector<double> wave(size_t n, double k) {
  std::vector<double> u(n);
  for (size_t i = 0; i < n; ++i) u[i] = std::sin(k * static_cast<double>(i)) + 0.1 * std::cos(3.0 * k * i);
  return u;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(bqcf_status_name(BQCF_OK)) == "ok");
  CHECK(std::string(bqcf_status_name(BQCF_CONFIG_ERROR)) == "config_error");
  CHECK(std::string(bqcf_status_name(BQCF_SOLVER_FAILURE)) == "solver_failure");
  CHECK(std::string(bqcf_version()).size() > 0);
}

TEST_CASE("null arguments are rejected with a message") {
  CHECK(bqcf_config_new(nullptr) == BQCF_INVALID_ARGUMENT);
  CHECK(bqcf_last_error_code() == BQCF_INVALID_ARGUMENT);
  CHECK(contains(bqcf_last_error_message(), "null argument"));
  bqcf_op* op = nullptr;
  CHECK(bqcf_op1d_new(nullptr, 8, 1, 0, 0, &op) == BQCF_INVALID_ARGUMENT);
  CHECK(op == nullptr);
  double v = 0;
  CHECK(bqcf_op_quad_form(nullptr, &v, &v) == BQCF_INVALID_ARGUMENT);
  CHECK(bqcf_run(nullptr, nullptr, 1, 1, nullptr, nullptr) == BQCF_INVALID_ARGUMENT);
  bqcf_config_free(nullptr);
  bqcf_result_free(nullptr);
  bqcf_op_free(nullptr);
}

TEST_CASE("success clears the last error") {
  bqcf_config* cfg = nullptr;
  CHECK(bqcf_config_parse_string("lattice.N 8", &cfg) == BQCF_CONFIG_ERROR);
  CHECK(bqcf_last_error_code() == BQCF_CONFIG_ERROR);
  CHECK(contains(bqcf_last_error_message(), "expected key=value"));
  CHECK(bqcf_config_new(&cfg) == BQCF_OK);
  CHECK(bqcf_last_error_code() == BQCF_OK);
  CHECK(std::string(bqcf_last_error_message()).empty());
  bqcf_config_free(cfg);
}

TEST_CASE("last error is per thread") {
  bqcf_config* cfg = nullptr;
  CHECK(bqcf_config_parse_string("nonsense.key=1", &cfg) == BQCF_CONFIG_ERROR);
  bqcf_status other = BQCF_INTERNAL;
  std::string other_msg = "unset";
  std::thread t([&] {
    other = bqcf_last_error_code();
    other_msg = bqcf_last_error_message();
  });
  t.join();
  CHECK(other == BQCF_OK);
  CHECK(other_msg.empty());
  CHECK(bqcf_last_error_code() == BQCF_CONFIG_ERROR);
  CHECK(contains(bqcf_last_error_message(), "unknown key"));
}

TEST_CASE("configuration errors") {
  bqcf_config* cfg = nullptr;
  CHECK(bqcf_config_parse_file("/nonexistent/x.cfg", &cfg) == BQCF_CONFIG_ERROR);
  CHECK(bqcf_config_parse_string("lattice.N=4\nlattice.N=4", &cfg) == BQCF_CONFIG_ERROR);
  CHECK(cfg == nullptr);
  REQUIRE(bqcf_config_parse_string("lattice.N=8\n", &cfg) == BQCF_OK);
  CHECK(bqcf_config_set(cfg, "lattice.dim", "2") == BQCF_OK);
  CHECK(bqcf_config_set(cfg, nullptr, "2") == BQCF_INVALID_ARGUMENT);
  bqcf_config_free(cfg);

  const auto path = std::filesystem::temp_directory_path() / "bqcf_capi_test.cfg";
  std::ofstream(path) << "# stability of the atomistic chain\nlattice.N = 16\npotential.phi2F = 0.3\n";
  REQUIRE(bqcf_config_parse_file(path.string().c_str(), &cfg) == BQCF_OK);
  bqcf_result* r = nullptr;
  REQUIRE(bqcf_run("stability", cfg, 1, 1, nullptr, &r) == BQCF_OK);
  CHECK(contains(bqcf_result_csv(r), "gamma"));
  bqcf_result_free(r);
  bqcf_config_free(cfg);
  std::filesystem::remove(path);

  REQUIRE(bqcf_config_parse_string("solver.tol=abc", &cfg) == BQCF_OK);
  CHECK(bqcf_run("stability", cfg, 1, 1, nullptr, &r) == BQCF_CONFIG_ERROR);
  CHECK(contains(bqcf_last_error_message(), "expected a number"));
  bqcf_config_free(cfg);
}

TEST_CASE("experiment listing and unknown names") {
  REQUIRE(bqcf_experiment_count() == 8);
  std::vector<std::string> names;
  for (size_t i = 0; i < bqcf_experiment_count(); ++i) names.push_back(bqcf_experiment_name(i));
  CHECK(names.front() == "verify");
  CHECK(bqcf_experiment_name(99) == nullptr);
  bqcf_config* cfg = nullptr;
  bqcf_config_new(&cfg);
  bqcf_result* r = nullptr;
  CHECK(bqcf_run("nope", cfg, 1, 1, nullptr, &r) == BQCF_INVALID_ARGUMENT);
  CHECK(r == nullptr);
  bqcf_config_free(cfg);
}

TEST_CASE("1D operator handles") {
  bqcf_op* a = nullptr;
  REQUIRE(bqcf_op1d_new("atomistic", 16, 1.0, 0.3, 0, &a) == BQCF_OK);
  size_t n = 0;
  REQUIRE(bqcf_op_dim(a, &n) == BQCF_OK);
  CHECK(n == 32);
  const std::vector<double> ones(n, 1.0);
  std::vector<double> y(n, 7.0);
  REQUIRE(bqcf_op_apply(a, ones.data(), y.data()) == BQCF_OK);
  for (double v : y) CHECK(std::abs(v) < 1e-9);
  double g = 0;
  REQUIRE(bqcf_op_coercivity(a, nullptr, &g) == BQCF_OK);
  CHECK(g == doctest::Approx(1.0).epsilon(1e-8));
  REQUIRE(bqcf_op_coercivity(a, "iterative", &g) == BQCF_OK);
  CHECK(g == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(bqcf_op_coercivity(a, "arnoldi", &g) == BQCF_INVALID_ARGUMENT);

  // <L u, u> = eps sum (L u) u
  const auto u = wave(n, 0.7);
  double q = 0;
  REQUIRE(bqcf_op_quad_form(a, u.data(), &q) == BQCF_OK);
  REQUIRE(bqcf_op_apply(a, u.data(), y.data()) == BQCF_OK);
  double s = 0;
  for (size_t i = 0; i < n; ++i) s += y[i] * u[i];
  CHECK(q == doctest::Approx(s / 16.0).epsilon(1e-12));
  bqcf_op_free(a);

  bqcf_op* q1 = nullptr;
  REQUIRE(bqcf_op1d_new("qcl", 16, 1.0, -0.2, 0, &q1) == BQCF_OK);
  REQUIRE(bqcf_op_coercivity(q1, "dense", &g) == BQCF_OK);
  CHECK(std::abs(g - 0.2) <= 1e-10);
  bqcf_op_free(q1);

  bqcf_op* b = nullptr;
  CHECK(bqcf_op1d_new("bqcf", 16, 1.0, -0.2, 0, &b) == BQCF_INVALID_ARGUMENT);
  CHECK(bqcf_op1d_new("qce", 16, 1.0, -0.2, 0, &b) == BQCF_INVALID_ARGUMENT);
  CHECK(bqcf_op1d_new("bqcf", 16, 1.0, -0.2, 40, &b) == BQCF_INVALID_ARGUMENT);
  const std::vector<double> beta(32, 1.0);
  REQUIRE(bqcf_op1d_new_blend("bqcf", 16, 1.0, 0.3, beta.data(), &b) == BQCF_OK);
  REQUIRE(bqcf_op_coercivity(b, "dense", &g) == BQCF_OK);
  CHECK(g == doctest::Approx(1.0).epsilon(1e-8));
  bqcf_op_free(b);
  const std::vector<double> bad(32, 1.5);
  CHECK(bqcf_op1d_new_blend("bqcf", 16, 1.0, 0.3, bad.data(), &b) == BQCF_INVALID_ARGUMENT);
}

TEST_CASE("2D operator handles and matrix export") {
  bqcf_op* op = nullptr;
  REQUIRE(bqcf_op2d_new_toy("bqcf", 8, 3.2, -1.0, 0.0, 1, 5, 0, &op) == BQCF_OK);
  size_t n = 0;
  REQUIRE(bqcf_op_dim(op, &n) == BQCF_OK);
  CHECK(n == 2 * 4 * 8 * 8);
  const auto u = wave(n, 0.31);
  std::vector<double> y(n);
  REQUIRE(bqcf_op_apply(op, u.data(), y.data()) == BQCF_OK);
  double q = 0, s = 0;
  REQUIRE(bqcf_op_quad_form(op, u.data(), &q) == BQCF_OK);
  for (size_t i = 0; i < n; ++i) s += y[i] * u[i];
  CHECK(q == doctest::Approx(s / 64.0).epsilon(1e-12));
  double g = 0;
  REQUIRE(bqcf_op_coercivity(op, "dense", &g) == BQCF_OK);
  CHECK(std::isfinite(g));

  const auto path = std::filesystem::temp_directory_path() / "bqcf_capi_test.mtx";
  REQUIRE(bqcf_op_export_mm(op, path.string().c_str()) == BQCF_OK);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real general");
  size_t r = 0, c = 0, nnz = 0;
  f >> r >> c >> nnz;
  CHECK(r == n);
  CHECK(c == n);
  CHECK(nnz > n);
  f.close();
  std::filesystem::remove(path);
  CHECK(bqcf_op_export_mm(op, "/nonexistent-dir/x.mtx") == BQCF_IO_ERROR);
  bqcf_op_free(op);

  bqcf_op* lt = nullptr;
  CHECK(bqcf_op2d_new_toy("ltilde", 8, 3.2, -1.0, 0.0, 0, 0, 0, &lt) == BQCF_INVALID_ARGUMENT);
  REQUIRE(bqcf_op2d_new_toy("ltilde", 8, 3.2, -1.0, 0.0, 1, 5, 0, &lt) == BQCF_OK);
  const auto v = wave(n, 0.11);
  y.assign(n, 0.0);
  REQUIRE(bqcf_op_apply(lt, v.data(), y.data()) == BQCF_OK);
  REQUIRE(bqcf_op_quad_form(lt, v.data(), &q) == BQCF_OK);
  s = 0;
  for (size_t i = 0; i < n; ++i) s += y[i] * v[i];
  CHECK(q == doctest::Approx(s / 64.0).epsilon(1e-11));
  bqcf_op_free(lt);
}

TEST_CASE("run results: checks, outputs and writing") {
  bqcf_config* cfg = nullptr;
  REQUIRE(bqcf_config_parse_string("verify.suite=identities-1d\nverify.draws=5\n", &cfg) == BQCF_OK);
  bqcf_result* r = nullptr;
  REQUIRE(bqcf_run("verify", cfg, 2, 7, nullptr, &r) == BQCF_OK);
  CHECK(bqcf_result_passed(r) == 1);
  CHECK(std::string(bqcf_result_summary(r)).size() > 0);
  CHECK(std::string(bqcf_result_fit_json(r)).front() == '{');
  const size_t nc = bqcf_result_check_count(r);
  REQUIRE(nc > 0);
  const char* name = nullptr;
  const char* detail = nullptr;
  int passed = 0;
  REQUIRE(bqcf_result_check(r, 0, &name, &passed, &detail) == BQCF_OK);
  CHECK(std::string(name).size() > 0);
  CHECK(passed == 1);
  CHECK(bqcf_result_check(r, nc, &name, &passed, &detail) == BQCF_INVALID_ARGUMENT);
  const auto dir = std::filesystem::temp_directory_path() / "bqcf_capi_out";
  std::filesystem::remove_all(dir);
  REQUIRE(bqcf_result_write(r, dir.string().c_str()) == BQCF_OK);
  for (const char* f : {"rows.csv", "fit.json", "summary.txt", "plot.gp"}) CHECK(std::filesystem::exists(dir / f));
  std::filesystem::remove_all(dir);
  CHECK(bqcf_result_write(r, "/proc/forbidden/out") == BQCF_IO_ERROR);
  bqcf_result_free(r);
  bqcf_config_free(cfg);
}
