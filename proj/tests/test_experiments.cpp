#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bqcf/config.hpp"
#include "bqcf/error.hpp"
#include "bqcf/experiments.hpp"

using namespace bqcf;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

template <class F>
std::string error_text(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

template <class F>
Status error_status(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.status();
  }
  return Status::ok;
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("17 significant digit formatting") {
  CHECK(format_g17(0.1) == "0.10000000000000001");
  CHECK(format_g17(1.0) == "1");
  CHECK(std::stod(format_g17(-2.5e-300)) == -2.5e-300);
  CHECK(std::stod(format_g17(std::numbers::pi)) == std::numbers::pi);
  CHECK(format_g17(std::nan("")) == "nan");
  CHECK(format_g17(-INFINITY) == "-inf");
}

TEST_CASE("CSV output follows RFC 4180") {
  Table t;
  t.header = {"name", "value", "count"};
  t.rows.push_back({std::string("plain"), 0.5, 3LL});
  t.rows.push_back({std::string("a,b"), -1.0, 0LL});
  t.rows.push_back({std::string("say \"hi\""), 1e20, -7LL});
  t.rows.push_back({std::string("two\nlines"), 0.1, 1LL});
  CHECK(t.to_csv() ==
        "name,value,count\r\n"
        "plain,0.5,3\r\n"
        "\"a,b\",-1,0\r\n"
        "\"say \"\"hi\"\"\",1e+20,-7\r\n"
        "\"two\nlines\",0.10000000000000001,1\r\n");
}

TEST_CASE("least-squares line fit") {
  const LineFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
  const LineFit g = fit_line({0, 1, 2}, {0, 1, 0});
  CHECK(g.slope == doctest::Approx(0.0).scale(1.0));
  CHECK(g.r2 == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(fit_line({1}, {1}), Error);
  CHECK_THROWS_AS(fit_line({1, 2}, {1}), Error);
}

TEST_CASE("parallel map visits every index and propagates errors") {
  for (int threads : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, threads, [&](int i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(20, 4, [](int i) {
                    if (i == 7) throw Error(Status::internal, "boom");
                  }),
                  Error);
  parallel_for(0, 4, [](int) { FAIL("no work expected"); });
}

TEST_CASE("sweep without second neighbours is degenerate at K_min") {
  Sweep1DParams p;
  p.N = {16, 32, 64};
  const ThresholdFit f = sweep_threshold_1d(make_model_1d(1.0, 0.0), p);
  CHECK(f.degenerate);
  REQUIRE(f.points.size() == 3);
  for (const auto& pt : f.points) {
    CHECK(!pt.flagged);
    CHECK(pt.Kstar == p.K_min);
    CHECK(std::isnan(pt.gamma_below));
    CHECK(pt.gamma_at == doctest::Approx(1.0).epsilon(1e-10));
  }
  for (const auto& r : f.rows) CHECK(r.canary <= 1e-10);
}

TEST_CASE("1D threshold certificate") {
  Sweep1DParams p;
  p.N = {128, 256};
  const PairModel1D m = make_model_1d(1.0, -0.24);
  const ThresholdFit f = sweep_threshold_1d(m, p);
  CHECK(!f.degenerate);
  for (const auto& pt : f.points) {
    REQUIRE(!pt.flagged);
    CHECK(pt.gamma_at > 0.0);
    if (pt.Kstar > p.K_min) CHECK(pt.gamma_below <= 1e-10);
    const Chain1D c(pt.N);
    const double direct = coercivity(Op1D(Kind1D::bqcf, c, m, build_blend_1d(c, pt.Kstar, default_center_1d(c, pt.Kstar)))).gamma;
    CHECK(direct == doctest::Approx(pt.gamma_at).epsilon(1e-12));
  }
  CHECK(f.monotone);
  for (size_t i = 1; i < f.rows.size(); ++i) {
    const auto& a = f.rows[i - 1];
    const auto& b = f.rows[i];
    CHECK(std::tie(a.eps, a.K) < std::tie(b.eps, b.K));
  }
}

TEST_CASE("1D sharpness probe at N=512") {
  const Chain1D c(512);
  const PairModel1D m = make_model_1d(1.0, -0.24);
  for (int K : {6, 8, 12}) {
    const Blend1D b = build_blend_1d(c, K, default_center_1d(c, K));
    const Sharp1DResult r = sharpness_probe_1d(m, c, b);
    CHECK(r.T_ok);
    // destabilizing direction for phi2F < 0
    CHECK(-r.terms.T <= -r.T_bound);
    CHECK(r.J > 0);
    CHECK(r.alpha == doctest::Approx(static_cast<double>(r.J) / b.K));
    if (K == 6) CHECK(r.rayleigh < c0(m));
  }
  CHECK_THROWS_AS(sharpness_probe_1d(m, c, blend_from_samples(c, Vec::Ones(c.size()), 8)), Error);
}

TEST_CASE("2D sharpness probe needs an unstable bond direction") {
  const TriLattice2D lat(12);
  const PairModel2D m = toy_model_2d(1.0, 0.0, 1.0);
  CHECK((m.Hb[0] - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(contains(error_text([&] { sharpness_probe_2d(lat, m, build_radial_blend_2d(lat, 2, 6, 0)); }),
                 "no unstable bond direction"));
}

TEST_CASE("2D sharpness probe: narrow blend indefinite, wide blend stable") {
  const TriLattice2D lat(24);
  const PairModel2D m = toy_model_2d(3.2, -1.0);
  const Sharp2DResult narrow = sharpness_probe_2d(lat, m, build_radial_blend_2d(lat, 4, 4 + 3, 0));
  const Sharp2DResult wide = sharpness_probe_2d(lat, m, build_radial_blend_2d(lat, 4, 4 + 12, 0));
  CHECK(narrow.lambda == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(narrow.form < 0.0);
  CHECK(wide.form > 0.0);
  CHECK(dnorm2_2d(lat, narrow.u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(narrow.uhat.dot(cartesian(kB[0]).normalized())) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("2D full-cell atomistic blend gives the atomistic constant") {
  const TriLattice2D lat(8);
  const PairModel2D m = toy_model_2d(3.2, -1.0);
  const double ga = coercivity(Op2D(Kind2D::atomistic, lat, m)).gamma;
  CHECK(coercivity(Op2D(Kind2D::bqcf, lat, m, constant_blend_2d(lat, 1.0))).gamma == ga);
  const double gc = coercivity(Op2D(Kind2D::cauchy_born, lat, m)).gamma;
  CHECK(coercivity(Op2D(Kind2D::bqcf, lat, m, constant_blend_2d(lat, 0.0))).gamma == gc);
}

TEST_CASE("radius schedules of the three 2D cases") {
  Sweep2DParams p;
  p.Ra = 4;
  p.which = 1;
  CHECK(case_Ra(p, 64) == 4);
  p.which = 2;
  p.alpha = 0.5;
  CHECK(case_Ra(p, 64) == 8);
  p.which = 3;
  p.c = 0.125;
  CHECK(case_Ra(p, 24) == 3);
  p.which = 4;
  CHECK_THROWS_AS(case_Ra(p, 24), Error);
}

TEST_CASE("case 3: gamma at K = 4 eps^-1/5 is at least half of gamma~") {
  Sweep2DParams p;
  p.which = 3;
  p.N = {8, 12, 16, 24};
  const ThresholdFit f = sweep_threshold_2d(toy_model_2d(3.2, -1.0), p);
  for (const auto& pt : f.points) {
    INFO("N = " << pt.N);
    REQUIRE(pt.reference > 0.0);
    REQUIRE(pt.K_check > 0);
    CHECK(pt.gamma_check >= 0.5 * pt.reference);
  }
}

TEST_CASE("trace inequality for a constant on the circle") {
  const double r0 = 0.1;
  const TraceResult t = trace_check(Gauge::circle, r0, 1.0, sample_constant(1.0));
  CHECK(t.converged);
  CHECK(t.lhs == doctest::Approx(2 * std::numbers::pi * r0).epsilon(1e-8));
  CHECK(t.C0 == doctest::Approx(4.0 / 0.9 * 0.1).epsilon(1e-12));
  CHECK(t.C0 == doctest::Approx(0.4444).epsilon(1e-3));
  CHECK(t.C1 == doctest::Approx(2 * r0 * std::abs(std::log(r0))).epsilon(1e-12));
  CHECK(t.rhs >= t.C0 * std::numbers::pi * (1 - r0 * r0) * (1 - 1e-8));
  CHECK(t.ratio < 1.0);
}

TEST_CASE("trace inequality is sharp for log|x|") {
  for (double r0 : {1e-2, 1e-3, 1e-4}) {
    const TraceResult t = trace_check(Gauge::circle, r0, 1.0, sample_log());
    INFO("r0 = " << r0);
    CHECK(t.converged);
    CHECK(t.ratio > 0.01);
    CHECK(t.ratio <= 1.0 + 1e-3);
  }
}

TEST_CASE("trace inequality on the hexagon for polynomial samples") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const TraceResult t = trace_check(Gauge::hexagon, 0.2, 1.0, sample_polynomial(s));
    CHECK(t.converged);
    CHECK(t.ratio <= 1.0 + 1e-3);
  }
  CHECK_THROWS_AS(trace_check(Gauge::circle, 0.0, 1.0, sample_constant()), Error);
  CHECK_THROWS_AS(trace_check(Gauge::circle, 0.5, 0.4, sample_constant()), Error);
  CHECK_THROWS_AS(sample_polynomial(1, 9), Error);
}

TEST_CASE("configuration parsing") {
  const Config c = Config::parse("# comment\nlattice.N = 32\n\nsweep.eps = 1/128..1/1024  # range\nsharp.K=6,8,12\nsharp.coercivity=yes\n");
  CHECK(c.get_int("lattice.N", 0) == 32);
  CHECK(c.get_sizes("sweep.eps", {}) == std::vector<long long>{128, 256, 512, 1024});
  CHECK(c.get_ints("sharp.K", {}) == std::vector<long long>{6, 8, 12});
  CHECK(c.get_bool("sharp.coercivity", false));
  CHECK(c.get_double("solver.tol", 0.5) == 0.5);
  CHECK(Config::parse("potential.phi2F=-6/25").get_double("potential.phi2F", 0) == doctest::Approx(-0.24).epsilon(1e-15));

  CHECK(contains(error_text([] { Config::parse("lattice.N 32", "cfg"); }), "cfg:1: expected key=value"));
  CHECK(contains(error_text([] { Config::parse("a.b=1"); }), "unknown key 'a.b'"));
  CHECK(contains(error_text([] { Config::parse("lattice.N=4\nlattice.N=5"); }), "duplicate key"));
  CHECK(contains(error_text([] { Config::parse("lattice.N="); }), "empty value"));
  CHECK(contains(error_text([] { Config::parse("lattice N=3"); }), "invalid character"));
  CHECK(contains(error_text([] { Config::parse("lattice.N=2.5").get_int("lattice.N", 0); }), "expected an integer"));
  CHECK(contains(error_text([] { Config::parse("solver.tol=abc").get_double("solver.tol", 0); }), "expected a number"));
  CHECK(contains(error_text([] { Config::parse("solver.tol=1/0").get_double("solver.tol", 0); }), "division by zero"));
  CHECK(error_status([] { Config::parse("x"); }) == Status::config_error);
  CHECK(error_status([] { Config::parse("sharp.coercivity=maybe").get_bool("sharp.coercivity", false); }) == Status::config_error);
  CHECK(error_status([] { Config::load("/nonexistent/file.cfg"); }) == Status::config_error);
}

TEST_CASE("run writes the four outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "bqcf_test_run";
  std::filesystem::remove_all(dir);
  const Config cfg = Config::parse("lattice.N=16\noperator.kind=bqcf\nblend.K=8\nexport.matrix_market=true\n");
  RunOptions opt;
  opt.out_dir = dir.string();
  const ExperimentResult r = run("stability", cfg, opt);
  r.write(dir.string());
  for (const char* f : {"rows.csv", "fit.json", "summary.txt", "plot.gp"}) CHECK(std::filesystem::exists(dir / f));
  const std::string csv = slurp(dir / "rows.csv");
  CHECK(contains(csv, "\r\n"));
  const auto js = nlohmann::json::parse(slurp(dir / "fit.json"));
  CHECK(js.is_object());
  CHECK(contains(slurp(dir / "summary.txt"), "result: "));
  bool mtx = false;
  for (const auto& e : std::filesystem::directory_iterator(dir)) mtx = mtx || e.path().extension() == ".mtx";
  CHECK(mtx);
  std::filesystem::remove_all(dir);

  CHECK(experiment_names().size() == 8);
  CHECK_THROWS_AS(run("nope", Config(), opt), Error);
  CHECK(error_status([&] { run("sweep2d", Config::parse("sweep2d.case=5"), opt); }) == Status::config_error);
}
