#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "bqcf/error.hpp"
#include "bqcf/experiments.hpp"
#include "bqcf/ops1d.hpp"

using namespace bqcf;

namespace {

Vec random_vec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

Blend1D random_blend(const Chain1D& c, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> K(8, c.N), ctr(-c.N + 1, c.N), pr(0, 1);
  return build_blend_1d(c, K(rng), ctr(rng), pr(rng) ? Profile::poly7 : Profile::cosine);
}

Vec alternating(const Chain1D& c) {
  Vec u(c.size());
  for (int l = -c.N + 1; l <= c.N; ++l) u[c.pos(l)] = 0.5 * c.eps * (l % 2 == 0 ? 1.0 : -1.0);
  return u;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("every operator annihilates constants") {
  const Chain1D c(16);
  const Blend1D b = build_blend_1d(c, 8, 0);
  const PairModel1D m = make_model_1d(1.0, -0.24);
  for (Kind1D k : {Kind1D::atomistic, Kind1D::qcl, Kind1D::bqcf, Kind1D::bqcf1, Kind1D::bqcf2}) {
    const Vec y = apply(Op1D(k, c, m, b), Vec::Constant(c.size(), 3.7));
    CHECK(y.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("nearest-neighbour atomistic operator is the scaled discrete Laplacian") {
  const Chain1D c(4);
  std::mt19937_64 rng(1);
  for (int p0 = 0; p0 < c.size(); ++p0) {
    Vec u = Vec::Zero(c.size());
    u[p0] = 1.0;
    u = project_mean(u);
    const Vec y = apply(Op1D(Kind1D::atomistic, c, make_model_1d(1.0, 0.0)), u);
    for (int p = 0; p < c.size(); ++p) {
      const double lap = (2 * u[p] - u[(p + 1) % c.size()] - u[(p + c.size() - 1) % c.size()]) * c.N * c.N;
      CHECK(y[p] == doctest::Approx(lap).epsilon(1e-14));
    }
  }
}

TEST_CASE("constant blends reproduce the atomistic and local operators exactly") {
  const Chain1D c(32);
  std::mt19937_64 rng(2);
  const Vec u = random_vec(c.size(), rng);
  const PairModel1D m = make_model_1d(1.3, -0.2);
  const Blend1D one = blend_from_samples(c, Vec::Ones(c.size()), 8);
  const Blend1D zero = blend_from_samples(c, Vec::Zero(c.size()), 8);
  CHECK((apply(Op1D(Kind1D::bqcf, c, m, one), u) - apply(Op1D(Kind1D::atomistic, c, m), u)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((apply(Op1D(Kind1D::bqcf, c, m, zero), u) - apply(Op1D(Kind1D::qcl, c, m), u)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("blended kinds require a blend") {
  const Chain1D c(8);
  CHECK_THROWS_AS(Op1D(Kind1D::bqcf, c, make_model_1d(1, 0)), Error);
  CHECK_THROWS_AS(parse_kind_1d("qce"), Error);
  CHECK(parse_kind_1d("bqcf2") == Kind1D::bqcf2);
}

TEST_CASE("bqcf1 quadratic form is the squared slope norm") {
  std::mt19937_64 rng(3);
  for (int N : {8, 64, 300}) {
    const Chain1D c(N);
    const Blend1D b = random_blend(c, rng);
    const Vec u = random_vec(c.size(), rng);
    CHECK(rel(quad_form(Op1D(Kind1D::bqcf1, c, make_model_1d(1, 0), b), u), dnorm2(c, u)) < 1e-12);
  }
}

TEST_CASE("atomistic form on the alternating slope is 2 phiF") {
  for (double p2 : {0.0, -0.24, 0.3}) {
    const Chain1D c(20);
    const Vec u = alternating(c);
    CHECK(dnorm2(c, u) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(quad_form(Op1D(Kind1D::atomistic, c, make_model_1d(1.5, p2)), u) == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("local operator form is A_F times the slope norm") {
  std::mt19937_64 rng(4);
  const Chain1D c(50);
  const PairModel1D m = make_model_1d(1.0, -0.2);
  for (int t = 0; t < 10; ++t) {
    const Vec u = random_vec(c.size(), rng);
    CHECK(rel(quad_form(Op1D(Kind1D::qcl, c, m), u), (m.phiF + 4 * m.phi2F) * dnorm2(c, u)) < 1e-12);
  }
}

TEST_CASE("linearity and the bqcf split") {
  std::mt19937_64 rng(5);
  const Chain1D c(40);
  const Blend1D b = random_blend(c, rng);
  const PairModel1D m = make_model_1d(0.8, -0.3);
  const Vec u = random_vec(c.size(), rng), w = random_vec(c.size(), rng);
  const double a = 1.7, s = -0.4;
  for (Kind1D k : {Kind1D::atomistic, Kind1D::qcl, Kind1D::bqcf, Kind1D::bqcf1, Kind1D::bqcf2}) {
    const Op1D op(k, c, m, b);
    const Vec lhs = apply(op, a * u + s * w), rhs = a * apply(op, u) + s * apply(op, w);
    CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
  }
  const Vec full = apply(Op1D(Kind1D::bqcf, c, m, b), u);
  const Vec split = m.phiF * apply(Op1D(Kind1D::bqcf1, c, m, b), u) + m.phi2F * apply(Op1D(Kind1D::bqcf2, c, m, b), u);
  CHECK((full - split).norm() <= 1e-12 * full.norm());
}

TEST_CASE("divergence form vanishes for constant blends") {
  std::mt19937_64 rng(6);
  const Chain1D c(24);
  const Vec u = project_mean(random_vec(c.size(), rng));
  for (double v : {0.0, 1.0}) {
    const DivForm1D f = divergence_form(c, blend_from_samples(c, Vec::Constant(c.size(), v), 8), u);
    CHECK(f.R == 0.0);
    CHECK(f.S == 0.0);
    CHECK(f.T == 0.0);
  }
}

TEST_CASE("divergence-form identity") {
  std::mt19937_64 rng(7);
  for (int N : {8, 64, 512}) {
    const Chain1D c(N);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Blend1D b = random_blend(c, rng);
      const Vec u = project_mean(random_vec(c.size(), rng));
      const double q = quad_form(Op1D(Kind1D::bqcf2, c, make_model_1d(1, 0), b), u);
      worst = std::max(worst, std::abs(divergence_form(c, b, u).total() - q) / std::abs(q));
    }
    CHECK(worst <= 1e-11);
  }
}

TEST_CASE("alternating field with beta = 1 drops the second-neighbour form") {
  const Chain1D c(16);
  const Vec u = project_mean(alternating(c));
  const Blend1D one = blend_from_samples(c, Vec::Ones(c.size()), 8);
  const DivForm1D f = divergence_form(c, one, u);
  CHECK(std::abs(f.main) < 1e-12);
  CHECK(std::abs(quad_form(Op1D(Kind1D::bqcf2, c, make_model_1d(1, 0), one), u)) < 1e-12);
}

TEST_CASE("R, S, T bounds over random draws") {
  std::mt19937_64 rng(8);
  const Chain1D c(64);
  const RSTBounds flat = rst_bounds(c, blend_from_samples(c, Vec::Ones(c.size()), 8), random_vec(c.size(), rng));
  CHECK(flat.boundR == 0.0);
  CHECK(flat.boundT == 0.0);
  CHECK(flat.terms.R == 0.0);
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const Blend1D b = random_blend(c, rng);
    const Vec u = project_mean(random_vec(c.size(), rng));
    if (!rst_bounds(c, b, u).holds()) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("sharpness test function construction") {
  for (int N : {64, 256, 512})
    for (int K : {8, 12, 24}) {
      const Chain1D c(N);
      const Blend1D b = build_blend_1d(c, K, default_center_1d(c, K));
      const SharpnessFunction sf = sharpness_test_function(c, b, -1.0);
      REQUIRE(!sf.J.empty());
      double jn = 0.0;
      for (int p : sf.J) jn += c.eps * sf.vprime[p] * sf.vprime[p];
      CHECK(jn == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(sf.vprime.sum()) < 1e-12 * sf.vprime.cwiseAbs().sum());
      CHECK(std::abs(sf.v.mean()) < 1e-12);
      CHECK(std::sqrt(dnorm2(c, sf.v)) <= 2.0);
      const RSTBounds r = rst_bounds(c, b, sf.v);
      CHECK(std::abs(r.terms.T) >= r.boundT / 100.0);
      CHECK(std::abs(r.terms.T) <= r.boundT * (1.0 + 1e-12));
    }
}

TEST_CASE("sharpness test function loses the atomistic constant") {
  const Chain1D c(256);
  const PairModel1D m = make_model_1d(1.0, -0.24);
  const Blend1D b = build_blend_1d(c, 8, default_center_1d(c, 8));
  const SharpnessFunction sf = sharpness_test_function(c, b, -1.0);
  const double rq = quad_form(Op1D(Kind1D::bqcf, c, m, b), sf.v) / dnorm2(c, sf.v);
  CHECK(rq < c0(m));
  const Sharp1DResult r = sharpness_probe_1d(m, c, b);
  CHECK(r.rayleigh == doctest::Approx(rq).epsilon(1e-12));
}

TEST_CASE("sharpness test function needs a transition") {
  const Chain1D c(32);
  const Blend1D b = blend_from_samples(c, Vec::Ones(c.size()), 8);
  try {
    sharpness_test_function(c, b);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("no transition") != std::string::npos);
  }
}
