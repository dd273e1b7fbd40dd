#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "bqcf/error.hpp"
#include "bqcf/lattice2d.hpp"
#include "bqcf/potentials.hpp"

using namespace bqcf;

namespace {

// Central differences of the energy, independent of the analytic derivatives.
double fd1(const RadialPotential& p, double r, double h = 1e-5) { return (p.value(r + h) - p.value(r - h)) / (2 * h); }
double fd2(const RadialPotential& p, double r, double h = 1e-4) {
  return (p.value(r + h) - 2 * p.value(r) + p.value(r - h)) / (h * h);
}

Eigen::Matrix2d outer_unit(const Eigen::Vector2d& r) {
  const Eigen::Vector2d u = r.normalized();
  return u * u.transpose();
}

}  // namespace

TEST_CASE("harmonic bond Hessian is the identity") {
  const RadialPotential h{RadialKind::harmonic};
  const Eigen::Matrix2d H = radial_hessian(h, {1.0, 0.0});
  CHECK((H - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Lennard-Jones bond Hessian at unit length is 72 r r^T") {
  const RadialPotential lj{RadialKind::lennard_jones};
  CHECK(fd1(lj, 1.0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(fd2(lj, 1.0) == doctest::Approx(72.0).epsilon(1e-5));
  const Eigen::Vector2d r(1.0, 0.0);
  const Eigen::Matrix2d expect = fd2(lj, 1.0) * outer_unit(r) + fd1(lj, 1.0) * (Eigen::Matrix2d::Identity() - outer_unit(r));
  CHECK((radial_hessian(lj, r) - expect).cwiseAbs().maxCoeff() < 1e-4);
  CHECK((radial_hessian(lj, r) - 72.0 * outer_unit(r)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Morse bond Hessian at unit length is 2 alpha^2 r r^T") {
  const RadialPotential m{RadialKind::morse, 4.0};
  CHECK(fd1(m, 1.0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(fd2(m, 1.0) == doctest::Approx(32.0).epsilon(1e-5));
  const Eigen::Vector2d r = cartesian(kA[1]);
  CHECK((radial_hessian(m, r) - 32.0 * outer_unit(r)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("analytic radial derivatives match finite differences away from equilibrium") {
  for (auto kind : {RadialKind::harmonic, RadialKind::lennard_jones, RadialKind::morse}) {
    const RadialPotential p{kind, 3.0};
    for (double r : {0.9, 1.1, 1.7}) {
      CHECK(p.d1(r) == doctest::Approx(fd1(p, r)).epsilon(1e-6));
      CHECK(p.d2(r) == doctest::Approx(fd2(p, r)).epsilon(1e-5));
    }
  }
}

TEST_CASE("radial Hessian is symmetric with eigenvalues phi'' and phi'/rho") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (auto kind : {RadialKind::lennard_jones, RadialKind::morse}) {
    const RadialPotential p{kind, 4.0};
    for (int t = 0; t < 20; ++t) {
      Eigen::Vector2d r(U(rng), U(rng));
      r *= (0.9 + 0.4 * std::abs(U(rng))) / r.norm();
      const Eigen::Matrix2d H = radial_hessian(p, r);
      CHECK(H(0, 1) == H(1, 0));
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H);
      double e1 = p.d2(r.norm()), e2 = p.d1(r.norm()) / r.norm();
      if (e1 > e2) std::swap(e1, e2);
      const double sc = 1.0 + std::abs(e1) + std::abs(e2);
      CHECK(std::abs(es.eigenvalues()[0] - e1) < 1e-12 * sc);
      CHECK(std::abs(es.eigenvalues()[1] - e2) < 1e-12 * sc);
    }
  }
}

TEST_CASE("zero-length bond is rejected") {
  const RadialPotential h{RadialKind::harmonic};
  try {
    radial_hessian(h, Eigen::Vector2d::Zero());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "degenerate bond direction");
    CHECK(e.status() == Status::invalid_argument);
  }
  Eigen::Matrix2d B = Eigen::Matrix2d::Zero();
  B(0, 0) = 1.0;
  CHECK_THROWS_AS(hessians_from_radial(h, B, 0.1), Error);
}

TEST_CASE("hessians_from_radial uses the deformed lattice bonds") {
  const RadialPotential lj{RadialKind::lennard_jones};
  const PairModel2D m = hessians_from_radial(lj, Eigen::Matrix2d::Identity(), 1.0 / 16);
  for (int i = 0; i < 3; ++i) {
    CHECK((m.Ha[i] - 72.0 * outer_unit(cartesian(kA[i]))).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((m.Hb[i] - radial_hessian(lj, cartesian(kB[i]))).cwiseAbs().maxCoeff() == 0.0);
  }
  validate(m);
}

TEST_CASE("c0 examples") {
  CHECK(c0(make_model_1d(1, 0)) == 1.0);
  CHECK(c0(make_model_1d(1, -0.24)) == doctest::Approx(0.04).epsilon(1e-14));
  CHECK(c0(make_model_1d(1, 0.5)) == 1.0);
}

TEST_CASE("c0 never exceeds phiF and equals it iff phi2F >= 0") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const auto m = make_model_1d(0.1 + std::abs(U(rng)), U(rng));
    CHECK(c0(m) <= m.phiF);
    CHECK((c0(m) == m.phiF) == (m.phi2F >= 0.0));
  }
}

TEST_CASE("model invariants are enforced") {
  CHECK_THROWS_AS(make_model_1d(0.0, 0.1), Error);
  CHECK_THROWS_AS(make_model_1d(1.0, 0.1, -1.0), Error);
  PairModel2D m = toy_model_2d(1.0, -1.0);
  m.Hb[0](0, 1) += 1e-6;
  CHECK_THROWS_AS(validate(m), Error);
  PairModel2D flip = toy_model_2d(1.0, -1.0);
  flip.B(0, 0) = -1.0;
  CHECK_THROWS_AS(validate(flip), Error);
}

TEST_CASE("1D model from a radial potential") {
  const RadialPotential lj{RadialKind::lennard_jones};
  const PairModel1D m = model_1d_from_radial(lj, 1.0);
  CHECK(m.phiF == doctest::Approx(72.0));
  CHECK(m.phi2F == doctest::Approx(lj.d2(2.0)));
}

TEST_CASE("toy model bond Hessians") {
  const PairModel2D m = toy_model_2d(3.2, -1.0, 0.25);
  for (int i = 0; i < 3; ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m.Hb[i]);
    CHECK(es.eigenvalues()[0] == doctest::Approx(-0.75));
    CHECK(es.eigenvalues()[1] == doctest::Approx(0.25));
    CHECK((m.Ha[i] * cartesian(kA[i]).normalized() - 3.2 * cartesian(kA[i]).normalized()).norm() < 1e-14);
  }
}
