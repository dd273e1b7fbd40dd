#include "bqcf/potentials.hpp"

#include <cmath>

#include "bqcf/error.hpp"
#include "bqcf/lattice2d.hpp"

namespace bqcf {

PairModel1D make_model_1d(double phiF, double phi2F, double F) {
  require(std::isfinite(phiF) && std::isfinite(phi2F) && std::isfinite(F), "non-finite model coefficient");
  require(phiF > 0.0, "phiF must be positive");
  require(F > 0.0, "strain F must be positive");
  return PairModel1D{phiF, phi2F, F};
}

double c0(const PairModel1D& m) { return std::min(m.phiF, m.phiF + 4.0 * m.phi2F); }

void validate(const PairModel2D& m) {
  require(m.B.determinant() > 0.0, "det(B) must be positive");
  auto sym = [](const Eigen::Matrix2d& H) { return std::abs(H(0, 1) - H(1, 0)) <= 1e-14 * (1.0 + H.cwiseAbs().maxCoeff()); };
  for (int i = 0; i < 3; ++i) {
    require(sym(m.Ha[i]) && sym(m.Hb[i]), "bond Hessians must be symmetric");
    require(m.Ha[i].allFinite() && m.Hb[i].allFinite(), "non-finite bond Hessian");
  }
}

double RadialPotential::value(double r) const {
  switch (kind) {
    case RadialKind::harmonic: return 0.5 * r * r;
    case RadialKind::lennard_jones: return std::pow(r, -12) - 2.0 * std::pow(r, -6);
    case RadialKind::morse: return std::exp(-2.0 * alpha * (r - 1.0)) - 2.0 * std::exp(-alpha * (r - 1.0));
  }
  return 0.0;
}

double RadialPotential::d1(double r) const {
  switch (kind) {
    case RadialKind::harmonic: return r;
    case RadialKind::lennard_jones: return -12.0 * std::pow(r, -13) + 12.0 * std::pow(r, -7);
    case RadialKind::morse:
      return -2.0 * alpha * std::exp(-2.0 * alpha * (r - 1.0)) + 2.0 * alpha * std::exp(-alpha * (r - 1.0));
  }
  return 0.0;
}

double RadialPotential::d2(double r) const {
  switch (kind) {
    case RadialKind::harmonic: return 1.0;
    case RadialKind::lennard_jones: return 156.0 * std::pow(r, -14) - 84.0 * std::pow(r, -8);
    case RadialKind::morse:
      return 4.0 * alpha * alpha * std::exp(-2.0 * alpha * (r - 1.0)) -
             2.0 * alpha * alpha * std::exp(-alpha * (r - 1.0));
  }
  return 0.0;
}

Eigen::Matrix2d radial_hessian(const RadialPotential& phi, const Eigen::Vector2d& r) {
  const double rho = r.norm();
  if (!(rho > 0.0)) fail("degenerate bond direction");
  const Eigen::Vector2d rh = r / rho;
  const Eigen::Matrix2d P = rh * rh.transpose();
  Eigen::Matrix2d H = phi.d2(rho) * P + (phi.d1(rho) / rho) * (Eigen::Matrix2d::Identity() - P);
  H(0, 1) = H(1, 0) = 0.5 * (H(0, 1) + H(1, 0));
  return H;
}

PairModel2D hessians_from_radial(const RadialPotential& phi, const Eigen::Matrix2d& B, double eps) {
  require(eps > 0.0, "eps must be positive");
  require(B.determinant() > 0.0, "det(B) must be positive");
  PairModel2D m;
  m.B = B;
  for (int i = 0; i < 3; ++i) {
    m.Ha[i] = radial_hessian(phi, B * cartesian(kA[i]));
    m.Hb[i] = radial_hessian(phi, B * cartesian(kB[i]));
  }
  return m;
}

PairModel1D model_1d_from_radial(const RadialPotential& phi, double F) {
  require(F > 0.0, "strain F must be positive");
  return make_model_1d(phi.d2(F), phi.d2(2.0 * F), F);
}

PairModel2D toy_model_2d(double k_nn, double lambda_nnn, double delta_nnn) {
  PairModel2D m;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d a = cartesian(kA[i]).normalized();
    const Eigen::Vector2d b = cartesian(kB[i]).normalized();
    m.Ha[i] = k_nn * a * a.transpose();
    m.Hb[i] = lambda_nnn * b * b.transpose() + delta_nnn * Eigen::Matrix2d::Identity();
  }
  return m;
}

}  // namespace bqcf
