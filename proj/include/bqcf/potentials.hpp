#pragma once

#include <array>

#include <Eigen/Dense>

namespace bqcf {

// Second derivatives of the pair potential at the homogeneous state F.
struct PairModel1D {
  double phiF = 1.0;
  double phi2F = 0.0;
  double F = 1.0;
};

PairModel1D make_model_1d(double phiF, double phi2F, double F = 1.0);

// min(phiF, phiF + 4 phi2F)
double c0(const PairModel1D& m);

struct PairModel2D {
  Eigen::Matrix2d B = Eigen::Matrix2d::Identity();
  std::array<Eigen::Matrix2d, 3> Ha;  // nearest-neighbour bonds a1, a2, a3
  std::array<Eigen::Matrix2d, 3> Hb;  // next-nearest bonds b1, b2, b3
};

void validate(const PairModel2D& m);

enum class RadialKind { harmonic, lennard_jones, morse };

struct RadialPotential {
  RadialKind kind = RadialKind::harmonic;
  double alpha = 4.0;  // Morse stiffness

  double value(double rho) const;
  double d1(double rho) const;
  double d2(double rho) const;
};

// phi'' r r^T + (phi'/rho)(I - r r^T) at the bond vector r.
Eigen::Matrix2d radial_hessian(const RadialPotential& phi, const Eigen::Vector2d& r);

// Hessians at B a_i and B b_i with the lattice directions at unit spacing.
PairModel2D hessians_from_radial(const RadialPotential& phi, const Eigen::Matrix2d& B, double eps);

// 1D coefficients phi''(F), phi''(2F) of a radial potential.
PairModel1D model_1d_from_radial(const RadialPotential& phi, double F);

// Ha_i = k a_i a_i^T, Hb_j = lambda b_j b_j^T + delta I (hats denote unit vectors).
PairModel2D toy_model_2d(double k_nn, double lambda_nnn, double delta_nnn = 0.0);

}  // namespace bqcf
