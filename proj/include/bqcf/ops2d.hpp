#pragma once

#include <optional>
#include <string>

#include "bqcf/blend.hpp"
#include "bqcf/lattice2d.hpp"
#include "bqcf/potentials.hpp"

namespace bqcf {

enum class Kind2D { atomistic, cauchy_born, bqcf, ltilde };

Kind2D parse_kind_2d(const std::string& s);
const char* kind_name(Kind2D k);

enum class LtildeWeight { b1, per_bond };

struct Op2D {
  Kind2D kind = Kind2D::atomistic;
  TriLattice2D lattice;
  PairModel2D model;
  std::optional<Blend2D> blend;
  LtildeWeight weight = LtildeWeight::b1;

  Op2D(Kind2D k, const TriLattice2D& lat, const PairModel2D& m, std::optional<Blend2D> b = std::nullopt);
};

// Force operator applied to a 2-component field. ltilde is a quadratic form
// only; use apply_ltilde or the assembled matrix.
Vec apply2d(const Op2D& op, const Vec& u);

// Single-bond pieces: nearest-neighbour part (shared) and bond-b parts.
Vec apply_nn(const TriLattice2D& lat, const PairModel2D& m, const Vec& u);
Vec apply_bond_atomistic(const TriLattice2D& lat, const PairModel2D& m, int bond, const Vec& u);
Vec apply_bond_cb(const TriLattice2D& lat, const PairModel2D& m, int bond, const Vec& u);
// beta L^a_b + (1 - beta) L^c_b
Vec apply_bond_bqcf(const TriLattice2D& lat, const PairModel2D& m, const Blend2D& b, int bond, const Vec& u);

struct BondForm {
  int bond = 0;
  double value_c = 0.0;
  double cross = 0.0;
  double Rb_term = 0.0;
  double Sb_term = 0.0;
  double total() const { return value_c + cross + Rb_term + Sb_term; }
};

BondForm divergence_form_2d(const TriLattice2D& lat, const PairModel2D& m, const Blend2D& b, const Vec& u, int bond);

struct RSBounds2D {
  double C_P = 0.0;
  double C_S = 8.0;
  std::array<double, 3> boundR{};
  std::array<double, 3> boundS{};
  std::array<BondForm, 3> forms;
  bool holds() const;
};

// C_P^{a,b} = [(eps K)(eps Rb)|log(eps Rb)|]^{1/2}
double poincare_constant_ab(double epsK, double epsRb);

RSBounds2D rs_bounds_2d(const TriLattice2D& lat, const PairModel2D& m, const Blend2D& b, const Vec& u, double C_S = 8.0);

// <L~ u, u> = <L^c u, u> - eps^4 Sum_j Sum_x beta(x - a2)|D_{a_j}D_{a_{j+1}} u(x - a1 - a2)|^2_{b1}
double apply_ltilde(const TriLattice2D& lat, const PairModel2D& m, const Blend2D& b, const Vec& u,
                    LtildeWeight w = LtildeWeight::b1);

// sup ||u||^2_{l2(L^b)} / ||Du||^2 over mean-zero u.
struct PoincareResult {
  double ratio = 0.0;
  double global_ratio = 0.0;
  double C_P = 0.0;
  int iterations = 0;
  std::string method;
};

PoincareResult poincare_discrete(const TriLattice2D& lat, const Regions2D& reg, bool require_half = true);

}  // namespace bqcf
