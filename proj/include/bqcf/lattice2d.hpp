#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bqcf/lattice1d.hpp"

namespace bqcf {

// Lattice vector in integer lattice coordinates (multiples of a1, a2).
struct LVec {
  int i = 0;
  int j = 0;
  LVec operator+(LVec o) const { return {i + o.i, j + o.j}; }
  LVec operator-(LVec o) const { return {i - o.i, j - o.j}; }
  LVec operator-() const { return {-i, -j}; }
  LVec operator*(int s) const { return {s * i, s * j}; }
  bool operator==(const LVec&) const = default;
};

// a[0..5] = a1..a6, b[0..2] = b1..b3.
extern const std::array<LVec, 6> kA;
extern const std::array<LVec, 3> kB;
// Defining pair (p, q) of b_k as indices into kA: b_k = a_p + a_q.
extern const std::array<std::pair<int, int>, 3> kBondPair;

// Cartesian unit-spacing vector of a lattice vector.
Eigen::Vector2d cartesian(LVec r);

// Periodic triangular lattice with coordinates (i, j) in (-N, N]^2.
// Site (i, j) is stored at flat index s = pi * 2N + pj, pi = (i + N - 1) mod 2N.
// Displacements interleave components: dof 2s + c.
struct TriLattice2D {
  int N = 0;
  double eps = 0.0;

  explicit TriLattice2D(int n);
  int n() const { return 2 * N; }
  int sites() const { return 4 * N * N; }
  int dofs() const { return 8 * N * N; }

  int site_index(int i, int j) const;
  // Canonical coordinates in (-N, N]^2.
  std::pair<int, int> coords(int s) const;
  Eigen::Vector2d position(int s) const;
  // Integer hex ring number max(|i|, |j|, |i+j|) of the canonical representative.
  int ring(int s) const;
  // Flat index of the site at s + r.
  int shift(int s, LVec r) const;
  // Table t[s] = shift(s, r).
  std::vector<int> shift_table(LVec r) const;
};

// Hexagon gauge: max_i |n_i . x| / (sqrt(3)/2) with n_i normal to a1, a2, a3.
double hex_gauge(const Eigen::Vector2d& x);

// The 12 point-group symmetries as integer matrices acting on (i, j).
std::vector<Eigen::Matrix2i> lattice_symmetries();

enum class Region { atomistic = 0, blending = 1, continuum = 2 };

struct Regions2D {
  int Ra = 0;
  int Rb = 0;
  std::vector<Region> label;
  int K() const { return Rb - Ra; }
  int count(Region r) const;
};

// Atomistic: ring <= Ra; blending: Ra < ring <= Rb; continuum otherwise.
Regions2D make_regions(const TriLattice2D& lat, int Ra, int Rb);

// D_r u(x) = (u(x + r) - u(x))/eps on a 2-component field.
Vec diff2d(const TriLattice2D& lat, const Vec& u, LVec r);
// D_r D_s u.
Vec diff2d2(const TriLattice2D& lat, const Vec& u, LVec r, LVec s);
// Scalar-field version of diff2d.
Vec diff2d_scalar(const TriLattice2D& lat, const Vec& f, LVec r);
// (S_r u)(x) = u(x + r) for 2-component fields.
Vec shift2d(const TriLattice2D& lat, const Vec& u, LVec r);
Vec shift_scalar(const TriLattice2D& lat, const Vec& f, LVec r);

struct Norms2D {
  double l2eps = 0.0;
  double linf = 0.0;
  double Dl2eps = 0.0;
};

Norms2D norms2d(const TriLattice2D& lat, const Vec& u);
// eps^2 Sum_x u(x) . w(x)
double inner2d(const TriLattice2D& lat, const Vec& u, const Vec& w);
// eps^2 Sum_x Sum_{i=1..3} |D_{a_i} u|^2
double dnorm2_2d(const TriLattice2D& lat, const Vec& u);
Vec project_mean_2d(const Vec& u);

// |LHS - RHS| of Sum D_rD_r u(x-r).u(x) = -Sum |D_r u(x-r)|^2, both eps^2-weighted.
double sum_by_parts_2d_check(const TriLattice2D& lat, const Vec& u, LVec r);

}  // namespace bqcf
