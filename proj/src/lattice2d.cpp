#include "bqcf/lattice2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "bqcf/error.hpp"

namespace bqcf {

const std::array<LVec, 6> kA = {LVec{1, 0}, LVec{0, 1}, LVec{-1, 1}, LVec{-1, 0}, LVec{0, -1}, LVec{1, -1}};
const std::array<LVec, 3> kB = {LVec{1, 1}, LVec{-1, 2}, LVec{-2, 1}};
const std::array<std::pair<int, int>, 3> kBondPair = {std::pair{0, 1}, std::pair{1, 2}, std::pair{2, 3}};

Eigen::Vector2d cartesian(LVec r) { return {r.i + 0.5 * r.j, 0.5 * std::sqrt(3.0) * r.j}; }

TriLattice2D::TriLattice2D(int n) : N(n) {
  require(n >= 1, "lattice size N must be positive");
  eps = 1.0 / n;
}

int TriLattice2D::site_index(int i, int j) const {
  const int m = n();
  int pi = (i + N - 1) % m;
  int pj = (j + N - 1) % m;
  if (pi < 0) pi += m;
  if (pj < 0) pj += m;
  return pi * m + pj;
}

std::pair<int, int> TriLattice2D::coords(int s) const {
  const int m = n();
  return {s / m - N + 1, s % m - N + 1};
}

Eigen::Vector2d TriLattice2D::position(int s) const {
  auto [i, j] = coords(s);
  return eps * cartesian(LVec{i, j});
}

int TriLattice2D::ring(int s) const {
  auto [i, j] = coords(s);
  return std::max({std::abs(i), std::abs(j), std::abs(i + j)});
}

int TriLattice2D::shift(int s, LVec r) const {
  auto [i, j] = coords(s);
  return site_index(i + r.i, j + r.j);
}

std::vector<int> TriLattice2D::shift_table(LVec r) const {
  std::vector<int> t(sites());
  for (int s = 0; s < sites(); ++s) t[s] = shift(s, r);
  return t;
}

double hex_gauge(const Eigen::Vector2d& x) {
  const double h = 0.5 * std::sqrt(3.0);
  double g = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector2d a = cartesian(kA[k]);
    const Eigen::Vector2d nrm(-a.y(), a.x());
    g = std::max(g, std::abs(nrm.dot(x)));
  }
  return g / h;
}

std::vector<Eigen::Matrix2i> lattice_symmetries() {
  Eigen::Matrix2i R;
  R << 0, -1, 1, 1;
  Eigen::Matrix2i M;
  M << 0, 1, 1, 0;
  std::vector<Eigen::Matrix2i> out;
  Eigen::Matrix2i P = Eigen::Matrix2i::Identity();
  for (int k = 0; k < 6; ++k) {
    out.push_back(P);
    out.push_back(P * M);
    P = R * P;
  }
  return out;
}

int Regions2D::count(Region r) const { return static_cast<int>(std::count(label.begin(), label.end(), r)); }

Regions2D make_regions(const TriLattice2D& lat, int Ra, int Rb) {
  require(Ra >= 0 && Rb >= Ra, "regions need 0 <= Ra <= Rb");
  Regions2D reg;
  reg.Ra = Ra;
  reg.Rb = Rb;
  reg.label.resize(lat.sites());
  for (int s = 0; s < lat.sites(); ++s) {
    const int h = lat.ring(s);
    reg.label[s] = h <= Ra ? Region::atomistic : (h <= Rb ? Region::blending : Region::continuum);
  }
  return reg;
}

Vec shift2d(const TriLattice2D& lat, const Vec& u, LVec r) {
  require(u.size() == lat.dofs(), "displacement size must be 2 * 4N^2");
  Vec out(u.size());
  for (int s = 0; s < lat.sites(); ++s) {
    const int t = lat.shift(s, r);
    out[2 * s] = u[2 * t];
    out[2 * s + 1] = u[2 * t + 1];
  }
  return out;
}

Vec shift_scalar(const TriLattice2D& lat, const Vec& f, LVec r) {
  require(f.size() == lat.sites(), "scalar field size must be 4N^2");
  Vec out(f.size());
  for (int s = 0; s < lat.sites(); ++s) out[s] = f[lat.shift(s, r)];
  return out;
}

Vec diff2d(const TriLattice2D& lat, const Vec& u, LVec r) { return (shift2d(lat, u, r) - u) / lat.eps; }

Vec diff2d2(const TriLattice2D& lat, const Vec& u, LVec r, LVec s) { return diff2d(lat, diff2d(lat, u, s), r); }

Vec diff2d_scalar(const TriLattice2D& lat, const Vec& f, LVec r) { return (shift_scalar(lat, f, r) - f) / lat.eps; }

double inner2d(const TriLattice2D& lat, const Vec& u, const Vec& w) {
  require(u.size() == w.size(), "inner product size mismatch");
  return lat.eps * lat.eps * u.dot(w);
}

double dnorm2_2d(const TriLattice2D& lat, const Vec& u) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += diff2d(lat, u, kA[k]).squaredNorm();
  return lat.eps * lat.eps * s;
}

Norms2D norms2d(const TriLattice2D& lat, const Vec& u) {
  require(u.size() == lat.dofs(), "displacement size must be 2 * 4N^2");
  Norms2D r;
  r.l2eps = std::sqrt(inner2d(lat, u, u));
  for (int s = 0; s < lat.sites(); ++s) r.linf = std::max(r.linf, std::hypot(u[2 * s], u[2 * s + 1]));
  r.Dl2eps = std::sqrt(dnorm2_2d(lat, u));
  return r;
}

Vec project_mean_2d(const Vec& u) {
  Vec out = u;
  const Eigen::Index ns = u.size() / 2;
  for (int c = 0; c < 2; ++c) {
    double m = 0.0;
    for (Eigen::Index s = 0; s < ns; ++s) m += u[2 * s + c];
    m /= static_cast<double>(ns);
    for (Eigen::Index s = 0; s < ns; ++s) out[2 * s + c] -= m;
  }
  return out;
}

double sum_by_parts_2d_check(const TriLattice2D& lat, const Vec& u, LVec r) {
  const Vec dd = shift2d(lat, diff2d2(lat, u, r, r), -r);
  const Vec d = shift2d(lat, diff2d(lat, u, r), -r);
  const double lhs = inner2d(lat, dd, u);
  const double rhs = -inner2d(lat, d, d);
  return std::abs(lhs - rhs);
}

}  // namespace bqcf
