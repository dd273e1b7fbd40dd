#include "bqcf/lattice1d.hpp"

#include <cmath>

#include "bqcf/error.hpp"

namespace bqcf {

Chain1D::Chain1D(int n) : N(n), eps(0.0) {
  require(n >= 1, "chain size N must be positive");
  eps = 1.0 / n;
}

Vec diff(const Chain1D& c, const Vec& u, int order) {
  require(u.size() == c.size(), "displacement length must be 2N");
  require(order >= 1 && order <= 3, "difference order must be 1, 2 or 3");
  const int n = c.size();
  Vec d1(n);
  for (int p = 0; p < n; ++p) d1[p] = (u[p] - u[c.wrap(p - 1)]) / c.eps;
  if (order == 1) return d1;
  Vec d2(n);
  for (int p = 0; p < n; ++p) d2[p] = (d1[c.wrap(p + 1)] - d1[p]) / c.eps;
  if (order == 2) return d2;
  Vec d3(n);
  for (int p = 0; p < n; ++p) d3[p] = (d2[p] - d2[c.wrap(p - 1)]) / c.eps;
  return d3;
}

Norms1D norms(const Chain1D& c, const Vec& v) {
  Norms1D r;
  r.l2eps = std::sqrt(c.eps * v.squaredNorm());
  r.linf = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  r.l1eps = c.eps * v.cwiseAbs().sum();
  return r;
}

double inner(const Chain1D& c, const Vec& u, const Vec& w) {
  require(u.size() == w.size(), "inner product length mismatch");
  return c.eps * u.dot(w);
}

double dnorm2(const Chain1D& c, const Vec& u) {
  const Vec d = diff(c, u, 1);
  return c.eps * d.squaredNorm();
}

Vec project_mean(const Vec& u) { return u.array() - u.mean(); }

double summation_by_parts_residual(const Vec& f, const Vec& g) {
  require(f.size() == g.size() && f.size() > 0, "summation by parts needs equal nonempty sequences");
  const Eigen::Index n = f.size();
  double lhs = 0.0, rhs = 0.0, scale = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index k1 = (k + 1) % n;
    const double a = f[k] * (g[k1] - g[k]);
    const double b = g[k1] * (f[k1] - f[k]);
    lhs += a;
    rhs -= b;
    scale += std::abs(a) + std::abs(b);
  }
  return std::abs(lhs - rhs) / (scale > 0.0 ? scale : 1.0);
}

}  // namespace bqcf
