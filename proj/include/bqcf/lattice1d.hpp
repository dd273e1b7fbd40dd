#pragma once

#include <Eigen/Dense>

namespace bqcf {

using Vec = Eigen::VectorXd;

// Periodic chain with sites l = -N+1..N stored at p = l + N - 1.
struct Chain1D {
  int N = 0;
  double eps = 0.0;

  explicit Chain1D(int n);
  int size() const { return 2 * N; }
  int pos(int l) const { return wrap(l + N - 1); }
  int site(int p) const { return p - N + 1; }
  int wrap(int p) const {
    const int n = 2 * N;
    p %= n;
    return p < 0 ? p + n : p;
  }
};

// order 1: (u_l - u_{l-1})/eps, order 2: (Du_{l+1} - Du_l)/eps,
// order 3: (D2u_l - D2u_{l-1})/eps.
Vec diff(const Chain1D& c, const Vec& u, int order);

struct Norms1D {
  double l2eps = 0.0;
  double linf = 0.0;
  double l1eps = 0.0;
};

Norms1D norms(const Chain1D& c, const Vec& v);
double inner(const Chain1D& c, const Vec& u, const Vec& w);

// ||Du||^2 in the eps-weighted l2 norm.
double dnorm2(const Chain1D& c, const Vec& u);

Vec project_mean(const Vec& u);

// Sum_k f_k (g_{k+1} - g_k) + Sum_k g_{k+1} (f_{k+1} - f_k) over one period.
double summation_by_parts_residual(const Vec& f, const Vec& g);

}  // namespace bqcf
