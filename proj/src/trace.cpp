#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <gsl/gsl_integration.h>

#include "bqcf/error.hpp"
#include "bqcf/experiments.hpp"

namespace bqcf {

namespace {

constexpr int kGaussOrder = 8;

struct GLTable {
  std::unique_ptr<gsl_integration_glfixed_table, void (*)(gsl_integration_glfixed_table*)> t{
      gsl_integration_glfixed_table_alloc(kGaussOrder), gsl_integration_glfixed_table_free};
};

// Boundary of the unit gauge set: point, |gamma'| and gamma x gamma' per parameter s in [0, n_sides).
struct Boundary {
  Gauge g;
  static int sides() { return 6; }
  void eval(double s, Eigen::Vector2d& x, double& speed, double& cross) const {
    const double pi = std::numbers::pi;
    if (g == Gauge::circle) {
      const double th = s * pi / 3.0;
      x = {std::cos(th), std::sin(th)};
      speed = pi / 3.0;
      cross = pi / 3.0;
      return;
    }
    const int k = std::min(5, static_cast<int>(std::floor(s)));
    const double t = s - k;
    const Eigen::Vector2d v0(std::cos(k * pi / 3.0), std::sin(k * pi / 3.0));
    const Eigen::Vector2d v1(std::cos((k + 1) * pi / 3.0), std::sin((k + 1) * pi / 3.0));
    x = v0 + t * (v1 - v0);
    speed = (v1 - v0).norm();
    cross = v0.x() * (v1 - v0).y() - v0.y() * (v1 - v0).x();
  }
};

struct Integrals {
  double boundary = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
};

Integrals integrate(const Boundary& bd, double r0, double r1, const Sample2D& u, int panels, const GLTable& gl) {
  Integrals out;
  const int ps = panels;                                                       // per side
  const int pr = panels * std::max(1, static_cast<int>(std::ceil(std::log10(r1 / r0))));  // radial, geometric
  for (int side = 0; side < bd.sides(); ++side)
    for (int a = 0; a < ps; ++a) {
      const double s0 = side + static_cast<double>(a) / ps, s1 = side + static_cast<double>(a + 1) / ps;
      for (size_t i = 0; i < kGaussOrder; ++i) {
        double s, ws;
        gsl_integration_glfixed_point(s0, s1, i, &s, &ws, gl.t.get());
        Eigen::Vector2d g;
        double speed, cross;
        bd.eval(s, g, speed, cross);
        const double ub = u.f(r0 * g.x(), r0 * g.y());
        out.boundary += ws * r0 * speed * ub * ub;
        for (int b = 0; b < pr; ++b) {
          const double q0 = r0 * std::pow(r1 / r0, static_cast<double>(b) / pr);
          const double q1 = r0 * std::pow(r1 / r0, static_cast<double>(b + 1) / pr);
          for (size_t j = 0; j < kGaussOrder; ++j) {
            double rho, wr;
            gsl_integration_glfixed_point(q0, q1, j, &rho, &wr, gl.t.get());
            const double x = rho * g.x(), y = rho * g.y();
            const double v = u.f(x, y);
            const Eigen::Vector2d dv = u.grad(x, y);
            const double jac = ws * wr * rho * cross;
            out.l2 += jac * v * v;
            out.h1 += jac * dv.squaredNorm();
          }
        }
      }
    }
  return out;
}

}  // namespace

Sample2D sample_constant(double c) {
  return {[c](double, double) { return c; }, [](double, double) { return Eigen::Vector2d::Zero().eval(); }, "constant"};
}

Sample2D sample_log() {
  return {[](double x, double y) { return 0.5 * std::log(x * x + y * y); },
          [](double x, double y) {
            const double r2 = x * x + y * y;
            return Eigen::Vector2d(x / r2, y / r2);
          },
          "log"};
}

Sample2D sample_polynomial(std::uint64_t seed, int degree) {
  require(degree >= 0 && degree <= 8, "polynomial degree must be 0..8");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  // c[px][py] for px + py <= degree
  std::array<std::array<double, 9>, 9> c{};
  for (int d = 0; d <= degree; ++d)
    for (int px = 0; px <= d; ++px) c[px][d - px] = nd(rng);
  auto powers = [degree](double t) {
    std::array<double, 10> p{};
    p[0] = 1.0;
    for (int k = 1; k <= degree; ++k) p[k] = p[k - 1] * t;
    return p;
  };
  auto f = [c, degree, powers](double x, double y) {
    const auto px = powers(x), py = powers(y);
    double s = 0.0;
    for (int i = 0; i <= degree; ++i)
      for (int j = 0; i + j <= degree; ++j) s += c[i][j] * px[i] * py[j];
    return s;
  };
  auto g = [c, degree, powers](double x, double y) {
    const auto px = powers(x), py = powers(y);
    Eigen::Vector2d d = Eigen::Vector2d::Zero();
    for (int i = 0; i <= degree; ++i)
      for (int j = 0; i + j <= degree; ++j) {
        if (i > 0) d.x() += c[i][j] * i * px[i - 1] * py[j];
        if (j > 0) d.y() += c[i][j] * j * px[i] * py[j - 1];
      }
    return d;
  };
  return {f, g, "poly" + std::to_string(seed)};
}

TraceResult trace_check(Gauge g, double r0, double r1, const Sample2D& u, int quad_n) {
  require(r0 > 0.0 && r0 < r1 && r1 <= 1.0, "trace check needs 0 < r0 < r1 <= 1");
  require(quad_n >= 1, "quad_n must be positive");
  const GLTable gl;
  const Boundary bd{g};
  TraceResult r;
  r.C0 = 2.0 * 2.0 / (r1 - r0) * (r0 / r1);
  r.C1 = 2.0 * r0 * std::abs(std::log(r0));
  Integrals prev = integrate(bd, r0, r1, u, quad_n, gl);
  int panels = quad_n;
  for (int level = 0; level < 6; ++level) {
    panels *= 2;
    const Integrals cur = integrate(bd, r0, r1, u, panels, gl);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    const bool ok = rel(prev.boundary, cur.boundary) < 1e-6 && rel(prev.l2, cur.l2) < 1e-6 &&
                    (cur.h1 == 0.0 || rel(prev.h1, cur.h1) < 1e-6);
    prev = cur;
    if (ok) {
      r.converged = true;
      break;
    }
  }
  if (!r.converged) throw Error(Status::solver_failure, "quadrature non-convergence in trace check");
  r.panels = panels;
  r.lhs = prev.boundary;
  r.rhs = r.C0 * prev.l2 + r.C1 * prev.h1;
  r.ratio = r.lhs / r.rhs;
  return r;
}

}  // namespace bqcf
