#include "bqcf/blend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bqcf/error.hpp"

namespace bqcf {

namespace {

double poly7(double t, int d) {
  switch (d) {
    case 0: return t * t * t * t * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
    case 1: return t * t * t * (140.0 + t * (-420.0 + t * (420.0 - 140.0 * t)));
    case 2: return t * t * (420.0 + t * (-1680.0 + t * (2100.0 - 840.0 * t)));
    default: return t * (840.0 + t * (-5040.0 + t * (8400.0 - 4200.0 * t)));
  }
}

// t - (2/(3 pi)) sin(2 pi t) + (1/(12 pi)) sin(4 pi t): B', B'', B''' vanish at 0 and 1.
double cosine_step(double t, int d) {
  const double pi = std::numbers::pi;
  const double w = 2.0 * pi;
  const double a = 2.0 / (3.0 * pi), b = 1.0 / (12.0 * pi);
  switch (d) {
    case 0: return t - a * std::sin(w * t) + b * std::sin(2 * w * t);
    case 1: return 1.0 - a * w * std::cos(w * t) + b * 2 * w * std::cos(2 * w * t);
    case 2: return a * w * w * std::sin(w * t) - b * 4 * w * w * std::sin(2 * w * t);
    default: return a * w * w * w * std::cos(w * t) - b * 8 * w * w * w * std::cos(2 * w * t);
  }
}

double profile_eval(Profile p, double t, int d) { return p == Profile::poly7 ? poly7(t, d) : cosine_step(t, d); }

std::array<double, 3> scaled(const std::array<double, 3>& m, int K, double eps) {
  std::array<double, 3> c{};
  for (int j = 0; j < 3; ++j) c[j] = m[j] * std::pow(K * eps, j + 1);
  return c;
}

}  // namespace

Profile parse_profile(const std::string& s) {
  if (s == "poly7") return Profile::poly7;
  if (s == "cosine") return Profile::cosine;
  fail("unknown blend profile '" + s + "' (expected poly7 or cosine)");
}

const char* profile_name(Profile p) { return p == Profile::poly7 ? "poly7" : "cosine"; }

double profile_value(Profile p, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return profile_eval(p, t, 0);
}

double profile_sup_derivative(Profile p, int j) {
  require(j >= 1 && j <= 3, "derivative order must be 1..3");
  double m = 0.0;
  const int n = 200000;
  for (int k = 0; k <= n; ++k) m = std::max(m, std::abs(profile_eval(p, static_cast<double>(k) / n, j)));
  return m;
}

Blend1D blend_from_samples(const Chain1D& c, const Vec& beta, int K) {
  require(beta.size() == c.size(), "blend samples must have length 2N");
  for (Eigen::Index p = 0; p < beta.size(); ++p)
    require(beta[p] >= 0.0 && beta[p] <= 1.0, "blend values must lie in [0,1]");
  Blend1D b;
  b.beta = beta;
  for (int p = 0; p < c.size(); ++p) {
    for (int j : {-2, -1, 1, 2}) {
      const double v = beta[c.wrap(p + j)];
      if (v > 0.0 && v < 1.0) {
        b.interface.push_back(p);
        break;
      }
    }
  }
  if (K <= 0) {
    for (const auto& comp : interface_components(c, b)) K = std::max<int>(K, static_cast<int>(comp.sites.size()));
  }
  b.K = K;
  if (K > 0) {
    b.Cj = scaled(derivative_bounds(c, b), K, c.eps);
    b.Cbeta = *std::max_element(b.Cj.begin(), b.Cj.end());
  }
  return b;
}

int default_center_1d(const Chain1D& c, int K) {
  (void)K;
  return c.site(c.N / 2);
}

Blend1D build_blend_1d(const Chain1D& c, int K, int center, Profile profile) {
  if (K < 6) fail("blend width K must be at least 6");
  if (K > c.N) fail("blend width K exceeds half the period (two ramps must fit)");
  const int n = c.size();
  const int p0 = c.pos(center) - K / 2;
  Vec beta = Vec::Zero(n);
  for (int m = 1; m <= K; ++m) beta[c.wrap(p0 + m)] = profile_value(profile, (m - 2.0) / (K - 4.0));
  for (int m = K + 1; m <= c.N; ++m) beta[c.wrap(p0 + m)] = 1.0;
  for (int m = 1; m <= K; ++m) beta[c.wrap(p0 + c.N + m)] = 1.0 - profile_value(profile, (m - 2.0) / (K - 4.0));
  Blend1D b = blend_from_samples(c, beta, K);
  b.up_start = c.wrap(p0 + 1);
  return b;
}

std::array<double, 3> derivative_bounds(const Chain1D& c, const Blend1D& b) {
  std::array<double, 3> m{};
  for (int j = 1; j <= 3; ++j) m[j - 1] = diff(c, b.beta, j).cwiseAbs().maxCoeff();
  return m;
}

std::vector<InterfaceComponent> interface_components(const Chain1D& c, const Blend1D& b) {
  const int n = c.size();
  std::vector<char> in(n, 0);
  for (int p : b.interface) in[p] = 1;
  std::vector<InterfaceComponent> out;
  if (b.interface.empty()) return out;
  if (static_cast<int>(b.interface.size()) == n) {
    InterfaceComponent all;
    for (int p = 0; p < n; ++p) all.sites.push_back(p);
    out.push_back(all);
    return out;
  }
  int start = 0;
  while (in[start]) ++start;  // start just after a gap
  for (int k = 0; k < n; ++k) {
    const int p = c.wrap(start + k);
    if (!in[p]) continue;
    if (in[c.wrap(p - 1)]) continue;
    InterfaceComponent comp;
    int q = p;
    while (in[q] && static_cast<int>(comp.sites.size()) < n) {
      comp.sites.push_back(q);
      q = c.wrap(q + 1);
    }
    const double before = b.beta[c.wrap(p - 1)];
    const double after = b.beta[q];
    comp.orientation = after > before ? 1 : (after < before ? -1 : 0);
    out.push_back(comp);
  }
  return out;
}

std::vector<int> third_diff_level_set(const Chain1D& c, const Blend1D& b, const InterfaceComponent& comp) {
  require(b.K > 0, "blend has no interface width");
  const Vec d3 = diff(c, b.beta, 3);
  const double thr = 0.5 * std::pow(c.eps * b.K, -3);
  std::vector<int> J;
  for (int p : comp.sites) {
    const bool hit = comp.orientation < 0 ? d3[c.wrap(p + 1)] >= thr : d3[p] <= -thr;
    if (hit) J.push_back(p);
  }
  return J;
}

std::vector<int> third_diff_level_set(const Chain1D& c, const Blend1D& b) {
  const double lo = b.beta.minCoeff(), hi = b.beta.maxCoeff();
  if (!(lo == 0.0 && hi == 1.0)) fail("no transition: blend must attain both 0 and 1");
  std::vector<int> J;
  for (const auto& comp : interface_components(c, b)) {
    auto part = third_diff_level_set(c, b, comp);
    J.insert(J.end(), part.begin(), part.end());
  }
  std::sort(J.begin(), J.end());
  return J;
}

Blend2D build_radial_blend_2d(const TriLattice2D& lat, int Ra, int Rb, int margin, Profile profile) {
  require(Ra >= 0 && margin >= 0, "radii and margin must be nonnegative");
  require(Rb - Ra - 2 * margin >= 1, "blend margin violation: need Ra + margin < Rb - margin");
  require(Rb < lat.N, "blending hexagon must fit in the periodic cell (Rb < N)");
  Blend2D b;
  b.Ra = Ra;
  b.Rb = Rb;
  b.K = Rb - Ra;
  b.margin = margin;
  b.beta.resize(lat.sites());
  const double w = Rb - Ra - 2.0 * margin;
  for (int s = 0; s < lat.sites(); ++s) b.beta[s] = 1.0 - profile_value(profile, (lat.ring(s) - Ra - margin) / w);
  const auto m = derivative_bounds(lat, b);
  for (int j = 0; j < 3; ++j) b.Cj[j] = m[j] * std::pow(b.K * lat.eps, j + 1);
  b.Cbeta = *std::max_element(b.Cj.begin(), b.Cj.end());
  return b;
}

Blend2D build_blend_2d(const TriLattice2D& lat, int Ra, int Rb, Profile profile) {
  if (!(Ra + 3 < Rb - 3)) fail("blend margin violation: need Ra + 3 < Rb - 3");
  if (2 * Rb > lat.N) fail("Rb must not exceed N/2");
  return build_radial_blend_2d(lat, Ra, Rb, 3, profile);
}

Blend2D constant_blend_2d(const TriLattice2D& lat, double value) {
  require(value >= 0.0 && value <= 1.0, "blend value must lie in [0,1]");
  Blend2D b;
  b.beta = Vec::Constant(lat.sites(), value);
  return b;
}

std::array<double, 3> derivative_bounds(const TriLattice2D& lat, const Blend2D& b) {
  std::array<double, 3> m{};
  for (int i = 0; i < 6; ++i) {
    const Vec d1 = diff2d_scalar(lat, b.beta, kA[i]);
    m[0] = std::max(m[0], d1.cwiseAbs().maxCoeff());
    for (int j = i; j < 6; ++j) {
      const Vec d2 = diff2d_scalar(lat, d1, kA[j]);
      m[1] = std::max(m[1], d2.cwiseAbs().maxCoeff());
      for (int k = j; k < 6; ++k) m[2] = std::max(m[2], diff2d_scalar(lat, d2, kA[k]).cwiseAbs().maxCoeff());
    }
  }
  return m;
}

double third_diff_outside_blending(const TriLattice2D& lat, const Blend2D& b) {
  const Regions2D reg = make_regions(lat, b.Ra, b.Rb);
  double m = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j)
      for (int k = j; k < 6; ++k) {
        const Vec d3 = diff2d_scalar(lat, diff2d_scalar(lat, diff2d_scalar(lat, b.beta, kA[i]), kA[j]), kA[k]);
        for (int s = 0; s < lat.sites(); ++s)
          if (reg.label[s] != Region::blending) m = std::max(m, std::abs(d3[s]));
      }
  return m;
}

}  // namespace bqcf
