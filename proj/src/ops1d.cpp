#include "bqcf/ops1d.hpp"

#include <cmath>
#include <utility>

#include "bqcf/error.hpp"

namespace bqcf {

Kind1D parse_kind_1d(const std::string& s) {
  if (s == "atomistic") return Kind1D::atomistic;
  if (s == "qcl") return Kind1D::qcl;
  if (s == "bqcf") return Kind1D::bqcf;
  if (s == "bqcf1") return Kind1D::bqcf1;
  if (s == "bqcf2") return Kind1D::bqcf2;
  fail("unknown 1D operator kind '" + s + "'");
}

const char* kind_name(Kind1D k) {
  switch (k) {
    case Kind1D::atomistic: return "atomistic";
    case Kind1D::qcl: return "qcl";
    case Kind1D::bqcf: return "bqcf";
    case Kind1D::bqcf1: return "bqcf1";
    case Kind1D::bqcf2: return "bqcf2";
  }
  return "?";
}

Op1D::Op1D(Kind1D k, const Chain1D& c, const PairModel1D& m, std::optional<Blend1D> b)
    : kind(k), chain(c), model(m), blend(std::move(b)) {
  if (blended() && !blend) fail("blended operator requires a blend");
  if (blend) require(blend->beta.size() == c.size(), "blend length must match the chain");
}

Vec apply(const Op1D& op, const Vec& u) {
  const Chain1D& c = op.chain;
  require(u.size() == c.size(), "displacement length must be 2N");
  const int n = c.size();
  const double e2 = c.eps * c.eps;
  const double pF = op.model.phiF, p2F = op.model.phi2F, AF = pF + 4.0 * p2F;
  Vec out(n);
  for (int p = 0; p < n; ++p) {
    const double l1 = (-u[c.wrap(p + 1)] + 2.0 * u[p] - u[c.wrap(p - 1)]) / e2;
    const double l2 = (-u[c.wrap(p + 2)] + 2.0 * u[p] - u[c.wrap(p - 2)]) / e2;
    switch (op.kind) {
      case Kind1D::atomistic: out[p] = pF * l1 + p2F * l2; break;
      case Kind1D::qcl: out[p] = AF * l1; break;
      case Kind1D::bqcf: {
        const double b = op.blend->beta[p];
        out[p] = b * (pF * l1 + p2F * l2) + (1.0 - b) * (AF * l1);
        break;
      }
      case Kind1D::bqcf1: out[p] = l1; break;
      case Kind1D::bqcf2: {
        const double b = op.blend->beta[p];
        out[p] = b * l2 + (1.0 - b) * (4.0 * l1);
        break;
      }
    }
  }
  return out;
}

double quad_form(const Op1D& op, const Vec& u) { return inner(op.chain, apply(op, u), u); }

DivForm1D divergence_form(const Chain1D& c, const Blend1D& b, const Vec& u) {
  require(u.size() == c.size() && b.beta.size() == c.size(), "size mismatch in divergence form");
  const int n = c.size();
  const double e = c.eps;
  const Vec du = diff(c, u, 1), d2u = diff(c, u, 2);
  const Vec d2b = diff(c, b.beta, 2), d3b = diff(c, b.beta, 3);
  DivForm1D f;
  double s_du = 0.0, s_bd2u = 0.0;
  for (int p = 0; p < n; ++p) {
    s_du += du[p] * du[p];
    s_bd2u += b.beta[p] * d2u[p] * d2u[p];
    f.R += 2.0 * e * e * e * d2b[p] * du[p] * du[p];
    f.S += e * e * e * e * d2b[p] * d2u[p] * du[p];
    f.T += e * e * e * d3b[c.wrap(p + 1)] * u[p] * du[c.wrap(p + 1)];
  }
  f.main = 4.0 * e * s_du - e * e * (e * s_bd2u);
  return f;
}

bool RSTBounds::holds() const {
  auto ok = [](double t, double bnd) { return std::abs(t) <= bnd * (1.0 + 1e-12) + 1e-300; };
  return ok(terms.R, boundR) && ok(terms.S, boundS) && ok(terms.T, boundT);
}

RSTBounds rst_bounds(const Chain1D& c, const Blend1D& b, const Vec& u) {
  RSTBounds r;
  r.terms = divergence_form(c, b, u);
  const auto m = derivative_bounds(c, b);
  const double e = c.eps;
  const double du2 = dnorm2(c, u);
  const double nI = static_cast<double>(b.interface.size());
  r.boundR = e * e * m[1] * du2;
  r.boundS = 2.0 * e * e * m[1] * du2;
  r.boundT = std::sqrt(2.0) * e * e * std::sqrt(nI * e) * m[2] * du2;
  return r;
}

SharpnessFunction sharpness_test_function(const Chain1D& c, const Blend1D& b, double sign_hint) {
  const double lo = b.beta.minCoeff(), hi = b.beta.maxCoeff();
  if (!(lo == 0.0 && hi == 1.0)) fail("no transition: blend must attain both 0 and 1");
  const auto comps = interface_components(c, b);
  const InterfaceComponent* up = nullptr;
  SharpnessFunction sf;
  for (const auto& comp : comps) {
    if (comp.orientation <= 0) continue;
    auto J = third_diff_level_set(c, b, comp);
    if (!up || J.size() > sf.J.size()) {
      up = &comp;
      sf.J = std::move(J);
    }
  }
  if (!up) fail("blend has no up ramp");
  if (sf.J.empty()) fail("empty level set J'");
  const int n = c.size();
  const double e = c.eps;
  sf.L = e * static_cast<double>(sf.J.size());
  sf.sigma = sign_hint < 0.0 ? -1.0 : 1.0;

  std::vector<char> inI(n, 0);
  for (int p : b.interface) inI[p] = 1;
  const int start = c.wrap(up->sites.front() - 1);
  std::vector<int> rank(n);
  for (int k = 0; k < n; ++k) rank[c.wrap(start + k)] = k;

  Vec vp = Vec::Zero(n);
  for (int p : sf.J) vp[p] = sf.sigma / std::sqrt(sf.L);

  // Minimum-norm correction outside I in span{1, w}: zero period sum and zero mean.
  std::vector<int> O;
  for (int k = 1; k < n; ++k) {
    const int p = c.wrap(start + k);
    if (!inI[p]) O.push_back(p);
  }
  if (O.size() < 2) fail("interface leaves no room for the outside extension");
  auto weight = [&](int p) { return static_cast<double>(n - rank[p]) / n; };
  double s11 = 0.0, s12 = 0.0, s22 = 0.0;
  for (int p : O) {
    const double w = weight(p);
    s11 += 1.0;
    s12 += w;
    s22 += w * w;
  }
  double jsum = 0.0, jw = 0.0;
  for (int p : sf.J) {
    jsum += vp[p];
    jw += weight(p) * vp[p];
  }
  const double r1 = -jsum;
  const double r2 = -(0.5 / e + jw);
  const double det = s11 * s22 - s12 * s12;
  require(std::abs(det) > 0.0, "degenerate outside extension");
  const double l1 = (r1 * s22 - s12 * r2) / det;
  const double l2 = (s11 * r2 - s12 * r1) / det;
  for (int p : O) vp[p] = l1 + l2 * weight(p);

  Vec v(n);
  v[start] = 0.5;
  for (int k = 1; k < n; ++k) {
    const int p = c.wrap(start + k);
    v[p] = v[c.wrap(p - 1)] + e * vp[p];
  }
  sf.v = project_mean(v);
  sf.vprime = diff(c, sf.v, 1);
  return sf;
}

}  // namespace bqcf
