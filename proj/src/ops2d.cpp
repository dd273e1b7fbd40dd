#include "bqcf/ops2d.hpp"

#include <cmath>

#include "bqcf/error.hpp"
#include "bqcf/spectral.hpp"

namespace bqcf {

namespace {

Vec hmul(const Eigen::Matrix2d& H, const Vec& v) {
  Vec out(v.size());
  for (Eigen::Index s = 0; s < v.size() / 2; ++s) out.segment<2>(2 * s) = H * v.segment<2>(2 * s);
  return out;
}

// Sum_x f(s) <x(s), H y(s)>
double hdot_w(const Eigen::Matrix2d& H, const Vec& f, const Vec& x, const Vec& y) {
  double acc = 0.0;
  for (Eigen::Index s = 0; s < f.size(); ++s) acc += f[s] * x.segment<2>(2 * s).dot(H * y.segment<2>(2 * s));
  return acc;
}

Vec second_diff_stencil(const TriLattice2D& lat, const Vec& u, LVec r) {
  return shift2d(lat, u, r) - 2.0 * u + shift2d(lat, u, -r);
}

const Blend2D& need_blend(const std::optional<Blend2D>& b) {
  if (!b) fail("blended operator requires a blend");
  return *b;
}

}  // namespace

Kind2D parse_kind_2d(const std::string& s) {
  if (s == "atomistic") return Kind2D::atomistic;
  if (s == "cauchy_born" || s == "cb") return Kind2D::cauchy_born;
  if (s == "bqcf") return Kind2D::bqcf;
  if (s == "ltilde") return Kind2D::ltilde;
  fail("unknown 2D operator kind '" + s + "'");
}

const char* kind_name(Kind2D k) {
  switch (k) {
    case Kind2D::atomistic: return "atomistic";
    case Kind2D::cauchy_born: return "cauchy_born";
    case Kind2D::bqcf: return "bqcf";
    case Kind2D::ltilde: return "ltilde";
  }
  return "?";
}

Op2D::Op2D(Kind2D k, const TriLattice2D& lat, const PairModel2D& m, std::optional<Blend2D> b)
    : kind(k), lattice(lat), model(m), blend(std::move(b)) {
  validate(model);
  if ((k == Kind2D::bqcf || k == Kind2D::ltilde) && !blend) fail("blended operator requires a blend");
  if (blend) require(blend->beta.size() == lat.sites(), "blend size must match the lattice");
}

Vec apply_nn(const TriLattice2D& lat, const PairModel2D& m, const Vec& u) {
  Vec out = Vec::Zero(u.size());
  const double e2 = lat.eps * lat.eps;
  for (int i = 0; i < 3; ++i) out -= hmul(m.Ha[i], second_diff_stencil(lat, u, kA[i])) / e2;
  return out;
}

Vec apply_bond_atomistic(const TriLattice2D& lat, const PairModel2D& m, int bond, const Vec& u) {
  const double e2 = lat.eps * lat.eps;
  return -hmul(m.Hb[bond], second_diff_stencil(lat, u, kB[bond])) / e2;
}

Vec apply_bond_cb(const TriLattice2D& lat, const PairModel2D& m, int bond, const Vec& u) {
  const double e2 = lat.eps * lat.eps;
  const LVec p = kA[kBondPair[bond].first], q = kA[kBondPair[bond].second];
  // D_pD_p u(x-p) + D_qD_q u(x-q) + D_pD_q u(x-p) + D_pD_q u(x-q)
  const Vec mixed = shift2d(lat, u, q) + shift2d(lat, u, p) + shift2d(lat, u, -p) + shift2d(lat, u, -q) - 2.0 * u -
                    shift2d(lat, u, q - p) - shift2d(lat, u, p - q);
  const Vec st = second_diff_stencil(lat, u, p) + second_diff_stencil(lat, u, q) + mixed;
  return -hmul(m.Hb[bond], st) / e2;
}

Vec apply_bond_bqcf(const TriLattice2D& lat, const PairModel2D& m, const Blend2D& b, int bond, const Vec& u) {
  const Vec a = apply_bond_atomistic(lat, m, bond, u);
  const Vec c = apply_bond_cb(lat, m, bond, u);
  Vec out(u.size());
  for (int s = 0; s < lat.sites(); ++s) {
    const double w = b.beta[s];
    out.segment<2>(2 * s) = w * a.segment<2>(2 * s) + (1.0 - w) * c.segment<2>(2 * s);
  }
  return out;
}

Vec apply2d(const Op2D& op, const Vec& u) {
  const TriLattice2D& lat = op.lattice;
  require(u.size() == lat.dofs(), "displacement size must be 2 * 4N^2");
  if (op.kind == Kind2D::ltilde) fail("ltilde is available as a quadratic form and assembled matrix only");
  const Vec nn = apply_nn(lat, op.model, u);
  Vec a = nn, c = nn;
  if (op.kind != Kind2D::cauchy_born)
    for (int k = 0; k < 3; ++k) a += apply_bond_atomistic(lat, op.model, k, u);
  if (op.kind != Kind2D::atomistic)
    for (int k = 0; k < 3; ++k) c += apply_bond_cb(lat, op.model, k, u);
  if (op.kind == Kind2D::atomistic) return a;
  if (op.kind == Kind2D::cauchy_born) return c;
  const Blend2D& b = need_blend(op.blend);
  Vec out(u.size());
  for (int s = 0; s < lat.sites(); ++s) {
    const double w = b.beta[s];
    out.segment<2>(2 * s) = w * a.segment<2>(2 * s) + (1.0 - w) * c.segment<2>(2 * s);
  }
  return out;
}

BondForm divergence_form_2d(const TriLattice2D& lat, const PairModel2D& m, const Blend2D& b, const Vec& u, int bond) {
  require(bond >= 0 && bond < 3, "bond index must be 0..2");
  require(u.size() == lat.dofs() && b.beta.size() == lat.sites(), "size mismatch in divergence form");
  const Eigen::Matrix2d& H = m.Hb[bond];
  const LVec p = kA[kBondPair[bond].first], q = kA[kBondPair[bond].second];
  const double e2 = lat.eps * lat.eps, e4 = e2 * e2;
  BondForm f;
  f.bond = bond;
  f.value_c = inner2d(lat, apply_bond_cb(lat, m, bond, u), u);

  const Vec dpq = shift2d(lat, diff2d2(lat, u, p, q), -(p + q));  // D_pD_q u(x-p-q)
  const Vec dqq = shift2d(lat, diff2d2(lat, u, q, q), -(p + q));  // D_qD_q u(x-p-q)
  const Vec bq = shift_scalar(lat, b.beta, -q);                   // beta(x-q)
  f.cross = -e4 * hdot_w(H, bq, dpq, dpq);

  const Vec dpb = shift_scalar(lat, diff2d_scalar(lat, b.beta, p), -(p * 2));
  const Vec dqb = shift_scalar(lat, diff2d_scalar(lat, b.beta, q), -q);
  const Vec dpu2 = shift2d(lat, diff2d(lat, u, p), -(p * 2));
  const Vec dpu1 = shift2d(lat, diff2d(lat, u, p), -p);
  f.Rb_term = -e4 * (hdot_w(H, dpb, dpu2, dqq) + hdot_w(H, dqb, dpu1, dpq));

  const Vec dppb = shift_scalar(lat, diff2d_scalar(lat, diff2d_scalar(lat, b.beta, p), p), -(p * 2));
  const Vec up = shift2d(lat, u, -p);
  f.Sb_term = -e4 * hdot_w(H, dppb, up, dqq);
  return f;
}

double poincare_constant_ab(double epsK, double epsRb) {
  if (epsK <= 0.0 || epsRb <= 0.0) return 0.0;
  return std::sqrt(epsK * epsRb * std::abs(std::log(epsRb)));
}

bool RSBounds2D::holds() const {
  for (int k = 0; k < 3; ++k) {
    if (std::abs(forms[k].Rb_term) > boundR[k] * (1.0 + 1e-12) + 1e-300) return false;
    if (std::abs(forms[k].Sb_term) > boundS[k] * (1.0 + 1e-12) + 1e-300) return false;
  }
  return true;
}

RSBounds2D rs_bounds_2d(const TriLattice2D& lat, const PairModel2D& m, const Blend2D& b, const Vec& u, double C_S) {
  RSBounds2D r;
  r.C_S = C_S;
  r.C_P = poincare_constant_ab(b.K * lat.eps, b.Rb * lat.eps);
  const auto d = derivative_bounds(lat, b);
  if (b.K > 0 && b.margin < 3) {
    require(third_diff_outside_blending(lat, b) == 0.0, "supp_beta violation: third differences leave the blending annulus");
  }
  const double e2 = lat.eps * lat.eps;
  const double du2 = dnorm2_2d(lat, u);
  for (int k = 0; k < 3; ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m.Hb[k]);
    const double hn = es.eigenvalues().cwiseAbs().maxCoeff();
    r.forms[k] = divergence_form_2d(lat, m, b, u, k);
    r.boundR[k] = 4.0 * e2 * hn * d[0] * du2;
    r.boundS[k] = C_S * e2 * hn * (d[1] + d[2] * r.C_P) * du2;
  }
  return r;
}

double apply_ltilde(const TriLattice2D& lat, const PairModel2D& m, const Blend2D& b, const Vec& u, LtildeWeight w) {
  const Op2D cb(Kind2D::cauchy_born, lat, m);
  const double e2 = lat.eps * lat.eps;
  double q = inner2d(lat, apply2d(cb, u), u);
  for (int j = 0; j < 3; ++j) {
    const LVec p = kA[j], nxt = kA[j + 1];
    Vec weight;
    Vec dd;
    const Eigen::Matrix2d* H = &m.Hb[0];
    if (w == LtildeWeight::b1) {
      weight = shift_scalar(lat, b.beta, -kA[1]);
      dd = shift2d(lat, diff2d2(lat, u, p, nxt), -(kA[0] + kA[1]));
    } else {
      weight = shift_scalar(lat, b.beta, -nxt);
      dd = shift2d(lat, diff2d2(lat, u, p, nxt), -(p + nxt));
      H = &m.Hb[j];
    }
    q -= e2 * e2 * hdot_w(*H, weight, dd, dd);
  }
  return q;
}

PoincareResult poincare_discrete(const TriLattice2D& lat, const Regions2D& reg, bool require_half) {
  if (require_half && 2 * reg.Rb > lat.N) fail("Rb must not exceed N/2");
  PoincareResult r;
  r.C_P = poincare_constant_ab(reg.K() * lat.eps, reg.Rb * lat.eps);
  const int n = lat.sites();
  const double e2 = lat.eps * lat.eps;
  const SparseOp G = gram_D_scalar(lat);
  const Kernel ker = kernel_scalar(n);
  SolverOptions opt;
  opt.throw_on_failure = true;

  SparseOp I;
  I.dim = n;
  I.A.resize(n, n);
  I.A.setIdentity();
  I.A *= -e2;
  I.symmetric = true;
  r.global_ratio = -coercivity(I, G, ker, opt).gamma;

  if (reg.count(Region::blending) == 0) {
    r.ratio = 0.0;
    r.method = "empty";
    return r;
  }
  SparseOp M;
  M.dim = n;
  M.A.resize(n, n);
  std::vector<Eigen::Triplet<double>> t;
  for (int s = 0; s < n; ++s)
    if (reg.label[s] == Region::blending) t.emplace_back(s, s, -e2);
  M.A.setFromTriplets(t.begin(), t.end());
  M.symmetric = true;
  const StabilityReport rep = coercivity(M, G, ker, opt);
  r.ratio = -rep.gamma;
  r.iterations = rep.iterations;
  r.method = method_name(rep.method);
  return r;
}

}  // namespace bqcf
