#include "bqcf/spectral.hpp"

#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <lapacke.h>

#include "bqcf/error.hpp"

namespace bqcf {

using Trip = Eigen::Triplet<double>;

std::vector<Triplet> SparseOp::triplets() const {
  std::vector<Triplet> out;
  out.reserve(A.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) out.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
  return out;
}

int SparseOp::max_row_nnz() const {
  std::vector<int> cnt(dim, 0);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (it.value() != 0.0) ++cnt[it.row()];
  int m = 0;
  for (int c : cnt) m = std::max(m, c);
  return m;
}

double SparseOp::asymmetry() const {
  const SpMat d = A - SpMat(A.transpose());
  double m = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SpMat::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

namespace {

SparseOp from_triplets(int dim, const std::vector<Trip>& t, bool symmetric) {
  SparseOp op;
  op.dim = dim;
  op.A.resize(dim, dim);
  op.A.setFromTriplets(t.begin(), t.end());
  op.A.prune(0.0);
  op.symmetric = symmetric;
  return op;
}

struct StencilTerm {
  LVec offset;
  double coef;
};

// -(S_r - 2 + S_{-r})
std::vector<StencilTerm> pure_second(LVec r) { return {{r, -1.0}, {LVec{0, 0}, 2.0}, {-r, -1.0}}; }

// -(2S_p + 2S_{-p} + 2S_q + 2S_{-q} - 6 - S_{q-p} - S_{p-q})
std::vector<StencilTerm> cb_bond(LVec p, LVec q) {
  return {{p, -2.0}, {-p, -2.0}, {q, -2.0}, {-q, -2.0}, {LVec{0, 0}, 6.0}, {q - p, 1.0}, {p - q, 1.0}};
}

void add_block(std::vector<Trip>& t, int rs, int cs, const Eigen::Matrix2d& H, double w) {
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (H(a, b) != 0.0) t.emplace_back(2 * rs + a, 2 * cs + b, w * H(a, b));
}

void add_stencil(std::vector<Trip>& t, const TriLattice2D& lat, const std::vector<StencilTerm>& st,
                 const Eigen::Matrix2d& H, const Vec* rowweight, bool complement) {
  // Row weight eps^2 (inner product) times 1/eps^2 (stencil scaling) cancels.
  for (const auto& term : st) {
    const auto tab = lat.shift_table(term.offset);
    for (int s = 0; s < lat.sites(); ++s) {
      double w = term.coef;
      if (rowweight) w *= complement ? 1.0 - (*rowweight)[s] : (*rowweight)[s];
      if (w != 0.0) add_block(t, s, tab[s], H, w);
    }
  }
}

}  // namespace

SparseOp assemble(const Op1D& op) {
  const Chain1D& c = op.chain;
  const int n = c.size();
  const double e = c.eps;
  const double pF = op.model.phiF, p2F = op.model.phi2F, AF = pF + 4.0 * p2F;
  std::vector<Trip> t;
  t.reserve(5 * n);
  for (int p = 0; p < n; ++p) {
    const double b = op.blend ? op.blend->beta[p] : 1.0;
    double c1 = 0.0, c2 = 0.0;
    switch (op.kind) {
      case Kind1D::atomistic: c1 = pF; c2 = p2F; break;
      case Kind1D::qcl: c1 = AF; break;
      case Kind1D::bqcf: c1 = b * pF + (1.0 - b) * AF; c2 = b * p2F; break;
      case Kind1D::bqcf1: c1 = 1.0; break;
      case Kind1D::bqcf2: c1 = 4.0 * (1.0 - b); c2 = b; break;
    }
    const double s = e / (e * e);
    t.emplace_back(p, p, s * 2.0 * (c1 + c2));
    t.emplace_back(p, c.wrap(p + 1), -s * c1);
    t.emplace_back(p, c.wrap(p - 1), -s * c1);
    t.emplace_back(p, c.wrap(p + 2), -s * c2);
    t.emplace_back(p, c.wrap(p - 2), -s * c2);
  }
  const bool sym = op.kind == Kind1D::atomistic || op.kind == Kind1D::qcl || op.kind == Kind1D::bqcf1;
  return from_triplets(n, t, sym);
}

SparseOp assemble(const Op2D& op) {
  const TriLattice2D& lat = op.lattice;
  const PairModel2D& m = op.model;
  std::vector<Trip> t;
  t.reserve(static_cast<size_t>(lat.sites()) * 104);
  for (int i = 0; i < 3; ++i) add_stencil(t, lat, pure_second(kA[i]), m.Ha[i], nullptr, false);
  const Vec* beta = op.blend ? &op.blend->beta : nullptr;
  for (int k = 0; k < 3; ++k) {
    const LVec p = kA[kBondPair[k].first], q = kA[kBondPair[k].second];
    switch (op.kind) {
      case Kind2D::atomistic: add_stencil(t, lat, pure_second(kB[k]), m.Hb[k], nullptr, false); break;
      case Kind2D::cauchy_born:
      case Kind2D::ltilde: add_stencil(t, lat, cb_bond(p, q), m.Hb[k], nullptr, false); break;
      case Kind2D::bqcf:
        add_stencil(t, lat, pure_second(kB[k]), m.Hb[k], beta, false);
        add_stencil(t, lat, cb_bond(p, q), m.Hb[k], beta, true);
        break;
    }
  }
  if (op.kind == Kind2D::ltilde) {
    // eps^4 beta |D_pD_q u(y)|^2_H: the eps factors cancel against the 1/eps^2 stencils.
    const Blend2D& b = *op.blend;
    const int pattern[4][3] = {{1, 1, 1}, {1, 0, -1}, {0, 1, -1}, {0, 0, 1}};
    for (int j = 0; j < 3; ++j) {
      const LVec p = kA[j], q = kA[j + 1];
      const bool b1 = op.weight == LtildeWeight::b1;
      const LVec wshift = b1 ? -kA[1] : -q;
      const LVec yshift = b1 ? -(kA[0] + kA[1]) : -(p + q);
      const Eigen::Matrix2d& H = b1 ? m.Hb[0] : m.Hb[j];
      for (int s = 0; s < lat.sites(); ++s) {
        const double w = b.beta[lat.shift(s, wshift)];
        if (w == 0.0) continue;
        const int y = lat.shift(s, yshift);
        int idx[4];
        double cf[4];
        for (int a = 0; a < 4; ++a) {
          idx[a] = lat.shift(y, p * pattern[a][0] + q * pattern[a][1]);
          cf[a] = pattern[a][2];
        }
        for (int a = 0; a < 4; ++a)
          for (int c = 0; c < 4; ++c) add_block(t, idx[a], idx[c], H, -w * cf[a] * cf[c]);
      }
    }
  }
  const bool sym = op.kind != Kind2D::bqcf;
  return from_triplets(lat.dofs(), t, sym);
}

SparseOp gram_D(const Chain1D& c) {
  const int n = c.size();
  std::vector<Trip> t;
  const double w = c.eps / (c.eps * c.eps);
  for (int p = 0; p < n; ++p) {
    const int q = c.wrap(p - 1);
    t.emplace_back(p, p, w);
    t.emplace_back(q, q, w);
    t.emplace_back(p, q, -w);
    t.emplace_back(q, p, -w);
  }
  return from_triplets(n, t, true);
}

SparseOp gram_D_scalar(const TriLattice2D& lat) {
  std::vector<Trip> t;
  for (int i = 0; i < 3; ++i) {
    const auto tab = lat.shift_table(kA[i]);
    for (int s = 0; s < lat.sites(); ++s) {
      // eps^2 |(u(s+a) - u(s))/eps|^2
      const int q = tab[s];
      t.emplace_back(s, s, 1.0);
      t.emplace_back(q, q, 1.0);
      t.emplace_back(s, q, -1.0);
      t.emplace_back(q, s, -1.0);
    }
  }
  return from_triplets(lat.sites(), t, true);
}

SparseOp gram_D(const TriLattice2D& lat) {
  const SparseOp g = gram_D_scalar(lat);
  std::vector<Trip> t;
  for (int k = 0; k < g.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(g.A, k); it; ++it)
      for (int c = 0; c < 2; ++c) t.emplace_back(2 * it.row() + c, 2 * it.col() + c, it.value());
  return from_triplets(lat.dofs(), t, true);
}

SparseOp symmetric_part(const SparseOp& a) {
  SparseOp s;
  s.dim = a.dim;
  s.A = 0.5 * (a.A + SpMat(a.A.transpose()));
  s.symmetric = true;
  return s;
}

Kernel kernel_scalar(int n) {
  Kernel k;
  k.Z = Eigen::MatrixXd::Constant(n, 1, 1.0 / std::sqrt(static_cast<double>(n)));
  k.ground = {0};
  return k;
}

Kernel kernel_1d(const Chain1D& c) { return kernel_scalar(c.size()); }

Kernel kernel_2d(const TriLattice2D& lat) {
  Kernel k;
  const int ns = lat.sites();
  k.Z = Eigen::MatrixXd::Zero(lat.dofs(), 2);
  for (int s = 0; s < ns; ++s) {
    k.Z(2 * s, 0) = 1.0 / std::sqrt(static_cast<double>(ns));
    k.Z(2 * s + 1, 1) = 1.0 / std::sqrt(static_cast<double>(ns));
  }
  k.ground = {0, 1};
  return k;
}

Method parse_method(const std::string& s) {
  if (s == "auto" || s == "automatic") return Method::automatic;
  if (s == "dense") return Method::dense;
  if (s == "iterative") return Method::iterative;
  fail("unknown solver method '" + s + "'");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::automatic: return "auto";
    case Method::dense: return "dense";
    case Method::iterative: return "iterative";
  }
  return "?";
}

namespace {

using Mat = Eigen::MatrixXd;

void deflate(const Kernel& ker, Mat& X) { X -= ker.Z * (ker.Z.transpose() * X); }
void deflate(const Kernel& ker, Vec& x) { x -= ker.Z * (ker.Z.transpose() * x); }

// Inverse of a form on the complement of ker G: grounded sparse LDLT, then deflation.
class GroundedSolver {
 public:
  GroundedSolver(const SpMat& G, const Kernel& ker) : ker_(ker), map_(G.rows(), -1) {
    if (!factor(G)) throw Error(Status::solver_failure, "grounded Gram factorization failed");
  }

  // Factors M on the grounded dofs; false unless M is positive definite there.
  bool factor(const SpMat& G) {
    std::vector<char> pinned(G.rows(), 0);
    for (int g : ker_.ground) pinned[g] = 1;
    int m = 0;
    for (int i = 0; i < G.rows(); ++i)
      if (!pinned[i]) map_[i] = m++;
    std::vector<Trip> t;
    for (int k = 0; k < G.outerSize(); ++k)
      for (SpMat::InnerIterator it(G, k); it; ++it) {
        const int r = map_[it.row()], c = map_[it.col()];
        if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
      }
    SpMat Gr(m, m);
    Gr.setFromTriplets(t.begin(), t.end());
    ldlt_.compute(Gr);
    m_ = m;
    return ldlt_.info() == Eigen::Success && (ldlt_.vectorD().array() > 0.0).all();
  }

  void apply(Mat& X) const {
    Mat rhs(m_, X.cols());
    for (int i = 0; i < X.rows(); ++i)
      if (map_[i] >= 0) rhs.row(map_[i]) = X.row(i);
    const Mat sol = ldlt_.solve(rhs);
    for (int i = 0; i < X.rows(); ++i) {
      if (map_[i] >= 0)
        X.row(i) = sol.row(map_[i]);
      else
        X.row(i).setZero();
    }
    deflate(ker_, X);
  }

 private:
  const Kernel& ker_;
  std::vector<int> map_;
  int m_ = 0;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

// G-orthonormalizes V against the G-orthonormal Q and itself; dependent directions are dropped.
Mat g_orthonormalize(const SpMat& G, const Kernel& ker, Mat V, const Mat& Q, const Mat& GQ) {
  for (int j = 0; j < V.cols(); ++j) {
    const double nv = std::sqrt(std::max(V.col(j).dot(G * V.col(j)), 0.0));
    if (nv > 0.0) V.col(j) /= nv;
  }
  for (int pass = 0; pass < 2; ++pass) {
    if (Q.cols() > 0) V -= Q * (GQ.transpose() * V);
    deflate(ker, V);
    Mat GV = G * V;
    Mat M = V.transpose() * GV;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
    const Vec mu = es.eigenvalues();
    std::vector<int> keep;
    for (int i = 0; i < mu.size(); ++i)
      if (mu[i] > (pass == 0 ? 1e-20 : 0.5)) keep.push_back(i);
    Mat T(V.cols(), keep.size());
    for (size_t j = 0; j < keep.size(); ++j) T.col(j) = es.eigenvectors().col(keep[j]) / std::sqrt(mu[keep[j]]);
    V = V * T;
  }
  return V;
}

StabilityReport lobpcg(const SpMat& S, const SpMat& G, const Kernel& ker, const SolverOptions& opt) {
  const int n = static_cast<int>(S.rows());
  const int kd = static_cast<int>(ker.Z.cols());
  const int m = std::max(1, std::min(opt.block, (n - kd) / 3));
  auto prec = std::make_unique<GroundedSolver>(G, ker);
  bool shifted = false;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  Mat X(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = nd(rng);
  deflate(ker, X);
  prec->apply(X);  // smooth the start block
  X = g_orthonormalize(G, ker, X, Mat(n, 0), Mat(n, 0));
  if (X.cols() < m) throw Error(Status::solver_failure, "degenerate start block");
  Vec theta;
  {
    const Mat H = X.transpose() * (S * X);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
    X = X * es.eigenvectors();
    theta = es.eigenvalues();
  }
  Mat P(n, 0);
  StabilityReport rep;
  rep.method = Method::iterative;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const Mat AX = S * X, BX = G * X;
    Mat R = AX - BX * theta.asDiagonal();
    deflate(ker, R);
    Vec ax0 = AX.col(0);
    deflate(ker, ax0);
    rep.residual = R.col(0).norm() / (ax0.norm() + std::abs(theta[0]) * BX.col(0).norm());
    rep.iterations = it;
    if (rep.residual < opt.tol) {
      rep.converged = true;
      break;
    }
    // Clustered low spectra stall with the Gram preconditioner; switch to
    // (S + tau G)^{-1} with tau just past the current Ritz value.
    if (!shifted && (rep.residual < 1e-3 || it == 50)) {
      shifted = true;
      double delta = 1e-3 * std::max(std::abs(theta[0]), 1e-6);
      auto trial = std::make_unique<GroundedSolver>(G, ker);
      for (int t = 0; t < 12; ++t, delta *= 10.0) {
        const SpMat M = S + (delta - theta[0]) * G;
        if (trial->factor(M)) {
          prec = std::move(trial);
          break;
        }
      }
    }
    Mat W = R;
    prec->apply(W);
    const Mat P1 = P.cols() > 0 ? g_orthonormalize(G, ker, P, X, BX) : Mat(n, 0);
    Mat XP(n, m + P1.cols());
    XP << X, P1;
    const Mat W1 = g_orthonormalize(G, ker, W, XP, G * XP);
    Mat Qb(n, XP.cols() + W1.cols());
    Qb << XP, W1;
    const Mat H = Qb.transpose() * (S * Qb);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
    const Mat C = es.eigenvectors().leftCols(m);
    theta = es.eigenvalues().head(m);
    X = Qb * C;
    P = Qb.rightCols(Qb.cols() - m) * C.bottomRows(Qb.cols() - m);
  }
  Vec x = X.col(0);
  const double gx = x.dot(G * x);
  x /= std::sqrt(gx);
  rep.gamma = x.dot(S * x);
  rep.minimizer = x;
  return rep;
}

StabilityReport dense_solve(const SpMat& S, const SpMat& G, const Kernel& ker) {
  const int n = static_cast<int>(S.rows());
  const Mat& Z = ker.Z;
  Mat Sd = Mat(S);
  const Mat SZ = Sd * Z;
  const Mat ZSZ = Z.transpose() * SZ;
  Sd -= SZ * Z.transpose() + Z * SZ.transpose();
  Sd += Z * ZSZ * Z.transpose();
  // sigma must exceed the minimum over the complement.
  Vec x0 = Vec::LinSpaced(n, -1.0, 1.0).array().sin();
  deflate(ker, x0);
  const double rq = x0.dot(Sd * x0) / x0.dot(G * x0);
  const double sigma = 2.0 * std::abs(rq) + 1.0;
  Sd += sigma * Z * Z.transpose();
  Mat Gd = Mat(G) + Z * Z.transpose();

  lapack_int found = 0;
  std::vector<double> w(n);
  Mat V(n, 1);
  std::vector<lapack_int> ifail(n);
  const lapack_int info = LAPACKE_dsygvx(LAPACK_COL_MAJOR, 1, 'V', 'I', 'U', n, Sd.data(), n, Gd.data(), n, 0.0, 0.0, 1, 1,
                                         2.0 * LAPACKE_dlamch('S'), &found, w.data(), V.data(), n, ifail.data());
  if (info != 0 || found < 1) throw Error(Status::solver_failure, "dense generalized eigensolve failed (info " + std::to_string(info) + ")");
  StabilityReport rep;
  rep.method = Method::dense;
  Vec x = V.col(0);
  deflate(ker, x);
  x /= std::sqrt(x.dot(G * x));
  rep.gamma = w[0];
  rep.minimizer = x;
  rep.iterations = 1;
  rep.converged = true;
  rep.residual = rayleigh_residual(S, G, ker, x, rep.gamma);
  return rep;
}

}  // namespace

double rayleigh_residual(const SpMat& S, const SpMat& G, const Kernel& ker, const Vec& x, double lambda) {
  Vec sx = S * x;
  deflate(ker, sx);
  const Vec gx = G * x;
  Vec r = sx - lambda * gx;
  deflate(ker, r);
  return r.norm() / (sx.norm() + std::abs(lambda) * gx.norm());
}

StabilityReport coercivity(const SparseOp& op, const SparseOp& G, const Kernel& ker, const SolverOptions& opt) {
  require(op.dim == G.dim && op.A.rows() == G.A.rows(), "operator and Gram form dimensions differ");
  require(ker.Z.rows() == G.dim && ker.Z.cols() >= 1, "kernel basis does not match the Gram form");
  const double kres = (G.A * ker.Z).cwiseAbs().maxCoeff();
  if (kres > 1e-9 * (1.0 + G.A.coeffs().cwiseAbs().maxCoeff())) fail("G kernel dimension mismatch");
  const SpMat S = op.symmetric ? op.A : SpMat(0.5 * (op.A + SpMat(op.A.transpose())));
  Method m = opt.method;
  if (m == Method::automatic) m = op.dim <= opt.dense_threshold ? Method::dense : Method::iterative;
  StabilityReport rep = m == Method::dense ? dense_solve(S, G.A, ker) : lobpcg(S, G.A, ker, opt);
  if (!rep.converged && opt.throw_on_failure) {
    std::ostringstream os;
    os << "iterative coercivity solve did not converge: residual " << rep.residual << " after " << rep.iterations << " iterations";
    throw Error(Status::solver_failure, os.str());
  }
  return rep;
}

StabilityReport coercivity(const Op1D& op, const SolverOptions& opt) {
  return coercivity(assemble(op), gram_D(op.chain), kernel_1d(op.chain), opt);
}

StabilityReport coercivity(const Op2D& op, const SolverOptions& opt) {
  return coercivity(assemble(op), gram_D(op.lattice), kernel_2d(op.lattice), opt);
}

void write_matrix_market(const SparseOp& op, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(Status::io_error, "cannot open " + path + " for writing");
  const auto t = op.triplets();
  f << "%%MatrixMarket matrix coordinate real general\n";
  f << op.dim << ' ' << op.dim << ' ' << t.size() << '\n';
  f << std::setprecision(17);
  for (const auto& e : t) f << e.row + 1 << ' ' << e.col + 1 << ' ' << e.value << '\n';
  if (!f) throw Error(Status::io_error, "failed writing " + path);
}

}  // namespace bqcf
