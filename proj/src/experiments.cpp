#include "bqcf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "bqcf/error.hpp"

namespace bqcf {

namespace {

constexpr double kPositive = 1e-10;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_g17(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(Status::io_error, "cannot open '" + p.string() + "' for writing");
  f << text;
  if (!f) throw Error(Status::io_error, "write failed for '" + p.string() + "'");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec random_field(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Vec u(n);
  for (int i = 0; i < n; ++i) u[i] = nd(rng);
  return u;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t v : {a, b}) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ULL;
  }
  return h;
}

// Divergence-form residual of the second-neighbour part at one random field.
double canary_1d(const Chain1D& c, const PairModel1D& m, const Blend1D& b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Vec u = random_field(rng, c.size());
  const double q = quad_form(Op1D(Kind1D::bqcf2, c, m, b), u);
  const double t = divergence_form(c, b, u).total();
  return std::abs(q - t) / std::max(std::abs(q), dnorm2(c, u));
}

double canary_2d(const TriLattice2D& lat, const PairModel2D& m, const Blend2D& b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Vec u = random_field(rng, lat.dofs());
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double q = inner2d(lat, apply_bond_bqcf(lat, m, b, k, u), u);
    const double t = divergence_form_2d(lat, m, b, u, k).total();
    const double scale = std::max(std::abs(q), m.Hb[k].norm() * dnorm2_2d(lat, u));
    worst = std::max(worst, std::abs(q - t) / scale);
  }
  return worst;
}

struct Eval {
  int K = 0;
  double gamma = 0.0;
  double seconds = 0.0;
  Method method = Method::dense;
  double canary = 0.0;
};

// Smallest K in [K_min, K_max] with gamma > 0: doubling scan, then bisection.
template <class F>
void locate_threshold(ThresholdPoint& pt, int K_min, int K_max, F&& gamma) {
  int lo = -1, hi = -1;
  int K = K_min;
  for (;;) {
    if (gamma(K) > kPositive) {
      hi = K;
      break;
    }
    lo = K;
    if (K >= K_max) break;
    K = std::min(2 * K, K_max);
  }
  if (hi < 0) {
    pt.flagged = true;
    pt.Kstar = -1;
    pt.gamma_at = gamma(lo);
    pt.gamma_below = kNaN;
    return;
  }
  while (lo >= 0 && hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (gamma(mid) > kPositive)
      hi = mid;
    else
      lo = mid;
  }
  pt.Kstar = hi;
  pt.gamma_at = gamma(hi);
  pt.gamma_below = hi > K_min ? gamma(hi - 1) : kNaN;
}

SweepRow to_row(double eps, int Ra, const Eval& e, double reference) {
  SweepRow r;
  r.eps = eps;
  r.K = e.K;
  r.Ra = Ra;
  r.Rb = Ra + e.K;
  r.gamma = e.gamma;
  r.reference = reference;
  r.seconds = e.seconds;
  r.method = method_name(e.method);
  r.canary = e.canary;
  return r;
}

void finish_fit(ThresholdFit& fit, const std::vector<double>& x, const std::vector<double>& y) {
  std::sort(fit.rows.begin(), fit.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.eps, a.K, a.Ra, a.Rb) < std::tie(b.eps, b.K, b.Ra, b.Rb);
  });
  std::sort(fit.points.begin(), fit.points.end(), [](const ThresholdPoint& a, const ThresholdPoint& b) { return a.eps < b.eps; });
  int prev = std::numeric_limits<int>::max();
  for (const auto& p : fit.points) {
    if (p.flagged) continue;
    if (p.Kstar > prev) fit.monotone = false;
    prev = p.Kstar;
  }
  if (x.size() >= 2) {
    const LineFit lf = fit_line(x, y);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r2 = lf.r2;
  }
}

}  // namespace

std::string format_g17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string Table::to_csv() const {
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + csv_field(header[i]);
  out += "\r\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(cell_text(row[i]));
    out += "\r\n";
  }
  return out;
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

void ExperimentResult::check(const std::string& check_name, bool ok, const std::string& detail) {
  checks.push_back({check_name, ok, detail});
}

void ExperimentResult::write(const std::string& dir) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Status::io_error, "cannot create output directory '" + dir + "': " + ec.message());
  const fs::path d(dir);
  write_file(d / "rows.csv", rows.to_csv());
  write_file(d / "fit.json", fit.dump(2) + "\n");
  std::string s = summary;
  if (!s.empty() && s.back() != '\n') s += '\n';
  for (const auto& c : checks) s += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
  s += std::string("result: ") + (passed() ? "PASS" : "FAIL") + "\n";
  write_file(d / "summary.txt", s);
  write_file(d / "plot.gp", plot);
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int t = std::max(1, std::min(threads, n));
  if (t == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < t; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  if (sxx == 0.0) {
    f.intercept = my;
    return f;
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return f;
}

ThresholdFit sweep_threshold_1d(const PairModel1D& model, const Sweep1DParams& p) {
  require(!p.N.empty(), "sweep needs at least one lattice size");
  require(p.K_min >= 6, "blend width K must be at least 6");
  ThresholdFit fit;
  std::vector<ThresholdPoint> points(p.N.size());
  std::vector<std::vector<SweepRow>> rows(p.N.size());
  const double ref = c0(model);
  parallel_for(static_cast<int>(p.N.size()), p.threads, [&](int idx) {
    const Chain1D c(p.N[idx]);
    const int K_max = p.K_max > 0 ? std::min(p.K_max, c.N) : c.N;
    require(p.K_min <= K_max, "empty blend-width window");
    std::map<int, Eval> cache;
    auto eval = [&](int K) -> double {
      auto it = cache.find(K);
      if (it != cache.end()) return it->second.gamma;
      const Blend1D b = build_blend_1d(c, K, default_center_1d(c, K), p.profile);
      const auto t0 = std::chrono::steady_clock::now();
      const StabilityReport rep = coercivity(Op1D(Kind1D::bqcf, c, model, b), p.solver);
      Eval e;
      e.K = K;
      e.gamma = rep.gamma;
      e.seconds = seconds_since(t0);
      e.method = rep.method;
      e.canary = canary_1d(c, model, b, mix(p.seed, c.N, K));
      cache[K] = e;
      return e.gamma;
    };
    ThresholdPoint& pt = points[idx];
    pt.eps = c.eps;
    pt.N = c.N;
    pt.reference = ref;
    locate_threshold(pt, p.K_min, K_max, eval);
    if (!pt.flagged && 4 * pt.Kstar <= c.N) {
      pt.K_check = 4 * pt.Kstar;
      pt.gamma_check = eval(pt.K_check);
    } else {
      pt.gamma_check = kNaN;
    }
    for (const auto& kv : cache) rows[idx].push_back(to_row(c.eps, 0, kv.second, ref));
  });
  std::vector<double> x, y;
  bool all_min = true;
  int used = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    fit.points.push_back(points[i]);
    fit.rows.insert(fit.rows.end(), rows[i].begin(), rows[i].end());
    if (points[i].flagged) continue;
    ++used;
    if (points[i].Kstar != p.K_min) all_min = false;
    x.push_back(std::log(1.0 / points[i].eps));
    y.push_back(std::log(static_cast<double>(points[i].Kstar)));
  }
  fit.degenerate = used > 0 && all_min;
  finish_fit(fit, x, y);
  if (!fit.degenerate && x.size() >= 2)
    for (size_t i = 0; i < x.size(); ++i)
      fit.max_residual = std::max(fit.max_residual, std::abs(y[i] - (fit.slope * x[i] + fit.intercept)));
  return fit;
}

Sharp1DResult sharpness_probe_1d(const PairModel1D& model, const Chain1D& c, const Blend1D& b) {
  const double sign = model.phi2F < 0.0 ? -1.0 : 1.0;
  const SharpnessFunction sf = sharpness_test_function(c, b, sign);
  Sharp1DResult r;
  r.dnorm = std::sqrt(dnorm2(c, sf.v));
  r.rayleigh = quad_form(Op1D(Kind1D::bqcf, c, model, b), sf.v) / (r.dnorm * r.dnorm);
  r.terms = divergence_form(c, b, sf.v);
  r.J = static_cast<int>(sf.J.size());
  r.alpha = static_cast<double>(r.J) / b.K;
  r.T_bound = std::sqrt(r.alpha) / 4.0 * std::pow(b.K, -2.5) * std::pow(c.eps, -0.5);
  const double s = model.phi2F < 0.0 ? -1.0 : 1.0;
  r.T_ok = s * r.terms.T <= -r.T_bound;
  r.abs_T_over_boundT = std::abs(r.terms.T) / r.T_bound;
  return r;
}

int case_Ra(const Sweep2DParams& p, int N) {
  const double eps = 1.0 / N;
  switch (p.which) {
    case 1: return p.Ra;
    case 2: return static_cast<int>(std::lround(std::pow(eps, -p.alpha)));
    case 3: return static_cast<int>(std::lround(p.c / eps));
    default: fail("sweep2d case must be 1, 2 or 3");
  }
}

namespace {

double case_rate(const Sweep2DParams& p, double eps) {
  const double l = std::abs(std::log(eps));
  switch (p.which) {
    case 1: return std::pow(l, 0.25);
    case 2: return std::pow(l, 0.2) * std::pow(eps, -p.alpha / 5.0);
    default: return std::pow(eps, -0.2);
  }
}

}  // namespace

ThresholdFit sweep_threshold_2d(const PairModel2D& model, const Sweep2DParams& p) {
  require(!p.N.empty(), "sweep needs at least one lattice size");
  validate(model);
  ThresholdFit fit;
  std::vector<ThresholdPoint> points(p.N.size());
  std::vector<std::vector<SweepRow>> rows(p.N.size());
  parallel_for(static_cast<int>(p.N.size()), p.threads, [&](int idx) {
    const TriLattice2D lat(p.N[idx]);
    const int Ra = case_Ra(p, lat.N);
    const int K_lo = std::max(p.K_min, 2 * p.margin + 1);
    const int K_cap = lat.N - Ra - 1;
    const int K_hi = p.K_max > 0 ? std::min(p.K_max, K_cap) : K_cap;
    ThresholdPoint& pt = points[idx];
    pt.eps = lat.eps;
    pt.N = lat.N;
    pt.Ra = Ra;
    pt.gamma_check = kNaN;
    if (K_lo > K_hi) {
      pt.flagged = true;
      pt.reference = kNaN;
      pt.gamma_at = pt.gamma_below = kNaN;
      return;
    }
    auto blend = [&](int K) { return build_radial_blend_2d(lat, Ra, Ra + K, p.margin, p.profile); };
    Op2D lt(Kind2D::ltilde, lat, model, blend(K_hi));
    lt.weight = p.weight;
    pt.reference = coercivity(lt, p.solver).gamma;
    std::map<int, Eval> cache;
    auto eval = [&](int K) -> double {
      auto it = cache.find(K);
      if (it != cache.end()) return it->second.gamma;
      const Blend2D b = blend(K);
      const auto t0 = std::chrono::steady_clock::now();
      const StabilityReport rep = coercivity(Op2D(Kind2D::bqcf, lat, model, b), p.solver);
      Eval e;
      e.K = K;
      e.gamma = rep.gamma;
      e.seconds = seconds_since(t0);
      e.method = rep.method;
      e.canary = canary_2d(lat, model, b, mix(p.seed, lat.N, K));
      cache[K] = e;
      return e.gamma;
    };
    locate_threshold(pt, K_lo, K_hi, eval);
    if (p.which == 3) {
      const int Kc = static_cast<int>(std::lround(4.0 * std::pow(lat.eps, -0.2)));
      if (Kc >= K_lo && Kc <= K_cap) {
        pt.K_check = Kc;
        pt.gamma_check = eval(Kc);
      }
    }
    for (const auto& kv : cache) rows[idx].push_back(to_row(lat.eps, Ra, kv.second, pt.reference));
  });
  std::vector<double> x, y;
  bool all_min = true;
  int used = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    fit.points.push_back(points[i]);
    fit.rows.insert(fit.rows.end(), rows[i].begin(), rows[i].end());
    if (points[i].flagged) continue;
    ++used;
    if (points[i].Kstar != std::max(p.K_min, 2 * p.margin + 1)) all_min = false;
    x.push_back(case_rate(p, points[i].eps));
    y.push_back(points[i].Kstar);
  }
  fit.degenerate = used > 0 && all_min;
  finish_fit(fit, x, y);
  if (x.size() >= 2)
    for (size_t i = 0; i < x.size(); ++i)
      fit.max_residual = std::max(fit.max_residual, std::abs(y[i] - (fit.slope * x[i] + fit.intercept)));
  return fit;
}

Sharp2DResult sharpness_probe_2d(const TriLattice2D& lat, const PairModel2D& model, const Blend2D& b, int ring_lo,
                                 int ring_hi) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(model.Hb[0]);
  if (!(es.eigenvalues()[0] < 0.0)) fail("no unstable bond direction: phi''(B b1) is positive semidefinite");
  Sharp2DResult r;
  r.lambda = es.eigenvalues()[0];
  r.uhat = es.eigenvectors().col(0);
  int max_ring = 0;
  for (int s = 0; s < lat.sites(); ++s) max_ring = std::max(max_ring, lat.ring(s));
  if (ring_hi < 0 || ring_hi > max_ring) ring_hi = max_ring;
  require(ring_lo >= 0 && ring_lo <= ring_hi, "empty ring window for the layered probe");
  const int L = ring_hi - ring_lo + 1;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(lat.dofs(), L);
  for (int s = 0; s < lat.sites(); ++s) {
    const int h = lat.ring(s);
    if (h < ring_lo || h > ring_hi) continue;
    basis.block<2, 1>(2 * s, h - ring_lo) = r.uhat;
  }
  for (int k = 0; k < L; ++k) basis.col(k) = project_mean_2d(basis.col(k));
  const Op2D op(Kind2D::bqcf, lat, model, b);
  const SparseOp S = symmetric_part(assemble(op));
  const SparseOp G = gram_D(lat);
  const Eigen::MatrixXd SB = S.A * basis, GB = G.A * basis;
  const Eigen::MatrixXd As = basis.transpose() * SB, Gs = basis.transpose() * GB;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(0.5 * (Gs + Gs.transpose()));
  const double gmax = eg.eigenvalues().cwiseAbs().maxCoeff();
  require(gmax > 0.0, "layered probe family is trivial");
  std::vector<int> keep;
  for (int k = 0; k < L; ++k)
    if (eg.eigenvalues()[k] > 1e-12 * gmax) keep.push_back(k);
  require(!keep.empty(), "layered probe family is trivial");
  Eigen::MatrixXd W(L, keep.size());
  for (size_t k = 0; k < keep.size(); ++k)
    W.col(k) = eg.eigenvectors().col(keep[k]) / std::sqrt(eg.eigenvalues()[keep[k]]);
  const Eigen::MatrixXd Ar = W.transpose() * (0.5 * (As + As.transpose())) * W;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(Ar);
  const Vec coef = W * ea.eigenvectors().col(0);
  r.u = basis * coef;
  r.u /= std::sqrt(dnorm2_2d(lat, r.u));
  r.form = inner2d(lat, apply2d(op, r.u), r.u);
  r.layers = static_cast<int>(keep.size());
  return r;
}

}  // namespace bqcf
