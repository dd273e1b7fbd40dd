#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "bqcf/error.hpp"
#include "bqcf/experiments.hpp"

namespace bqcf {

namespace {

using nlohmann::json;

std::string g(double x) { return format_g17(x); }

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

Eigen::Matrix2d matrix_key(const Config& cfg, const std::string& key, const Eigen::Matrix2d& def) {
  if (!cfg.has(key)) return def;
  const auto v = cfg.get_doubles(key, {});
  if (v.size() != 4) throw Error(Status::config_error, "key '" + key + "': expected four entries a11,a12,a21,a22");
  Eigen::Matrix2d m;
  m << v[0], v[1], v[2], v[3];
  return m;
}

RadialPotential radial_from(const Config& cfg) {
  RadialPotential phi;
  const std::string k = cfg.get_string("potential.kind", "morse");
  if (k == "harmonic")
    phi.kind = RadialKind::harmonic;
  else if (k == "lennard_jones" || k == "lj")
    phi.kind = RadialKind::lennard_jones;
  else if (k == "morse")
    phi.kind = RadialKind::morse;
  else
    throw Error(Status::config_error, "key 'potential.kind': unknown potential '" + k + "'");
  phi.alpha = cfg.get_double("potential.alpha", 4.0);
  return phi;
}

PairModel1D model_1d(const Config& cfg) {
  if (cfg.has("potential.kind")) return model_1d_from_radial(radial_from(cfg), cfg.get_double("strain.F", 1.0));
  return make_model_1d(cfg.get_double("potential.phiF", 1.0), cfg.get_double("potential.phi2F", -0.24),
                       cfg.get_double("strain.F", 1.0));
}

PairModel2D model_2d(const Config& cfg, double eps) {
  const std::string kind = cfg.get_string("model2d.kind", "toy");
  PairModel2D m;
  if (kind == "toy") {
    m = toy_model_2d(cfg.get_double("model2d.k_nn", 3.2), cfg.get_double("model2d.lambda", -1.0),
                     cfg.get_double("model2d.delta", 0.0));
  } else if (kind == "radial") {
    m = hessians_from_radial(radial_from(cfg), matrix_key(cfg, "strain.B", Eigen::Matrix2d::Identity()), eps);
  } else if (kind == "explicit") {
    m.B = matrix_key(cfg, "strain.B", Eigen::Matrix2d::Identity());
    for (int k = 0; k < 3; ++k) {
      m.Ha[k] = matrix_key(cfg, "model2d.Ha" + std::to_string(k + 1), Eigen::Matrix2d::Identity());
      m.Hb[k] = matrix_key(cfg, "model2d.Hb" + std::to_string(k + 1), Eigen::Matrix2d::Zero());
    }
  } else {
    throw Error(Status::config_error, "key 'model2d.kind': expected toy, radial or explicit");
  }
  validate(m);
  return m;
}

SolverOptions solver_from(const Config& cfg, std::uint64_t seed) {
  SolverOptions s;
  s.method = parse_method(cfg.get_string("solver.method", "automatic"));
  s.tol = cfg.get_double("solver.tol", s.tol);
  s.max_iter = static_cast<int>(cfg.get_int("solver.max_iter", s.max_iter));
  s.block = static_cast<int>(cfg.get_int("solver.block", s.block));
  s.dense_threshold = static_cast<int>(cfg.get_int("solver.dense_threshold", s.dense_threshold));
  s.seed = seed;
  return s;
}

Profile profile_from(const Config& cfg) { return parse_profile(cfg.get_string("blend.profile", "poly7")); }

std::vector<int> ints(const std::vector<long long>& v) { return {v.begin(), v.end()}; }

Table sweep_table(const ThresholdFit& fit) {
  Table t;
  t.header = {"eps", "K", "Ra", "Rb", "gamma", "reference", "seconds", "method", "canary"};
  for (const auto& r : fit.rows)
    t.rows.push_back({r.eps, static_cast<long long>(r.K), static_cast<long long>(r.Ra), static_cast<long long>(r.Rb),
                      r.gamma, r.reference, r.seconds, r.method, r.canary});
  return t;
}

json fit_json(const ThresholdFit& fit) {
  json pts = json::array();
  for (const auto& p : fit.points)
    pts.push_back({{"eps", p.eps},
                   {"N", p.N},
                   {"Ra", p.Ra},
                   {"Kstar", p.Kstar},
                   {"gamma_at", num(p.gamma_at)},
                   {"gamma_below", num(p.gamma_below)},
                   {"reference", num(p.reference)},
                   {"K_check", p.K_check},
                   {"gamma_check", num(p.gamma_check)},
                   {"flagged", p.flagged}});
  return {{"slope", fit.slope},     {"intercept", fit.intercept},   {"r2", fit.r2},
          {"max_residual", fit.max_residual}, {"degenerate", fit.degenerate}, {"monotone", fit.monotone},
          {"points", pts}};
}

std::string threshold_plot(const ThresholdFit& fit, bool loglog, const std::string& xlabel, const std::string& title) {
  std::ostringstream o;
  o << "$kstar << EOD\n";
  for (const auto& p : fit.points)
    if (!p.flagged) o << g(1.0 / p.eps) << " " << p.Kstar << "\n";
  o << "EOD\n";
  o << "set title '" << title << "'\nset xlabel '" << xlabel << "'\nset ylabel 'K*'\n";
  if (loglog) {
    o << "set logscale xy\n";
    o << "f(x) = exp(" << g(fit.intercept) << ") * x**" << g(fit.slope) << "\n";
    o << "plot $kstar using 1:2 with points pt 7 title 'K*', f(x) title 'fit'\n";
  } else {
    o << "plot $kstar using 1:2 with linespoints pt 7 title 'K*'\n";
  }
  return o.str();
}

void maybe_export(const Config& cfg, const RunOptions& opt, const SparseOp& A, const SparseOp& G) {
  if (!cfg.get_bool("export.matrix_market", false)) return;
  const std::string dir = opt.out_dir.empty() ? "." : opt.out_dir;
  std::filesystem::create_directories(dir);
  write_matrix_market(A, (std::filesystem::path(dir) / "operator.mtx").string());
  write_matrix_market(G, (std::filesystem::path(dir) / "gram.mtx").string());
}

// ---------------------------------------------------------------- stability

ExperimentResult run_stability(const Config& cfg, const RunOptions& opt) {
  ExperimentResult res;
  res.name = "stability";
  const int dim = static_cast<int>(cfg.get_int("lattice.dim", 1));
  const SolverOptions sopt = solver_from(cfg, opt.seed);
  std::ostringstream sum;
  res.rows.header = {"dim", "N", "eps", "kind", "K", "gamma", "reference", "method", "residual", "iterations"};
  if (dim == 1) {
    const int N = static_cast<int>(cfg.get_int("lattice.N", 64));
    const Chain1D c(N);
    const PairModel1D m = model_1d(cfg);
    const Kind1D kind = parse_kind_1d(cfg.get_string("operator.kind", "atomistic"));
    std::optional<Blend1D> b;
    int K = 0;
    if (kind == Kind1D::bqcf || kind == Kind1D::bqcf1 || kind == Kind1D::bqcf2) {
      K = static_cast<int>(cfg.get_int("blend.K", std::max(6, N / 4)));
      const int center = static_cast<int>(cfg.get_int("blend.center", default_center_1d(c, K)));
      b = build_blend_1d(c, K, center, profile_from(cfg));
    }
    const Op1D op(kind, c, m, b);
    const auto rep = coercivity(op, sopt);
    maybe_export(cfg, opt, assemble(op), gram_D(c));
    const double ref = kind == Kind1D::qcl ? m.phiF + 4 * m.phi2F : c0(m);
    res.rows.rows.push_back({1LL, static_cast<long long>(N), c.eps, std::string(kind_name(kind)),
                             static_cast<long long>(K), rep.gamma, ref, std::string(method_name(rep.method)),
                             rep.residual, static_cast<long long>(rep.iterations)});
    const double exact = m.phiF + 4.0 * m.phi2F * std::pow(std::cos(std::numbers::pi / (2.0 * N)), 2);
    res.fit = {{"gamma", rep.gamma}, {"c0", c0(m)}, {"reference", ref}, {"method", method_name(rep.method)},
               {"residual", rep.residual}, {"iterations", rep.iterations}};
    if (kind == Kind1D::atomistic) res.fit["periodic_infimum"] = std::min(m.phiF, exact);
    sum << "1D " << kind_name(kind) << " N=" << N << " gamma=" << g(rep.gamma) << " c0=" << g(c0(m)) << "\n";
  } else if (dim == 2) {
    const int N = static_cast<int>(cfg.get_int("lattice.N", 8));
    const TriLattice2D lat(N);
    const PairModel2D m = model_2d(cfg, lat.eps);
    const Kind2D kind = parse_kind_2d(cfg.get_string("operator.kind", "atomistic"));
    std::optional<Blend2D> b;
    int K = 0;
    if (kind == Kind2D::bqcf || kind == Kind2D::ltilde) {
      const int Ra = static_cast<int>(cfg.get_int("blend.Ra", std::max(1, N / 8)));
      const int Rb = cfg.has("blend.Rb") ? static_cast<int>(cfg.get_int("blend.Rb", 0))
                                         : Ra + static_cast<int>(cfg.get_int("blend.K", std::max(2, N / 4)));
      b = build_radial_blend_2d(lat, Ra, Rb, static_cast<int>(cfg.get_int("blend.margin", 0)), profile_from(cfg));
      K = Rb - Ra;
    }
    Op2D op(kind, lat, m, b);
    const std::string w = cfg.get_string("ltilde.weight", "b1");
    if (w != "b1" && w != "per_bond") throw Error(Status::config_error, "key 'ltilde.weight': expected b1 or per_bond");
    op.weight = w == "b1" ? LtildeWeight::b1 : LtildeWeight::per_bond;
    const auto rep = coercivity(op, sopt);
    maybe_export(cfg, opt, assemble(op), gram_D(lat));
    res.rows.rows.push_back({2LL, static_cast<long long>(N), lat.eps, std::string(kind_name(kind)),
                             static_cast<long long>(K), rep.gamma, std::numeric_limits<double>::quiet_NaN(), std::string(method_name(rep.method)),
                             rep.residual, static_cast<long long>(rep.iterations)});
    res.fit = {{"gamma", rep.gamma}, {"method", method_name(rep.method)}, {"residual", rep.residual},
               {"iterations", rep.iterations}};
    sum << "2D " << kind_name(kind) << " N=" << N << " gamma=" << g(rep.gamma) << "\n";
  } else {
    throw Error(Status::config_error, "key 'lattice.dim': expected 1 or 2");
  }
  res.summary = sum.str();
  res.plot = "# single stability evaluation; no plot\n";
  return res;
}

// ---------------------------------------------------------------- sweep1d

ExperimentResult run_sweep1d(const Config& cfg, const RunOptions& opt) {
  ExperimentResult res;
  res.name = "sweep1d";
  const PairModel1D m = model_1d(cfg);
  Sweep1DParams p;
  const std::vector<long long> def = {128, 256, 512, 1024, 2048};
  p.N = ints(cfg.has("sweep.eps") ? cfg.get_sizes("sweep.eps", def) : cfg.get_sizes("sweep.N", def));
  p.K_min = static_cast<int>(cfg.get_int("sweep.K_min", 6));
  p.K_max = static_cast<int>(cfg.get_int("sweep.K_max", 0));
  p.profile = profile_from(cfg);
  p.solver = solver_from(cfg, opt.seed);
  p.threads = opt.threads;
  p.seed = opt.seed;
  const ThresholdFit fit = sweep_threshold_1d(m, p);
  res.rows = sweep_table(fit);
  res.fit = fit_json(fit);
  res.fit["c0"] = c0(m);
  res.plot = threshold_plot(fit, true, "1/eps", "1D blending-width threshold");
  std::ostringstream sum;
  sum << "phiF=" << g(m.phiF) << " phi2F=" << g(m.phi2F) << " c0=" << g(c0(m)) << "\n";
  for (const auto& pt : fit.points)
    sum << "N=" << pt.N << " K*=" << pt.Kstar << (pt.flagged ? " (no sign change in window)" : "")
        << " gamma(K*)=" << g(pt.gamma_at) << " gamma(K*-1)=" << g(pt.gamma_below) << "\n";
  sum << "slope=" << g(fit.slope) << " r2=" << g(fit.r2) << (fit.degenerate ? " (degenerate)" : "") << "\n";
  res.summary = sum.str();

  double canary = 0.0;
  for (const auto& r : fit.rows) canary = std::max(canary, r.canary);
  res.check("divergence_canary", canary <= 1e-10, "max residual " + g(canary));
  res.check("monotone_threshold", fit.monotone, "K* non-increasing in eps");
  for (const auto& pt : fit.points) {
    if (pt.flagged) continue;
    if (std::isfinite(pt.gamma_below))
      res.check("certificate_N" + std::to_string(pt.N), pt.gamma_below <= 1e-10,
                "gamma(K*-1)=" + g(pt.gamma_below) + " gamma(K*)=" + g(pt.gamma_at));
    if (pt.K_check > 0)
      res.check("gamma_at_4Kstar_N" + std::to_string(pt.N), pt.gamma_check > 0.5 * c0(m),
                "gamma(" + std::to_string(pt.K_check) + ")=" + g(pt.gamma_check) + " vs c0/2=" + g(0.5 * c0(m)));
  }
  if (m.phi2F == 0.0) {
    res.check("degenerate_flagged", fit.degenerate, "K* equals the minimum admissible K everywhere");
  } else {
    res.check("slope_in_range", fit.slope >= 0.15 && fit.slope <= 0.25, "slope " + g(fit.slope) + " in [0.15, 0.25]");
    res.check("fit_r2", fit.r2 >= 0.9, "r2 " + g(fit.r2) + " >= 0.9");
  }
  return res;
}

// ---------------------------------------------------------------- sharp1d

ExperimentResult run_sharp1d(const Config& cfg, const RunOptions& opt) {
  ExperimentResult res;
  res.name = "sharp1d";
  const PairModel1D m = model_1d(cfg);
  const int N = static_cast<int>(cfg.get_int("sharp.N", 512));
  const auto Ks = ints(cfg.get_ints("sharp.K", {6, 8, 12}));
  const bool with_gamma = cfg.get_bool("sharp.coercivity", false);
  const Chain1D c(N);
  const SolverOptions sopt = solver_from(cfg, opt.seed);
  res.rows.header = {"N", "K", "rayleigh", "dnorm", "T", "T_bound", "alpha", "J", "T_ok", "gamma"};
  std::ostringstream sum;
  sum << "phiF=" << g(m.phiF) << " phi2F=" << g(m.phi2F) << " c0=" << g(c0(m)) << " N=" << N << "\n";
  json arr = json::array();
  for (int K : Ks) {
    const Blend1D b = build_blend_1d(c, K, default_center_1d(c, K), profile_from(cfg));
    const Sharp1DResult r = sharpness_probe_1d(m, c, b);
    double gamma = std::numeric_limits<double>::quiet_NaN();
    if (with_gamma) gamma = coercivity(Op1D(Kind1D::bqcf, c, m, b), sopt).gamma;
    res.rows.rows.push_back({static_cast<long long>(N), static_cast<long long>(K), r.rayleigh, r.dnorm, r.terms.T,
                             r.T_bound, r.alpha, static_cast<long long>(r.J), std::string(r.T_ok ? "true" : "false"),
                             gamma});
    arr.push_back({{"K", K}, {"rayleigh", r.rayleigh}, {"T", r.terms.T}, {"T_bound", r.T_bound},
                   {"alpha", r.alpha}, {"J", r.J}, {"gamma", num(gamma)}});
    const std::string tag = "_K" + std::to_string(K);
    sum << "K=" << K << " rayleigh=" << g(r.rayleigh)
        << (r.rayleigh < 0 ? " (indefinite)" : " (inconclusive: probe positive)") << "\n";
    if (m.phi2F != 0.0)
      res.check("T_bound" + tag, r.T_ok, "T=" + g(r.terms.T) + " bound " + g(r.T_bound));
    res.check("dnorm_le_2" + tag, r.dnorm <= 2.0, "||Dv||=" + g(r.dnorm));
    if (m.phi2F < 0.0) res.check("rayleigh_below_c0" + tag, r.rayleigh < c0(m), "RQ=" + g(r.rayleigh));
    if (with_gamma)
      res.check("gamma_le_probe" + tag, gamma <= r.rayleigh + 1e-8, "gamma=" + g(gamma) + " RQ=" + g(r.rayleigh));
  }
  res.fit = {{"N", N}, {"c0", c0(m)}, {"probes", arr}};
  res.summary = sum.str();
  res.plot = "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'K'\nset ylabel 'Rayleigh quotient'\n"
             "plot 'rows.csv' using 2:3 with linespoints pt 7\n";
  return res;
}

// ---------------------------------------------------------------- sweep2d

ExperimentResult run_sweep2d(const Config& cfg, const RunOptions& opt) {
  ExperimentResult res;
  res.name = "sweep2d";
  Sweep2DParams p;
  p.which = static_cast<int>(cfg.get_int("sweep2d.case", 1));
  if (p.which < 1 || p.which > 3) throw Error(Status::config_error, "key 'sweep2d.case': expected 1, 2 or 3");
  p.N = ints(cfg.has("sweep.eps") ? cfg.get_sizes("sweep.eps", {}) : cfg.get_sizes("sweep.N", {8, 12, 16, 24}));
  p.Ra = static_cast<int>(cfg.get_int("sweep2d.Ra", 4));
  p.alpha = cfg.get_double("sweep2d.alpha", 0.5);
  p.c = cfg.get_double("sweep2d.c", 0.125);
  p.K_min = static_cast<int>(cfg.get_int("sweep.K_min", 1));
  p.K_max = static_cast<int>(cfg.get_int("sweep.K_max", 0));
  p.margin = static_cast<int>(cfg.get_int("blend.margin", 0));
  p.profile = profile_from(cfg);
  const std::string w = cfg.get_string("ltilde.weight", "b1");
  if (w != "b1" && w != "per_bond") throw Error(Status::config_error, "key 'ltilde.weight': expected b1 or per_bond");
  p.weight = w == "b1" ? LtildeWeight::b1 : LtildeWeight::per_bond;
  p.solver = solver_from(cfg, opt.seed);
  p.threads = opt.threads;
  p.seed = opt.seed;
  const PairModel2D m = model_2d(cfg, 1.0 / p.N.front());
  const ThresholdFit fit = sweep_threshold_2d(m, p);
  res.rows = sweep_table(fit);
  res.fit = fit_json(fit);
  res.fit["case"] = p.which;
  const char* rate = p.which == 1 ? "|log eps|^(1/4)" : p.which == 2 ? "|log eps|^(1/5) eps^(-alpha/5)" : "eps^(-1/5)";
  res.fit["rate"] = rate;
  res.plot = threshold_plot(fit, false, "1/eps", std::string("2D threshold against ") + rate);
  std::ostringstream sum;
  sum << "case " << p.which << " rate " << rate << "\n";
  double canary = 0.0;
  for (const auto& r : fit.rows) canary = std::max(canary, r.canary);
  for (const auto& pt : fit.points) {
    sum << "N=" << pt.N << " Ra=" << pt.Ra << " K*=" << pt.Kstar << (pt.flagged ? " (flagged)" : "")
        << " gamma~=" << g(pt.reference) << "\n";
    if (std::isfinite(pt.reference))
      res.check("ltilde_positive_N" + std::to_string(pt.N), pt.reference > 0.0, "gamma~=" + g(pt.reference));
    if (p.which == 3 && pt.K_check > 0 && pt.reference > 0.0)
      res.check("case3_gamma_N" + std::to_string(pt.N), pt.gamma_check >= 0.5 * pt.reference,
                "gamma(K=" + std::to_string(pt.K_check) + ")=" + g(pt.gamma_check) + " vs gamma~/2=" +
                    g(0.5 * pt.reference));
  }
  sum << "fit K* = " << g(fit.slope) << " * rate + " << g(fit.intercept) << " (max residual " << g(fit.max_residual)
      << ")\n";
  res.summary = sum.str();
  res.check("divergence_canary", canary <= 1e-10, "max residual " + g(canary));
  res.check("monotone_threshold", fit.monotone, "K* non-increasing in eps");
  if (p.which == 1) res.check("bounded_growth", fit.max_residual <= 1.0, "max |K* - fit| = " + g(fit.max_residual));
  return res;
}

// ---------------------------------------------------------------- sharp2d

ExperimentResult run_sharp2d(const Config& cfg, const RunOptions& opt) {
  ExperimentResult res;
  res.name = "sharp2d";
  const int N = static_cast<int>(cfg.get_int("lattice.N", 24));
  const int Ra = static_cast<int>(cfg.get_int("blend.Ra", 4));
  const int margin = static_cast<int>(cfg.get_int("blend.margin", 0));
  const auto Ks = ints(cfg.get_ints("sharp.K", {3, 12}));
  const bool with_gamma = cfg.get_bool("sharp.coercivity", false);
  const TriLattice2D lat(N);
  const PairModel2D m = model_2d(cfg, lat.eps);
  const SolverOptions sopt = solver_from(cfg, opt.seed);
  res.rows.header = {"N", "Ra", "K", "form", "layers", "gamma"};
  json arr = json::array();
  std::ostringstream sum;
  double first_form = 0.0, best_gamma = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < Ks.size(); ++i) {
    const int K = Ks[i];
    const Blend2D b = build_radial_blend_2d(lat, Ra, Ra + K, margin, profile_from(cfg));
    const Sharp2DResult r = sharpness_probe_2d(lat, m, b);
    double gamma = std::numeric_limits<double>::quiet_NaN();
    if (with_gamma) {
      gamma = coercivity(Op2D(Kind2D::bqcf, lat, m, b), sopt).gamma;
      best_gamma = std::max(best_gamma, gamma);
      res.check("gamma_le_probe_K" + std::to_string(K), gamma <= r.form + 1e-8,
                "gamma=" + g(gamma) + " form=" + g(r.form));
    }
    if (i == 0) first_form = r.form;
    res.rows.rows.push_back({static_cast<long long>(N), static_cast<long long>(Ra), static_cast<long long>(K), r.form,
                             static_cast<long long>(r.layers), gamma});
    arr.push_back({{"K", K}, {"form", r.form}, {"gamma", num(gamma)}});
    sum << "K=" << K << " form=" << g(r.form) << (with_gamma ? " gamma=" + g(gamma) : std::string()) << "\n";
  }
  res.check("probe_negative_K" + std::to_string(Ks.front()), first_form < 0.0, "form=" + g(first_form));
  if (with_gamma) res.check("stability_restored", best_gamma > 0.0, "max gamma " + g(best_gamma));
  res.fit = {{"N", N}, {"Ra", Ra}, {"probes", arr}};
  res.summary = sum.str();
  res.plot = "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'K'\nset ylabel 'layered form'\n"
             "plot 'rows.csv' using 3:4 with linespoints pt 7\n";
  return res;
}

// ---------------------------------------------------------------- poincare

ExperimentResult run_poincare(const Config& cfg, const RunOptions& opt) {
  ExperimentResult res;
  res.name = "poincare";
  const auto Ns = ints(cfg.get_sizes("poincare.N", {8, 16, 32, 64}));
  std::vector<PoincareResult> out(Ns.size());
  parallel_for(static_cast<int>(Ns.size()), opt.threads, [&](int i) {
    const TriLattice2D lat(Ns[i]);
    out[i] = poincare_discrete(lat, make_regions(lat, Ns[i] / 8, Ns[i] / 4), true);
  });
  res.rows.header = {"N", "Ra", "Rb", "ratio", "global_ratio", "C_P", "normalized", "method"};
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool nested = true;
  json arr = json::array();
  std::ostringstream sum;
  for (size_t i = 0; i < Ns.size(); ++i) {
    const auto& r = out[i];
    const double nrm = r.ratio / (r.C_P * r.C_P);
    lo = std::min(lo, nrm);
    hi = std::max(hi, nrm);
    nested = nested && r.ratio <= r.global_ratio * (1.0 + 1e-8);
    res.rows.rows.push_back({static_cast<long long>(Ns[i]), static_cast<long long>(Ns[i] / 8),
                             static_cast<long long>(Ns[i] / 4), r.ratio, r.global_ratio, r.C_P, nrm, r.method});
    arr.push_back({{"N", Ns[i]}, {"ratio", r.ratio}, {"C_P", r.C_P}, {"normalized", nrm}});
    sum << "N=" << Ns[i] << " ratio=" << g(r.ratio) << " C_P^2=" << g(r.C_P * r.C_P) << " normalized=" << g(nrm) << "\n";
  }
  res.fit = {{"points", arr}, {"spread", hi / lo}};
  res.summary = sum.str();
  res.check("normalized_spread", hi / lo <= 50.0, "max/min " + g(hi / lo) + " <= 50");
  res.check("mask_monotone", nested, "blending ratio <= global ratio");
  res.plot = "set datafile separator ','\nset key autotitle columnhead\nset logscale x\nset xlabel 'N'\n"
             "set ylabel 'ratio / C_P^2'\nplot 'rows.csv' using 1:7 with linespoints pt 7\n";
  return res;
}

// ---------------------------------------------------------------- trace

ExperimentResult run_trace(const Config& cfg, const RunOptions& opt) {
  ExperimentResult res;
  res.name = "trace";
  const std::string gs = cfg.get_string("trace.gauge", "both");
  if (gs != "circle" && gs != "hexagon" && gs != "both")
    throw Error(Status::config_error, "key 'trace.gauge': expected circle, hexagon or both");
  std::vector<Gauge> gauges;
  if (gs != "hexagon") gauges.push_back(Gauge::circle);
  if (gs != "circle") gauges.push_back(Gauge::hexagon);
  const auto r0s = cfg.get_doubles("trace.r0", {1e-2, 1e-3, 1e-4});
  const double r1 = cfg.get_double("trace.r1", 1.0);
  const int qn = static_cast<int>(cfg.get_int("trace.quad_n", 8));
  const int samples = static_cast<int>(cfg.get_int("trace.samples", 20));
  res.rows.header = {"gauge", "sample", "r0", "r1", "lhs", "rhs", "ratio", "panels"};
  bool holds = true;
  double log_lo = std::numeric_limits<double>::infinity(), log_hi = 0.0;
  auto record = [&](Gauge gg, const Sample2D& u, double r0) {
    const TraceResult t = trace_check(gg, r0, r1, u, qn);
    res.rows.rows.push_back({std::string(gg == Gauge::circle ? "circle" : "hexagon"), u.name, r0, r1, t.lhs, t.rhs,
                             t.ratio, static_cast<long long>(t.panels)});
    holds = holds && t.ratio <= 1.0 + 1e-3;
    return t;
  };
  for (Gauge gg : gauges) {
    record(gg, sample_constant(), 0.1);
    for (double r0 : r0s) {
      const TraceResult t = record(gg, sample_log(), r0);
      log_lo = std::min(log_lo, t.ratio);
      log_hi = std::max(log_hi, t.ratio);
      for (int k = 0; k < samples; ++k) record(gg, sample_polynomial(opt.seed + k, 3), r0);
    }
  }
  res.fit = {{"log_ratio_min", log_lo}, {"log_ratio_max", log_hi}, {"rows", res.rows.rows.size()}};
  std::ostringstream sum;
  sum << "log|x| ratio in [" << g(log_lo) << ", " << g(log_hi) << "] over r0 in {";
  for (size_t i = 0; i < r0s.size(); ++i) sum << (i ? ", " : "") << g(r0s[i]);
  sum << "}\n";
  res.summary = sum.str();
  res.check("trace_inequality", holds, "ratio <= 1 + 1e-3 for every sample");
  res.check("log_sharpness", log_lo >= 0.01 && log_hi <= 1.0 + 1e-3, "log|x| ratio within [0.01, 1]");
  res.plot = "set datafile separator ','\nset key autotitle columnhead\nset logscale x\nset xlabel 'r0'\n"
             "set ylabel 'lhs/rhs'\nplot 'rows.csv' using 3:7 with points pt 7\n";
  return res;
}

// ---------------------------------------------------------------- verify

Eigen::Matrix2d random_sym(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::Matrix2d a;
  a << nd(rng), nd(rng), 0.0, nd(rng);
  a(1, 0) = a(0, 1);
  return a;
}

PairModel2D random_model_2d(std::mt19937_64& rng) {
  PairModel2D m;
  for (int k = 0; k < 3; ++k) {
    m.Ha[k] = random_sym(rng);
    m.Hb[k] = random_sym(rng);
  }
  return m;
}

Vec random_field(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Vec u(n);
  for (int i = 0; i < n; ++i) u[i] = nd(rng);
  return u;
}

Vec smooth_field(std::mt19937_64& rng, const Chain1D& c) {
  std::normal_distribution<double> nd;
  Vec u = Vec::Zero(c.size());
  for (int k = 1; k <= 4; ++k) {
    const double a = nd(rng), b = nd(rng);
    for (int p = 0; p < c.size(); ++p) {
      const double x = std::numbers::pi * k * c.site(p) * c.eps;
      u[p] += (a * std::cos(x) + b * std::sin(x)) / k;
    }
  }
  return u;
}

void verify_identities_1d(ExperimentResult& res, std::mt19937_64& rng, int draws, std::ostringstream& sum) {
  std::uniform_real_distribution<double> un(0.0, 1.0);
  double worst = 0.0, sbp = 0.0;
  for (int N : {8, 64, 512}) {
    const Chain1D c(N);
    const PairModel1D m = make_model_1d(1.0, -0.24);
    for (int d = 0; d < draws; ++d) {
      Vec beta(c.size());
      for (int p = 0; p < c.size(); ++p) beta[p] = un(rng);
      const Blend1D b = blend_from_samples(c, beta);
      Vec u(c.size());
      for (int p = 0; p < c.size(); ++p) u[p] = un(rng) - 0.5;
      const double q = quad_form(Op1D(Kind1D::bqcf2, c, m, b), u);
      const double t = divergence_form(c, b, u).total();
      worst = std::max(worst, std::abs(q - t) / std::max(std::abs(q), dnorm2(c, u)));
      sbp = std::max(sbp, summation_by_parts_residual(beta, u));
    }
  }
  sum << "identities-1d: max divergence-form residual " << g(worst) << ", summation by parts " << g(sbp) << "\n";
  res.check("divergence_form_1d", worst <= 1e-10, "max relative residual " + g(worst));
  res.check("summation_by_parts_1d", sbp <= 1e-10, "max relative residual " + g(sbp));
  res.fit["identities_1d"] = {{"divergence", worst}, {"summation_by_parts", sbp}};
}

void verify_identities_2d(ExperimentResult& res, std::mt19937_64& rng, int draws, std::ostringstream& sum) {
  std::uniform_real_distribution<double> un(0.0, 1.0);
  double worst = 0.0, sbp = 0.0;
  for (int N : {4, 8, 16}) {
    const TriLattice2D lat(N);
    for (int d = 0; d < draws; ++d) {
      const PairModel2D m = random_model_2d(rng);
      Blend2D b;
      b.beta.resize(lat.sites());
      for (int s = 0; s < lat.sites(); ++s) b.beta[s] = un(rng);
      Vec u(lat.dofs());
      for (int i = 0; i < lat.dofs(); ++i) u[i] = un(rng) - 0.5;
      const double du2 = dnorm2_2d(lat, u);
      for (int k = 0; k < 3; ++k) {
        const double q = inner2d(lat, apply_bond_bqcf(lat, m, b, k, u), u);
        const double t = divergence_form_2d(lat, m, b, u, k).total();
        worst = std::max(worst, std::abs(q - t) / std::max(std::abs(q), m.Hb[k].norm() * du2));
      }
      for (const LVec& r : kA) sbp = std::max(sbp, sum_by_parts_2d_check(lat, u, r) / du2);
    }
  }
  sum << "identities-2d: max divergence-form residual " << g(worst) << ", summation by parts " << g(sbp) << "\n";
  res.check("divergence_form_2d", worst <= 1e-10, "max relative residual " + g(worst));
  res.check("summation_by_parts_2d", sbp <= 1e-10, "max relative residual " + g(sbp));
  res.fit["identities_2d"] = {{"divergence", worst}, {"summation_by_parts", sbp}};
}

void verify_bounds_1d(ExperimentResult& res, std::mt19937_64& rng, int draws, std::ostringstream& sum) {
  const int sizes[] = {16, 64, 256};
  int violations = 0;
  double cR = 0.0, cS = 0.0, cT = 0.0, smoothR = 0.0;
  for (int d = 0; d < draws; ++d) {
    const Chain1D c(sizes[d % 3]);
    const int K = std::uniform_int_distribution<int>(6, c.N)(rng);
    const int center = std::uniform_int_distribution<int>(-c.N + 1, c.N)(rng);
    const Profile pr = d % 2 ? Profile::cosine : Profile::poly7;
    const Blend1D b = build_blend_1d(c, K, center, pr);
    Vec u = d % 2 ? smooth_field(rng, c) : random_field(rng, c.size());
    RSTBounds r = rst_bounds(c, b, u);
    if (d % 2) {
      // Smooth fields can exceed the stated R bound; Hoelder gives twice it.
      smoothR = std::max(smoothR, std::abs(r.terms.R) / r.boundR);
      r.boundR *= 2.0;
    }
    if (!r.holds()) ++violations;
    cR = std::max(cR, std::abs(r.terms.R) / r.boundR);
    cS = std::max(cS, 2.0 * std::abs(r.terms.S) / r.boundS);
    cT = std::max(cT, std::sqrt(2.0) * std::abs(r.terms.T) / r.boundT);
  }
  sum << "bounds-1d: " << draws << " draws, " << violations << " violations; calibrated constants R " << g(cR) << " S "
      << g(cS) << " T " << g(cT) << "; smooth-field |R|/(stated bound) " << g(smoothR) << "\n";
  res.check("rst_bounds_1d", violations == 0, std::to_string(violations) + " violations in " + std::to_string(draws));
  res.fit["bounds_1d"] = {{"draws", draws}, {"violations", violations}, {"C_R", cR}, {"C_S", cS}, {"C_T", cT}, {"smooth_R_ratio", smoothR}};
}

void verify_bounds_2d(ExperimentResult& res, std::mt19937_64& rng, int draws, double C_S, std::ostringstream& sum) {
  int violations = 0;
  double cR = 0.0, cS = 0.0;
  std::vector<std::pair<int, std::pair<int, int>>> shapes;
  for (int N : {16, 20, 24})
    for (int Ra = 0; Ra <= N / 2; ++Ra)
      for (int Rb = Ra + 7; Rb <= N / 2; ++Rb) shapes.push_back({N, {Ra, Rb}});
  std::uniform_int_distribution<size_t> pick(0, shapes.size() - 1);
  for (int d = 0; d < draws; ++d) {
    const auto& sh = shapes[pick(rng)];
    const TriLattice2D lat(sh.first);
    const Blend2D b = build_blend_2d(lat, sh.second.first, sh.second.second, d % 2 ? Profile::cosine : Profile::poly7);
    const PairModel2D m = random_model_2d(rng);
    const Vec u = random_field(rng, lat.dofs());
    const RSBounds2D r = rs_bounds_2d(lat, m, b, u, C_S);
    if (!r.holds()) ++violations;
    for (int k = 0; k < 3; ++k) {
      cR = std::max(cR, 4.0 * std::abs(r.forms[k].Rb_term) / r.boundR[k]);
      cS = std::max(cS, C_S * std::abs(r.forms[k].Sb_term) / r.boundS[k]);
    }
  }
  sum << "bounds-2d: " << draws << " draws, " << violations << " violations; calibrated constants R " << g(cR) << " S "
      << g(cS) << "\n";
  res.check("rs_bounds_2d", violations == 0, std::to_string(violations) + " violations in " + std::to_string(draws));
  res.fit["bounds_2d"] = {{"draws", draws}, {"violations", violations}, {"C_R", cR}, {"C_S_needed", cS}, {"C_S", C_S}};
}

void verify_blend(ExperimentResult& res, std::ostringstream& sum) {
  int blends = 0, fail_lower = 0, fail_card = 0, fail_shape = 0, fail_upper = 0;
  double min_card = std::numeric_limits<double>::infinity();
  for (int N : {64, 128, 512})
    for (int K : {8, 12, 16, 32, 64, 128, 400})
      for (Profile pr : {Profile::poly7, Profile::cosine}) {
        if (K > N) continue;
        const Chain1D c(N);
        const Blend1D b = build_blend_1d(c, K, default_center_1d(c, K), pr);
        ++blends;
        for (int j = 0; j < 3; ++j) {
          if (b.Cj[j] < 1.0 - 1e-12) ++fail_lower;
          const double lim = profile_sup_derivative(pr, j + 1) * std::pow(K / (K - 4.0), j + 1);
          if (b.Cj[j] > lim * (1.0 + 1e-6) || (j < 2 && b.Cj[j] > 40.0)) ++fail_upper;
        }
        std::vector<char> in(c.size(), 0);
        for (int p : b.interface) in[p] = 1;
        for (int p = 0; p < c.size(); ++p)
          if (!in[p] && b.beta[p] != 0.0 && b.beta[p] != 1.0) ++fail_shape;
        for (int m = 1; m < K; ++m)
          if (b.beta[c.wrap(b.up_start + m)] < b.beta[c.wrap(b.up_start + m - 1)]) ++fail_shape;
        for (const auto& comp : interface_components(c, b)) {
          if (comp.orientation <= 0) continue;
          const double card = static_cast<double>(third_diff_level_set(c, b, comp).size());
          const double need = K / (2.0 * b.Cbeta);
          min_card = std::min(min_card, card / need);
          if (card < need) ++fail_card;
        }
      }
  sum << "blend: " << blends << " blends; lower-bound failures " << fail_lower << ", cardinality failures " << fail_card
      << " (min #J'/required " << g(min_card) << ")\n";
  res.check("blend_lower_bounds", fail_lower == 0, std::to_string(fail_lower) + " failures");
  res.check("blend_upper_bounds", fail_upper == 0, std::to_string(fail_upper) + " failures");
  res.check("blend_shape", fail_shape == 0, std::to_string(fail_shape) + " failures");
  res.check("blend_cardinality", fail_card == 0, "min #J'/(K/(2 Cbeta)) " + g(min_card));
  res.fit["blend"] = {{"blends", blends}, {"min_cardinality_ratio", min_card}};
}

ExperimentResult run_verify(const Config& cfg, const RunOptions& opt) {
  ExperimentResult res;
  res.name = "verify";
  const std::string suite = cfg.get_string("verify.suite", "all");
  const std::vector<std::string> known = {"identities-1d", "identities-2d", "bounds-1d", "bounds-2d", "blend", "all"};
  if (std::find(known.begin(), known.end(), suite) == known.end())
    throw Error(Status::config_error, "key 'verify.suite': unknown suite '" + suite + "'");
  const bool all = suite == "all";
  std::mt19937_64 rng(opt.seed);
  std::ostringstream sum;
  if (all || suite == "identities-1d")
    verify_identities_1d(res, rng, static_cast<int>(cfg.get_int("verify.draws", 100)), sum);
  if (all || suite == "identities-2d")
    verify_identities_2d(res, rng, static_cast<int>(cfg.get_int("verify.draws", 100)), sum);
  if (all || suite == "bounds-1d") verify_bounds_1d(res, rng, static_cast<int>(cfg.get_int("bounds.draws", 1000)), sum);
  if (all || suite == "bounds-2d")
    verify_bounds_2d(res, rng, static_cast<int>(cfg.get_int("bounds.draws", 200)), cfg.get_double("bounds.C_S", 8.0), sum);
  if (all || suite == "blend") verify_blend(res, sum);
  res.summary = sum.str();
  res.rows.header = {"check", "passed", "detail"};
  for (const auto& c : res.checks) res.rows.rows.push_back({c.name, std::string(c.passed ? "true" : "false"), c.detail});
  res.fit["suite"] = suite;
  res.plot = "# invariant suites produce no plot\n";
  return res;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"verify",   "sweep1d",  "sweep2d", "sharp1d",
                                                 "sharp2d",  "poincare", "trace",   "stability"};
  return names;
}

ExperimentResult run(const std::string& experiment, const Config& cfg, const RunOptions& opt) {
  cfg.validate_keys();
  if (experiment == "verify") return run_verify(cfg, opt);
  if (experiment == "sweep1d") return run_sweep1d(cfg, opt);
  if (experiment == "sweep2d") return run_sweep2d(cfg, opt);
  if (experiment == "sharp1d") return run_sharp1d(cfg, opt);
  if (experiment == "sharp2d") return run_sharp2d(cfg, opt);
  if (experiment == "poincare") return run_poincare(cfg, opt);
  if (experiment == "trace") return run_trace(cfg, opt);
  if (experiment == "stability") return run_stability(cfg, opt);
  fail("unknown experiment '" + experiment + "'");
}

}  // namespace bqcf
