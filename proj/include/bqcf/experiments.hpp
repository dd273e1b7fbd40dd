#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bqcf/config.hpp"
#include "bqcf/ops1d.hpp"
#include "bqcf/ops2d.hpp"
#include "bqcf/spectral.hpp"

namespace bqcf {

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
  std::string to_csv() const;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::string name;
  Table rows;
  nlohmann::json fit = nlohmann::json::object();
  std::string summary;
  std::string plot;
  std::vector<Check> checks;

  bool passed() const;
  void check(const std::string& name, bool ok, const std::string& detail);
  void write(const std::string& dir) const;
};

struct RunOptions {
  int threads = 1;
  std::uint64_t seed = 1;
  std::string out_dir;  // destination of optional matrix exports
};

// Runs fn(0..n-1) on a pool of `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

std::string format_g17(double x);

// Least-squares line y = slope x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct SweepRow {
  double eps = 0.0;
  int K = 0;
  int Ra = 0;
  int Rb = 0;
  double gamma = 0.0;
  double reference = 0.0;  // c0 in 1D, gamma~ in 2D
  double seconds = 0.0;
  std::string method;
  double canary = 0.0;  // divergence-form residual at this point
};

struct ThresholdPoint {
  double eps = 0.0;
  int N = 0;
  int Ra = 0;
  int Kstar = -1;  // -1: no sign change in the window
  double gamma_at = 0.0;
  double gamma_below = 0.0;  // NaN when K* is the window minimum
  double reference = 0.0;    // c0 in 1D, gamma~ in 2D
  int K_check = -1;          // 4 K* in 1D, round(4 eps^{-1/5}) in 2D case 3
  double gamma_check = 0.0;
  bool flagged = false;
};

struct ThresholdFit {
  std::vector<ThresholdPoint> points;
  std::vector<SweepRow> rows;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double max_residual = 0.0;  // largest |K* - fit| over unflagged points
  bool degenerate = false;
  bool monotone = true;  // K* non-increasing in eps
};

struct Sweep1DParams {
  std::vector<int> N;
  int K_min = 6;
  int K_max = 0;  // 0 -> N
  Profile profile = Profile::poly7;
  SolverOptions solver;
  int threads = 1;
  std::uint64_t seed = 1;
};

ThresholdFit sweep_threshold_1d(const PairModel1D& model, const Sweep1DParams& p);

struct Sharp1DResult {
  double rayleigh = 0.0;
  double dnorm = 0.0;
  DivForm1D terms;
  double T_bound = 0.0;  // (alpha^{1/2}/4) K^{-5/2} eps^{-1/2}
  double alpha = 0.0;
  int J = 0;
  bool T_ok = false;
  double abs_T_over_boundT = 0.0;
};

Sharp1DResult sharpness_probe_1d(const PairModel1D& model, const Chain1D& c, const Blend1D& b);

struct Sweep2DParams {
  int which = 1;  // 1: Ra fixed, 2: Ra = eps^{-alpha}, 3: Ra = c/eps
  std::vector<int> N;
  int Ra = 4;
  double alpha = 0.5;
  double c = 0.125;
  int K_min = 1;
  int K_max = 0;  // 0 -> N - Ra - margin - 1
  int margin = 0;
  Profile profile = Profile::poly7;
  LtildeWeight weight = LtildeWeight::b1;
  SolverOptions solver;
  int threads = 1;
  std::uint64_t seed = 1;
};

int case_Ra(const Sweep2DParams& p, int N);
ThresholdFit sweep_threshold_2d(const PairModel2D& model, const Sweep2DParams& p);

struct Sharp2DResult {
  double form = 0.0;  // <L^bqcf u, u> with ||Du|| = 1
  Vec u;
  double lambda = 0.0;
  Eigen::Vector2d uhat;
  int layers = 0;
};

// Layered field u = mu(ring) uhat, mu optimized over rings [ring_lo, ring_hi].
Sharp2DResult sharpness_probe_2d(const TriLattice2D& lat, const PairModel2D& model, const Blend2D& b,
                                 int ring_lo = 0, int ring_hi = -1);

enum class Gauge { circle, hexagon };

struct Sample2D {
  std::function<double(double, double)> f;
  std::function<Eigen::Vector2d(double, double)> grad;
  std::string name;
};

Sample2D sample_constant(double c = 1.0);
Sample2D sample_log();
Sample2D sample_polynomial(std::uint64_t seed, int degree = 3);

struct TraceResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double C0 = 0.0;
  double C1 = 0.0;
  int panels = 0;
  bool converged = false;
};

TraceResult trace_check(Gauge g, double r0, double r1, const Sample2D& u, int quad_n = 8);

ExperimentResult run(const std::string& experiment, const Config& cfg, const RunOptions& opt);
const std::vector<std::string>& experiment_names();

}  // namespace bqcf
