#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bqcf/ops1d.hpp"
#include "bqcf/ops2d.hpp"

namespace bqcf {

using SpMat = Eigen::SparseMatrix<double>;

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct SparseOp {
  int dim = 0;
  SpMat A;
  bool symmetric = false;

  std::vector<Triplet> triplets() const;
  int max_row_nnz() const;
  double asymmetry() const;  // max |A - A^T|
};

// A with u^T A u = <op u, u>: inner-product weights folded into the rows.
SparseOp assemble(const Op1D& op);
SparseOp assemble(const Op2D& op);

SparseOp gram_D(const Chain1D& c);
SparseOp gram_D(const TriLattice2D& lat);
// Scalar-field Gram form on the 2D lattice (one component).
SparseOp gram_D_scalar(const TriLattice2D& lat);

SparseOp symmetric_part(const SparseOp& a);

// Orthonormal basis of ker G, plus coordinates that pin it for grounded solves.
struct Kernel {
  Eigen::MatrixXd Z;
  std::vector<int> ground;
};

Kernel kernel_1d(const Chain1D& c);
Kernel kernel_2d(const TriLattice2D& lat);
Kernel kernel_scalar(int n);

enum class Method { automatic, dense, iterative };
Method parse_method(const std::string& s);
const char* method_name(Method m);

struct SolverOptions {
  Method method = Method::automatic;
  int dense_threshold = 3000;
  double tol = 1e-8;
  int max_iter = 5000;
  int block = 4;
  std::uint64_t seed = 12345;
  bool throw_on_failure = true;
};

struct StabilityReport {
  double gamma = 0.0;
  Vec minimizer;
  Method method = Method::dense;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Smallest eigenvalue of the pencil (sym(A), G) on the complement of ker G.
StabilityReport coercivity(const SparseOp& op, const SparseOp& G, const Kernel& ker, const SolverOptions& opt = {});
StabilityReport coercivity(const Op1D& op, const SolverOptions& opt = {});
StabilityReport coercivity(const Op2D& op, const SolverOptions& opt = {});

// Relative Rayleigh residual ||P(Sx - lambda Gx)|| / (||PSx|| + |lambda| ||Gx||).
double rayleigh_residual(const SpMat& S, const SpMat& G, const Kernel& ker, const Vec& x, double lambda);

void write_matrix_market(const SparseOp& op, const std::string& path);

}  // namespace bqcf
