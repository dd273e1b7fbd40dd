#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bqcf/blend.hpp"
#include "bqcf/lattice1d.hpp"
#include "bqcf/potentials.hpp"

namespace bqcf {

enum class Kind1D { atomistic, qcl, bqcf, bqcf1, bqcf2 };

Kind1D parse_kind_1d(const std::string& s);
const char* kind_name(Kind1D k);

struct Op1D {
  Kind1D kind = Kind1D::atomistic;
  Chain1D chain;
  PairModel1D model;
  std::optional<Blend1D> blend;

  Op1D(Kind1D k, const Chain1D& c, const PairModel1D& m, std::optional<Blend1D> b = std::nullopt);
  bool blended() const { return kind == Kind1D::bqcf || kind == Kind1D::bqcf1 || kind == Kind1D::bqcf2; }
};

Vec apply(const Op1D& op, const Vec& u);
double quad_form(const Op1D& op, const Vec& u);

struct DivForm1D {
  double main = 0.0;
  double R = 0.0;
  double S = 0.0;
  double T = 0.0;
  double total() const { return main + R + S + T; }
};

DivForm1D divergence_form(const Chain1D& c, const Blend1D& b, const Vec& u);

struct RSTBounds {
  double boundR = 0.0;
  double boundS = 0.0;
  double boundT = 0.0;
  DivForm1D terms;
  bool holds() const;
};

RSTBounds rst_bounds(const Chain1D& c, const Blend1D& b, const Vec& u);

struct SharpnessFunction {
  Vec v;               // mean-zero displacement
  Vec vprime;          // Dv
  std::vector<int> J;  // level-set sites used
  double L = 0.0;      // eps #J
  double sigma = 1.0;  // sign applied on J
};

// Test field of the blending-width sharpness argument. sign_hint < 0 puts
// -L^{-1/2} on J', which is the destabilizing choice for phi2F < 0.
SharpnessFunction sharpness_test_function(const Chain1D& c, const Blend1D& b, double sign_hint = -1.0);

}  // namespace bqcf
