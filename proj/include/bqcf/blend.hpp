#pragma once

#include <array>
#include <string>
#include <vector>

#include "bqcf/lattice1d.hpp"
#include "bqcf/lattice2d.hpp"

namespace bqcf {

enum class Profile { poly7, cosine };

Profile parse_profile(const std::string& s);
const char* profile_name(Profile p);

// Reference step on [0,1], clamped outside: B(0)=0, B(1)=1, C^3 after extension.
double profile_value(Profile p, double t);
// Analytic sup |B^{(j)}| on [0,1], j = 1..3.
double profile_sup_derivative(Profile p, int j);

struct Blend1D {
  Vec beta;
  std::vector<int> interface;  // array positions p with 0 < beta_{p+j} < 1, j in {+-1,+-2}
  int K = 0;                   // per-ramp width parameter
  int up_start = -1;           // array position of the first up-ramp site, -1 if unknown
  std::array<double, 3> Cj{};  // ||D^{(j)} beta|| (K eps)^j
  double Cbeta = 0.0;          // max_j Cj
};

// Wraps arbitrary samples in [0,1]; K defaults to the size of the largest
// connected interface component.
Blend1D blend_from_samples(const Chain1D& c, const Vec& beta, int K = 0);

// Up ramp of width K centred at site `center`, plateau 1, then the mirrored
// down ramp half a period later.
Blend1D build_blend_1d(const Chain1D& c, int K, int center, Profile profile = Profile::poly7);

// Default centre used by the CLI and the sweeps.
int default_center_1d(const Chain1D& c, int K);

// Exact maxima of |D^{(j)} beta|, j = 1..3.
std::array<double, 3> derivative_bounds(const Chain1D& c, const Blend1D& b);

// Connected components of the interface set in cyclic order, with orientation
// +1 for an up ramp and -1 for a down ramp.
struct InterfaceComponent {
  std::vector<int> sites;
  int orientation = 0;
};
std::vector<InterfaceComponent> interface_components(const Chain1D& c, const Blend1D& b);

// Sites with D3beta_l <= -(1/2)(eps K)^{-3} on up ramps and
// D3beta_{l+1} >= (1/2)(eps K)^{-3} on down ramps.
std::vector<int> third_diff_level_set(const Chain1D& c, const Blend1D& b);
// Restriction of the level set to one component.
std::vector<int> third_diff_level_set(const Chain1D& c, const Blend1D& b, const InterfaceComponent& comp);

struct Blend2D {
  Vec beta;  // one value per site
  int Ra = 0;
  int Rb = 0;
  int K = 0;
  int margin = 0;
  std::array<double, 3> Cj{};
  double Cbeta = 0.0;
};

// beta = 1 - B((h - Ra - m)/(K - 2m)) with h the hex ring number and m the margin.
Blend2D build_radial_blend_2d(const TriLattice2D& lat, int Ra, int Rb, int margin, Profile profile = Profile::poly7);

// Strict construction: margin 3 and Rb <= N/2.
Blend2D build_blend_2d(const TriLattice2D& lat, int Ra, int Rb, Profile profile = Profile::poly7);

Blend2D constant_blend_2d(const TriLattice2D& lat, double value);

// max over direction tuples of |D_{a_i} beta|, |D_{a_i}D_{a_j} beta|, |D_{a_i}D_{a_j}D_{a_k} beta|.
std::array<double, 3> derivative_bounds(const TriLattice2D& lat, const Blend2D& b);

// Largest |D_{a_i}D_{a_j}D_{a_k} beta| over sites outside the blending annulus.
double third_diff_outside_blending(const TriLattice2D& lat, const Blend2D& b);

}  // namespace bqcf
