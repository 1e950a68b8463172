#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wlab/bubble_graph.hpp"
#include "wlab/immersion.hpp"

namespace wlab {

struct AnnulusZone {
  double u_lo = 0, u_hi = 0;  // log-radius bounds
  double energy = 0;          // Gauss-map Dirichlet energy in the band
};

// Dyadic decomposition of an annulus chart into energy zones and quiet necks;
// radii follow the paper's descending order a^0 > b^0 > a^1 > ... > b^N.
struct AnnulusDecomposition {
  std::vector<AnnulusZone> zones;  // ascending in u
  std::vector<AnnulusZone> necks;  // quiet stretches, ascending in u
  std::vector<double> a_radii, b_radii;
  int N() const { return int(zones.size()); }
};

// Dirichlet energy of the Gauss map over the chart sub-annulus r in [r1, r2]
// (r = e^u). Conformally invariant, so evaluated in flat chart coordinates.
double annulus_energy(const DiscreteImmersion& imm, double r1, double r2);

// Per-row energy density integral (theta direction integrated out).
std::vector<double> radial_energy_rows(const DiscreteImmersion& imm);

// Greedy dyadic sweep: rings with window energy >= eps are bubble zones,
// maximal quiet stretches are necks. Throws Unresolved when the grid cannot
// resolve dyadic windows.
AnnulusDecomposition neck_decomposition(const DiscreteImmersion& imm, double eps);

struct ExponentFit {
  int m = 0;
  double slope = 0;     // of the circle-averaged planar conformal factor
  double residual = 0;  // |slope - (m-1)|
};

// Slope fit on the trimmed quiet stretch [u_lo, u_hi] (margins 1/8 of the log
// width per side). Residual > 1/3 raises AmbiguousOrder. When require_span is
// set the trimmed stretch must cover >= 1.5 decades.
ExponentFit neck_exponent(const DiscreteImmersion& imm, double u_lo, double u_hi,
                          bool require_span = true);

struct ZoneClass {
  ModelTag tag = ModelTag::unclassified;
  double residual = 0;
  double W = 0, E = 0, A = 0;
};

// Least-squares-style classification of a rescaled chart sub-annulus against
// the taxonomy: flatness (P), umbilicity with E ~ 2W (S), minimality with
// E > 0 (C), Willmore level after the closed-surface check (IC1/IC2).
// "unclassified" when the two best scores are within 20%.
ZoneClass classify_bubble(const DiscreteImmersion& imm, double u_lo, double u_hi);

// Classification of a whole chart piece (used for macroscopic bodies).
ZoneClass classify_piece(const std::vector<const DiscreteImmersion*>& charts,
                         const std::vector<const ScalarField*>& weights);

struct ExtractOptions {
  double quiet_margin = 0.2;      // u kept clear of chart ends
  int min_consistent_members = 4; // trailing members that must agree
  double patch_containment = 1.3; // nesting radius factor
};

// Recover the bubble graph from a family of atlases sharing chart structure.
// Vertices come from body charts (spheres + sheet-gap thick vertices), patch
// annuli (internal thick vertices) and handle zones (catenoid leaves); edges
// from chart nesting with exponents from the quiet-stretch fits. Scales and
// positions are reported over the trailing window of members whose zone
// structure matches the finest one.
BubbleGraph extract_graph(const std::vector<const ImmersionAtlas*>& members,
                          const std::vector<int>& k_values, double eps,
                          const ExtractOptions& opts = {});

}  // namespace wlab
