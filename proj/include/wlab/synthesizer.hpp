#pragma once

#include <map>
#include <string>
#include <vector>

#include "wlab/bubble_graph.hpp"
#include "wlab/geometry.hpp"
#include "wlab/immersion.hpp"

namespace wlab {

// Blueprint of a degenerating family: two nearly-coincident unit spheres
// (outer sheet inward-oriented, inner sheet outward) bridged by p+1 catenoid
// necks at the leaf sites of the tree; internal tree vertices become gap
// dimples at their own scales.
struct FamilySpec {
  int genus = 1;
  TreeSpec tree;            // shape only; schedules are derived
  int k_min = 0, k_max = 6;
  double sphere_radius = 1.0;
  double beta = 0.3;        // gluing overlap margin: crossing clearance fraction
  double base_gap = 0.015;  // sheet gap at k = 0
  double gap_rate = 0.5;    // gap shrink factor per k per depth level
  // equator angles (radians) for the root's children; empty = regular n-gon
  std::vector<double> attachment_angles;
  int body_nu = 160, body_nv = 80;
  int handle_nv = 48;
  double handle_du = 0.08;

  static FamilySpec standard(int genus, int k_min = 0, int k_max = 6);
  std::string to_json() const;
  static FamilySpec from_json(const std::string& text);
  void validate() const;
};

struct FamilyMember {
  int k = 0;
  ImmersionAtlas atlas;
  Functionals f;
  double cycle_conformal_length = 0;  // sum of handle-chart spans
};

struct SynthesizedFamily {
  FamilySpec spec;
  std::vector<FamilyMember> members;
  BubbleGraph ground_truth;
};

// Throws OverlapCollision when neck footprints intersect.
SynthesizedFamily synthesize_family(const FamilySpec& spec);

// Genus-1 family whose neck conformal lengths track the thin-part cylinder
// length L(l_k); reports the induced modulus estimate per member.
struct DegenerateTorus {
  SynthesizedFamily family;
  std::vector<double> im_omega;  // measured Im omega per k
};
DegenerateTorus degenerate_torus(const std::vector<double>& l_schedule,
                                 int body_nu = 160, int body_nv = 80);

struct NeckFunctionals {
  double A = 0, V = 0, M = 0, diameter = 0;
};

// Functionals of the neck annulus of a leaf edge, restricted to footprints
// [plate / alpha0, alpha * parent scale].
NeckFunctionals neck_contribution(const SynthesizedFamily& fam, int member_index,
                                  const std::string& leaf_id, double alpha,
                                  double alpha0 = 0.5);

struct MacroscopicRow {
  int k;
  Functionals family_value;
  Functionals macro_sum;
};

// F(Phi_k) against the sum over macroscopic bubbles (the two spheres) for
// F in {A, V, M}.
std::vector<MacroscopicRow> macroscopic_functional_sum(const SynthesizedFamily& fam);

// Limit configurations used by the constrained-minimizer checks.
// Cor.-1.6 model: one sphere traversed twice with opposite orientations,
// offset by sqrt(s) to avoid exact coincidence.
ImmersionAtlas coincident_opposite_spheres(double offset_scale = 1e-4, int nu = 128,
                                           int nv = 64);
// Cor.-1.7 model: equal radii, same orientation, images tangent at one point.
ImmersionAtlas tangent_equal_spheres(int nu = 128, int nv = 64);

void save_family(const SynthesizedFamily& fam, const std::string& directory);
SynthesizedFamily load_family(const std::string& directory);  // samplers not restored

}  // namespace wlab
