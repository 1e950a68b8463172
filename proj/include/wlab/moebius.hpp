#pragma once

#include <string>
#include <variant>
#include <vector>

#include "wlab/immersion.hpp"
#include "wlab/jet.hpp"
#include "wlab/linalg.hpp"

namespace wlab {

// Word atoms. Maps are kept as words (inversions are not linear); composition
// only cancels adjacent inverse pairs.
struct Inversion {
  Vec3 center;
};
struct Reflection {
  Vec3 normal;  // unit
};
struct Similarity {
  double scale = 1.0;
  Mat3 rotation = Mat3::identity();
  Vec3 translation{0, 0, 0};
};

using MoebiusAtom = std::variant<Inversion, Reflection, Similarity>;

struct MoebiusMap {
  std::vector<MoebiusAtom> word;  // applied first-to-last

  static MoebiusMap identity() { return {}; }
  static MoebiusMap inversion(const Vec3& p) { return {{Inversion{p}}}; }
  static MoebiusMap reflection(const Vec3& nu) { return {{Reflection{normalized(nu)}}}; }
  static MoebiusMap similarity(double s, const Mat3& R, const Vec3& b) {
    return {{Similarity{s, R, b}}};
  }
  static MoebiusMap translation(const Vec3& b) {
    return similarity(1.0, Mat3::identity(), b);
  }

  MoebiusMap then(const MoebiusMap& next) const;
  MoebiusMap inverse() const;

  std::string to_json() const;
  static MoebiusMap from_json(const std::string& text);
};

// Pointwise application. Throws PoleHit when a point falls within
// pole_exclusion * scene_scale of an inversion center.
Vec3 apply(const MoebiusMap& map, const Vec3& x, double scene_scale = 1.0,
           double pole_exclusion = 1e-8);
JVec3 apply(const MoebiusMap& map, const JVec3& x, double scene_scale = 1.0,
            double pole_exclusion = 1e-8);

// Immersion variant; re-attaches the analytic sampler by composition.
DiscreteImmersion apply_immersion(const MoebiusMap& map, const DiscreteImmersion& imm,
                                  double scene_scale = 1.0);
ImmersionAtlas apply_immersion(const MoebiusMap& map, const ImmersionAtlas& atlas,
                               double scene_scale = 1.0);

// |W(map o imm) - W(imm)|, diagnostic.
double conformal_invariance_check(const ImmersionAtlas& atlas, const MoebiusMap& map);

// sup over test points of | |p|^2 I_p(x) + p - J_nu(x) | per center in the
// sequence; must decay like O(1/|p_k|) when p_k/|p_k| -> nu.
std::vector<double> rescaled_inversion_limit(const std::vector<Vec3>& centers,
                                             const std::vector<Vec3>& test_points);

// center = s * p_offset + y; rejects centers within 1e-6 * s of the samples.
Vec3 choose_inversion_center(double anchor_scale, const Vec3& anchor_position,
                             const Vec3& offset, const std::vector<Vec3>& surface_samples);

}  // namespace wlab
