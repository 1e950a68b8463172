#include "wlab/moebius.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "wlab/geometry.hpp"

namespace wlab {

namespace {

Vec3 apply_atom(const MoebiusAtom& a, const Vec3& x, double scene_scale,
                double pole_exclusion) {
  if (const auto* inv = std::get_if<Inversion>(&a)) {
    Vec3 d = x - inv->center;
    double n2 = norm2(d);
    if (n2 < pole_exclusion * pole_exclusion * scene_scale * scene_scale)
      fail(ErrorCode::pole_hit, "moebius apply: sample within exclusion radius of an inversion center");
    return d / n2;
  }
  if (const auto* ref = std::get_if<Reflection>(&a)) {
    return x - 2.0 * dot(ref->normal, x) * ref->normal;
  }
  const auto& s = std::get<Similarity>(a);
  return s.scale * (s.rotation * x) + s.translation;
}

JVec3 apply_atom(const MoebiusAtom& a, const JVec3& x, double scene_scale,
                 double pole_exclusion) {
  if (const auto* inv = std::get_if<Inversion>(&a)) {
    JVec3 d = x - JVec3(inv->center);
    Jet2 n2 = norm2(d);
    if (n2.f < pole_exclusion * pole_exclusion * scene_scale * scene_scale)
      fail(ErrorCode::pole_hit, "moebius apply: sample within exclusion radius of an inversion center");
    return d / n2;
  }
  if (const auto* ref = std::get_if<Reflection>(&a)) {
    Jet2 d = dot(JVec3(ref->normal), x) * 2.0;
    return x - JVec3(ref->normal) * d;
  }
  const auto& s = std::get<Similarity>(a);
  JVec3 r;
  for (int i = 0; i < 3; ++i)
    r[i] = (s.rotation(i, 0) * x.x + s.rotation(i, 1) * x.y + s.rotation(i, 2) * x.z) *
               s.scale + Jet2(s.translation[i]);
  return r;
}

bool atoms_cancel(const MoebiusAtom& a, const MoebiusAtom& b) {
  if (const auto* ia = std::get_if<Inversion>(&a)) {
    const auto* ib = std::get_if<Inversion>(&b);
    // I_p o I_p = id only for coincident centers at the origin-equivalent form;
    // general I_p I_p is not the identity, so only cancel the exact I_0 pair
    // and identical reflections.
    return ib && norm(ia->center) == 0.0 && norm(ib->center) == 0.0;
  }
  if (const auto* ra = std::get_if<Reflection>(&a)) {
    const auto* rb = std::get_if<Reflection>(&b);
    return rb && dist(ra->normal, rb->normal) < 1e-15;
  }
  return false;
}

}  // namespace

MoebiusMap MoebiusMap::then(const MoebiusMap& next) const {
  MoebiusMap r = *this;
  for (const auto& a : next.word) {
    if (!r.word.empty() && atoms_cancel(r.word.back(), a)) {
      r.word.pop_back();
      continue;
    }
    r.word.push_back(a);
  }
  return r;
}

MoebiusMap MoebiusMap::inverse() const {
  MoebiusMap r;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (const auto* inv = std::get_if<Inversion>(&*it)) {
      // I_p = I_0 o T_{-p}, so I_p^{-1} = T_p o I_0
      r.word.push_back(Inversion{Vec3{0, 0, 0}});
      if (norm(inv->center) > 0)
        r.word.push_back(Similarity{1.0, Mat3::identity(), inv->center});
    } else if (const auto* ref = std::get_if<Reflection>(&*it)) {
      r.word.push_back(*ref);
    } else {
      const auto& s = std::get<Similarity>(*it);
      Similarity si;
      si.scale = 1.0 / s.scale;
      si.rotation = s.rotation.transpose();
      si.translation = -(si.rotation * s.translation) * si.scale;
      r.word.push_back(si);
    }
  }
  return r;
}

std::string MoebiusMap::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : word) {
    nlohmann::json ja;
    if (const auto* inv = std::get_if<Inversion>(&a)) {
      ja["type"] = "inversion";
      ja["center"] = {inv->center.x, inv->center.y, inv->center.z};
    } else if (const auto* ref = std::get_if<Reflection>(&a)) {
      ja["type"] = "reflection";
      ja["normal"] = {ref->normal.x, ref->normal.y, ref->normal.z};
    } else {
      const auto& s = std::get<Similarity>(a);
      ja["type"] = "similarity";
      ja["scale"] = s.scale;
      ja["rotation"] = s.rotation.m;
      ja["translation"] = {s.translation.x, s.translation.y, s.translation.z};
    }
    arr.push_back(std::move(ja));
  }
  return arr.dump();
}

MoebiusMap MoebiusMap::from_json(const std::string& text) {
  nlohmann::json arr = nlohmann::json::parse(text);
  MoebiusMap m;
  for (const auto& ja : arr) {
    std::string t = ja.at("type");
    if (t == "inversion") {
      m.word.push_back(Inversion{{ja["center"][0], ja["center"][1], ja["center"][2]}});
    } else if (t == "reflection") {
      m.word.push_back(Reflection{{ja["normal"][0], ja["normal"][1], ja["normal"][2]}});
    } else if (t == "similarity") {
      Similarity s;
      s.scale = ja.value("scale", 1.0);
      if (ja.contains("rotation"))
        for (int i = 0; i < 9; ++i) s.rotation.m[i] = ja["rotation"][i];
      if (ja.contains("translation"))
        s.translation = {ja["translation"][0], ja["translation"][1], ja["translation"][2]};
      m.word.push_back(s);
    } else {
      fail(ErrorCode::invalid_argument, "moebius json: unknown atom type " + t);
    }
  }
  return m;
}

Vec3 apply(const MoebiusMap& map, const Vec3& x, double scene_scale, double pole_exclusion) {
  Vec3 y = x;
  for (const auto& a : map.word) y = apply_atom(a, y, scene_scale, pole_exclusion);
  return y;
}

JVec3 apply(const MoebiusMap& map, const JVec3& x, double scene_scale, double pole_exclusion) {
  JVec3 y = x;
  for (const auto& a : map.word) y = apply_atom(a, y, scene_scale, pole_exclusion);
  return y;
}

DiscreteImmersion apply_immersion(const MoebiusMap& map, const DiscreteImmersion& imm,
                                  double scene_scale) {
  DiscreteImmersion out = imm;
  for (auto& p : out.positions) p = apply(map, p, scene_scale);
  if (imm.sampler) {
    AnalyticSampler base = imm.sampler;
    MoebiusMap m = map;
    double sc = scene_scale;
    out.sampler = [base, m, sc](double u, double v) { return apply(m, base(u, v), sc); };
  }
  return out;
}

ImmersionAtlas apply_immersion(const MoebiusMap& map, const ImmersionAtlas& atlas,
                               double scene_scale) {
  ImmersionAtlas out;
  out.weights = atlas.weights;
  for (const auto& c : atlas.charts) out.charts.push_back(apply_immersion(map, c, scene_scale));
  return out;
}

double conformal_invariance_check(const ImmersionAtlas& atlas, const MoebiusMap& map) {
  double w0 = willmore_energy(atlas);
  double w1 = willmore_energy(apply_immersion(map, atlas));
  return std::fabs(w1 - w0);
}

std::vector<double> rescaled_inversion_limit(const std::vector<Vec3>& centers,
                                             const std::vector<Vec3>& test_points) {
  if (centers.empty()) return {};
  Vec3 nu = normalized(centers.back());
  std::vector<double> defects;
  defects.reserve(centers.size());
  for (const Vec3& p : centers) {
    double n2p = norm2(p);
    double worst = 0;
    for (const Vec3& x : test_points) {
      Vec3 d = x - p;
      Vec3 lhs = (n2p / norm2(d)) * d + p;
      Vec3 rhs = x - 2.0 * dot(nu, x) * nu;
      worst = std::max(worst, dist(lhs, rhs));
    }
    defects.push_back(worst);
  }
  return defects;
}

Vec3 choose_inversion_center(double anchor_scale, const Vec3& anchor_position,
                             const Vec3& offset, const std::vector<Vec3>& surface_samples) {
  Vec3 c = anchor_scale * offset + anchor_position;
  double dmin = std::numeric_limits<double>::infinity();
  for (const Vec3& s : surface_samples) dmin = std::min(dmin, dist(c, s));
  if (dmin <= 1e-6 * anchor_scale)
    fail(ErrorCode::center_on_surface,
         "choose_inversion_center: center within 1e-6 * scale of the surface");
  return c;
}

}  // namespace wlab
