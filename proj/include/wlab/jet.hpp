#pragma once

#include <cmath>

#include "wlab/linalg.hpp"

namespace wlab {

// Order-2 forward jet in two chart variables (u,v). Carries value, first and
// second partials. Analytic samplers return positions as Jet3 so that metric,
// second fundamental form and curvature are exact at grid nodes.
struct Jet2 {
  double f = 0;
  double fu = 0, fv = 0;
  double fuu = 0, fuv = 0, fvv = 0;

  Jet2() = default;
  Jet2(double c) : f(c) {}
  static Jet2 var_u(double value) {
    Jet2 j(value);
    j.fu = 1;
    return j;
  }
  static Jet2 var_v(double value) {
    Jet2 j(value);
    j.fv = 1;
    return j;
  }

  Jet2 operator-() const {
    Jet2 r;
    r.f = -f; r.fu = -fu; r.fv = -fv; r.fuu = -fuu; r.fuv = -fuv; r.fvv = -fvv;
    return r;
  }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.f = a.f + b.f;
  r.fu = a.fu + b.fu; r.fv = a.fv + b.fv;
  r.fuu = a.fuu + b.fuu; r.fuv = a.fuv + b.fuv; r.fvv = a.fvv + b.fvv;
  return r;
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return a + (-b); }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.f = a.f * b.f;
  r.fu = a.fu * b.f + a.f * b.fu;
  r.fv = a.fv * b.f + a.f * b.fv;
  r.fuu = a.fuu * b.f + 2 * a.fu * b.fu + a.f * b.fuu;
  r.fuv = a.fuv * b.f + a.fu * b.fv + a.fv * b.fu + a.f * b.fuv;
  r.fvv = a.fvv * b.f + 2 * a.fv * b.fv + a.f * b.fvv;
  return r;
}
inline Jet2 operator+(const Jet2& a, double c) { return a + Jet2(c); }
inline Jet2 operator+(double c, const Jet2& a) { return a + Jet2(c); }
inline Jet2 operator-(const Jet2& a, double c) { return a - Jet2(c); }
inline Jet2 operator-(double c, const Jet2& a) { return Jet2(c) - a; }
inline Jet2 operator*(const Jet2& a, double c) { return a * Jet2(c); }
inline Jet2 operator*(double c, const Jet2& a) { return a * Jet2(c); }

// Composition with a scalar function g: returns g(a) given g, g', g'' at a.f.
inline Jet2 chain(const Jet2& a, double g, double g1, double g2) {
  Jet2 r;
  r.f = g;
  r.fu = g1 * a.fu;
  r.fv = g1 * a.fv;
  r.fuu = g2 * a.fu * a.fu + g1 * a.fuu;
  r.fuv = g2 * a.fu * a.fv + g1 * a.fuv;
  r.fvv = g2 * a.fv * a.fv + g1 * a.fvv;
  return r;
}

inline Jet2 inv(const Jet2& a) {
  double i = 1.0 / a.f;
  return chain(a, i, -i * i, 2 * i * i * i);
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inv(b); }
inline Jet2 operator/(const Jet2& a, double c) { return a * (1.0 / c); }
inline Jet2 operator/(double c, const Jet2& a) { return Jet2(c) * inv(a); }

inline Jet2 sqrt(const Jet2& a) {
  double s = std::sqrt(a.f);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.f));
}
inline Jet2 exp(const Jet2& a) {
  double e = std::exp(a.f);
  return chain(a, e, e, e);
}
inline Jet2 log(const Jet2& a) { return chain(a, std::log(a.f), 1.0 / a.f, -1.0 / (a.f * a.f)); }
inline Jet2 sin(const Jet2& a) { return chain(a, std::sin(a.f), std::cos(a.f), -std::sin(a.f)); }
inline Jet2 cos(const Jet2& a) { return chain(a, std::cos(a.f), -std::sin(a.f), -std::cos(a.f)); }
inline Jet2 sinh(const Jet2& a) { return chain(a, std::sinh(a.f), std::cosh(a.f), std::sinh(a.f)); }
inline Jet2 cosh(const Jet2& a) { return chain(a, std::cosh(a.f), std::sinh(a.f), std::cosh(a.f)); }
inline Jet2 tanh(const Jet2& a) {
  double t = std::tanh(a.f), s = 1 - t * t;
  return chain(a, t, s, -2 * t * s);
}
inline Jet2 atan(const Jet2& a) {
  double d = 1 + a.f * a.f;
  return chain(a, std::atan(a.f), 1.0 / d, -2 * a.f / (d * d));
}
inline Jet2 acos_safe(const Jet2& a) {
  // clamped away from +-1 by the caller's geometry
  double c = a.f, s = std::sqrt(std::max(1e-300, 1 - c * c));
  return chain(a, std::acos(c), -1.0 / s, -c / (s * s * s));
}

// C^2 quintic step as a jet; 0 below 0, 1 above 1.
inline Jet2 smoothstep5(const Jet2& s) {
  if (s.f <= 0) return Jet2(0.0);
  if (s.f >= 1) return Jet2(1.0);
  double x = s.f;
  double g = x * x * x * (10 + x * (-15 + 6 * x));
  double g1 = 30 * x * x * (1 - x) * (1 - x);
  double g2 = 60 * x * (1 - x) * (1 - 2 * x);
  return chain(s, g, g1, g2);
}

struct JVec3 {
  Jet2 x, y, z;

  JVec3() = default;
  JVec3(const Jet2& xx, const Jet2& yy, const Jet2& zz) : x(xx), y(yy), z(zz) {}
  explicit JVec3(const Vec3& v) : x(v.x), y(v.y), z(v.z) {}

  Jet2& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  const Jet2& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 value() const { return {x.f, y.f, z.f}; }
  Vec3 du() const { return {x.fu, y.fu, z.fu}; }
  Vec3 dv() const { return {x.fv, y.fv, z.fv}; }
  Vec3 duu() const { return {x.fuu, y.fuu, z.fuu}; }
  Vec3 duv() const { return {x.fuv, y.fuv, z.fuv}; }
  Vec3 dvv() const { return {x.fvv, y.fvv, z.fvv}; }
};

inline JVec3 operator+(const JVec3& a, const JVec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline JVec3 operator-(const JVec3& a, const JVec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline JVec3 operator*(const JVec3& a, const Jet2& s) { return {a.x * s, a.y * s, a.z * s}; }
inline JVec3 operator*(const Jet2& s, const JVec3& a) { return a * s; }
inline JVec3 operator*(const JVec3& a, double s) { return a * Jet2(s); }
inline JVec3 operator/(const JVec3& a, const Jet2& s) { return {a.x / s, a.y / s, a.z / s}; }
inline Jet2 dot(const JVec3& a, const JVec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline JVec3 cross(const JVec3& a, const JVec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Jet2 norm2(const JVec3& a) { return dot(a, a); }
inline Jet2 norm(const JVec3& a) { return sqrt(norm2(a)); }

}  // namespace wlab
