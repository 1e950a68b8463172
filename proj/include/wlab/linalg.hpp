#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace wlab {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3() = default;
  Vec3(double xx, double yy, double zz) : x(xx), y(yy), z(zz) {}

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }
inline double dist(const Vec3& a, const Vec3& b) { return norm(a - b); }

struct Mat3 {
  // row-major
  std::array<double, 9> m{};

  static Mat3 identity() {
    Mat3 r;
    r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return r;
  }
  static Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[3 * i + j] = a[i] * b[j];
    return r;
  }
  double& operator()(int i, int j) { return m[3 * i + j]; }
  double operator()(int i, int j) const { return m[3 * i + j]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }
  Mat3 operator*(double s) const {
    Mat3 r = *this;
    for (auto& e : r.m) e *= s;
    return r;
  }
  Mat3 operator+(const Mat3& o) const {
    Mat3 r = *this;
    for (int i = 0; i < 9; ++i) r.m[i] += o.m[i];
    return r;
  }
  Mat3 operator-(const Mat3& o) const {
    Mat3 r = *this;
    for (int i = 0; i < 9; ++i) r.m[i] -= o.m[i];
    return r;
  }
  Mat3 transpose() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }
};

// Reflection through the plane orthogonal to unit vector u: I - 2 u u^T.
inline Mat3 householder(const Vec3& u) {
  return Mat3::identity() - Mat3::outer(u, u) * 2.0;
}

// Completion of a unit axis to a right-handed frame (e1, e2, axis); the
// canonical (x, y, z) frame when axis = e3.
inline void orthonormal_frame(const Vec3& axis, Vec3& e1, Vec3& e2) {
  Vec3 a = normalized(axis);
  Vec3 h = std::fabs(a.y) < 0.9 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
  e1 = normalized(cross(h, a));
  e2 = cross(a, e1);
}

// Symmetric 2x2 (metric) helper.
struct Sym2 {
  double a11 = 0, a12 = 0, a22 = 0;
  double det() const { return a11 * a22 - a12 * a12; }
  double trace() const { return a11 + a22; }
};

// Deterministic pairwise-tree reduction; keeps sums reproducible regardless of
// traversal chunking elsewhere.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}
inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double residual_rms = 0;
};

// Least-squares line y = slope*x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  std::size_t n = x.size();
  if (n < 2) return f;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
  double mx = sx / double(n), my = sy / double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double r2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - (f.slope * x[i] + f.intercept);
    r2 += e * e;
  }
  f.residual_rms = std::sqrt(r2 / double(n));
  return f;
}

// C^2 quintic step: 0 at s<=0, 1 at s>=1.
inline double smoothstep5(double s) {
  if (s <= 0) return 0;
  if (s >= 1) return 1;
  return s * s * s * (10 + s * (-15 + 6 * s));
}

}  // namespace wlab
