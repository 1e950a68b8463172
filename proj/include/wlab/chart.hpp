#pragma once

#include <cstddef>
#include <string>

#include "wlab/error.hpp"

namespace wlab {

// How a chart's coordinates relate to the surface piece it parametrizes.
//   rectangle         generic (u,v) rectangle
//   log_polar_annulus (t, theta), t = log r of a planar annulus coordinate,
//                     theta periodic
//   periodic_cylinder (t, theta) with theta periodic (optionally t too)
enum class DomainKind { rectangle, log_polar_annulus, periodic_cylinder };

const char* domain_kind_name(DomainKind k);
DomainKind domain_kind_from_name(const std::string& s);

struct ChartGrid {
  DomainKind kind = DomainKind::rectangle;
  double u0 = 0, u1 = 1;
  double v0 = 0, v1 = 1;
  int nu = 8, nv = 8;           // nodes per axis, >= 8
  bool periodic_u = false;
  bool periodic_v = false;

  void validate() const {
    if (nu < 8 || nv < 8)
      fail(ErrorCode::invalid_argument, "ChartGrid: resolution must be >= 8 per axis");
    if (!(u1 > u0) || !(v1 > v0))
      fail(ErrorCode::invalid_argument, "ChartGrid: bounds must be nondegenerate");
  }

  double du() const { return (u1 - u0) / (periodic_u ? nu : nu - 1); }
  double dv() const { return (v1 - v0) / (periodic_v ? nv : nv - 1); }
  double u(int i) const { return u0 + i * du(); }
  double v(int j) const { return v0 + j * dv(); }
  std::size_t size() const { return std::size_t(nu) * std::size_t(nv); }
  std::size_t idx(int i, int j) const { return std::size_t(i) * nv + j; }

  // Trapezoidal node weight with periodic wrap.
  double quad_weight(int i, int j) const {
    double wu = periodic_u ? 1.0 : ((i == 0 || i == nu - 1) ? 0.5 : 1.0);
    double wv = periodic_v ? 1.0 : ((j == 0 || j == nv - 1) ? 0.5 : 1.0);
    return wu * wv * du() * dv();
  }

  // Index shifted along u with optional wrap; returns false if off-grid.
  bool shift_u(int i, int d, int& out) const {
    int t = i + d;
    if (periodic_u) {
      t %= nu;
      if (t < 0) t += nu;
      out = t;
      return true;
    }
    if (t < 0 || t >= nu) return false;
    out = t;
    return true;
  }
  bool shift_v(int j, int d, int& out) const {
    int t = j + d;
    if (periodic_v) {
      t %= nv;
      if (t < 0) t += nv;
      out = t;
      return true;
    }
    if (t < 0 || t >= nv) return false;
    out = t;
    return true;
  }

  ChartGrid refined(int factor = 2) const {
    ChartGrid g = *this;
    g.nu = periodic_u ? nu * factor : (nu - 1) * factor + 1;
    g.nv = periodic_v ? nv * factor : (nv - 1) * factor + 1;
    return g;
  }

  ChartGrid coarsened() const {
    ChartGrid g = *this;
    g.nu = periodic_u ? nu / 2 : (nu - 1) / 2 + 1;
    g.nv = periodic_v ? nv / 2 : (nv - 1) / 2 + 1;
    return g;
  }
  bool coarsenable() const {
    bool ou = periodic_u ? nu % 2 == 0 : (nu - 1) % 2 == 0;
    bool ov = periodic_v ? nv % 2 == 0 : (nv - 1) % 2 == 0;
    ChartGrid c = coarsened();
    return ou && ov && c.nu >= 8 && c.nv >= 8;
  }
};

}  // namespace wlab
