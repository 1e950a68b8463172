#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wlab/chart.hpp"
#include "wlab/fields.hpp"
#include "wlab/jet.hpp"
#include "wlab/linalg.hpp"

namespace wlab {

// Closed-form map with exact first/second derivatives via jets.
using AnalyticSampler = std::function<JVec3(double u, double v)>;

// Role metadata for atlas charts. Pure geometry: annulus charts advertise the
// axis/center their (t,theta) coordinates wind around; no graph identifiers.
struct ChartRole {
  std::string tag = "chart";   // "body" | "annulus" | "chart"
  Vec3 center{0, 0, 0};        // annulus: 3d point the chart is centered on
  Vec3 axis{0, 0, 1};          // annulus: winding axis
  bool quadrature = true;      // false: diagnostics only, weight 0 in atlas sums
};

struct DiscreteImmersion {
  ChartGrid chart;
  std::vector<Vec3> positions;   // row-major
  AnalyticSampler sampler;       // optional
  ChartRole role;
  std::string id;                // stable across a family's k-index

  bool has_sampler() const { return static_cast<bool>(sampler); }

  Vec3& at(int i, int j) { return positions[chart.idx(i, j)]; }
  const Vec3& at(int i, int j) const { return positions[chart.idx(i, j)]; }

  // Fills positions from the sampler.
  void resample();

  // Node jet: exact when a sampler is attached, otherwise second-order finite
  // differences in chart coordinates (one-sided at non-periodic boundaries).
  JVec3 node_jet(int i, int j) const;

  void validate() const;

  DiscreteImmersion refined(int factor = 2) const;   // requires sampler
  DiscreteImmersion coarsened() const;               // subsample, keeps sampler
  DiscreteImmersion without_sampler() const;
};

// A surface assembled from charts. `weights` are partition-of-unity factors on
// chart nodes (empty field = weight 1 everywhere). Quadrature-excluded charts
// participate in diagnostics only.
struct ImmersionAtlas {
  std::vector<DiscreteImmersion> charts;
  std::vector<ScalarField> weights;  // parallel to charts; may be empty fields

  DiscreteImmersion& chart(std::size_t c) { return charts[c]; }
  const DiscreteImmersion& chart(std::size_t c) const { return charts[c]; }
  std::size_t size() const { return charts.size(); }

  double weight(std::size_t c, int i, int j) const {
    if (c >= weights.size() || weights[c].values.empty()) return 1.0;
    return weights[c].at(i, j);
  }

  static ImmersionAtlas single(DiscreteImmersion imm) {
    ImmersionAtlas a;
    a.charts.push_back(std::move(imm));
    a.weights.emplace_back();
    return a;
  }

  ImmersionAtlas refined(int factor = 2) const;
  ImmersionAtlas without_samplers() const;
};

// JSON (chart metadata + row-major position arrays). Samplers do not survive
// a round trip; loaded immersions use finite differences.
void save_json(const ImmersionAtlas& atlas, const std::string& path);
ImmersionAtlas load_atlas_json(const std::string& path);

}  // namespace wlab
