#pragma once

#include <string>
#include <vector>

#include "wlab/chart.hpp"
#include "wlab/linalg.hpp"

namespace wlab {

struct ScalarField {
  ChartGrid chart;
  std::vector<double> values;  // row-major, chart.size()

  ScalarField() = default;
  explicit ScalarField(const ChartGrid& g) : chart(g), values(g.size(), 0.0) {}
  double& at(int i, int j) { return values[chart.idx(i, j)]; }
  double at(int i, int j) const { return values[chart.idx(i, j)]; }
  void validate() const {
    if (values.size() != chart.size())
      fail(ErrorCode::invalid_argument, "ScalarField: value grid does not match chart resolution");
  }
};

struct VectorField {
  ChartGrid chart;
  std::vector<Vec3> values;

  VectorField() = default;
  explicit VectorField(const ChartGrid& g) : chart(g), values(g.size()) {}
  Vec3& at(int i, int j) { return values[chart.idx(i, j)]; }
  const Vec3& at(int i, int j) const { return values[chart.idx(i, j)]; }
  void validate() const {
    if (values.size() != chart.size())
      fail(ErrorCode::invalid_argument, "VectorField: value grid does not match chart resolution");
  }
};

// CSV dump, rows (i, j, value...) per the field-dump interface.
void write_csv(const ScalarField& f, const std::string& path);
void write_csv(const VectorField& f, const std::string& path);

}  // namespace wlab
