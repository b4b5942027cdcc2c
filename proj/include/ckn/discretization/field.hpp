#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ckn/discretization/grids.hpp"
#include "ckn/errors.hpp"

namespace ckn {

/// Real grid function; values are row-major (line node, sphere node).
template <class Grid>
class Field {
 public:
  using grid_type = Grid;

  Field() = default;
  explicit Field(std::shared_ptr<const Grid> grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}
  Field(std::shared_ptr<const Grid> grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) throw DomainError("Field: value count does not match the grid");
  }

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const& { return values_; }
  std::span<double> values() & { return values_; }
  // A span into a temporary would dangle.
  std::span<const double> values() const&& = delete;
  std::vector<double>& data() & { return values_; }
  const std::vector<double>& data() const& { return values_; }
  std::vector<double> data() && { return std::move(values_); }
  double& operator[](std::size_t j) { return values_[j]; }
  double operator[](std::size_t j) const { return values_[j]; }

  bool positive() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
  }

  /// New field on the same grid with f applied to every value.
  Field map(const std::function<double(double)>& f) const {
    Field out(grid_);
    std::transform(values_.begin(), values_.end(), out.values_.begin(), f);
    return out;
  }

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> values_;
};

using CylinderField = Field<CylinderGrid>;
using RadialField = Field<RadialGrid>;
using BoxField = Field<BoxGrid>;

/// A field on S^{d-1} alone.
using SphereField = Field<SphereGrid>;

/// Sample f(line coordinate, sphere node index) on a product grid.
template <class Grid>
Field<Grid> sample(std::shared_ptr<const Grid> grid, const std::function<double(double, std::size_t)>& f) {
  Field<Grid> out(grid);
  const std::size_t ns = grid->sphere.size();
  for (std::size_t i = 0; i < grid->line.size(); ++i)
    for (std::size_t j = 0; j < ns; ++j) out[i * ns + j] = f(grid->line.node(i), j);
  return out;
}

inline SphereField sample_sphere(std::shared_ptr<const SphereGrid> grid,
                                 const std::function<double(double, double)>& f) {
  SphereField out(grid);
  for (std::size_t j = 0; j < grid->size(); ++j) out[j] = f(grid->theta(j), grid->phi(j));
  return out;
}

}  // namespace ckn
