#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ckn/discretization/stencils.hpp"
#include "ckn/errors.hpp"

namespace ckn {

/// Uniform nodes x_i = start + i*h, i = 0..size-1, with fourth-order
/// differentiation rows and Gregory end-corrected trapezoid weights.
class LineGrid {
 public:
  LineGrid() = default;

  LineGrid(double start, double h, std::size_t size) : start_(start), h_(h), size_(size) {
    if (size < 7) throw DomainError("LineGrid: at least 7 nodes are required");
    if (!(h > 0.0)) throw DomainError("LineGrid: spacing must be positive");
    d1_ = stencil::uniform_rows(size, h, 1);
    d2_ = stencil::uniform_rows(size, h, 2);
    weights_.assign(size, h);
    if (size >= 8) {
      // Fourth-order Gregory end corrections (exact for cubics).
      constexpr double end[4] = {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0};
      for (std::size_t k = 0; k < 4; ++k) {
        weights_[k] = end[k] * h;
        weights_[size - 1 - k] = end[k] * h;
      }
    } else {
      weights_.front() = weights_.back() = 0.5 * h;
    }
  }

  /// Symmetric interval [-half_length, half_length].
  static LineGrid symmetric(double half_length, std::size_t size) {
    if (!(half_length > 0.0)) throw DomainError("LineGrid: half length must be positive");
    return LineGrid(-half_length, 2.0 * half_length / (static_cast<double>(size) - 1.0), size);
  }

  static LineGrid interval(double lo, double hi, std::size_t size) {
    if (!(hi > lo)) throw DomainError("LineGrid: empty interval");
    return LineGrid(lo, (hi - lo) / (static_cast<double>(size) - 1.0), size);
  }

  double start() const { return start_; }
  double end() const { return start_ + h_ * static_cast<double>(size_ - 1); }
  double spacing() const { return h_; }
  std::size_t size() const { return size_; }
  double node(std::size_t i) const { return start_ + h_ * static_cast<double>(i); }
  std::span<const double> weights() const { return weights_; }

  const std::vector<stencil::Row>& first_derivative_rows() const { return d1_; }
  const std::vector<stencil::Row>& second_derivative_rows() const { return d2_; }

  /// Apply a derivative to a strided line of values.
  void differentiate(int order, const double* in, std::size_t stride, double* out, std::size_t out_stride) const {
    const auto& rows = order == 1 ? d1_ : d2_;
    for (std::size_t i = 0; i < size_; ++i) {
      const auto& r = rows[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < r.weight.size(); ++j) acc += r.weight[j] * in[(r.first + j) * stride];
      out[i * out_stride] = acc;
    }
  }

 private:
  double start_ = 0.0;
  double h_ = 1.0;
  std::size_t size_ = 0;
  std::vector<double> weights_;
  std::vector<stencil::Row> d1_;
  std::vector<stencil::Row> d2_;
};

}  // namespace ckn
