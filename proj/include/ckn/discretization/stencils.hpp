#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace ckn::stencil {

/**
 * Finite-difference weights by Fornberg's recurrence.
 *
 * Returns w[k][j]: the weight of f(x[j]) in the approximation of the k-th
 * derivative at x0, for k = 0..max_order.
 */
inline std::vector<std::vector<double>> fornberg(double x0, std::span<const double> x, int max_order) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// A stencil applied at one node: f^(k)(x_i) ~ sum_j weight[j] f[first + j].
struct Row {
  std::size_t first = 0;
  std::vector<double> weight;
};

/**
 * Fourth-order rows for the derivative of order `order` (1 or 2) on a uniform
 * grid of `n` nodes with spacing h. Interior rows are the centred five-point
 * formulas; the two nodes next to each end use one-sided windows (five nodes
 * for the first derivative, six for the second).
 */
inline std::vector<Row> uniform_rows(std::size_t n, double h, int order) {
  const std::size_t width = order == 1 ? 5 : 6;
  std::vector<Row> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t first;
    std::size_t w;
    if (i >= 2 && i + 2 < n) {
      first = i - 2;
      w = 5;
    } else {
      w = width;
      first = i < 2 ? 0 : n - w;
    }
    std::vector<double> xs(w);
    for (std::size_t j = 0; j < w; ++j) xs[j] = (static_cast<double>(first + j) - static_cast<double>(i)) * h;
    rows[i].first = first;
    rows[i].weight = fornberg(0.0, xs, order)[order];
  }
  return rows;
}

}  // namespace ckn::stencil
