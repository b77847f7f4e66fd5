#pragma once

// Central finite differences of arbitrary order with a Richardson table.

#include <cmath>
#include <vector>

#include "bgpoly/errors.hpp"

namespace bgpoly::numdiff {

/// n-th central difference quotient with half-step offsets: sum_i (-1)^i C(n,i) g(x + (n/2 - i) h) / h^n.
template <class G>
double central_difference(G&& g, double x, int n, double h) {
  double s = 0.0;
  double binom = 1.0;
  for (int i = 0; i <= n; ++i) {
    s += ((i % 2 == 0) ? 1.0 : -1.0) * binom * g(x + (0.5 * n - i) * h);
    binom = binom * (n - i) / (i + 1);
  }
  return s / std::pow(h, n);
}

/// n-th derivative of g at x. Steps h, h/2, ..., h/2^{levels-1}; each Richardson
/// level removes the next even power of h. levels = 2 is the usual single correction.
template <class G>
double derivative(G&& g, double x, int n, double h, int levels = 2) {
  if (n < 0) throw RangeError("derivative: negative order");
  if (n == 0) return g(x);
  if (levels < 1) levels = 1;
  std::vector<double> row(levels);
  double step = h;
  for (int i = 0; i < levels; ++i, step *= 0.5) row[i] = central_difference(g, x, n, step);
  double factor = 4.0;
  for (int l = 1; l < levels; ++l, factor *= 4.0)
    for (int i = levels - 1; i >= l; --i) row[i] = (factor * row[i] - row[i - 1]) / (factor - 1.0);
  return row[levels - 1];
}

}  // namespace bgpoly::numdiff
