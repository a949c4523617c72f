#pragma once

#include <vector>

#include "knpemi/common.hpp"

namespace knpemi {

/// Quadrature on the reference triangle {(0,0),(1,0),(0,1)}; weights sum to 1/2.
struct TriangleRule {
  std::vector<Point2> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Quadrature on [0,1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre with n points, mapped to [0,1]. Exact to degree 2n-1.
LineRule gauss_legendre(int n);

/// Smallest stored rule of at least the requested degree. Symmetric rules with
/// interior points and positive weights up to degree 6, collapsed Gauss beyond.
TriangleRule triangle_rule(int degree);

/// Conical-product rule exact to the requested degree (any degree >= 0).
TriangleRule collapsed_gauss_rule(int degree);

}  // namespace knpemi
