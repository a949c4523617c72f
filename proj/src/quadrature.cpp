#include "knpemi/quadrature.hpp"

#include <array>
#include <numbers>

namespace knpemi {

LineRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: need at least one point");
  LineRule rule;
  rule.degree = 2 * n - 1;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    // ascending order on [0,1]
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

namespace {

void add_orbit3(TriangleRule& r, double a, double b, double w) {
  // barycentric (a, b, b) and permutations
  r.points.push_back({b, b});
  r.points.push_back({a, b});
  r.points.push_back({b, a});
  for (int k = 0; k < 3; ++k) r.weights.push_back(w);
}

void add_orbit6(TriangleRule& r, double a, double b, double c, double w) {
  const std::array<std::array<double, 3>, 6> perms{{{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}};
  for (const auto& l : perms) {
    r.points.push_back({l[1], l[2]});
    r.weights.push_back(w);
  }
}

TriangleRule scaled(TriangleRule r) {
  for (double& w : r.weights) w *= 0.5;
  return r;
}

}  // namespace

TriangleRule collapsed_gauss_rule(int degree) {
  const int n = std::max(1, (degree + 2) / 2 + 1);
  const LineRule g = gauss_legendre(n);
  TriangleRule r;
  r.degree = degree;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double u = g.points[i];
      const double v = g.points[j];
      r.points.push_back({u * (1.0 - v), v});
      r.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - v));
    }
  }
  return r;
}

TriangleRule triangle_rule(int degree) {
  TriangleRule r;
  if (degree <= 1) {
    r.points = {{1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {0.5};
    r.degree = 1;
    return r;
  }
  if (degree == 2) {
    add_orbit3(r, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
    r.degree = 2;
    return scaled(std::move(r));
  }
  if (degree <= 4) {
    add_orbit3(r, 0.108103018168070, 0.445948490915965, 0.223381589678011);
    add_orbit3(r, 0.816847572980459, 0.091576213509771, 0.109951743655322);
    r.degree = 4;
    return scaled(std::move(r));
  }
  if (degree == 5) {
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.225);
    add_orbit3(r, 0.059715871789770, 0.470142064105115, 0.132394152788506);
    add_orbit3(r, 0.797426985353087, 0.101286507323456, 0.125939180544827);
    r.degree = 5;
    return scaled(std::move(r));
  }
  if (degree == 6) {
    add_orbit3(r, 0.501426509658179, 0.249286745170910, 0.116786275726379);
    add_orbit3(r, 0.873821971016996, 0.063089014491502, 0.050844906370207);
    add_orbit6(r, 0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
    r.degree = 6;
    return scaled(std::move(r));
  }
  return collapsed_gauss_rule(degree);
}

}  // namespace knpemi
