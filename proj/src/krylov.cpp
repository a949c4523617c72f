#include <chrono>
#include <cmath>

#include "knpemi/linalg.hpp"

namespace knpemi {

void IdentityPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  std::copy(r.begin(), r.end(), z.begin());
}

JacobiPreconditioner::JacobiPreconditioner(const CsrMatrix& a) : inv_diag_(a.diagonal_values()) {
  for (double& d : inv_diag_) {
    if (d == 0.0) throw NumericalError("Jacobi preconditioner: zero diagonal entry");
    d = 1.0 / d;
  }
}

void JacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void check_shapes(const SparseSystem& s, std::span<double> x) {
  if (s.matrix.rows() != s.matrix.cols()) throw NumericalError("solver: matrix must be square");
  if (static_cast<Index>(s.rhs.size()) != s.size() || static_cast<Index>(x.size()) != s.size()) {
    throw NumericalError("solver: vector size does not match the matrix");
  }
  if (s.nullspace && static_cast<Index>(s.nullspace->size()) != s.size()) {
    throw NumericalError("solver: nullspace size does not match the matrix");
  }
}

}  // namespace

SolveReport cg_nullspace(const SparseSystem& system, const Preconditioner& m, std::span<double> x,
                         const KrylovOptions& opts) {
  check_shapes(system, x);
  const auto t0 = Clock::now();
  const CsrMatrix& a = system.matrix;
  const std::size_t n = x.size();
  const std::vector<double>* ns = system.nullspace ? &*system.nullspace : nullptr;
  auto project = [ns](std::span<double> v) {
    if (ns) project_out(v, *ns);
  };

  SolveReport rep;
  std::vector<double> b(system.rhs);
  project(b);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    rep.seconds = seconds_since(t0);
    return rep;
  }
  project(x);
  std::vector<double> r(n), z(n), p(n), q(n);
  a.residual(b, x, r);
  project(r);
  double rnorm = norm2(r);
  const double target = opts.rtol * bnorm;
  if (rnorm <= target) {
    rep.residual = rnorm / bnorm;
    rep.converged = true;
    rep.seconds = seconds_since(t0);
    return rep;
  }
  m.apply(r, z);
  project(z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    a.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0) || !std::isfinite(pq)) {
      rep.iterations = it;
      break;  // operator not positive on the current direction
    }
    const double alpha = rz / pq;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    project(r);
    rnorm = norm2(r);
    rep.iterations = it;
    if (rnorm <= target) break;
    m.apply(r, z);
    project(z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  project(x);
  a.residual(b, x, r);
  project(r);
  rep.residual = norm2(r) / bnorm;
  rep.converged = rep.residual <= opts.rtol;
  rep.seconds = seconds_since(t0);
  return rep;
}

SolveReport gmres(const SparseSystem& system, const Preconditioner& m, std::span<double> x,
                  const KrylovOptions& opts) {
  check_shapes(system, x);
  const auto t0 = Clock::now();
  const CsrMatrix& a = system.matrix;
  const std::size_t n = x.size();
  const int restart = std::max(1, opts.restart);
  SolveReport rep;
  const double bnorm = norm2(system.rhs);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    rep.seconds = seconds_since(t0);
    return rep;
  }
  const double target = opts.rtol * bnorm;
  std::vector<double> r(n), w(n), z(n), u(n);
  a.residual(system.rhs, x, r);
  double beta = norm2(r);
  std::vector<std::vector<double>> v(restart + 1, std::vector<double>(n));
  std::vector<double> h(static_cast<std::size_t>(restart + 1) * restart, 0.0);
  auto H = [&](int i, int j) -> double& { return h[static_cast<std::size_t>(i) * restart + j]; };
  std::vector<double> cs(restart), sn(restart), g(restart + 1), y(restart);
  int total = 0;
  while (beta > target && total < opts.max_iterations) {
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    bool breakdown = false;
    for (; k < restart && total < opts.max_iterations; ++k) {
      m.apply(v[k], z);
      a.multiply(z, w);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = dot(w, v[i]);
        axpy(-H(i, k), v[i], w);
      }
      const double hn = norm2(w);
      H(k + 1, k) = hn;
      if (hn > 0.0) {
        for (std::size_t i = 0; i < n; ++i) v[k + 1][i] = w[i] / hn;
      } else {
        breakdown = true;
      }
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      if (denom == 0.0) {
        breakdown = true;
        break;
      }
      cs[k] = H(k, k) / denom;
      sn[k] = H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++total;
      if (std::abs(g[k + 1]) <= target || breakdown) {
        ++k;
        break;
      }
    }
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    std::fill(u.begin(), u.end(), 0.0);
    for (int j = 0; j < k; ++j) axpy(y[j], v[j], u);
    m.apply(u, z);
    axpy(1.0, z, x);
    a.residual(system.rhs, x, r);
    const double new_beta = norm2(r);
    if (!std::isfinite(new_beta)) break;
    const bool stagnated = new_beta >= beta * (1.0 - 1e-14);
    beta = new_beta;
    if (breakdown || (stagnated && k == restart)) break;
  }
  rep.iterations = total;
  rep.residual = beta / bnorm;
  rep.converged = beta <= target;
  rep.seconds = seconds_since(t0);
  return rep;
}

}  // namespace knpemi
