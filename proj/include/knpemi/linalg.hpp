#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "knpemi/sparse.hpp"

namespace knpemi {

/// z = M^{-1} r for some fixed linear operator M^{-1}.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  void apply(std::span<const double> r, std::span<double> z) const override;
};

class JacobiPreconditioner final : public Preconditioner {
 public:
  explicit JacobiPreconditioner(const CsrMatrix& a);
  void apply(std::span<const double> r, std::span<double> z) const override;

 private:
  std::vector<double> inv_diag_;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // final ||b - Ax|| / ||b||
  bool converged = false;
  double seconds = 0.0;
};

struct KrylovOptions {
  double rtol = 1e-5;
  int max_iterations = 1000;
  int restart = 30;  // GMRes only
  friend bool operator==(const KrylovOptions&, const KrylovOptions&) = default;
};

/// Preconditioned CG for symmetric positive semidefinite systems. With a
/// nullspace vector the rhs, residuals and iterates are kept orthogonal to it.
/// `x` holds the initial guess on entry and the solution on exit.
SolveReport cg_nullspace(const SparseSystem& system, const Preconditioner& m, std::span<double> x,
                         const KrylovOptions& opts);

/// Right-preconditioned restarted GMRes with modified Gram-Schmidt.
SolveReport gmres(const SparseSystem& system, const Preconditioner& m, std::span<double> x,
                  const KrylovOptions& opts);

enum class AmgSmoother {
  Jacobi,               // damped pointwise Jacobi
  GaussSeidel,          // forward sweeps before, backward sweeps after the coarse correction
  BlockJacobi,          // damped Jacobi on consecutive blocks of block_size rows (finest level only)
};

const char* to_string(AmgSmoother s);

struct AmgParams {
  double strength_threshold = 0.08;
  double fine_threshold = 0.4;  // finest level; < 0 uses strength_threshold
  int max_levels = 25;
  Index coarse_size = 200;
  int pre_sweeps = 1;
  int post_sweeps = 1;
  int coarse_sweeps = 20;  // used only when coarsening stalls above coarse_size
  int power_iterations = 20;
  AmgSmoother smoother = AmgSmoother::Jacobi;
  int block_size = 1;  // BlockJacobi only
  friend bool operator==(const AmgParams&, const AmgParams&) = default;
};

struct AmgLevel {
  CsrMatrix a;
  CsrMatrix p;   // prolongation to this level from the next coarser one
  CsrMatrix r;   // restriction, P^T
  std::vector<double> inv_diag;
  double omega = 0.0;  // weighted Jacobi damping
  int block = 1;       // > 1: inv_block holds inverted diagonal blocks
  std::vector<double> inv_block;
};

/// Smoothed-aggregation hierarchy with a constant near-nullspace.
class AmgHierarchy final : public Preconditioner {
 public:
  AmgHierarchy() = default;

  /// One V-cycle from a zero initial guess.
  void apply(std::span<const double> r, std::span<double> z) const override;

  int num_levels() const { return static_cast<int>(levels_.size()); }
  const AmgLevel& level(int l) const { return levels_[l]; }
  Index level_size(int l) const { return levels_[l].a.rows(); }
  bool coarse_direct() const { return coarse_lu_.has_value(); }
  const AmgParams& params() const { return params_; }
  /// Operator complexity: sum of nnz over levels / nnz of the finest.
  double operator_complexity() const;

 private:
  friend AmgHierarchy amg_build(const CsrMatrix& a, const AmgParams& params);
  void cycle(int l, std::span<const double> b, std::span<double> x) const;
  void smooth(int l, std::span<const double> b, std::span<double> x, int sweeps, bool forward) const;

  AmgParams params_;
  std::vector<AmgLevel> levels_;
  std::optional<DenseLu> coarse_lu_;
  mutable std::vector<std::vector<double>> work_r_, work_b_, work_x_;
};

/// Throws NumericalError if the matrix is not square or has a nonpositive diagonal.
AmgHierarchy amg_build(const CsrMatrix& a, const AmgParams& params = {});

/// Deterministic power-iteration estimate of the spectral radius of D^{-1} A.
double estimate_spectral_radius(const CsrMatrix& a, std::span<const double> inv_diag, int iterations);

/// AMG on A + alpha M. Throws ConfigError if alpha <= 0.
std::unique_ptr<AmgHierarchy> shifted_emi_preconditioner(const CsrMatrix& a, const CsrMatrix& mass, double alpha,
                                                         const AmgParams& params = {});

}  // namespace knpemi
