#include <algorithm>
#include <cmath>

#include "knpemi/linalg.hpp"

namespace knpemi {

namespace {

std::vector<double> inverse_diagonal(const CsrMatrix& a) {
  std::vector<double> d = a.diagonal_values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) {
      throw NumericalError("AMG: nonpositive diagonal entry at row " + std::to_string(i) +
                           "; matrix is not suitable for aggregation");
    }
    d[i] = 1.0 / d[i];
  }
  return d;
}

/// Symmetric strength graph: j is strongly connected to i if
/// max(-a_ij, -a_ji) >= theta * sqrt(a_ii a_jj). Positive couplings (the
/// intra-element entries of DG operators) never count as strong.
struct StrengthGraph {
  std::vector<Index> ptr;
  std::vector<Index> adj;
};

StrengthGraph strength_graph(const CsrMatrix& a, const CsrMatrix& at, std::span<const double> diag, double theta) {
  const Index n = a.rows();
  StrengthGraph s;
  s.ptr.assign(n + 1, 0);
  std::vector<Index> cols;
  for (Index i = 0; i < n; ++i) {
    cols.clear();
    auto scan = [&](const CsrMatrix& m) {
      for (Index k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
        const Index j = m.col()[k];
        if (j == i) continue;
        if (-m.values()[k] >= theta * std::sqrt(diag[i] * diag[j])) cols.push_back(j);
      }
    };
    scan(a);
    scan(at);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    s.adj.insert(s.adj.end(), cols.begin(), cols.end());
    s.ptr[i + 1] = static_cast<Index>(s.adj.size());
  }
  return s;
}

/// Standard three-pass aggregation. Nodes without strong neighbours stay
/// unaggregated (-1).
std::vector<Index> aggregate(const StrengthGraph& s, Index n, Index& count) {
  std::vector<Index> agg(n, -1);
  count = 0;
  // pass 1: seeds whose whole strong neighbourhood is free
  for (Index i = 0; i < n; ++i) {
    if (agg[i] != -1 || s.ptr[i] == s.ptr[i + 1]) continue;
    bool free = true;
    for (Index k = s.ptr[i]; k < s.ptr[i + 1] && free; ++k) free = agg[s.adj[k]] == -1;
    if (!free) continue;
    agg[i] = count;
    for (Index k = s.ptr[i]; k < s.ptr[i + 1]; ++k) agg[s.adj[k]] = count;
    ++count;
  }
  // pass 2: attach leftovers to a neighbouring aggregate from pass 1
  std::vector<Index> pass1 = agg;
  for (Index i = 0; i < n; ++i) {
    if (agg[i] != -1) continue;
    for (Index k = s.ptr[i]; k < s.ptr[i + 1]; ++k) {
      if (pass1[s.adj[k]] != -1) {
        agg[i] = pass1[s.adj[k]];
        break;
      }
    }
  }
  // pass 3: remaining connected nodes form new aggregates with free neighbours
  for (Index i = 0; i < n; ++i) {
    if (agg[i] != -1 || s.ptr[i] == s.ptr[i + 1]) continue;
    agg[i] = count;
    for (Index k = s.ptr[i]; k < s.ptr[i + 1]; ++k) {
      if (agg[s.adj[k]] == -1) agg[s.adj[k]] = count;
    }
    ++count;
  }
  return agg;
}

/// Inverts the consecutive nb x nb diagonal blocks of a; empty if any block is singular.
std::vector<double> inverse_blocks(const CsrMatrix& a, int nb) {
  const Index n = a.rows();
  const std::size_t bs = static_cast<std::size_t>(nb) * nb;
  std::vector<double> inv(static_cast<std::size_t>(n / nb) * bs, 0.0);
  std::vector<double> m(bs), e(bs);
  for (Index blk = 0; blk < n / nb; ++blk) {
    std::fill(m.begin(), m.end(), 0.0);
    for (int i = 0; i < nb; ++i) {
      const Index row = blk * nb + i;
      for (Index k = a.row_ptr()[row]; k < a.row_ptr()[row + 1]; ++k) {
        const Index c = a.col()[k] - blk * nb;
        if (c >= 0 && c < nb) m[i * nb + c] = a.values()[k];
      }
    }
    // Gauss-Jordan with partial pivoting
    std::fill(e.begin(), e.end(), 0.0);
    for (int i = 0; i < nb; ++i) e[i * nb + i] = 1.0;
    for (int p = 0; p < nb; ++p) {
      int piv = p;
      for (int r = p + 1; r < nb; ++r) {
        if (std::abs(m[r * nb + p]) > std::abs(m[piv * nb + p])) piv = r;
      }
      if (!(std::abs(m[piv * nb + p]) > 0.0)) return {};
      for (int j = 0; j < nb; ++j) {
        std::swap(m[p * nb + j], m[piv * nb + j]);
        std::swap(e[p * nb + j], e[piv * nb + j]);
      }
      const double d = 1.0 / m[p * nb + p];
      for (int j = 0; j < nb; ++j) {
        m[p * nb + j] *= d;
        e[p * nb + j] *= d;
      }
      for (int r = 0; r < nb; ++r) {
        if (r == p) continue;
        const double f = m[r * nb + p];
        if (f == 0.0) continue;
        for (int j = 0; j < nb; ++j) {
          m[r * nb + j] -= f * m[p * nb + j];
          e[r * nb + j] -= f * e[p * nb + j];
        }
      }
    }
    std::copy(e.begin(), e.end(), inv.begin() + static_cast<std::ptrdiff_t>(blk * bs));
  }
  return inv;
}

/// Power-iteration estimate of the spectral radius of B^{-1} A for block inverse B^{-1}.
double block_spectral_radius(const CsrMatrix& a, std::span<const double> inv, int nb, int iterations) {
  const Index n = a.rows();
  std::vector<double> v(n), w(n), u(n);
  for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 2.0 * i);
  const double nv = norm2(v);
  for (double& x : v) x /= nv;
  double rho = 0.0;
  const std::size_t bs = static_cast<std::size_t>(nb) * nb;
  for (int it = 0; it < std::max(1, iterations); ++it) {
    a.multiply(v, u);
    for (Index blk = 0; blk < n / nb; ++blk) {
      for (int i = 0; i < nb; ++i) {
        double d = 0.0;
        for (int j = 0; j < nb; ++j) d += inv[blk * bs + i * nb + j] * u[blk * nb + j];
        w[blk * nb + i] = d;
      }
    }
    const double nw = norm2(w);
    if (nw == 0.0) return rho;
    rho = nw;
    for (Index i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  return rho;
}

}  // namespace

const char* to_string(AmgSmoother s) {
  switch (s) {
    case AmgSmoother::Jacobi: return "jacobi";
    case AmgSmoother::GaussSeidel: return "gauss-seidel";
    case AmgSmoother::BlockJacobi: return "block-jacobi";
  }
  return "unknown";
}

double estimate_spectral_radius(const CsrMatrix& a, std::span<const double> inv_diag, int iterations) {
  const Index n = a.rows();
  if (n == 0) return 0.0;
  std::vector<double> v(n), w(n);
  for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 2.0 * i);
  double nv = norm2(v);
  for (double& x : v) x /= nv;
  double rho = 0.0;
  for (int it = 0; it < std::max(1, iterations); ++it) {
    a.multiply(v, w);
    for (Index i = 0; i < n; ++i) w[i] *= inv_diag[i];
    const double nw = norm2(w);
    if (nw == 0.0) return rho;
    rho = nw;
    for (Index i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  return rho;
}

AmgHierarchy amg_build(const CsrMatrix& fine, const AmgParams& params) {
  if (fine.rows() != fine.cols()) throw NumericalError("AMG: matrix must be square");
  AmgHierarchy h;
  h.params_ = params;
  CsrMatrix a = fine;
  while (true) {
    AmgLevel lvl;
    lvl.inv_diag = inverse_diagonal(a);
    const double rho = estimate_spectral_radius(a, lvl.inv_diag, params.power_iterations);
    lvl.omega = rho > 0.0 ? 4.0 / (3.0 * rho) : 1.0;
    const Index n = a.rows();
    if (params.smoother == AmgSmoother::BlockJacobi && params.block_size > 1 && h.levels_.empty() &&
        n % params.block_size == 0) {
      lvl.inv_block = inverse_blocks(a, params.block_size);
      if (!lvl.inv_block.empty()) {
        lvl.block = params.block_size;
        const double brho = block_spectral_radius(a, lvl.inv_block, lvl.block, params.power_iterations);
        lvl.omega = brho > 0.0 ? 4.0 / (3.0 * brho) : 1.0;
      }
    }
    const bool last = static_cast<int>(h.levels_.size()) + 1 >= params.max_levels || n <= params.coarse_size;
    if (last) {
      lvl.a = std::move(a);
      h.levels_.push_back(std::move(lvl));
      break;
    }
    const CsrMatrix at = a.transpose();
    std::vector<double> diag = a.diagonal_values();
    const double theta = h.levels_.empty() && params.fine_threshold >= 0.0 ? params.fine_threshold : params.strength_threshold;
    const StrengthGraph s = strength_graph(a, at, diag, theta);
    Index nagg = 0;
    const std::vector<Index> agg = aggregate(s, n, nagg);
    if (nagg == 0 || nagg >= n) {
      lvl.a = std::move(a);
      h.levels_.push_back(std::move(lvl));
      break;  // coarsening stalled
    }
    std::vector<Index> agg_size(nagg, 0);
    for (Index g : agg) {
      if (g >= 0) ++agg_size[g];
    }
    // tentative prolongator with normalized constant columns
    std::vector<Index> trp(n + 1, 0), tcol;
    std::vector<double> tval;
    for (Index i = 0; i < n; ++i) {
      if (agg[i] >= 0) {
        tcol.push_back(agg[i]);
        tval.push_back(1.0 / std::sqrt(static_cast<double>(agg_size[agg[i]])));
      }
      trp[i + 1] = static_cast<Index>(tcol.size());
    }
    const CsrMatrix tentative(n, nagg, std::move(trp), std::move(tcol), std::move(tval));
    // filtered operator: weak off-diagonals lumped into the diagonal
    std::vector<Index> frp(n + 1, 0), fcol;
    std::vector<double> fval;
    std::vector<double> fdiag(n, 0.0);
    for (Index i = 0; i < n; ++i) {
      double lumped = 0.0;
      const Index sb = s.ptr[i], se = s.ptr[i + 1];
      for (Index k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
        const Index j = a.col()[k];
        const double v = a.values()[k];
        if (j == i) {
          lumped += v;
          continue;
        }
        if (std::binary_search(s.adj.begin() + sb, s.adj.begin() + se, j)) {
          fcol.push_back(j);
          fval.push_back(v);
        } else {
          lumped += v;
        }
      }
      // diagonal inserted in sorted position
      auto row_begin = fcol.begin() + frp[i];
      auto pos = std::lower_bound(row_begin, fcol.end(), i);
      const auto off = pos - fcol.begin();
      fcol.insert(pos, i);
      fval.insert(fval.begin() + off, lumped);
      fdiag[i] = lumped;
      frp[i + 1] = static_cast<Index>(fcol.size());
    }
    const CsrMatrix filtered(n, n, std::move(frp), std::move(fcol), std::move(fval));
    std::vector<double> finv(n);
    for (Index i = 0; i < n; ++i) finv[i] = fdiag[i] != 0.0 ? 1.0 / fdiag[i] : 0.0;
    const double frho = estimate_spectral_radius(filtered, finv, params.power_iterations);
    const double pomega = frho > 0.0 ? 4.0 / (3.0 * frho) : 0.0;
    CsrMatrix ap = multiply(filtered, tentative);
    {
      auto vals = ap.values();
      const auto rp = ap.row_ptr();
      for (Index i = 0; i < n; ++i) {
        for (Index k = rp[i]; k < rp[i + 1]; ++k) vals[k] *= -pomega * finv[i];
      }
    }
    lvl.p = tentative.add(ap);
    lvl.r = lvl.p.transpose();
    CsrMatrix coarse = multiply(lvl.r, multiply(a, lvl.p));
    lvl.a = std::move(a);
    h.levels_.push_back(std::move(lvl));
    a = std::move(coarse);
  }
  const AmgLevel& coarsest = h.levels_.back();
  if (coarsest.a.rows() <= params.coarse_size) h.coarse_lu_.emplace(coarsest.a);
  const std::size_t nl = h.levels_.size();
  h.work_r_.resize(nl);
  h.work_b_.resize(nl);
  h.work_x_.resize(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    const std::size_t n = static_cast<std::size_t>(h.levels_[l].a.rows());
    h.work_r_[l].resize(n);
    h.work_b_[l].resize(n);
    h.work_x_[l].resize(n);
  }
  return h;
}

double AmgHierarchy::operator_complexity() const {
  if (levels_.empty()) return 0.0;
  double total = 0.0;
  for (const AmgLevel& l : levels_) total += static_cast<double>(l.a.nnz());
  return total / static_cast<double>(levels_.front().a.nnz());
}

void AmgHierarchy::smooth(int l, std::span<const double> b, std::span<double> x, int sweeps, bool forward) const {
  const AmgLevel& lvl = levels_[l];
  std::vector<double>& r = work_r_[l];
  if (params_.smoother == AmgSmoother::GaussSeidel) {
    const auto rp = lvl.a.row_ptr();
    const auto col = lvl.a.col();
    const auto val = lvl.a.values();
    const Index n = lvl.a.rows();
    auto relax = [&](Index i) {
      double s = b[i];
      for (Index k = rp[i]; k < rp[i + 1]; ++k) {
        if (col[k] != i) s -= val[k] * x[col[k]];
      }
      x[i] = s * lvl.inv_diag[i];
    };
    for (int s = 0; s < sweeps; ++s) {
      if (forward) {
        for (Index i = 0; i < n; ++i) relax(i);
      } else {
        for (Index i = n - 1; i >= 0; --i) relax(i);
      }
    }
    return;
  }
  for (int s = 0; s < sweeps; ++s) {
    lvl.a.residual(b, x, r);
    if (lvl.block > 1) {
      const int nb = lvl.block;
      const std::size_t bs = static_cast<std::size_t>(nb) * nb;
      for (std::size_t blk = 0; blk * nb < x.size(); ++blk) {
        const double* inv = lvl.inv_block.data() + blk * bs;
        const double* rb = r.data() + blk * nb;
        for (int i = 0; i < nb; ++i) {
          double d = 0.0;
          for (int j = 0; j < nb; ++j) d += inv[i * nb + j] * rb[j];
          x[blk * nb + i] += lvl.omega * d;
        }
      }
    } else {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += lvl.omega * lvl.inv_diag[i] * r[i];
    }
  }
}

void AmgHierarchy::cycle(int l, std::span<const double> b, std::span<double> x) const {
  const AmgLevel& lvl = levels_[l];
  std::fill(x.begin(), x.end(), 0.0);
  if (l + 1 == num_levels()) {
    if (coarse_lu_) {
      coarse_lu_->solve(b, x);
    } else {
      smooth(l, b, x, params_.coarse_sweeps, true);
    }
    return;
  }
  smooth(l, b, x, params_.pre_sweeps, true);
  std::vector<double>& r = work_r_[l];
  lvl.a.residual(b, x, r);
  std::vector<double>& bc = work_b_[l + 1];
  std::vector<double>& xc = work_x_[l + 1];
  lvl.r.multiply(r, bc);
  cycle(l + 1, bc, xc);
  const auto rp = lvl.p.row_ptr();
  const auto pc = lvl.p.col();
  const auto pv = lvl.p.values();
  for (Index i = 0; i < lvl.p.rows(); ++i) {
    double s = 0.0;
    for (Index k = rp[i]; k < rp[i + 1]; ++k) s += pv[k] * xc[pc[k]];
    x[i] += s;
  }
  smooth(l, b, x, params_.post_sweeps, false);
}

void AmgHierarchy::apply(std::span<const double> r, std::span<double> z) const {
  if (levels_.empty()) throw NumericalError("AMG: empty hierarchy");
  cycle(0, r, z);
}

std::unique_ptr<AmgHierarchy> shifted_emi_preconditioner(const CsrMatrix& a, const CsrMatrix& mass, double alpha,
                                                         const AmgParams& params) {
  if (!(alpha > 0.0)) throw ConfigError("EMI preconditioner shift must be positive");
  return std::make_unique<AmgHierarchy>(amg_build(a.add(mass, alpha), params));
}

}  // namespace knpemi
