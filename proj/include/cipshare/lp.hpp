#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "cipshare/error.hpp"

namespace cipshare {

// min c.x  s.t.  G x >= h,  x >= 0, with c >= 0.
//
// Solved through its dual  max h.y  s.t.  G^T y <= c,  y >= 0, for which
// y = 0 is always a feasible starting vertex (c >= 0), so no phase one is
// needed. The primal x is read back from the simplex multipliers.
class CoveringLp {
 public:
  explicit CoveringLp(std::vector<double> costs) : costs_(std::move(costs)) {
    for (double c : costs_) {
      if (!(c >= 0.0)) throw Error(ErrorCode::kUnboundedOrInfeasibleLP, "costs must be >= 0");
    }
  }

  std::size_t add_row(std::span<const double> row, double rhs) {
    if (row.size() != costs_.size()) {
      throw Error(ErrorCode::kUnboundedOrInfeasibleLP, "row width does not match variable count");
    }
    coeffs_.insert(coeffs_.end(), row.begin(), row.end());
    rhs_.push_back(rhs);
    return rhs_.size() - 1;
  }

  std::size_t num_vars() const { return costs_.size(); }
  std::size_t num_rows() const { return rhs_.size(); }
  std::span<const double> costs() const { return costs_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(coeffs_).subspan(r * num_vars(), num_vars());
  }
  double rhs(std::size_t r) const { return rhs_[r]; }

 private:
  std::vector<double> costs_;
  std::vector<double> coeffs_;  // num_rows x num_vars, row-major
  std::vector<double> rhs_;
};

struct LpOptions {
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  int refactor_every = 64;
  // Dantzig pricing falls back to Bland's rule after this many consecutive
  // degenerate pivots, which rules out cycling.
  int degenerate_streak_for_bland = 30;
  long max_iterations = 0;  // 0 = automatic
};

struct LpResult {
  std::vector<double> x;      // primal solution, one per variable
  std::vector<double> duals;  // one per row, >= 0
  double objective = 0.0;
  long iterations = 0;
};

namespace detail {

// In-place Gauss-Jordan inverse with partial pivoting. Returns false when
// the matrix is numerically singular.
inline bool invert_dense(std::vector<double>& a, std::size_t n) {
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > best) {
        best = std::abs(a[r * n + col]);
        piv = r;
      }
    }
    if (best < 1e-14) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a[piv * n + c], a[col * n + c]);
        std::swap(inv[piv * n + c], inv[col * n + c]);
      }
    }
    const double d = a[col * n + col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col * n + c] /= d;
      inv[col * n + c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a[r * n + c] -= f * a[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }
  a.swap(inv);
  return true;
}

// Dense revised simplex over the dual  max h.y, G^T y + s = c.
class DualSimplex {
 public:
  DualSimplex(const CoveringLp& lp, const LpOptions& opt)
      : lp_(lp), opt_(opt), n_(lp.num_vars()), k_(lp.num_rows()) {}

  LpResult run() {
    basis_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) basis_[i] = k_ + i;
    binv_.assign(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) binv_[i * n_ + i] = 1.0;
    xb_.assign(lp_.costs().begin(), lp_.costs().end());

    const long max_iter = opt_.max_iterations > 0
                              ? opt_.max_iterations
                              : 200 * static_cast<long>(n_ + k_) + 10000;
    std::vector<double> pi(n_), alpha(n_);
    long iter = 0;
    int since_refactor = 0;
    int degenerate_streak = 0;
    for (;; ++iter) {
      if (iter >= max_iter) {
        throw Error(ErrorCode::kIterationLimit, "simplex iteration limit reached");
      }
      if (since_refactor >= opt_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
      compute_multipliers(pi);
      const bool bland = degenerate_streak >= opt_.degenerate_streak_for_bland;
      const std::size_t entering = choose_entering(pi, bland);
      if (entering == kNone) break;

      compute_column(entering, alpha);
      std::size_t leave = kNone;
      double theta = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < n_; ++b) {
        if (alpha[b] <= opt_.pivot_tol) continue;
        const double ratio = std::max(xb_[b], 0.0) / alpha[b];
        const bool better = leave == kNone || ratio < theta - 1e-12 ||
                            (ratio <= theta + 1e-12 && basis_[b] < basis_[leave]);
        if (better) {
          theta = ratio;
          leave = b;
        }
      }
      if (leave == kNone) {
        throw Error(ErrorCode::kUnboundedOrInfeasibleLP,
                    "covering LP is infeasible (its dual is unbounded)");
      }
      degenerate_streak = theta <= 1e-12 ? degenerate_streak + 1 : 0;
      pivot(entering, leave, alpha, theta);
      ++since_refactor;
    }
    refactor();
    compute_multipliers(pi);
    return extract(pi, iter);
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  double objective_coeff(std::size_t q) const { return q < k_ ? lp_.rhs(q) : 0.0; }

  void column(std::size_t q, std::vector<double>& out) const {
    if (q < k_) {
      auto r = lp_.row(q);
      std::copy(r.begin(), r.end(), out.begin());
    } else {
      std::fill(out.begin(), out.end(), 0.0);
      out[q - k_] = 1.0;
    }
  }

  void compute_multipliers(std::vector<double>& pi) const {
    std::fill(pi.begin(), pi.end(), 0.0);
    for (std::size_t b = 0; b < n_; ++b) {
      const double cb = objective_coeff(basis_[b]);
      if (cb == 0.0) continue;
      const double* row = &binv_[b * n_];
      for (std::size_t r = 0; r < n_; ++r) pi[r] += cb * row[r];
    }
  }

  double reduced_cost(std::size_t q, const std::vector<double>& pi) const {
    if (q >= k_) return -pi[q - k_];
    auto r = lp_.row(q);
    double dot = 0.0;
    for (std::size_t i = 0; i < n_; ++i) dot += pi[i] * r[i];
    return lp_.rhs(q) - dot;
  }

  std::size_t choose_entering(const std::vector<double>& pi, bool bland) const {
    std::vector<char> in_basis(k_ + n_, 0);
    for (std::size_t q : basis_) in_basis[q] = 1;
    std::size_t best = kNone;
    double best_d = opt_.optimality_tol;
    for (std::size_t q = 0; q < k_ + n_; ++q) {
      if (in_basis[q]) continue;
      const double d = reduced_cost(q, pi);
      if (d <= opt_.optimality_tol) continue;
      if (bland) return q;
      if (d > best_d) {
        best_d = d;
        best = q;
      }
    }
    return best;
  }

  void compute_column(std::size_t q, std::vector<double>& alpha) const {
    std::fill(alpha.begin(), alpha.end(), 0.0);
    if (q >= k_) {
      const std::size_t i = q - k_;
      for (std::size_t b = 0; b < n_; ++b) alpha[b] = binv_[b * n_ + i];
      return;
    }
    auto col = lp_.row(q);
    for (std::size_t b = 0; b < n_; ++b) {
      const double* row = &binv_[b * n_];
      double s = 0.0;
      for (std::size_t r = 0; r < n_; ++r) s += row[r] * col[r];
      alpha[b] = s;
    }
  }

  void pivot(std::size_t entering, std::size_t leave, const std::vector<double>& alpha, double theta) {
    for (std::size_t b = 0; b < n_; ++b) xb_[b] = std::max(xb_[b] - theta * alpha[b], 0.0);
    xb_[leave] = theta;
    const double p = alpha[leave];
    double* lrow = &binv_[leave * n_];
    for (std::size_t r = 0; r < n_; ++r) lrow[r] /= p;
    for (std::size_t b = 0; b < n_; ++b) {
      if (b == leave || alpha[b] == 0.0) continue;
      double* row = &binv_[b * n_];
      const double f = alpha[b];
      for (std::size_t r = 0; r < n_; ++r) row[r] -= f * lrow[r];
    }
    basis_[leave] = entering;
  }

  void refactor() {
    std::vector<double> bmat(n_ * n_, 0.0);
    std::vector<double> col(n_);
    for (std::size_t b = 0; b < n_; ++b) {
      column(basis_[b], col);
      for (std::size_t r = 0; r < n_; ++r) bmat[r * n_ + b] = col[r];
    }
    if (!invert_dense(bmat, n_)) return;  // keep the product-form inverse
    binv_.swap(bmat);
    auto c = lp_.costs();
    for (std::size_t b = 0; b < n_; ++b) {
      double s = 0.0;
      for (std::size_t r = 0; r < n_; ++r) s += binv_[b * n_ + r] * c[r];
      xb_[b] = s;
    }
  }

  LpResult extract(const std::vector<double>& pi, long iterations) const {
    LpResult res;
    res.iterations = iterations;
    res.x.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) res.x[i] = std::max(pi[i], 0.0);
    res.duals.assign(k_, 0.0);
    for (std::size_t b = 0; b < n_; ++b) {
      if (basis_[b] < k_) res.duals[basis_[b]] = std::max(xb_[b], 0.0);
    }
    double obj = 0.0;
    for (std::size_t q = 0; q < k_; ++q) obj += lp_.rhs(q) * res.duals[q];
    res.objective = obj;
    return res;
  }

  const CoveringLp& lp_;
  LpOptions opt_;
  std::size_t n_;
  std::size_t k_;
  std::vector<std::size_t> basis_;
  std::vector<double> binv_;
  std::vector<double> xb_;
};

}  // namespace detail

inline LpResult solve_covering_lp(const CoveringLp& lp, const LpOptions& opt = {}) {
  return detail::DualSimplex(lp, opt).run();
}

}  // namespace cipshare
