#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "cipshare/dual.hpp"
#include "cipshare/lp.hpp"

namespace cipshare {

// One knapsack-cover inequality  sum_{i not in S} a_ij^S x_i >= r_j^S  with
// its dense clipped row cached.
struct KcCut {
  std::size_t user = 0;
  FacilitySet subset;
  double residual = 0.0;
  std::vector<double> row;
};

inline KcCut make_kc_cut(const Instance& inst, std::size_t j, const FacilitySet& S) {
  KcCut cut;
  cut.user = j;
  cut.subset = S;
  cut.residual = residual_requirement(inst, j, S);
  cut.row.resize(inst.num_facilities());
  for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
    cut.row[i] = clipped_contribution(inst, i, j, S, cut.residual);
  }
  return cut;
}

// r_j^S - sum_{i not in S} a_ij^S x_i, on the original data.
inline double kc_violation(const Instance& inst, std::size_t j, const FacilitySet& S,
                           std::span<const double> x) {
  const double residual = residual_requirement(inst, j, S);
  if (residual <= 0.0) return 0.0;
  double lhs = 0.0;
  for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
    lhs += clipped_contribution(inst, i, j, S, residual) * x[i];
  }
  return residual - lhs;
}

// Active cut set of the cutting-plane loop.
class RestrictedMaster {
 public:
  explicit RestrictedMaster(const Instance& inst) : inst_(&inst) {}

  // Returns false for a duplicate (j, S) or a trivial (r_j^S = 0) cut.
  bool add(std::size_t j, const FacilitySet& S) {
    DualKey key{j, S};
    if (!seen_.insert(key).second) return false;
    KcCut cut = make_kc_cut(*inst_, j, S);
    if (cut.residual <= 0.0) return false;
    cuts_.push_back(std::move(cut));
    return true;
  }

  const std::vector<KcCut>& cuts() const { return cuts_; }
  std::size_t size() const { return cuts_.size(); }
  const Instance& instance() const { return *inst_; }

 private:
  struct KeyHash {
    std::size_t operator()(const DualKey& k) const noexcept {
      return FacilitySetHash{}(k.subset) * 31 + k.user;
    }
  };

  const Instance* inst_;
  std::vector<KcCut> cuts_;
  std::unordered_set<DualKey, KeyHash> seen_;
};

struct MasterSolution {
  std::vector<double> x;
  std::vector<double> duals;  // one per active cut
  double objective = 0.0;
};

inline MasterSolution solve_restricted_master(const RestrictedMaster& master,
                                              std::span<const double> costs,
                                              const LpOptions& lp_opt = {}) {
  if (master.size() == 0) {
    throw Error(ErrorCode::kUnboundedOrInfeasibleLP, "restricted master has no constraints");
  }
  CoveringLp lp(std::vector<double>(costs.begin(), costs.end()));
  for (const KcCut& cut : master.cuts()) lp.add_row(cut.row, cut.residual);
  LpResult res = solve_covering_lp(lp, lp_opt);
  return MasterSolution{std::move(res.x), std::move(res.duals), res.objective};
}

enum class SeparationMethod { kKnapsackDp, kPrefix, kSupportEnumeration, kNoneFound };

inline std::string_view to_string(SeparationMethod m) {
  switch (m) {
    case SeparationMethod::kKnapsackDp: return "dp-exact-on-rounded";
    case SeparationMethod::kPrefix: return "x-order-prefix";
    case SeparationMethod::kSupportEnumeration: return "support-enumeration";
    case SeparationMethod::kNoneFound: return "none-found";
  }
  return "?";
}

struct SeparationResult {
  std::size_t user = 0;
  FacilitySet subset;
  double violation = 0.0;  // measured on the original data
  SeparationMethod method = SeparationMethod::kNoneFound;

  bool found() const { return method != SeparationMethod::kNoneFound; }
};

struct SeparationOptions {
  double tol = 1e-7;
  // Largest rounded requirement the knapsack table may hold.
  std::int64_t dp_cap = 512;
  // Candidate sets up to this size are also checked by exhaustive
  // enumeration on the original data whenever the rounded DP finds nothing.
  std::size_t enumeration_limit = 16;
};

namespace detail {

// Facilities worth putting in S: a violated inequality never gains from a
// built facility with x_i = 0 (removing it from S strictly increases the
// violation), and facilities with a_ij = 0 do not change the inequality.
inline std::vector<std::size_t> separation_candidates(const Instance& inst, std::size_t j,
                                                      std::span<const double> x) {
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
    if (x[i] > 1e-12 && inst.contribution(i, j) > 0.0) cand.push_back(i);
  }
  return cand;
}

}  // namespace detail

// Finds a knapsack-cover inequality of user j violated by x.
//
// On K-scaled integer data (contributions rounded up, requirement down), for
// every reachable residual rho the subset S with rounded weight exactly
// R - rho maximizing sum_{i in S} min(a_i, rho) x_i is found by dynamic
// programming; that S minimizes the left-hand side among inequalities with
// residual rho, so the best rho gives the most violated inequality of the
// rounded instance. Every candidate S is re-scored on the original data.
inline SeparationResult separate_user(const Instance& inst, std::size_t j, std::span<const double> x,
                                      double scale_k, const SeparationOptions& opt = {}) {
  inst.check_user(j);
  SeparationResult best;
  best.user = j;

  const std::vector<std::size_t> cand = detail::separation_candidates(inst, j, x);
  const std::size_t k = cand.size();
  const std::int64_t total = scale_down(inst.requirement(j), scale_k);
  if (total > opt.dp_cap) {
    throw Error(ErrorCode::kScaleOverflow, "K*r_j = " + std::to_string(total) +
                                               " exceeds the knapsack table cap " +
                                               std::to_string(opt.dp_cap));
  }

  auto consider = [&](const FacilitySet& S, SeparationMethod method) {
    const double v = kc_violation(inst, j, S, x);
    if (v > best.violation) {
      best.subset = S;
      best.violation = v;
      best.method = method;
    }
  };

  if (total >= 1 && k > 0) {
    const std::size_t cap = static_cast<std::size_t>(total);
    std::vector<std::int64_t> weight(k);
    for (std::size_t t = 0; t < k; ++t) weight[t] = scale_up(inst.contribution(cand[t], j), scale_k);

    // Subset sums below R, i.e. rounded residuals rho = R - s >= 1.
    std::vector<char> reach(cap, 0);
    reach[0] = 1;
    for (std::size_t t = 0; t < k; ++t) {
      const auto w = static_cast<std::size_t>(weight[t]);
      if (w == 0 || w >= cap) continue;
      for (std::size_t s = cap; s-- > w;) {
        if (reach[s - w]) reach[s] = 1;
      }
    }

    constexpr double kUnreachable = -std::numeric_limits<double>::infinity();
    std::unordered_set<FacilitySet, FacilitySetHash> tried;
    std::vector<double> value(k);
    std::vector<double> dp;
    std::vector<char> take;
    for (std::size_t s = 0; s < cap; ++s) {
      if (!reach[s]) continue;
      const auto rho = static_cast<std::int64_t>(cap - s);
      for (std::size_t t = 0; t < k; ++t) {
        value[t] = static_cast<double>(std::min(weight[t], rho)) * x[cand[t]];
      }
      // dp[w]: best value of a subset with rounded weight exactly w.
      dp.assign(s + 1, kUnreachable);
      take.assign(k * (s + 1), 0);
      dp[0] = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        const auto w = static_cast<std::size_t>(weight[t]);
        if (w > s) continue;
        for (std::size_t c = s + 1; c-- > w;) {
          if (dp[c - w] == kUnreachable) continue;
          const double cand_val = dp[c - w] + value[t];
          if (cand_val > dp[c]) {
            dp[c] = cand_val;
            take[t * (s + 1) + c] = 1;
          }
        }
      }
      if (dp[s] == kUnreachable) continue;
      FacilitySet S;
      std::size_t c = s;
      for (std::size_t t = k; t-- > 0;) {
        if (take[t * (s + 1) + c]) {
          S.insert(cand[t]);
          c -= static_cast<std::size_t>(weight[t]);
        }
      }
      if (tried.insert(S).second) consider(S, SeparationMethod::kKnapsackDp);
    }
  }

  // Prefixes of the candidates sorted by decreasing x_i, scored on the
  // original data. The prefix {i : x_i >= 1} alone guarantees that an x with
  // no violated cut, truncated at 1, satisfies the plain covering rows.
  {
    std::vector<std::size_t> by_x = cand;
    std::stable_sort(by_x.begin(), by_x.end(), [&](std::size_t p, std::size_t q) { return x[p] > x[q]; });
    FacilitySet S;
    consider(S, SeparationMethod::kPrefix);
    for (std::size_t i : by_x) {
      S.insert(i);
      if (covered_by(inst, j, S) >= inst.requirement(j)) break;
      consider(S, SeparationMethod::kPrefix);
    }
  }

  if (best.violation > opt.tol) return best;

  if (k <= opt.enumeration_limit) {
    const double r = inst.requirement(j);
    std::vector<double> a(k), xv(k);
    for (std::size_t t = 0; t < k; ++t) {
      a[t] = inst.contribution(cand[t], j);
      xv[t] = x[cand[t]];
    }
    double best_v = best.violation;
    std::uint64_t best_mask = 0;
    bool improved = false;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      double built = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        if ((mask >> t) & 1U) built += a[t];
      }
      const double rho = r - built;
      if (rho <= 0.0) continue;
      double lhs = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        if (!((mask >> t) & 1U)) lhs += std::min(a[t], rho) * xv[t];
      }
      if (rho - lhs > best_v + 1e-15) {
        best_v = rho - lhs;
        best_mask = mask;
        improved = true;
      }
    }
    if (improved) {
      FacilitySet S;
      for (std::size_t t = 0; t < k; ++t) {
        if ((best_mask >> t) & 1U) S.insert(cand[t]);
      }
      consider(S, SeparationMethod::kSupportEnumeration);
    }
  }

  if (best.violation <= opt.tol) {
    best.method = SeparationMethod::kNoneFound;
  }
  return best;
}

struct CutLogEntry {
  std::size_t round = 0;
  std::size_t user = 0;
  FacilitySet subset;
  double violation = 0.0;
};

struct ColumnGenerationOptions {
  double tol = 1e-7;
  double scale_k = 1000.0;
  // When K*r_j would overflow the knapsack table, use the largest scale that
  // fits instead of failing.
  bool adaptive_scale = true;
  SeparationOptions separation;
  // 0 = 10 * n * m rounds.
  std::size_t max_rounds = 0;
  LpOptions lp;
};

struct ColumnGenerationResult {
  std::vector<double> x;
  DualSolution dual;
  double objective = 0.0;
  std::size_t rounds = 0;
  std::size_t cuts = 0;
  bool converged = false;  // false means the round cap was hit
  std::vector<CutLogEntry> cut_log;
};

// Solves KC-LP restricted to `users` by cutting planes on the primal, with
// the optimal dual read off the final restricted master.
inline ColumnGenerationResult column_generation_solve(const Instance& inst, const UserSet& users_in,
                                                      const ColumnGenerationOptions& opt = {}) {
  const UserSet users = normalize_users(inst, users_in);
  for (std::size_t j : users) {
    if (inst.total_coverage(j) < inst.requirement(j) - kCoverageTol) {
      throw Error(ErrorCode::kInfeasibleInstance, "user " + std::to_string(j) + " cannot be covered");
    }
  }
  ColumnGenerationResult out;
  out.x.assign(inst.num_facilities(), 0.0);
  if (users.empty()) {
    out.converged = true;
    return out;
  }

  RestrictedMaster master(inst);
  for (std::size_t j : users) master.add(j, FacilitySet{});

  const std::size_t max_rounds =
      opt.max_rounds > 0 ? opt.max_rounds : 10 * std::max<std::size_t>(1, inst.num_facilities() * users.size());
  SeparationOptions sep = opt.separation;
  sep.tol = opt.tol;

  MasterSolution sol;
  for (std::size_t round = 0;; ++round) {
    sol = solve_restricted_master(master, inst.costs(), opt.lp);
    out.rounds = round + 1;
    if (round >= max_rounds) break;
    std::size_t added = 0;
    for (std::size_t j : users) {
      double k = opt.scale_k;
      if (opt.adaptive_scale) {
        const double r = inst.requirement(j);
        if (scale_down(r, k) > sep.dp_cap) k = std::floor(static_cast<double>(sep.dp_cap) / r);
        k = std::max(k, 1.0);
        while (k > 1.0 && scale_down(r, k) > sep.dp_cap) k -= 1.0;
      }
      SeparationResult cut = separate_user(inst, j, sol.x, k, sep);
      if (!cut.found()) continue;
      if (master.add(j, cut.subset)) {
        ++added;
        out.cut_log.push_back(CutLogEntry{round, j, cut.subset, cut.violation});
      }
    }
    if (added == 0) {
      out.converged = true;
      break;
    }
  }

  out.x = sol.x;
  out.objective = sol.objective;
  out.cuts = master.size();
  for (std::size_t q = 0; q < master.size(); ++q) {
    if (sol.duals[q] > 0.0) {
      out.dual.add(master.cuts()[q].user, master.cuts()[q].subset, sol.duals[q]);
    }
  }
  return out;
}

inline void write_cut_log(std::ostream& os, const std::vector<CutLogEntry>& log) {
  os << "# round\tuser\tsubset\tviolation\n";
  char buf[64];
  for (const CutLogEntry& e : log) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.violation);
    os << e.round << '\t' << e.user << '\t' << e.subset.to_string() << '\t' << buf << '\n';
  }
}

// min c.x  s.t.  A x >= r (users in scope),  0 <= x <= 1.
inline double naive_lp_value(const Instance& inst, const UserSet& users_in, const LpOptions& lp_opt = {}) {
  const UserSet users = normalize_users(inst, users_in);
  const std::size_t n = inst.num_facilities();
  CoveringLp lp(std::vector<double>(inst.costs().begin(), inst.costs().end()));
  std::vector<double> row(n);
  for (std::size_t j : users) {
    for (std::size_t i = 0; i < n; ++i) row[i] = inst.contribution(i, j);
    lp.add_row(row, inst.requirement(j));
  }
  if (lp.num_rows() == 0) return 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    row[i] = -1.0;
    lp.add_row(row, -1.0);
  }
  return solve_covering_lp(lp, lp_opt).objective;
}

}  // namespace cipshare
