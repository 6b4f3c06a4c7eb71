#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cipshare/residual.hpp"

namespace cipshare {

// Identifies one knapsack-cover inequality: user j with built set S.
struct DualKey {
  std::size_t user = 0;
  FacilitySet subset;

  friend bool operator==(const DualKey&, const DualKey&) = default;
  friend std::strong_ordering operator<=>(const DualKey& a, const DualKey& b) {
    if (auto c = a.user <=> b.user; c != 0) return c;
    return a.subset <=> b.subset;
  }
};

// Sparse assignment y_j^S >= 0 over knapsack-cover inequalities. Only
// strictly positive values are stored.
class DualSolution {
 public:
  using Map = std::map<DualKey, double>;

  // Accumulates `value` into y_j^S.
  void add(std::size_t user, const FacilitySet& subset, double value) {
    if (!(value >= 0.0)) {
      throw Error(ErrorCode::kInfeasibleDual, "dual values must be nonnegative");
    }
    if (value == 0.0) return;
    entries_[DualKey{user, subset}] += value;
  }

  double value(std::size_t user, const FacilitySet& subset) const {
    auto it = entries_.find(DualKey{user, subset});
    return it == entries_.end() ? 0.0 : it->second;
  }

  std::size_t support_size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Map& entries() const { return entries_; }

  DualSolution scaled(double factor) const {
    DualSolution out;
    for (const auto& [key, v] : entries_) out.add(key.user, key.subset, v * factor);
    return out;
  }

  void merge(const DualSolution& other) {
    for (const auto& [key, v] : other.entries_) add(key.user, key.subset, v);
  }

 private:
  Map entries_;
};

// Per-user payments together with the users they were computed for.
struct CostShares {
  std::vector<double> shares;  // one entry per user of the instance
  UserSet users;
  std::string method;

  double total() const {
    double s = 0.0;
    for (double x : shares) s += x;
    return s;
  }
};

// sum over support (restricted to `users` when given) of r_j^S y_j^S.
inline double dual_objective(const Instance& inst, const DualSolution& y,
                             const std::optional<UserSet>& users = std::nullopt) {
  std::vector<char> in_scope;
  if (users) {
    in_scope.assign(inst.num_users(), 0);
    for (std::size_t j : *users) {
      inst.check_user(j);
      in_scope[j] = 1;
    }
  }
  double obj = 0.0;
  for (const auto& [key, v] : y.entries()) {
    if (users && !in_scope[key.user]) continue;
    obj += residual_requirement(inst, key.user, key.subset) * v;
  }
  return obj;
}

// For every facility i: sum_j sum_{S not containing i} a_ij^S y_j^S.
inline std::vector<double> dual_load(const Instance& inst, const DualSolution& y) {
  std::vector<double> load(inst.num_facilities(), 0.0);
  for (const auto& [key, v] : y.entries()) {
    const double residual = residual_requirement(inst, key.user, key.subset);
    if (residual <= 0.0) continue;
    for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
      load[i] += clipped_contribution(inst, i, key.user, key.subset, residual) * v;
    }
  }
  return load;
}

// c_i minus the dual load on facility i; y is feasible iff every entry >= -tol.
inline std::vector<double> dual_feasibility_slack(const Instance& inst, const DualSolution& y) {
  std::vector<double> slack = dual_load(inst, y);
  for (std::size_t i = 0; i < slack.size(); ++i) slack[i] = inst.cost(i) - slack[i];
  return slack;
}

inline bool is_dual_feasible(const Instance& inst, const DualSolution& y, double tol = kCoverageTol) {
  for (double s : dual_feasibility_slack(inst, y)) {
    if (s < -tol) return false;
  }
  return true;
}

// xi_j = sum_S r_j^S y_j^S for j in `users`, zero elsewhere. Only a feasible
// dual guarantees the core property, so infeasible input is rejected.
inline CostShares induce_cost_shares(const Instance& inst, const DualSolution& y, const UserSet& users,
                                     std::string method = "dual", double tol = kCoverageTol) {
  const auto slack = dual_feasibility_slack(inst, y);
  for (std::size_t i = 0; i < slack.size(); ++i) {
    if (slack[i] < -tol) {
      throw Error(ErrorCode::kInfeasibleDual,
                  "facility " + std::to_string(i) + " is overloaded by " + std::to_string(-slack[i]));
    }
  }
  CostShares out;
  out.users = normalize_users(inst, users);
  out.method = std::move(method);
  out.shares.assign(inst.num_users(), 0.0);
  std::vector<char> in_scope(inst.num_users(), 0);
  for (std::size_t j : out.users) in_scope[j] = 1;
  for (const auto& [key, v] : y.entries()) {
    if (!in_scope[key.user]) continue;
    out.shares[key.user] += residual_requirement(inst, key.user, key.subset) * v;
  }
  return out;
}

// Fraction of the selection's cost the shares recover (beta); the
// price-of-fair-sharing is its reciprocal.
inline double recovery_ratio(const CostShares& shares, const Selection& sel) {
  if (!(sel.cost > 0.0)) {
    throw Error(ErrorCode::kZeroCostSolution, "recovery ratio undefined for a zero-cost selection");
  }
  return shares.total() / sel.cost;
}

}  // namespace cipshare
