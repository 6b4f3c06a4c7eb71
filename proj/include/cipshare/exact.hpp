#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <vector>

#include "cipshare/kc_lp.hpp"

namespace cipshare {

struct ExactOptions {
  std::size_t ip_size_cap = 25;     // max facilities for branch-and-bound
  std::size_t audit_user_cap = 12;  // max users for 2^|U| core audits
  std::size_t kc_enum_cap = 15;     // max facilities for full KC enumeration
  double tol = 1e-9;
  LpOptions lp;
};

namespace detail {

struct BbNode {
  double bound = 0.0;
  std::size_t depth = 0;
  std::size_t id = 0;
  std::vector<signed char> fixed;  // -1 free, 0 closed, 1 opened
};

struct BbNodeOrder {
  bool operator()(const BbNode& a, const BbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

// Opens facilities in decreasing LP value until every user is covered, then
// drops redundant ones, most expensive first.
inline std::optional<FacilitySet> round_lp_point(const Instance& inst, const UserSet& users,
                                                 const std::vector<signed char>& fixed,
                                                 const std::vector<double>& x_full) {
  const std::size_t n = inst.num_facilities();
  FacilitySet open;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i] == 1) open.insert(i);
    else if (fixed[i] == -1) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x_full[a] > x_full[b]; });
  for (std::size_t i : order) {
    if (is_feasible_for(inst, open, users)) break;
    open.insert(i);
  }
  if (!is_feasible_for(inst, open, users)) return std::nullopt;
  std::vector<std::size_t> opened = open.indices();
  std::stable_sort(opened.begin(), opened.end(),
                   [&](std::size_t a, std::size_t b) { return inst.cost(a) > inst.cost(b); });
  for (std::size_t i : opened) {
    if (fixed[i] == 1) continue;
    FacilitySet trial = open;
    trial.erase(i);
    if (is_feasible_for(inst, trial, users)) open = std::move(trial);
  }
  return open;
}

}  // namespace detail

// Minimum-cost selection covering `users`, by best-first branch-and-bound on
// the binary variables. Node bounds come from the LP relaxation with
// 0 <= x <= 1 and contributions clipped to each user's remaining requirement
// (the knapsack-cover inequality for the facilities fixed open). Among
// equal-cost optima the lexicographically smallest index set is returned.
inline Selection solve_ip_exact(const Instance& inst, const UserSet& users_in, const ExactOptions& opt = {}) {
  const std::size_t n = inst.num_facilities();
  if (n > opt.ip_size_cap) {
    throw Error(ErrorCode::kSizeCapExceeded,
                "n=" + std::to_string(n) + " exceeds the exact IP cap " + std::to_string(opt.ip_size_cap));
  }
  const UserSet users = normalize_users(inst, users_in);
  if (!is_feasible_for(inst, Selection::all(inst).opened, users)) {
    throw Error(ErrorCode::kInfeasibleInstance, "users cannot be covered by all facilities");
  }
  if (users.empty()) return Selection::of(inst, FacilitySet{});

  std::optional<FacilitySet> best_set;
  double best_cost = std::numeric_limits<double>::infinity();
  auto offer = [&](const FacilitySet& s) {
    double c = 0.0;
    s.for_each([&](std::size_t i) { c += inst.cost(i); });
    const double tie = opt.tol * std::max(1.0, std::abs(c));
    if (!best_set || c < best_cost - tie || (c <= best_cost + tie && s < *best_set)) {
      best_set = s;
      best_cost = std::min(best_cost, c);
    }
  };
  offer(Selection::all(inst).opened);

  std::priority_queue<detail::BbNode, std::vector<detail::BbNode>, detail::BbNodeOrder> open_nodes;
  std::size_t next_id = 0;
  open_nodes.push(detail::BbNode{0.0, 0, next_id++, std::vector<signed char>(n, -1)});

  std::vector<double> row;
  while (!open_nodes.empty()) {
    detail::BbNode node = open_nodes.top();
    open_nodes.pop();
    const double prune_at = best_cost + opt.tol * std::max(1.0, std::abs(best_cost));
    if (node.bound > prune_at) continue;

    // Node relaxation over the free facilities.
    double fixed_cost = 0.0;
    FacilitySet opened;
    std::vector<std::size_t> free_vars;
    for (std::size_t i = 0; i < n; ++i) {
      if (node.fixed[i] == 1) {
        fixed_cost += inst.cost(i);
        opened.insert(i);
      } else if (node.fixed[i] == -1) {
        free_vars.push_back(i);
      }
    }
    std::vector<std::pair<std::size_t, double>> active;  // (user, remaining requirement)
    bool infeasible = false;
    for (std::size_t j : users) {
      const double rem = inst.requirement(j) - covered_by(inst, j, opened);
      if (rem <= kCoverageTol) continue;
      double avail = 0.0;
      for (std::size_t i : free_vars) avail += inst.contribution(i, j);
      if (avail < rem - kCoverageTol) {
        infeasible = true;
        break;
      }
      active.emplace_back(j, rem);
    }
    if (infeasible) continue;
    if (active.empty()) {
      offer(opened);
      continue;
    }

    std::vector<double> c_free(free_vars.size());
    for (std::size_t t = 0; t < free_vars.size(); ++t) c_free[t] = inst.cost(free_vars[t]);
    CoveringLp lp(c_free);
    row.assign(free_vars.size(), 0.0);
    for (const auto& [j, rem] : active) {
      for (std::size_t t = 0; t < free_vars.size(); ++t) {
        row[t] = std::min(inst.contribution(free_vars[t], j), rem);
      }
      lp.add_row(row, rem);
    }
    for (std::size_t t = 0; t < free_vars.size(); ++t) {
      std::fill(row.begin(), row.end(), 0.0);
      row[t] = -1.0;
      lp.add_row(row, -1.0);
    }
    const LpResult res = solve_covering_lp(lp, opt.lp);
    const double bound = fixed_cost + res.objective;
    if (bound > best_cost + opt.tol * std::max(1.0, std::abs(best_cost))) continue;

    std::vector<double> x_full(n, 0.0);
    std::size_t branch_var = n;
    double most_fractional = 1e-7;
    for (std::size_t t = 0; t < free_vars.size(); ++t) {
      const double v = std::clamp(res.x[t], 0.0, 1.0);
      x_full[free_vars[t]] = v;
      const double frac = std::min(v, 1.0 - v);
      if (frac > most_fractional) {
        most_fractional = frac;
        branch_var = free_vars[t];
      }
    }
    if (auto heur = detail::round_lp_point(inst, users, node.fixed, x_full)) offer(*heur);

    if (branch_var == n) {
      // Integral relaxation. Ties may still hide a lexicographically smaller
      // optimum below this node, so keep branching while the bound allows.
      FacilitySet s = opened;
      for (std::size_t i : free_vars) {
        if (x_full[i] > 0.5) s.insert(i);
      }
      if (is_feasible_for(inst, s, users)) offer(s);
      if (free_vars.empty()) continue;
      branch_var = free_vars.front();
    }
    for (signed char val : {static_cast<signed char>(1), static_cast<signed char>(0)}) {
      auto child = node.fixed;
      child[branch_var] = val;
      open_nodes.push(detail::BbNode{bound, node.depth + 1, next_id++, std::move(child)});
    }
  }
  return Selection::of(inst, *best_set);
}

// c*_J: minimum cost of serving only the users in J.
inline double subset_cost(const Instance& inst, const UserSet& users, const ExactOptions& opt = {}) {
  if (users.empty()) return 0.0;
  return solve_ip_exact(inst, users, opt).cost;
}

// c*_J for every J in 2^users, indexed by bitmask over `users`.
class SubsetCostTable {
 public:
  SubsetCostTable(const Instance& inst, const UserSet& users_in, const ExactOptions& opt = {})
      : users_(normalize_users(inst, users_in)) {
    if (users_.size() > opt.audit_user_cap || users_.size() >= 63) {
      throw Error(ErrorCode::kSizeCapExceeded, "|U|=" + std::to_string(users_.size()) +
                                                   " exceeds the audit cap " +
                                                   std::to_string(opt.audit_user_cap));
    }
    const std::uint64_t count = std::uint64_t{1} << users_.size();
    costs_.assign(count, 0.0);
    for (std::uint64_t mask = 1; mask < count; ++mask) {
      costs_[mask] = subset_cost(inst, users_from_mask(users_, mask), opt);
    }
  }

  const UserSet& users() const { return users_; }
  double cost(std::uint64_t mask) const { return costs_[mask]; }
  std::uint64_t num_subsets() const { return costs_.size(); }

 private:
  UserSet users_;
  std::vector<double> costs_;
};

struct CoreAuditRecord {
  std::uint64_t mask = 0;
  UserSet users;
  double subset_cost = 0.0;  // c*_J
  double paid = 0.0;         // sum of shares over J
  double slack = 0.0;        // c*_J - paid
};

struct CoreAudit {
  std::vector<CoreAuditRecord> records;  // bitmask-ascending, nonempty J only
  std::size_t worst = 0;                 // index of the smallest slack
  double tol = 0.0;
  bool passed = true;

  const CoreAuditRecord& worst_record() const { return records.at(worst); }
};

inline CoreAudit verify_core(const CostShares& shares, const SubsetCostTable& table, double tol = 1e-6) {
  CoreAudit audit;
  audit.tol = tol;
  const UserSet& users = table.users();
  for (std::uint64_t mask = 1; mask < table.num_subsets(); ++mask) {
    CoreAuditRecord rec;
    rec.mask = mask;
    rec.users = users_from_mask(users, mask);
    rec.subset_cost = table.cost(mask);
    for (std::size_t j : rec.users) rec.paid += shares.shares.at(j);
    rec.slack = rec.subset_cost - rec.paid;
    if (audit.records.empty() || rec.slack < audit.records[audit.worst].slack) {
      audit.worst = audit.records.size();
    }
    if (rec.slack < -tol) audit.passed = false;
    audit.records.push_back(std::move(rec));
  }
  return audit;
}

// Checks sum_{j in J} xi_j <= c*_J for every nonempty J within the shares'
// user set.
inline CoreAudit verify_core(const Instance& inst, const CostShares& shares, double tol = 1e-6,
                             const ExactOptions& opt = {}) {
  return verify_core(shares, SubsetCostTable(inst, shares.users, opt), tol);
}

inline void write_core_audit(std::ostream& os, const CoreAudit& audit) {
  os << "# mask\tusers\tsubset_cost\tpaid\tslack\n";
  char buf[128];
  for (const CoreAuditRecord& r : audit.records) {
    std::string users = "{";
    for (std::size_t t = 0; t < r.users.size(); ++t) {
      if (t) users += ',';
      users += std::to_string(r.users[t]);
    }
    users += '}';
    std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t%.17g", r.subset_cost, r.paid, r.slack);
    os << r.mask << '\t' << users << '\t' << buf << '\n';
  }
  if (!audit.records.empty()) {
    os << "# worst mask " << audit.worst_record().mask << ", " << (audit.passed ? "PASS" : "FAIL")
       << " at tol " << audit.tol << '\n';
  }
}

struct KcLpExactResult {
  double objective = 0.0;
  std::vector<double> x;
  DualSolution dual;
  std::size_t num_constraints = 0;
};

// KC-LP with every nontrivial knapsack-cover inequality written out. Subsets
// are drawn from each user's support {i : a_ij > 0}; adding a facility with
// a_ij = 0 to S reproduces the same inequality.
inline KcLpExactResult kc_lp_exact(const Instance& inst, const UserSet& users_in, const ExactOptions& opt = {}) {
  const std::size_t n = inst.num_facilities();
  if (n > opt.kc_enum_cap) {
    throw Error(ErrorCode::kSizeCapExceeded,
                "n=" + std::to_string(n) + " exceeds the KC enumeration cap " + std::to_string(opt.kc_enum_cap));
  }
  const UserSet users = normalize_users(inst, users_in);
  KcLpExactResult out;
  out.x.assign(n, 0.0);
  if (users.empty()) return out;

  CoveringLp lp(std::vector<double>(inst.costs().begin(), inst.costs().end()));
  std::vector<DualKey> keys;
  for (std::size_t j : users) {
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n; ++i) {
      if (inst.contribution(i, j) > 0.0) support.push_back(i);
    }
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << support.size()); ++mask) {
      FacilitySet S;
      for (std::size_t t = 0; t < support.size(); ++t) {
        if ((mask >> t) & 1U) S.insert(support[t]);
      }
      KcCut cut = make_kc_cut(inst, j, S);
      if (cut.residual <= 0.0) continue;
      lp.add_row(cut.row, cut.residual);
      keys.push_back(DualKey{j, std::move(S)});
    }
  }
  LpResult res = solve_covering_lp(lp, opt.lp);
  out.objective = res.objective;
  out.x = std::move(res.x);
  out.num_constraints = keys.size();
  for (std::size_t q = 0; q < keys.size(); ++q) {
    if (res.duals[q] > 0.0) out.dual.add(keys[q].user, keys[q].subset, res.duals[q]);
  }
  return out;
}

struct IntegralityGap {
  double ip = 0.0;
  double naive_lp = 0.0;
  double kc_lp = 0.0;
  double naive_gap = 1.0;  // ip / naive_lp
  double kc_gap = 1.0;     // ip / kc_lp
};

// KC-LP comes from full enumeration when n is within the enumeration cap and
// from column generation otherwise.
inline IntegralityGap integrality_gap(const Instance& inst, const ExactOptions& opt = {},
                                      const ColumnGenerationOptions& cg = {}) {
  const UserSet users = all_users(inst);
  IntegralityGap g;
  g.ip = solve_ip_exact(inst, users, opt).cost;
  g.naive_lp = naive_lp_value(inst, users, opt.lp);
  g.kc_lp = inst.num_facilities() <= opt.kc_enum_cap ? kc_lp_exact(inst, users, opt).objective
                                                      : column_generation_solve(inst, users, cg).objective;
  g.naive_gap = g.naive_lp > 0.0 ? g.ip / g.naive_lp : 1.0;
  g.kc_gap = g.kc_lp > 0.0 ? g.ip / g.kc_lp : 1.0;
  return g;
}

}  // namespace cipshare
