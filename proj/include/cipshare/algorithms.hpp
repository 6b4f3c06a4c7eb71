#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "cipshare/dual.hpp"

namespace cipshare {

// One dual-ascent step: y^{subset} was raised by `dual_increase`, after which
// `facility` became tight and was opened.
struct PdStep {
  FacilitySet subset;
  double dual_increase = 0.0;
  std::size_t facility = 0;
};

struct PdTrace {
  std::vector<PdStep> steps;
  Selection selection;
  DualSolution dual;
};

namespace detail {

constexpr std::size_t kNoFacility = std::numeric_limits<std::size_t>::max();

// Smallest time until some closed facility becomes tight when its load grows
// at `rate[i]`; ties go to the lowest index.
inline std::size_t first_tight(const Instance& inst, const FacilitySet& opened, const std::vector<double>& load,
                               const std::vector<double>& rate, double& delta) {
  std::size_t best = kNoFacility;
  delta = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
    if (opened.contains(i) || rate[i] <= 0.0) continue;
    const double t = std::max(inst.cost(i) - load[i], 0.0) / rate[i];
    if (t < delta) {
      delta = t;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

// Primal-dual algorithm for a single user's minimum-cost knapsack problem:
// raise y_j^X for the current selection X until a closed facility's dual
// constraint is tight, open it, and repeat until user j is covered. The cost
// of the result is at most twice the dual objective.
inline PdTrace min_cost_knapsack_pd(const Instance& inst, std::size_t j) {
  inst.check_user(j);
  if (inst.total_coverage(j) < inst.requirement(j) - kCoverageTol) {
    throw Error(ErrorCode::kInfeasibleUser, "user " + std::to_string(j) + " cannot be covered");
  }
  const std::size_t n = inst.num_facilities();
  PdTrace trace;
  FacilitySet opened;
  std::vector<double> load(n, 0.0), rate(n, 0.0);
  double residual = inst.requirement(j);
  while (residual > kCoverageTol) {
    for (std::size_t i = 0; i < n; ++i) rate[i] = clipped_contribution(inst, i, j, opened, residual);
    double delta = 0.0;
    const std::size_t pick = detail::first_tight(inst, opened, load, rate, delta);
    if (pick == detail::kNoFacility) {
      throw Error(ErrorCode::kInfeasibleUser, "user " + std::to_string(j) + " ran out of facilities");
    }
    for (std::size_t i = 0; i < n; ++i) load[i] += rate[i] * delta;
    trace.dual.add(j, opened, delta);
    trace.steps.push_back(PdStep{opened, delta, pick});
    opened.insert(pick);
    residual = std::max(inst.requirement(j) - covered_by(inst, j, opened), 0.0);
  }
  trace.selection = Selection::of(inst, std::move(opened));
  return trace;
}

// Multi-user dual ascent: every user still short of her requirement raises
// y_j^X at unit rate for the shared selection X; the first facility to become
// tight opens for everyone.
inline PdTrace multi_user_primal_dual(const Instance& inst, const UserSet& users_in) {
  const UserSet users = normalize_users(inst, users_in);
  for (std::size_t j : users) {
    if (inst.total_coverage(j) < inst.requirement(j) - kCoverageTol) {
      throw Error(ErrorCode::kInfeasibleInstance, "user " + std::to_string(j) + " cannot be covered");
    }
  }
  const std::size_t n = inst.num_facilities();
  PdTrace trace;
  FacilitySet opened;
  std::vector<double> load(n, 0.0), rate(n, 0.0);
  std::vector<double> residual(inst.num_users(), 0.0);
  for (std::size_t j : users) residual[j] = inst.requirement(j);

  auto any_active = [&] {
    return std::any_of(users.begin(), users.end(), [&](std::size_t j) { return residual[j] > kCoverageTol; });
  };
  while (any_active()) {
    std::fill(rate.begin(), rate.end(), 0.0);
    for (std::size_t j : users) {
      if (residual[j] <= kCoverageTol) continue;
      for (std::size_t i = 0; i < n; ++i) rate[i] += clipped_contribution(inst, i, j, opened, residual[j]);
    }
    double delta = 0.0;
    const std::size_t pick = detail::first_tight(inst, opened, load, rate, delta);
    if (pick == detail::kNoFacility) {
      throw Error(ErrorCode::kInfeasibleInstance, "dual ascent ran out of facilities");
    }
    for (std::size_t i = 0; i < n; ++i) load[i] += rate[i] * delta;
    for (std::size_t j : users) {
      if (residual[j] > kCoverageTol) trace.dual.add(j, opened, delta);
    }
    trace.steps.push_back(PdStep{opened, delta, pick});
    opened.insert(pick);
    for (std::size_t j : users) {
      residual[j] = std::max(inst.requirement(j) - covered_by(inst, j, opened), 0.0);
    }
  }
  trace.selection = Selection::of(inst, std::move(opened));
  return trace;
}

struct GreedyStep {
  FacilitySet subset;  // S_t, before the facility is added
  std::size_t facility = 0;
  double unit_price = 0.0;  // cost per unit of rounded residual coverage
};

struct GreedyTrace {
  std::vector<GreedyStep> steps;
  DualSolution raw_dual;  // budget balanced but generally infeasible
  Selection selection;
  UserSet users;
  double scale_k = 1000.0;
  bool rounded_feasible = false;
  // The rounded instance overstates coverage, so its solution may fall
  // short on the original data.
  bool original_feasible = false;
};

// Greedy covering on the K-scaled integer instance (contributions rounded
// up, requirements down). Each step opens the facility with the lowest cost
// per unit of residual coverage and spreads that cost over the users it
// helps: y_j^S = p_t * a'_ij^S / r_j^S, so sum_j r_j^S y_j^S equals the
// facility's cost.
inline GreedyTrace greedy_solve(const Instance& inst, const UserSet& users_in, double scale_k = 1000.0) {
  const UserSet users = normalize_users(inst, users_in);
  const std::size_t n = inst.num_facilities();
  GreedyTrace trace;
  trace.users = users;
  trace.scale_k = scale_k;

  std::vector<std::vector<std::int64_t>> scaled(n, std::vector<std::int64_t>(inst.num_users(), 0));
  std::vector<std::int64_t> residual(inst.num_users(), 0);
  for (std::size_t j : users) {
    residual[j] = scale_down(inst.requirement(j), scale_k);
    std::int64_t avail = 0;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i][j] = scale_up(inst.contribution(i, j), scale_k);
      avail += scaled[i][j];
    }
    if (avail < residual[j]) {
      throw Error(ErrorCode::kInfeasibleInstance, "user " + std::to_string(j) + " cannot be covered");
    }
  }

  FacilitySet opened;
  auto uncovered = [&] {
    return std::any_of(users.begin(), users.end(), [&](std::size_t j) { return residual[j] > 0; });
  };
  while (uncovered()) {
    std::size_t pick = detail::kNoFacility;
    double best_price = std::numeric_limits<double>::infinity();
    std::int64_t best_gain = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (opened.contains(i)) continue;
      std::int64_t gain = 0;
      for (std::size_t j : users) gain += std::min(scaled[i][j], residual[j]);
      if (gain <= 0) continue;
      const double price = inst.cost(i) / static_cast<double>(gain);
      if (price < best_price) {
        best_price = price;
        best_gain = gain;
        pick = i;
      }
    }
    if (pick == detail::kNoFacility) {
      throw Error(ErrorCode::kInfeasibleInstance, "greedy ran out of facilities");
    }
    for (std::size_t j : users) {
      const std::int64_t part = std::min(scaled[pick][j], residual[j]);
      if (part <= 0) continue;
      const double r_orig = residual_requirement(inst, j, opened);
      if (r_orig <= 0.0) continue;
      const double paid = inst.cost(pick) * static_cast<double>(part) / static_cast<double>(best_gain);
      trace.raw_dual.add(j, opened, paid / r_orig);
    }
    trace.steps.push_back(GreedyStep{opened, pick, best_price});
    opened.insert(pick);
    for (std::size_t j : users) residual[j] = std::max<std::int64_t>(residual[j] - scaled[pick][j], 0);
  }
  trace.rounded_feasible = true;
  trace.original_feasible = is_feasible_for(inst, opened, users);
  trace.selection = Selection::of(inst, std::move(opened));
  return trace;
}

struct FittedShares {
  CostShares shares;
  DualSolution dual;
  double divisor = 1.0;      // raw dual was divided by this
  bool fell_back = false;    // fixed scaling was infeasible; minimal scaling used
};

// lambda = max(1, max_i load_i / c_i): the least division making `raw`
// feasible. A zero-cost facility with positive load cannot be fixed by
// scaling.
inline double minimal_fitting_divisor(const Instance& inst, const DualSolution& raw) {
  const std::vector<double> load = dual_load(inst, raw);
  double lambda = 1.0;
  for (std::size_t i = 0; i < load.size(); ++i) {
    if (inst.cost(i) > 0.0) {
      lambda = std::max(lambda, load[i] / inst.cost(i));
    } else if (load[i] > 1e-12) {
      throw Error(ErrorCode::kZeroCostOverload,
                  "zero-cost facility " + std::to_string(i) + " carries dual load " + std::to_string(load[i]));
    }
  }
  return lambda;
}

// Greedy+: scale the raw greedy dual down only as far as feasibility needs.
inline FittedShares greedy_fit_minimal(const GreedyTrace& trace, const Instance& inst) {
  FittedShares out;
  out.divisor = minimal_fitting_divisor(inst, trace.raw_dual);
  out.dual = trace.raw_dual.scaled(1.0 / out.divisor);
  out.shares = induce_cost_shares(inst, out.dual, trace.users, "greedy+");
  return out;
}

// Classic dual fitting: divide by ln(max(n, 2)). Real-valued data can
// still leave the result infeasible; then the minimal divisor is used and
// `fell_back` is set.
inline FittedShares greedy_fit_fixed(const GreedyTrace& trace, const Instance& inst) {
  FittedShares out;
  out.divisor = std::log(static_cast<double>(std::max<std::size_t>(inst.num_facilities(), 2)));
  out.dual = trace.raw_dual.scaled(1.0 / out.divisor);
  if (!is_dual_feasible(inst, out.dual)) {
    out.fell_back = true;
    out.divisor = minimal_fitting_divisor(inst, trace.raw_dual);
    out.dual = trace.raw_dual.scaled(1.0 / out.divisor);
  }
  out.shares = induce_cost_shares(inst, out.dual, trace.users, "greedy");
  return out;
}

struct MechanismResult {
  Selection selection;
  CostShares shares;
  std::vector<DualSolution> user_duals;  // scaled by 1/delta, indexed like `users`
  std::vector<PdTrace> user_traces;      // unscaled single-user runs
  UserSet users;
  std::size_t delta = 0;
};

// Cross-monotone mechanism: each user runs the single-user primal-dual in
// isolation, duals are divided by Delta(U), facilities are pooled. Shares are
// induced from the scaled duals, so a user's share can only fall as U grows.
inline MechanismResult cross_monotone_mechanism(const Instance& inst, const UserSet& users_in) {
  MechanismResult out;
  out.users = normalize_users(inst, users_in);
  out.delta = sparsity(inst, out.users).delta;
  FacilitySet pooled;
  DualSolution combined;
  for (std::size_t j : out.users) {
    PdTrace t = min_cost_knapsack_pd(inst, j);
    DualSolution scaled = t.dual.scaled(1.0 / static_cast<double>(std::max<std::size_t>(out.delta, 1)));
    t.selection.opened.for_each([&](std::size_t i) { pooled.insert(i); });
    combined.merge(scaled);
    out.user_duals.push_back(std::move(scaled));
    out.user_traces.push_back(std::move(t));
  }
  out.selection = Selection::of(inst, std::move(pooled));
  out.shares = induce_cost_shares(inst, combined, out.users, "mechanism");
  return out;
}

inline void write_pd_trace(std::ostream& os, const PdTrace& trace) {
  os << "# step\tsubset\tfacility\tdual_value\n";
  char buf[64];
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const PdStep& s = trace.steps[t];
    std::snprintf(buf, sizeof(buf), "%.17g", s.dual_increase);
    os << t << '\t' << s.subset.to_string() << '\t' << s.facility << '\t' << buf << '\n';
  }
}

inline void write_greedy_trace(std::ostream& os, const GreedyTrace& trace) {
  os << "# step\tsubset\tfacility\tunit_price\n";
  char buf[64];
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const GreedyStep& s = trace.steps[t];
    std::snprintf(buf, sizeof(buf), "%.17g", s.unit_price);
    os << t << '\t' << s.subset.to_string() << '\t' << s.facility << '\t' << buf << '\n';
  }
  os << "# rounded_feasible=" << trace.rounded_feasible << " original_feasible=" << trace.original_feasible
     << " scale_k=" << trace.scale_k << '\n';
  if (!trace.original_feasible) os << "# warning: selection is infeasible for the unrounded data\n";
}

}  // namespace cipshare
