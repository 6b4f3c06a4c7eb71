#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "cipshare/instance.hpp"

namespace cipshare {

// Coverage user j already receives from the facilities in S.
inline double covered_by(const Instance& inst, std::size_t j, const FacilitySet& S) {
  double s = 0.0;
  S.for_each([&](std::size_t i) { s += inst.contribution(i, j); });
  return s;
}

// r_j^S = max{r_j - sum_{i in S} a_ij, 0}
inline double residual_requirement(const Instance& inst, std::size_t j, const FacilitySet& S) {
  inst.check_user(j);
  inst.check_set(S);
  return std::max(inst.requirement(j) - covered_by(inst, j, S), 0.0);
}

// a_ij^S = min{a_ij, r_j^S}, and zero for facilities already in S.
inline double residual_contribution(const Instance& inst, std::size_t i, std::size_t j,
                                    const FacilitySet& S) {
  inst.check_facility(i);
  if (S.contains(i)) return 0.0;
  return std::min(inst.contribution(i, j), residual_requirement(inst, j, S));
}

// Same as residual_contribution when r_j^S is already known.
inline double clipped_contribution(const Instance& inst, std::size_t i, std::size_t j,
                                   const FacilitySet& S, double residual) {
  if (S.contains(i)) return 0.0;
  return std::min(inst.contribution(i, j), residual);
}

inline bool is_feasible_for(const Instance& inst, const FacilitySet& opened, const UserSet& users,
                            double tol = kCoverageTol) {
  for (std::size_t j : users) {
    if (covered_by(inst, j, opened) < inst.requirement(j) - tol) return false;
  }
  return true;
}

inline bool is_feasible(const Instance& inst, const Selection& sel, double tol = kCoverageTol) {
  return is_feasible_for(inst, sel.opened, all_users(inst), tol);
}

// Integer rescaling used by the greedy heuristic and the separation oracle:
// contributions are rounded up and requirements down, so the scaled problem
// never needs more than the original. The 1e-9 slack absorbs representation
// error (0.123 * 1000 must round to 123, not 124).
inline std::int64_t scale_up(double value, double k) {
  return static_cast<std::int64_t>(std::ceil(value * k * (1.0 - 1e-12) - 1e-9));
}
inline std::int64_t scale_down(double value, double k) {
  return static_cast<std::int64_t>(std::floor(value * k * (1.0 + 1e-12) + 1e-9));
}

struct SparsityStats {
  std::size_t delta = 0;  // max users (in scope) served by one facility
  std::size_t gamma = 0;  // max facilities serving one user (in scope)
  bool degenerate = false;  // set for an empty user scope
};

// Counts use strict positivity a_ij > 0. With `users` given, only those users
// are counted, which yields the restricted Delta(U).
inline SparsityStats sparsity(const Instance& inst, const std::optional<UserSet>& users = std::nullopt) {
  const UserSet scope = users ? normalize_users(inst, *users) : all_users(inst);
  SparsityStats st;
  if (scope.empty()) {
    st.degenerate = true;
    return st;
  }
  for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
    std::size_t served = 0;
    for (std::size_t j : scope) served += inst.contribution(i, j) > 0.0 ? 1 : 0;
    st.delta = std::max(st.delta, served);
  }
  for (std::size_t j : scope) {
    std::size_t serving = 0;
    for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
      serving += inst.contribution(i, j) > 0.0 ? 1 : 0;
    }
    st.gamma = std::max(st.gamma, serving);
  }
  return st;
}

}  // namespace cipshare
