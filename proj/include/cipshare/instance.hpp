#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cipshare/error.hpp"
#include "cipshare/facility_set.hpp"

namespace cipshare {

// Default absolute tolerance on coverage sums.
inline constexpr double kCoverageTol = 1e-9;

// Covering integer program data: facilities with opening costs, users with
// coverage requirements, and a nonnegative facility-by-user contribution
// matrix. Immutable once constructed.
class Instance {
 public:
  Instance() = default;

  // `contributions[i][j]` is what facility i gives user j.
  Instance(std::vector<double> costs, std::vector<double> requirements,
           const std::vector<std::vector<double>>& contributions,
           nlohmann::json meta = nlohmann::json::object())
      : costs_(std::move(costs)),
        requirements_(std::move(requirements)),
        meta_(std::move(meta)) {
    const std::size_t n = costs_.size();
    const std::size_t m = requirements_.size();
    if (contributions.size() != n) {
      throw Error(ErrorCode::kInvalidInstance,
                  "contributions has " + std::to_string(contributions.size()) +
                      " rows, expected one per facility (" + std::to_string(n) + ")");
    }
    contributions_.reserve(n * m);
    for (std::size_t i = 0; i < n; ++i) {
      if (contributions[i].size() != m) {
        throw Error(ErrorCode::kInvalidInstance,
                    "contribution row " + std::to_string(i) + " has " +
                        std::to_string(contributions[i].size()) + " entries, expected " +
                        std::to_string(m));
      }
      contributions_.insert(contributions_.end(), contributions[i].begin(),
                            contributions[i].end());
    }
    validate();
  }

  std::size_t num_facilities() const { return costs_.size(); }
  std::size_t num_users() const { return requirements_.size(); }

  double cost(std::size_t i) const { return costs_[i]; }
  double requirement(std::size_t j) const { return requirements_[j]; }
  double contribution(std::size_t i, std::size_t j) const {
    return contributions_[i * num_users() + j];
  }

  std::span<const double> costs() const { return costs_; }
  std::span<const double> requirements() const { return requirements_; }
  std::span<const double> facility_row(std::size_t i) const {
    return std::span<const double>(contributions_).subspan(i * num_users(), num_users());
  }

  // Sum of every facility's contribution to user j.
  double total_coverage(std::size_t j) const {
    double s = 0.0;
    for (std::size_t i = 0; i < num_facilities(); ++i) s += contribution(i, j);
    return s;
  }

  const nlohmann::json& meta() const { return meta_; }

  void check_facility(std::size_t i) const {
    if (i >= num_facilities()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "facility " + std::to_string(i) + " >= n=" + std::to_string(num_facilities()));
    }
  }
  void check_user(std::size_t j) const {
    if (j >= num_users()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "user " + std::to_string(j) + " >= m=" + std::to_string(num_users()));
    }
  }
  void check_set(const FacilitySet& s) const {
    if (s.extent() > num_facilities()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "facility set " + s.to_string() + " exceeds n=" + std::to_string(num_facilities()));
    }
  }

 private:
  void validate() const {
    for (std::size_t i = 0; i < costs_.size(); ++i) {
      if (!(costs_[i] >= 0.0) || !std::isfinite(costs_[i])) {
        throw Error(ErrorCode::kInvalidInstance, "cost " + std::to_string(i) + " must be finite and >= 0");
      }
    }
    for (std::size_t j = 0; j < requirements_.size(); ++j) {
      if (!(requirements_[j] > 0.0) || !std::isfinite(requirements_[j])) {
        throw Error(ErrorCode::kInvalidInstance,
                    "requirement " + std::to_string(j) + " must be finite and > 0");
      }
    }
    for (double a : contributions_) {
      if (!(a >= 0.0) || !std::isfinite(a)) {
        throw Error(ErrorCode::kInvalidInstance, "contributions must be finite and >= 0");
      }
    }
    for (std::size_t j = 0; j < requirements_.size(); ++j) {
      if (total_coverage(j) < requirements_[j] - kCoverageTol) {
        throw Error(ErrorCode::kInfeasibleInstance,
                    "user " + std::to_string(j) + " cannot be covered even with every facility open");
      }
    }
  }

  std::vector<double> costs_;
  std::vector<double> requirements_;
  std::vector<double> contributions_;  // n x m, row-major by facility
  nlohmann::json meta_ = nlohmann::json::object();
};

// Sorted, duplicate-free list of user indices.
using UserSet = std::vector<std::size_t>;

inline UserSet all_users(const Instance& inst) {
  UserSet u(inst.num_users());
  std::iota(u.begin(), u.end(), std::size_t{0});
  return u;
}

inline UserSet normalize_users(const Instance& inst, UserSet users) {
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  for (std::size_t j : users) inst.check_user(j);
  return users;
}

// Bit b of `mask` selects users[b].
inline UserSet users_from_mask(const UserSet& users, std::uint64_t mask) {
  UserSet out;
  for (std::size_t b = 0; b < users.size(); ++b) {
    if ((mask >> b) & 1U) out.push_back(users[b]);
  }
  return out;
}

// An integer solution: the opened facilities and their total cost.
struct Selection {
  FacilitySet opened;
  double cost = 0.0;

  static Selection of(const Instance& inst, FacilitySet opened) {
    inst.check_set(opened);
    double c = 0.0;
    opened.for_each([&](std::size_t i) { c += inst.cost(i); });
    return Selection{std::move(opened), c};
  }

  static Selection all(const Instance& inst) {
    FacilitySet s;
    for (std::size_t i = 0; i < inst.num_facilities(); ++i) s.insert(i);
    return of(inst, std::move(s));
  }
};

}  // namespace cipshare
