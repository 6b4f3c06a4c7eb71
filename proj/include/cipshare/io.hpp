#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cipshare/dual.hpp"

namespace cipshare::io {

using nlohmann::json;

inline json to_json(const Instance& inst) {
  std::vector<std::vector<double>> a(inst.num_facilities());
  for (std::size_t i = 0; i < inst.num_facilities(); ++i) {
    const auto row = inst.facility_row(i);
    a[i].assign(row.begin(), row.end());
  }
  return json{{"format", "cipshare-instance"},
              {"version", 1},
              {"n", inst.num_facilities()},
              {"m", inst.num_users()},
              {"costs", std::vector<double>(inst.costs().begin(), inst.costs().end())},
              {"requirements", std::vector<double>(inst.requirements().begin(), inst.requirements().end())},
              {"contributions", a},
              {"meta", inst.meta()}};
}

inline Instance instance_from_json(const json& j) {
  try {
    auto costs = j.at("costs").get<std::vector<double>>();
    auto reqs = j.at("requirements").get<std::vector<double>>();
    auto a = j.at("contributions").get<std::vector<std::vector<double>>>();
    if (j.contains("n") && j.at("n").get<std::size_t>() != costs.size()) {
      throw Error(ErrorCode::kParseError, "field n disagrees with the length of costs");
    }
    if (j.contains("m") && j.at("m").get<std::size_t>() != reqs.size()) {
      throw Error(ErrorCode::kParseError, "field m disagrees with the length of requirements");
    }
    json meta = j.contains("meta") ? j.at("meta") : json::object();
    return Instance(std::move(costs), std::move(reqs), a, std::move(meta));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed instance: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kParseError, "cannot write " + path);
  out << j.dump(1) << '\n';
}

inline Instance read_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

inline void write_instance(const std::string& path, const Instance& inst) { write_json_file(path, to_json(inst)); }

inline json to_json(const Selection& sel) {
  return json{{"opened", sel.opened.indices()}, {"cost", sel.cost}};
}

inline Selection selection_from_json(const Instance& inst, const json& j) {
  try {
    return Selection::of(inst, FacilitySet::from_indices(j.at("opened").get<std::vector<std::size_t>>()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed selection: ") + e.what());
  }
}

inline json to_json(const DualSolution& y) {
  json entries = json::array();
  for (const auto& [key, v] : y.entries()) {
    entries.push_back(json{{"user", key.user}, {"subset", key.subset.indices()}, {"value", v}});
  }
  return entries;
}

inline DualSolution dual_from_json(const json& j) {
  DualSolution y;
  try {
    for (const auto& e : j) {
      y.add(e.at("user").get<std::size_t>(),
            FacilitySet::from_indices(e.at("subset").get<std::vector<std::size_t>>()),
            e.at("value").get<double>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed dual: ") + e.what());
  }
  return y;
}

inline json to_json(const CostShares& s) {
  return json{{"format", "cipshare-shares"},
              {"method", s.method},
              {"users", s.users},
              {"shares", s.shares},
              {"total", s.total()}};
}

inline CostShares shares_from_json(const Instance& inst, const json& j) {
  CostShares s;
  try {
    s.method = j.value("method", std::string("unknown"));
    s.shares = j.at("shares").get<std::vector<double>>();
    s.users = j.contains("users") ? j.at("users").get<UserSet>() : all_users(inst);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed shares: ") + e.what());
  }
  if (s.shares.size() != inst.num_users()) {
    throw Error(ErrorCode::kParseError, "shares vector length " + std::to_string(s.shares.size()) +
                                            " does not match m=" + std::to_string(inst.num_users()));
  }
  s.users = normalize_users(inst, s.users);
  return s;
}

}  // namespace cipshare::io
