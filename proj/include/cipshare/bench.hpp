#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "cipshare/algorithms.hpp"
#include "cipshare/exact.hpp"
#include "cipshare/io.hpp"
#include "cipshare/kc_lp.hpp"
#include "cipshare/lorawan.hpp"

namespace cipshare::bench {

struct BenchConfig {
  std::string profile = "desk";
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> instance_files;
  std::optional<std::size_t> num_users;
  std::optional<std::size_t> num_facilities;
  double scale_k = 1000.0;
  double tol = 1e-6;
  std::size_t audit_cap = 12;
  std::size_t ip_cap = 64;
  std::size_t jobs = 1;

  std::size_t num_instances() const { return seeds.size() + instance_files.size(); }
};

inline lorawan::GenConfig profile_config(const std::string& name, std::uint64_t seed) {
  if (name == "desk") return lorawan::desk_profile(seed);
  if (name == "paper-shaped") return lorawan::paper_shaped_profile(seed);
  throw Error(ErrorCode::kInfeasibleConfig, "unknown profile '" + name + "'");
}

inline BenchConfig config_from_json(const nlohmann::json& j) {
  BenchConfig cfg;
  try {
    cfg.profile = j.value("profile", cfg.profile);
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("instance_files")) cfg.instance_files = j.at("instance_files").get<std::vector<std::string>>();
    if (j.contains("m")) cfg.num_users = j.at("m").get<std::size_t>();
    if (j.contains("n")) cfg.num_facilities = j.at("n").get<std::size_t>();
    cfg.scale_k = j.value("scale_k", cfg.scale_k);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.audit_cap = j.value("audit_cap", cfg.audit_cap);
    cfg.ip_cap = j.value("ip_cap", cfg.ip_cap);
    cfg.jobs = j.value("jobs", cfg.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed bench config: ") + e.what());
  }
  if (cfg.num_instances() == 0) {
    throw Error(ErrorCode::kInfeasibleConfig, "bench config lists no seeds and no instance files");
  }
  return cfg;
}

// One benchmark instance. Revenues are totals of cost shares; "_norm"
// fields divide by the IP optimum.
struct BenchRow {
  std::string source;  // "seed:<s>" or a file path
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t delta = 0;
  double ip_obj = 0.0;
  double naive_lp = 0.0;
  double kc_lp = 0.0;
  double kc_gap = 0.0;  // ip / kc_lp
  bool kc_converged = false;
  std::size_t kc_rounds = 0;
  std::size_t kc_cuts = 0;
  double dual_opt_rev = 0.0;
  double pd_obj = 0.0;
  double pd_rev = 0.0;
  double greedy_obj = 0.0;
  bool greedy_feasible = true;  // on the original (unrounded) data
  double greedy_rev = 0.0;
  double greedy_divisor = 0.0;
  bool greedy_fell_back = false;
  double greedy_plus_rev = 0.0;
  double greedy_plus_divisor = 0.0;
  double mech_obj = 0.0;
  double mech_rev = 0.0;
  bool duality_ok = false;  // naive <= KC-LP <= IP and every dual objective <= KC-LP
  bool core_audited = false;
  bool core_ok = true;
  double seconds_ip = 0.0;
  double seconds_kc = 0.0;
  double seconds_total = 0.0;
  std::string error;

  bool ok() const { return error.empty() && duality_ok && core_ok; }
};

namespace detail {

inline double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace detail

inline BenchRow run_instance(const Instance& inst, const std::string& source, const BenchConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  BenchRow row;
  row.source = source;
  row.m = inst.num_users();
  row.n = inst.num_facilities();
  try {
    const UserSet users = all_users(inst);
    row.delta = sparsity(inst).delta;
    ExactOptions ex;
    ex.ip_size_cap = cfg.ip_cap;
    ex.audit_user_cap = cfg.audit_cap;

    auto t = std::chrono::steady_clock::now();
    const Selection ip = solve_ip_exact(inst, users, ex);
    row.seconds_ip = detail::elapsed(t);
    row.ip_obj = ip.cost;
    row.naive_lp = naive_lp_value(inst, users);

    t = std::chrono::steady_clock::now();
    ColumnGenerationOptions cg;
    cg.scale_k = cfg.scale_k;
    const ColumnGenerationResult kc = column_generation_solve(inst, users, cg);
    row.seconds_kc = detail::elapsed(t);
    row.kc_lp = kc.objective;
    row.kc_converged = kc.converged;
    row.kc_rounds = kc.rounds;
    row.kc_cuts = kc.cuts;
    row.kc_gap = row.kc_lp > 0.0 ? row.ip_obj / row.kc_lp : 1.0;
    const CostShares dual_opt = induce_cost_shares(inst, kc.dual, users, "dual-opt", cfg.tol);
    row.dual_opt_rev = dual_opt.total();

    const PdTrace pd = multi_user_primal_dual(inst, users);
    row.pd_obj = pd.selection.cost;
    const CostShares pd_shares = induce_cost_shares(inst, pd.dual, users, "pd", cfg.tol);
    row.pd_rev = pd_shares.total();

    const GreedyTrace gr = greedy_solve(inst, users, cfg.scale_k);
    row.greedy_obj = gr.selection.cost;
    row.greedy_feasible = gr.original_feasible;
    const FittedShares fixed = greedy_fit_fixed(gr, inst);
    const FittedShares minimal = greedy_fit_minimal(gr, inst);
    row.greedy_rev = fixed.shares.total();
    row.greedy_divisor = fixed.divisor;
    row.greedy_fell_back = fixed.fell_back;
    row.greedy_plus_rev = minimal.shares.total();
    row.greedy_plus_divisor = minimal.divisor;

    const MechanismResult mech = cross_monotone_mechanism(inst, users);
    row.mech_obj = mech.selection.cost;
    row.mech_rev = mech.shares.total();

    const double tol = cfg.tol * std::max(1.0, row.ip_obj);
    row.duality_ok = row.naive_lp <= row.kc_lp + tol && row.kc_lp <= row.ip_obj + tol;
    for (double rev : {row.dual_opt_rev, row.pd_rev, row.greedy_rev, row.greedy_plus_rev, row.mech_rev}) {
      row.duality_ok = row.duality_ok && rev <= row.kc_lp + tol;
    }

    if (users.size() <= cfg.audit_cap) {
      row.core_audited = true;
      const SubsetCostTable table(inst, users, ex);
      for (const CostShares* s : {&dual_opt, &pd_shares, &fixed.shares, &minimal.shares, &mech.shares}) {
        row.core_ok = row.core_ok && verify_core(*s, table, cfg.tol).passed;
      }
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.seconds_total = detail::elapsed(t0);
  return row;
}

struct BenchReport {
  BenchConfig config;
  std::vector<BenchRow> rows;

  bool all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.ok(); });
  }
};

// Runs every configured instance on a pool of `cfg.jobs` workers. Rows come
// back in configuration order (seeds first, then files).
inline BenchReport run_benchmark(const BenchConfig& cfg,
                                 const std::function<void(const BenchRow&)>& on_row = nullptr) {
  BenchReport report;
  report.config = cfg;
  const std::size_t total = cfg.num_instances();
  report.rows.resize(total);

  auto work = [&](std::size_t k) {
    if (k < cfg.seeds.size()) {
      const std::uint64_t seed = cfg.seeds[k];
      const std::string source = "seed:" + std::to_string(seed);
      try {
        lorawan::GenConfig gen = profile_config(cfg.profile, seed);
        if (cfg.num_users) gen.num_users = *cfg.num_users;
        if (cfg.num_facilities) gen.num_facilities = *cfg.num_facilities;
        report.rows[k] = run_instance(lorawan::generate_instance(gen), source, cfg);
      } catch (const std::exception& e) {
        report.rows[k].source = source;
        report.rows[k].error = e.what();
      }
    } else {
      const std::string& path = cfg.instance_files[k - cfg.seeds.size()];
      try {
        report.rows[k] = run_instance(io::read_instance(path), path, cfg);
      } catch (const std::exception& e) {
        report.rows[k].source = path;
        report.rows[k].error = e.what();
      }
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, std::max<std::size_t>(total, 1));
  if (jobs == 1) {
    for (std::size_t k = 0; k < total; ++k) {
      work(k);
      if (on_row) on_row(report.rows[k]);
    }
    return report;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < total; k = next++) work(k);
    });
  }
  for (auto& th : pool) th.join();
  if (on_row) {
    for (const auto& r : report.rows) on_row(r);
  }
  return report;
}

inline constexpr const char* kCsvHeader =
    "source,m,n,delta,ip_obj,naive_lp,kc_lp,kc_gap,kc_converged,kc_rounds,kc_cuts,"
    "dual_opt_rev,pd_obj,pd_rev,greedy_obj,greedy_feasible,greedy_rev,greedy_divisor,greedy_fell_back,"
    "greedy_plus_rev,greedy_plus_divisor,mech_obj,mech_rev,"
    "ip_obj_norm,kc_lp_norm,dual_opt_rev_norm,pd_obj_norm,pd_rev_norm,greedy_obj_norm,greedy_rev_norm,"
    "greedy_plus_rev_norm,duality_ok,core_audited,core_ok,seconds_ip,seconds_kc,seconds_total,error";

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

inline void write_csv(std::ostream& os, const BenchReport& report) {
  os << "# cipshare-bench v1\n";
  os << "# profile=" << report.config.profile << " scale_k=" << report.config.scale_k
     << " tol=" << report.config.tol << " audit_cap=" << report.config.audit_cap << '\n';
  os << kCsvHeader << '\n';
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  for (const BenchRow& r : report.rows) {
    const double base = r.ip_obj > 0.0 ? r.ip_obj : 1.0;
    os << csv_escape(r.source) << ',' << r.m << ',' << r.n << ',' << r.delta << ',' << num(r.ip_obj) << ','
       << num(r.naive_lp) << ',' << num(r.kc_lp) << ',' << num(r.kc_gap) << ',' << r.kc_converged << ','
       << r.kc_rounds << ',' << r.kc_cuts << ',' << num(r.dual_opt_rev) << ',' << num(r.pd_obj) << ','
       << num(r.pd_rev) << ',' << num(r.greedy_obj) << ',' << r.greedy_feasible << ',' << num(r.greedy_rev)
       << ',' << num(r.greedy_divisor) << ',' << r.greedy_fell_back << ',' << num(r.greedy_plus_rev) << ','
       << num(r.greedy_plus_divisor) << ',' << num(r.mech_obj) << ',' << num(r.mech_rev) << ','
       << num(r.ip_obj / base) << ',' << num(r.kc_lp / base) << ',' << num(r.dual_opt_rev / base) << ','
       << num(r.pd_obj / base) << ',' << num(r.pd_rev / base) << ',' << num(r.greedy_obj / base) << ','
       << num(r.greedy_rev / base) << ',' << num(r.greedy_plus_rev / base) << ',' << r.duality_ok << ','
       << r.core_audited << ',' << r.core_ok << ',' << num(r.seconds_ip) << ',' << num(r.seconds_kc) << ','
       << num(r.seconds_total) << ',' << csv_escape(r.error) << '\n';
  }
}

// Instances whose revenues follow DUAL-OPT >= PD >= Greedy+ >= Greedy.
inline std::size_t count_ordered(const BenchReport& report, double tol = 1e-9) {
  std::size_t count = 0;
  for (const BenchRow& r : report.rows) {
    if (!r.error.empty()) continue;
    if (r.dual_opt_rev + tol >= r.pd_rev && r.pd_rev + tol >= r.greedy_plus_rev &&
        r.greedy_plus_rev + tol >= r.greedy_rev) {
      ++count;
    }
  }
  return count;
}

}  // namespace cipshare::bench
