// cipshare: generate covering instances, solve them, compute cost shares,
// audit the core property and run the desk-scale benchmark.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cipshare/cipshare.hpp"

namespace {

using namespace cipshare;
using nlohmann::json;

struct Common {
  double scale_k = 1000.0;
  double tol = 1e-6;
  std::size_t audit_cap = 12;
  std::size_t ip_cap = 64;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kParseError, "cannot write " + path);
  return out;
}

UserSet parse_users(const Instance& inst, const std::vector<std::size_t>& users) {
  return users.empty() ? all_users(inst) : normalize_users(inst, users);
}

ExactOptions exact_options(const Common& c) {
  ExactOptions ex;
  ex.ip_size_cap = c.ip_cap;
  ex.audit_user_cap = c.audit_cap;
  return ex;
}

// Shares for one method, plus the selection the method buys.
struct MethodOutcome {
  std::optional<Selection> selection;
  DualSolution dual;
  CostShares shares;
  double objective = 0.0;
  bool verified = true;
};

MethodOutcome run_method(const Instance& inst, const UserSet& users, const std::string& method,
                         const Common& c, const std::string& trace_path, const std::string& cut_log_path) {
  MethodOutcome out;
  if (method == "ip") {
    out.selection = solve_ip_exact(inst, users, exact_options(c));
    out.objective = out.selection->cost;
    out.shares.shares.assign(inst.num_users(), 0.0);
    out.shares.users = users;
    out.shares.method = "none";
  } else if (method == "kclp" || method == "dual-opt") {
    ColumnGenerationOptions cg;
    cg.scale_k = c.scale_k;
    ColumnGenerationResult res = column_generation_solve(inst, users, cg);
    out.objective = res.objective;
    out.verified = res.converged;
    out.dual = res.dual;
    out.shares = induce_cost_shares(inst, res.dual, users, "dual-opt", c.tol);
    if (!cut_log_path.empty()) {
      auto os = open_out(cut_log_path);
      write_cut_log(os, res.cut_log);
    }
  } else if (method == "pd") {
    PdTrace t = multi_user_primal_dual(inst, users);
    out.selection = t.selection;
    out.objective = t.selection.cost;
    out.dual = t.dual;
    out.shares = induce_cost_shares(inst, t.dual, users, "pd", c.tol);
    if (!trace_path.empty()) {
      auto os = open_out(trace_path);
      write_pd_trace(os, t);
    }
  } else if (method == "greedy" || method == "greedy+") {
    GreedyTrace t = greedy_solve(inst, users, c.scale_k);
    out.selection = t.selection;
    out.objective = t.selection.cost;
    out.verified = t.original_feasible;
    FittedShares f = method == "greedy" ? greedy_fit_fixed(t, inst) : greedy_fit_minimal(t, inst);
    out.dual = f.dual;
    out.shares = f.shares;
    if (!trace_path.empty()) {
      auto os = open_out(trace_path);
      write_greedy_trace(os, t);
    }
  } else if (method == "mechanism") {
    MechanismResult m = cross_monotone_mechanism(inst, users);
    out.selection = m.selection;
    out.objective = m.selection.cost;
    for (const auto& d : m.user_duals) out.dual.merge(d);
    out.shares = m.shares;
    if (!trace_path.empty()) {
      auto os = open_out(trace_path);
      for (std::size_t k = 0; k < m.users.size(); ++k) {
        os << "# user " << m.users[k] << '\n';
        write_pd_trace(os, m.user_traces[k]);
      }
    }
  } else {
    throw Error(ErrorCode::kInfeasibleConfig, "unknown method '" + method + "'");
  }
  return out;
}

int cmd_gen(const std::string& profile, std::uint64_t seed, std::optional<std::size_t> m,
            std::optional<std::size_t> n, const std::string& out_path) {
  lorawan::GenConfig cfg = bench::profile_config(profile, seed);
  if (m) cfg.num_users = *m;
  if (n) cfg.num_facilities = *n;
  const Instance inst = lorawan::generate_instance(cfg);
  io::write_instance(out_path, inst);
  const SparsityStats st = sparsity(inst);
  std::printf("generated %s: n=%zu m=%zu delta=%zu gamma=%zu seed=%llu\n", out_path.c_str(),
              inst.num_facilities(), inst.num_users(), st.delta, st.gamma,
              static_cast<unsigned long long>(seed));
  return 0;
}

int cmd_solve(const std::string& in, const std::string& method, const std::vector<std::size_t>& user_list,
              const Common& c, const std::string& out_path, const std::string& trace_path,
              const std::string& cut_log_path) {
  const Instance inst = io::read_instance(in);
  const UserSet users = parse_users(inst, user_list);
  MethodOutcome r = run_method(inst, users, method, c, trace_path, cut_log_path);
  json j{{"method", method}, {"objective", r.objective}, {"users", users}};
  if (r.selection) {
    j["selection"] = io::to_json(*r.selection);
    j["feasible"] = is_feasible_for(inst, r.selection->opened, users);
    r.verified = r.verified && j["feasible"].get<bool>();
  }
  if (method != "ip") {
    j["dual"] = io::to_json(r.dual);
    j["dual_objective"] = dual_objective(inst, r.dual, users);
    j["shares"] = io::to_json(r.shares);
  }
  if (!out_path.empty()) io::write_json_file(out_path, j);
  std::printf("%s: objective=%.10g", method.c_str(), r.objective);
  if (r.selection) std::printf(" opened=%s", r.selection->opened.to_string().c_str());
  if (method != "ip") std::printf(" revenue=%.10g", r.shares.total());
  std::printf(" %s\n", r.verified ? "ok" : "UNVERIFIED");
  return r.verified ? 0 : 1;
}

int cmd_shares(const std::string& in, const std::string& method, const std::vector<std::size_t>& user_list,
               const Common& c, const std::string& out_path) {
  const Instance inst = io::read_instance(in);
  const UserSet users = parse_users(inst, user_list);
  if (method == "ip") throw Error(ErrorCode::kInfeasibleConfig, "method ip produces no shares");
  MethodOutcome r = run_method(inst, users, method, c, "", "");
  io::write_json_file(out_path, io::to_json(r.shares));
  std::printf("%s shares: total=%.10g written to %s\n", r.shares.method.c_str(), r.shares.total(),
              out_path.c_str());
  return 0;
}

int cmd_verify(const std::string& in, const std::string& shares_path, const Common& c,
               const std::string& audit_path) {
  const Instance inst = io::read_instance(in);
  json sj = io::read_json_file(shares_path);
  if (sj.contains("shares") && sj["shares"].is_object()) sj = sj["shares"];
  const CostShares shares = io::shares_from_json(inst, sj);
  const CoreAudit audit = verify_core(inst, shares, c.tol, exact_options(c));
  if (!audit_path.empty()) {
    auto os = open_out(audit_path);
    write_core_audit(os, audit);
  }
  const CoreAuditRecord& w = audit.worst_record();
  std::printf("core audit over %zu coalitions: worst slack %.3g at %s, %s\n", audit.records.size(), w.slack,
              FacilitySet::from_indices(w.users).to_string().c_str(), audit.passed ? "PASS" : "FAIL");
  return audit.passed ? 0 : 1;
}

int cmd_bench(const std::string& config_path, const std::string& out_path, const Common& c,
              const CLI::App& sub, std::size_t jobs, std::optional<std::uint64_t> seed,
              const std::string& profile) {
  bench::BenchConfig cfg = bench::config_from_json(io::read_json_file(config_path));
  if (sub.count("--scale-k")) cfg.scale_k = c.scale_k;
  if (sub.count("--tol")) cfg.tol = c.tol;
  if (sub.count("--audit-cap")) cfg.audit_cap = c.audit_cap;
  if (sub.count("--ip-cap")) cfg.ip_cap = c.ip_cap;
  if (sub.count("--jobs")) cfg.jobs = jobs;
  if (sub.count("--profile")) cfg.profile = profile;
  if (seed) cfg.seeds = {*seed};
  const bench::BenchReport report = bench::run_benchmark(cfg, [](const bench::BenchRow& r) {
    std::printf("%-12s ip=%.4f kc=%.4f gap=%.4f dual=%.4f pd=%.4f gr+=%.4f gr=%.4f %.1fs %s\n", r.source.c_str(),
                r.ip_obj, r.kc_lp, r.kc_gap, r.dual_opt_rev, r.pd_rev, r.greedy_plus_rev, r.greedy_rev,
                r.seconds_total, r.ok() ? "ok" : (r.error.empty() ? "CHECK-FAILED" : r.error.c_str()));
    std::fflush(stdout);
  });
  auto os = open_out(out_path);
  bench::write_csv(os, report);
  std::printf("%zu/%zu instances ordered DUAL-OPT >= PD >= Greedy+ >= Greedy; report in %s\n",
              bench::count_ordered(report), report.rows.size(), out_path.c_str());
  return report.all_ok() ? 0 : 1;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

int cmd_report(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + csv_path);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  bool versioned = false;
  while (std::getline(in, line)) {
    if (line.rfind("# cipshare-bench v1", 0) == 0) versioned = true;
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split_csv_line(line);
    } else {
      rows.push_back(split_csv_line(line));
    }
  }
  if (!versioned) throw Error(ErrorCode::kParseError, csv_path + " is not a cipshare-bench v1 report");
  auto col = [&](const std::string& name) {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (header[k] == name) return k;
    }
    throw Error(ErrorCode::kParseError, "report lacks column " + name);
  };
  const std::vector<std::string> shown = {"ip_obj_norm",  "kc_lp_norm",      "dual_opt_rev_norm",
                                          "pd_obj_norm",  "pd_rev_norm",     "greedy_obj_norm",
                                          "greedy_rev_norm", "greedy_plus_rev_norm"};
  std::printf("%-14s %8s %8s %8s %8s %8s %8s %8s %8s\n", "instance", "IP-Obj", "KC-LP", "DUAL-Rev", "PD-Obj",
              "PD-Rev", "Gr-Obj", "Gr-Rev", "Gr+-Rev");
  bool all_ok = true;
  std::vector<double> sums(shown.size(), 0.0);
  for (const auto& r : rows) {
    std::printf("%-14s", r[col("source")].c_str());
    for (std::size_t k = 0; k < shown.size(); ++k) {
      const double v = std::stod(r[col(shown[k])]);
      sums[k] += v;
      std::printf(" %8.4f", v);
    }
    const bool ok = r[col("error")].empty() && r[col("duality_ok")] == "1" && r[col("core_ok")] == "1";
    all_ok = all_ok && ok;
    std::printf("%s\n", ok ? "" : "  (failed)");
  }
  if (!rows.empty()) {
    std::printf("%-14s", "mean");
    for (double s : sums) std::printf(" %8.4f", s / static_cast<double>(rows.size()));
    std::printf("\n");
  }
  return all_ok ? 0 : 1;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--scale-k", c.scale_k, "Integer scaling factor for greedy and separation")->capture_default_str();
  sub->add_option("--tol", c.tol, "Numerical tolerance for share checks")->capture_default_str();
  sub->add_option("--audit-cap", c.audit_cap, "Largest user count for an exhaustive core audit")
      ->capture_default_str();
  sub->add_option("--ip-cap", c.ip_cap, "Largest facility count for the exact IP")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost sharing for covering integer programs"};
  app.require_subcommand(1);
  Common common;

  std::string profile = "desk";
  std::uint64_t seed = 1;
  std::optional<std::size_t> gen_m, gen_n;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a LoRaWAN coverage instance");
  gen->add_option("--profile", profile, "desk | paper-shaped")->capture_default_str();
  gen->add_option("--seed", seed, "RNG seed")->capture_default_str();
  gen->add_option("-m,--users", gen_m, "Override the user count");
  gen->add_option("-n,--facilities", gen_n, "Override the facility count");
  gen->add_option("-o,--out", gen_out, "Instance file to write")->required();

  std::string instance_path, method = "kclp", out_path, trace_path, cut_log_path;
  std::vector<std::size_t> users;
  auto* solve = app.add_subcommand("solve", "Solve an instance with one method");
  solve->add_option("-i,--instance", instance_path, "Instance file")->required()->check(CLI::ExistingFile);
  solve->add_option("--method", method, "ip | kclp | pd | greedy | greedy+ | mechanism")->capture_default_str();
  solve->add_option("--users", users, "Restrict to these users (default: all)");
  solve->add_option("-o,--out", out_path, "JSON result file");
  solve->add_option("--trace", trace_path, "Primal-dual or greedy trace dump");
  solve->add_option("--cut-log", cut_log_path, "Column generation cut log");
  add_common(solve, common);

  auto* shares = app.add_subcommand("shares", "Compute cost shares");
  std::string shares_method = "dual-opt";
  shares->add_option("-i,--instance", instance_path, "Instance file")->required()->check(CLI::ExistingFile);
  shares->add_option("--method", shares_method, "dual-opt | pd | greedy | greedy+ | mechanism")
      ->capture_default_str();
  shares->add_option("--users", users, "Restrict to these users (default: all)");
  shares->add_option("-o,--out", out_path, "Shares file to write")->required();
  add_common(shares, common);

  std::string shares_path, audit_path;
  auto* verify = app.add_subcommand("verify-core", "Audit cost shares against every coalition");
  verify->add_option("-i,--instance", instance_path, "Instance file")->required()->check(CLI::ExistingFile);
  verify->add_option("-s,--shares", shares_path, "Shares file")->required()->check(CLI::ExistingFile);
  verify->add_option("--audit-out", audit_path, "Per-coalition audit dump");
  add_common(verify, common);

  std::string config_path, csv_path;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> bench_seed;
  auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark described by a config file");
  bench_cmd->add_option("-c,--config", config_path, "Benchmark config (JSON)")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("-o,--out", csv_path, "CSV report")->required();
  bench_cmd->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  bench_cmd->add_option("--seed", bench_seed, "Run only this seed");
  bench_cmd->add_option("--profile", profile, "Override the config profile");
  add_common(bench_cmd, common);

  auto* report = app.add_subcommand("report", "Summarize a benchmark CSV");
  report->add_option("-r,--report", csv_path, "CSV report")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(profile, seed, gen_m, gen_n, gen_out);
    if (*solve) return cmd_solve(instance_path, method, users, common, out_path, trace_path, cut_log_path);
    if (*shares) return cmd_shares(instance_path, shares_method, users, common, out_path);
    if (*verify) return cmd_verify(instance_path, shares_path, common, audit_path);
    if (*bench_cmd) return cmd_bench(config_path, csv_path, common, *bench_cmd, jobs, bench_seed, profile);
    if (*report) return cmd_report(csv_path);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
