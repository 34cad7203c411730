// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "physarum/io.hpp"
#include "physarum/probgen.hpp"
#include "physarum/solvers.hpp"

namespace physarum {

namespace cli_detail {

struct SolveFlags {
  std::string ansatz = "first";
  std::string algorithm = "vanilla";
  double gamma = 0.01;
  double eps = 1e-8;
  double eps_eig = 1e-8;
  std::optional<double> eta;
  long max_iters = 200000;
};

inline void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--ansatz", f.ansatz, "Conductance ansatz")
      ->check(CLI::IsMember({"first", "second"}));
  cmd->add_option("--algorithm", f.algorithm, "Discrete algorithm")
      ->check(CLI::IsMember({"vanilla", "modified"}));
  cmd->add_option("--gamma", f.gamma, "Augmentation scale (vanilla first ansatz)");
  cmd->add_option("--eps", f.eps, "Convergence threshold on ||Xdot||_F");
  cmd->add_option("--eps-eig", f.eps_eig, "Eigenvalue floor for epoch restarts");
  cmd->add_option("--eta", [&f](const std::vector<std::string>& v) {
        f.eta = std::stod(v.at(0));
        return true;
      },
      "Initial scale for the modified solver");
  cmd->add_option("--max-iters", f.max_iters, "Iteration budget");
}

inline SolverConfig to_config(const SolveFlags& f) {
  SolverConfig cfg;
  cfg.ansatz = f.ansatz == "first" ? ConductanceKind::FirstAnsatz : ConductanceKind::SecondAnsatz;
  cfg.algorithm = f.algorithm == "vanilla" ? Algorithm::Vanilla : Algorithm::Modified;
  cfg.gamma = f.gamma;
  cfg.eps = f.eps;
  cfg.eps_eig = f.eps_eig;
  cfg.eta = f.eta;
  cfg.max_iters = f.max_iters;
  return cfg;
}

inline SolveResult run_solver(const SdpProblem& prob, const SolverConfig& cfg) {
  return cfg.algorithm == Algorithm::Vanilla ? vanilla_solve(prob, cfg)
                                             : modified_solve(prob, cfg);
}

inline void print_summary(std::ostream& os, const SolveResult& res, const SdpProblem& prob) {
  os << "status: " << to_string(res.status) << "\n";
  os << "iterations: " << res.iterations << "  epochs: " << res.epochs
     << "  wall_time_sec: " << res.wall_time_sec << "\n";
  os << "objective: " << res.solution.objective(prob)
     << "  dual_objective: " << res.solution.dual_objective(prob) << "\n";
  os << "certificate: duality_gap=" << res.certificate.duality_gap
     << " dual_slack_min_eig=" << res.certificate.dual_slack_min_eig
     << " infeasibility=" << res.certificate.infeasibility << "\n";
  if (res.beta_final) os << "beta_final: " << *res.beta_final << "\n";
  if (res.eta_used) os << "eta_used: " << *res.eta_used << "\n";
}

inline bool close(double a, double b, double scale = 1e-9) {
  return std::abs(a - b) <= scale * (1.0 + std::max(std::abs(a), std::abs(b)));
}

struct SweepRow {
  std::string file;
  std::string status = "error";
  std::string error;
  double objective = 0.0;
  double gap = 0.0;
  double infeas = 0.0;
  std::optional<double> beta;
  double seconds = 0.0;
};

inline unsigned sweep_threads(size_t jobs) {
  unsigned cap = std::thread::hardware_concurrency();
  if (cap == 0) cap = 1;
  if (const char* env = std::getenv("PHYSARUM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) cap = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<size_t>(cap, std::max<size_t>(jobs, 1)));
}

}  // namespace cli_detail

/// Entry point shared by the command-line binary and the tests. args omit
/// the program name. Returns 0 on convergence/verification, 2 on
/// NOT_CONVERGED or failed verification, 1 on usage or I/O errors.
inline int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Physarum projection-dynamics solver for positive semidefinite programs"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a problem instance");
  std::string scheme;
  int gen_n = 1, gen_m = 1;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("scheme", scheme, "Instance family")
      ->required()
      ->check(CLI::IsMember({"random", "vertex-cover", "max-cut"}));
  gen->add_option("--n", gen_n, "Dimension (random) or vertex count (graphs)")->required();
  gen->add_option("--m", gen_m, "Constraint count (random) or edge count (graphs)")->required();
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "Output path (.dat-s or .json)")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Solve a problem file");
  std::string solve_path, report_path;
  cli_detail::SolveFlags sf;
  solve->add_option("path", solve_path, "Problem file")->required();
  cli_detail::add_solve_flags(solve, sf);
  solve->add_option("--report", report_path, "Write a run report (json)");

  // check
  auto* check = app.add_subcommand("check", "Re-verify the certificates in a run report");
  std::string check_path;
  check->add_option("report", check_path, "Report file")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Batch-solve every problem file in a directory");
  std::string sweep_dir, sweep_report_dir;
  cli_detail::SolveFlags swf;
  sweep->add_option("dir", sweep_dir, "Directory of .dat-s / .json problems")->required();
  cli_detail::add_solve_flags(sweep, swf);
  sweep->add_option("--report-dir", sweep_report_dir, "Write per-run reports here");

  std::vector<const char*> argv;
  argv.push_back("physarum");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      GenSpec gs;
      gs.scheme = scheme == "random"        ? GenSpec::Scheme::RandomPositive
                  : scheme == "vertex-cover" ? GenSpec::Scheme::VertexCover
                                             : GenSpec::Scheme::MaxCut;
      gs.n = gen_n;
      gs.m = gen_m;
      gs.seed = gen_seed;
      write_problem(generate(gs), gen_out);
      std::cout << "wrote " << gen_out << "\n";
      return 0;
    }

    if (solve->parsed()) {
      const SdpProblem prob = read_problem(solve_path);
      const SolverConfig cfg = cli_detail::to_config(sf);
      const SolveResult res = cli_detail::run_solver(prob, cfg);
      cli_detail::print_summary(std::cout, res, prob);
      if (!report_path.empty()) write_report(make_report(prob, solve_path, cfg, res), report_path);
      return res.status == TerminationStatus::Converged ? 0 : 2;
    }

    if (check->parsed()) {
      const RunReport rep = read_report(check_path);
      bool ok = true;
      const auto complain = [&ok](const std::string& what, double stored, double recomputed) {
        std::cout << "MISMATCH " << what << ": stored " << stored << " recomputed " << recomputed
                  << "\n";
        ok = false;
      };
      const double obj = rep.solution.objective(rep.problem);
      if (!cli_detail::close(obj, rep.objective)) complain("objective", rep.objective, obj);
      const double dobj = rep.solution.dual_objective(rep.problem);
      if (!cli_detail::close(dobj, rep.dual_objective))
        complain("dual_objective", rep.dual_objective, dobj);
      const Certificate cert = certify(rep.problem, rep.solution);
      if (!cli_detail::close(cert.duality_gap, rep.certificate.duality_gap))
        complain("duality_gap", rep.certificate.duality_gap, cert.duality_gap);
      if (!cli_detail::close(cert.dual_slack_min_eig, rep.certificate.dual_slack_min_eig))
        complain("dual_slack_min_eig", rep.certificate.dual_slack_min_eig,
                 cert.dual_slack_min_eig);
      if (!cli_detail::close(cert.infeasibility, rep.certificate.infeasibility))
        complain("infeasibility", rep.certificate.infeasibility, cert.infeasibility);
      if (rep.status != "converged") {
        std::cout << "run did not converge (status: " << rep.status << ")\n";
        ok = false;
      }
      std::cout << (ok ? "verified" : "verification FAILED") << "\n";
      return ok ? 0 : 2;
    }

    if (sweep->parsed()) {
      std::vector<std::string> files;
      for (const auto& entry : std::filesystem::directory_iterator(sweep_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string p = entry.path().string();
        const std::string ext = detail::lower_ext(p);
        if (ext == ".dat-s" || ext == ".json") files.push_back(p);
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) {
        std::cerr << "sweep: no problem files in " << sweep_dir << "\n";
        return 1;
      }
      const SolverConfig cfg = cli_detail::to_config(swf);
      std::vector<cli_detail::SweepRow> rows(files.size());
      std::atomic<size_t> next{0};
      const unsigned nthreads = cli_detail::sweep_threads(files.size());
      const auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
          cli_detail::SweepRow row;
          row.file = std::filesystem::path(files[i]).filename().string();
          try {
            const SdpProblem prob = read_problem(files[i]);
            const SolveResult res = cli_detail::run_solver(prob, cfg);
            row.status = to_string(res.status);
            row.objective = res.solution.objective(prob);
            row.gap = res.certificate.duality_gap;
            row.infeas = res.certificate.infeasibility;
            row.beta = res.beta_final;
            row.seconds = res.wall_time_sec;
            if (!sweep_report_dir.empty()) {
              const auto out = std::filesystem::path(sweep_report_dir) /
                               (std::filesystem::path(files[i]).stem().string() + ".report.json");
              write_report(make_report(prob, files[i], cfg, res), out.string());
            }
          } catch (const std::exception& e) {
            row.error = e.what();
          }
          rows[i] = std::move(row);
        }
      };
      std::vector<std::thread> pool;
      for (unsigned ti = 0; ti + 1 < nthreads; ++ti) pool.emplace_back(worker);
      worker();
      for (auto& th : pool) th.join();

      size_t accepted = 0, converged = 0;
      double total_time = 0.0, max_gap_accepted = 0.0, max_infeas = 0.0, max_beta = 0.0;
      bool any_beta = false;
      std::printf("%-28s %-10s %12s %12s %12s %10s\n", "file", "status", "gap", "infeas", "beta",
                  "time(s)");
      for (const auto& row : rows) {
        if (!row.error.empty()) {
          std::printf("%-28s %-10s %s\n", row.file.c_str(), "error", row.error.c_str());
          continue;
        }
        char betabuf[32];
        if (row.beta)
          std::snprintf(betabuf, sizeof(betabuf), "%12.3e", *row.beta);
        else
          std::snprintf(betabuf, sizeof(betabuf), "%12s", "-");
        std::printf("%-28s %-10s %12.3e %12.3e %s %10.3f\n", row.file.c_str(), row.status.c_str(),
                    row.gap, row.infeas, betabuf, row.seconds);
        total_time += row.seconds;
        max_infeas = std::max(max_infeas, row.infeas);
        if (row.beta) {
          any_beta = true;
          max_beta = std::max(max_beta, std::abs(*row.beta));
        }
        if (row.status == std::string("converged")) ++converged;
        if (row.gap < 1e-2) {
          ++accepted;
          max_gap_accepted = std::max(max_gap_accepted, row.gap);
        }
      }
      std::printf("\naccepted (gap < 1e-2): %zu/%zu\n", accepted, rows.size());
      std::printf("average time: %.3f s\n", total_time / static_cast<double>(rows.size()));
      std::printf("max gap among accepted: %.3e\n", max_gap_accepted);
      std::printf("max infeasibility: %.3e\n", max_infeas);
      if (any_beta) std::printf("max final beta: %.3e\n", max_beta);
      return converged == rows.size() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace physarum
