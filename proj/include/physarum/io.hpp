// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "physarum/model.hpp"
#include "physarum/solvers.hpp"

namespace physarum {

using nlohmann::json;

// Problems travel in two formats, chosen by extension:
//   .dat-s  sparse SDPA-style text. Matrices are stored exactly as they
//           appear in our primal min form, which deviates from the SDPA
//           dual convention, so the header comment carries the marker
//           "physarum-primal-v1"; files without the marker are rejected
//           rather than guessed at.
//   .json   dense arrays; bit-exact round trips.

inline constexpr const char* kDatSMarker = "physarum-primal-v1";

namespace detail {

inline std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string lower_ext(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".dat-s") return ext;
  // ".dat-s" carries a hyphen, so extension() only sees ".dat-s" as a whole
  // when the stem has no extra dots; fall back to a suffix check.
  std::string p = path;
  for (auto& c : p) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (p.size() >= 6 && p.compare(p.size() - 6, 6, ".dat-s") == 0) return ".dat-s";
  return ext;
}

}  // namespace detail

inline json problem_to_json(const SdpProblem& prob) {
  json j;
  j["format"] = "physarum-sdp-v1";
  j["n"] = prob.n();
  j["m"] = prob.m();
  const auto mat_to_json = [](const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Index jj = 0; jj < m.cols(); ++jj) row.push_back(m(i, jj));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["C"] = mat_to_json(prob.C().mat());
  json as = json::array();
  for (Index l = 0; l < prob.m(); ++l) as.push_back(mat_to_json(prob.A(l).mat()));
  j["A"] = std::move(as);
  j["b"] = std::vector<double>(prob.b().data(), prob.b().data() + prob.b().size());
  if (!prob.meta().empty()) j["meta"] = prob.meta();
  return j;
}

inline SdpProblem problem_from_json(const json& j) {
  if (!j.contains("n") || !j.contains("C") || !j.contains("A") || !j.contains("b"))
    throw std::runtime_error("problem json: missing required field");
  const Index n = j.at("n").get<Index>();
  const auto mat_from_json = [n](const json& rows) {
    if (static_cast<Index>(rows.size()) != n) throw std::runtime_error("problem json: bad matrix");
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i) {
      const auto& row = rows.at(static_cast<size_t>(i));
      if (static_cast<Index>(row.size()) != n) throw std::runtime_error("problem json: bad matrix");
      for (Index jj = 0; jj < n; ++jj) m(i, jj) = row.at(static_cast<size_t>(jj)).get<double>();
    }
    return m;
  };
  const SymMatrix C(mat_from_json(j.at("C")));
  std::vector<SymMatrix> A;
  for (const auto& a : j.at("A")) A.emplace_back(mat_from_json(a));
  const auto bv = j.at("b").get<std::vector<double>>();
  Vector b = Eigen::Map<const Vector>(bv.data(), static_cast<Index>(bv.size()));
  std::map<std::string, double> meta;
  if (j.contains("meta")) meta = j.at("meta").get<std::map<std::string, double>>();
  return SdpProblem(C, std::move(A), std::move(b), std::move(meta));
}

namespace detail {

inline void write_dat_s(const SdpProblem& prob, std::ostream& os) {
  os << '"' << kDatSMarker;
  for (const auto& [k, v] : prob.meta()) os << ' ' << k << '=' << fmt_double(v);
  os << '\n';
  os << prob.m() << '\n' << 1 << '\n' << prob.n() << '\n';
  for (Index l = 0; l < prob.m(); ++l) os << (l ? " " : "") << fmt_double(prob.b()(l));
  os << '\n';
  const auto emit = [&os](Index matno, const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index jj = i; jj < m.cols(); ++jj)
        if (m(i, jj) != 0.0)
          os << matno << " 1 " << i + 1 << ' ' << jj + 1 << ' ' << fmt_double(m(i, jj)) << '\n';
  };
  emit(0, prob.C().mat());
  for (Index l = 0; l < prob.m(); ++l) emit(l + 1, prob.A(l).mat());
}

inline SdpProblem read_dat_s(std::istream& is) {
  std::string line;
  std::string rest;
  bool marker = false;
  std::map<std::string, double> meta;
  // leading comment lines, one of which must carry the format marker
  while (std::getline(is, line)) {
    if (!line.empty() && (line[0] == '"' || line[0] == '*')) {
      if (line.find(kDatSMarker) != std::string::npos) {
        marker = true;
        std::istringstream ls(line.substr(1));
        std::string tok;
        while (ls >> tok) {
          const auto eq = tok.find('=');
          if (eq != std::string::npos && tok != kDatSMarker) {
            try {
              meta[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
            } catch (...) {
            }
          }
        }
      }
      continue;
    }
    rest = line + "\n";
    break;
  }
  if (!marker)
    throw std::runtime_error(
        "dat-s: missing 'physarum-primal-v1' marker; refusing to guess the sign convention "
        "of a third-party SDPA file");
  std::stringstream body;
  body << rest << is.rdbuf();

  long m = 0, nblocks = 0, n = 0;
  if (!(body >> m) || m < 0) throw std::runtime_error("dat-s: bad constraint count");
  if (!(body >> nblocks)) throw std::runtime_error("dat-s: bad block count");
  if (nblocks != 1) throw std::runtime_error("dat-s: exactly one block is supported");
  if (!(body >> n) || n < 1) throw std::runtime_error("dat-s: bad block size");
  Vector b(m);
  for (long l = 0; l < m; ++l)
    if (!(body >> b(l))) throw std::runtime_error("dat-s: too few b values");

  std::vector<Matrix> mats(static_cast<size_t>(m) + 1, Matrix::Zero(n, n));
  std::vector<std::map<std::pair<long, long>, double>> seen(static_cast<size_t>(m) + 1);
  long matno = 0;
  while (body >> matno) {
    long blockno = 0, i = 0, jj = 0;
    double value = 0.0;
    if (!(body >> blockno >> i >> jj >> value))
      throw std::runtime_error("dat-s: truncated entry line");
    if (matno < 0 || matno > m) throw std::runtime_error("dat-s: matrix index out of range");
    if (blockno != 1) throw std::runtime_error("dat-s: entry in nonexistent block");
    if (i < 1 || jj < 1 || i > n || jj > n || i > jj)
      throw std::runtime_error("dat-s: entries must be upper-triangle with 1-based indices");
    auto& dup = seen[static_cast<size_t>(matno)];
    const auto it = dup.find({i, jj});
    if (it != dup.end()) {
      if (it->second != value) throw std::runtime_error("dat-s: conflicting duplicate entry");
      continue;
    }
    dup[{i, jj}] = value;
    mats[static_cast<size_t>(matno)](i - 1, jj - 1) = value;
    mats[static_cast<size_t>(matno)](jj - 1, i - 1) = value;
  }
  if (!body.eof() && body.fail()) throw std::runtime_error("dat-s: malformed entry line");

  std::vector<SymMatrix> A;
  for (long l = 1; l <= m; ++l) A.emplace_back(mats[static_cast<size_t>(l)]);
  return SdpProblem(SymMatrix(mats[0]), std::move(A), std::move(b), std::move(meta));
}

}  // namespace detail

inline void write_problem(const SdpProblem& prob, const std::string& path) {
  std::ofstream ofs(path);
  if (!ofs) throw std::runtime_error("cannot open for writing: " + path);
  const std::string ext = detail::lower_ext(path);
  if (ext == ".dat-s") {
    detail::write_dat_s(prob, ofs);
  } else if (ext == ".json") {
    ofs << problem_to_json(prob).dump(2) << '\n';
  } else {
    throw std::runtime_error("unknown problem format (want .dat-s or .json): " + path);
  }
  if (!ofs) throw std::runtime_error("write failed: " + path);
}

inline SdpProblem read_problem(const std::string& path) {
  std::ifstream ifs(path);
  if (!ifs) throw std::runtime_error("cannot open: " + path);
  const std::string ext = detail::lower_ext(path);
  if (ext == ".dat-s") return detail::read_dat_s(ifs);
  if (ext == ".json") return problem_from_json(json::parse(ifs));
  throw std::runtime_error("unknown problem format (want .dat-s or .json): " + path);
}

// ---------------------------------------------------------------------------
// Run reports

struct RunReport {
  SdpProblem problem;
  std::string problem_path;
  SolverConfig config;
  std::string status;
  long iterations = 0;
  int epochs = 1;
  std::optional<double> eta_used;
  std::optional<double> beta_final;
  double wall_time_sec = 0.0;
  PrimalDualSolution solution;
  double objective = 0.0;
  double dual_objective = 0.0;
  Certificate certificate;
  std::vector<StepRecord> trace;  // down-sampled
  FinalSnapshot final_state;
};

namespace detail {

inline std::vector<StepRecord> downsample(const std::vector<StepRecord>& steps, size_t cap = 10000,
                                          size_t keep_tail = 100) {
  if (steps.size() <= cap) return steps;
  std::vector<StepRecord> out;
  const size_t tail = std::min(keep_tail, steps.size());
  const size_t head = steps.size() - tail;
  const size_t budget = cap - tail;
  const size_t stride = (head + budget - 1) / budget;
  for (size_t i = 0; i < head; i += stride) out.push_back(steps[i]);
  for (size_t i = head; i < steps.size(); ++i) out.push_back(steps[i]);
  return out;
}

inline json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

inline json record_to_json(const StepRecord& r) {
  json j{{"t", r.t},     {"h", r.h},
         {"objective", r.objective}, {"work", r.work},
         {"xdot_norm", r.xdot_norm}, {"lambda_min", r.lambda_min},
         {"residuals", vector_to_json(r.residuals)}};
  if (r.beta) j["beta"] = *r.beta;
  if (r.basis_offdiag) j["basis_offdiag"] = *r.basis_offdiag;
  if (r.basis_size) j["basis_size"] = *r.basis_size;
  return j;
}

inline StepRecord record_from_json(const json& j) {
  StepRecord r;
  r.t = j.at("t").get<double>();
  r.h = j.at("h").get<double>();
  r.objective = j.at("objective").get<double>();
  r.work = j.at("work").get<double>();
  r.xdot_norm = j.at("xdot_norm").get<double>();
  r.lambda_min = j.at("lambda_min").get<double>();
  r.residuals = vector_from_json(j.at("residuals"));
  if (j.contains("beta")) r.beta = j.at("beta").get<double>();
  if (j.contains("basis_offdiag")) r.basis_offdiag = j.at("basis_offdiag").get<double>();
  if (j.contains("basis_size")) r.basis_size = j.at("basis_size").get<int>();
  return r;
}

}  // namespace detail

inline RunReport make_report(const SdpProblem& prob, const std::string& problem_path,
                             const SolverConfig& cfg, const SolveResult& res) {
  RunReport rep{prob,
                problem_path,
                cfg,
                to_string(res.status),
                res.iterations,
                res.epochs,
                res.eta_used,
                res.beta_final,
                res.wall_time_sec,
                res.solution,
                res.solution.objective(prob),
                res.solution.dual_objective(prob),
                res.certificate,
                detail::downsample(res.diagnostics.steps),
                res.diagnostics.final_state};
  return rep;
}

inline json report_to_json(const RunReport& rep) {
  json j;
  j["format"] = "physarum-report-v1";
  j["problem"] = problem_to_json(rep.problem);
  j["problem_path"] = rep.problem_path;
  json cfg{{"ansatz", rep.config.ansatz == ConductanceKind::FirstAnsatz ? "first" : "second"},
           {"algorithm", rep.config.algorithm == Algorithm::Vanilla ? "vanilla" : "modified"},
           {"eps", rep.config.eps},
           {"eps_eig", rep.config.eps_eig},
           {"gamma", rep.config.gamma},
           {"max_iters", rep.config.max_iters},
           {"h_max", rep.config.step.h_max},
           {"safety", rep.config.step.safety},
           {"floor", rep.config.step.floor}};
  if (rep.config.eta) cfg["eta"] = *rep.config.eta;
  j["config"] = std::move(cfg);
  j["status"] = rep.status;
  j["iterations"] = rep.iterations;
  j["epochs"] = rep.epochs;
  if (rep.eta_used) j["eta_used"] = *rep.eta_used;
  if (rep.beta_final) j["beta_final"] = *rep.beta_final;
  j["wall_time_sec"] = rep.wall_time_sec;
  json sol;
  {
    json rows = json::array();
    const Matrix& x = rep.solution.X.mat();
    for (Index i = 0; i < x.rows(); ++i) {
      json row = json::array();
      for (Index jj = 0; jj < x.cols(); ++jj) row.push_back(x(i, jj));
      rows.push_back(std::move(row));
    }
    sol["X"] = std::move(rows);
    sol["p"] = detail::vector_to_json(rep.solution.p);
  }
  j["solution"] = std::move(sol);
  j["objective"] = rep.objective;
  j["dual_objective"] = rep.dual_objective;
  j["certificate"] = json{{"duality_gap", rep.certificate.duality_gap},
                          {"dual_slack_min_eig", rep.certificate.dual_slack_min_eig},
                          {"infeasibility", rep.certificate.infeasibility}};
  json tr = json::array();
  for (const auto& r : rep.trace) tr.push_back(detail::record_to_json(r));
  j["trace"] = std::move(tr);
  json fin{{"t", rep.final_state.t},
           {"objective", rep.final_state.objective},
           {"work", rep.final_state.work},
           {"xdot_norm", rep.final_state.xdot_norm},
           {"lambda_min", rep.final_state.lambda_min},
           {"residuals", detail::vector_to_json(rep.final_state.residuals)}};
  if (rep.final_state.beta) fin["beta"] = *rep.final_state.beta;
  j["final"] = std::move(fin);
  return j;
}

inline RunReport report_from_json(const json& j) {
  if (j.value("format", "") != std::string("physarum-report-v1"))
    throw std::runtime_error("report json: unknown format");
  SdpProblem prob = problem_from_json(j.at("problem"));
  SolverConfig cfg;
  const auto& jc = j.at("config");
  cfg.ansatz = jc.at("ansatz").get<std::string>() == "first" ? ConductanceKind::FirstAnsatz
                                                             : ConductanceKind::SecondAnsatz;
  cfg.algorithm = jc.at("algorithm").get<std::string>() == "vanilla" ? Algorithm::Vanilla
                                                                     : Algorithm::Modified;
  cfg.eps = jc.at("eps").get<double>();
  cfg.eps_eig = jc.at("eps_eig").get<double>();
  cfg.gamma = jc.at("gamma").get<double>();
  cfg.max_iters = jc.at("max_iters").get<long>();
  cfg.step.h_max = jc.at("h_max").get<double>();
  cfg.step.safety = jc.at("safety").get<double>();
  cfg.step.floor = jc.at("floor").get<double>();
  if (jc.contains("eta")) cfg.eta = jc.at("eta").get<double>();

  const auto& jx = j.at("solution").at("X");
  const Index n = static_cast<Index>(jx.size());
  Matrix x(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index jj = 0; jj < n; ++jj)
      x(i, jj) = jx.at(static_cast<size_t>(i)).at(static_cast<size_t>(jj)).get<double>();
  PrimalDualSolution sol{SymMatrix(x), detail::vector_from_json(j.at("solution").at("p"))};

  Certificate cert{j.at("certificate").at("duality_gap").get<double>(),
                   j.at("certificate").at("dual_slack_min_eig").get<double>(),
                   j.at("certificate").at("infeasibility").get<double>()};

  std::vector<StepRecord> trace;
  for (const auto& r : j.at("trace")) trace.push_back(detail::record_from_json(r));

  FinalSnapshot fin;
  const auto& jf = j.at("final");
  fin.t = jf.at("t").get<double>();
  fin.objective = jf.at("objective").get<double>();
  fin.work = jf.at("work").get<double>();
  fin.xdot_norm = jf.at("xdot_norm").get<double>();
  fin.lambda_min = jf.at("lambda_min").get<double>();
  fin.residuals = detail::vector_from_json(jf.at("residuals"));
  if (jf.contains("beta")) fin.beta = jf.at("beta").get<double>();

  RunReport rep{std::move(prob),
                j.value("problem_path", ""),
                cfg,
                j.at("status").get<std::string>(),
                j.at("iterations").get<long>(),
                j.at("epochs").get<int>(),
                j.contains("eta_used") ? std::optional<double>(j.at("eta_used").get<double>())
                                       : std::nullopt,
                j.contains("beta_final") ? std::optional<double>(j.at("beta_final").get<double>())
                                         : std::nullopt,
                j.at("wall_time_sec").get<double>(),
                std::move(sol),
                j.at("objective").get<double>(),
                j.at("dual_objective").get<double>(),
                cert,
                std::move(trace),
                std::move(fin)};
  return rep;
}

inline void write_report(const RunReport& rep, const std::string& path) {
  std::ofstream ofs(path);
  if (!ofs) throw std::runtime_error("cannot open for writing: " + path);
  ofs << report_to_json(rep).dump(2) << '\n';
  if (!ofs) throw std::runtime_error("write failed: " + path);
}

inline RunReport read_report(const std::string& path) {
  std::ifstream ifs(path);
  if (!ifs) throw std::runtime_error("cannot open: " + path);
  return report_from_json(json::parse(ifs));
}

}  // namespace physarum
