#include "canlearn/search.hpp"

#include <cstdint>
#include <deque>
#include <fstream>

#include "json.hpp"

namespace canlearn::search {

namespace {

void require_descending(const std::vector<GaussianMeasure>& measures) {
  if (measures.empty()) throw InvalidInput("search: no measures");
  for (std::size_t i = 1; i < measures.size(); ++i)
    if (measures[i].dim >= measures[i - 1].dim)
      throw InvalidInput("search: measures must have strictly descending dims");
}

}  // namespace

BoolMat build_candidates(const std::vector<GaussianMeasure>& measures,
                         double interlace_tol, SearchTrace* trace) {
  require_descending(measures);
  const int n = static_cast<int>(measures.size());
  BoolMat p = BoolMat::Zero(n, n);
  for (int d = 1; d < n; ++d) {
    for (int i = 0; i + d < n; ++i) {
      if (p(i + d, i) == 1) continue;  // implied by earlier stages
      if (check_interlacing(measures[i], measures[i + d], interlace_tol).feasible)
        p(i + d, i) = 1;
    }
    p = transitive_closure(p);
    if (trace) trace->p_history.push_back(p);
  }
  return p;
}

std::pair<CanGraph, SearchTrace> learn_can(const std::vector<GaussianMeasure>& measures,
                                           const StructureMapping& structures,
                                           const SearchConfig& config) {
  SearchTrace trace;
  const BoolMat p = build_candidates(measures, config.interlace_tol, &trace);
  const int n = static_cast<int>(measures.size());

  CanGraph graph;
  graph.measures = measures;
  graph.candidate = p;
  BoolMat accepted = BoolMat::Zero(n, n);
  BoolMat implied = BoolMat::Zero(n, n);

  struct Job {
    int low = 0, high = 0;
    spectral::EdgeProblem problem;
    spectral::SolverConfig cfg;
  };
  // The stub seam stays serial so overrides need not be thread-safe.
  const bool parallel = config.parallel_edges && !config.solver_override;

  for (int d = 1; d < n; ++d) {
    std::deque<Job> jobs;
    for (int i = 0; i + d < n; ++i) {
      const int lo = i, hi = i + d;
      if (p(hi, lo) != 1) continue;
      if (implied(hi, lo) == 1) {
        trace.skipped.push_back({lo, hi, "closure"});
        continue;
      }
      auto it = structures.find({lo, hi});
      if (it == structures.end())
        throw MissingStructure("learn_can: no structure for pair (" +
                               std::to_string(lo) + "," + std::to_string(hi) + ")");
      Job job;
      job.low = lo;
      job.high = hi;
      try {
        job.problem = spectral::build_problem(measures[lo], measures[hi], it->second);
      } catch (const Error&) {
        trace.skipped.push_back({lo, hi, "infeasible"});
        continue;
      }
      job.cfg = config.solver;
      job.cfg.seed = rng::derive(config.solver.seed, rng::kTagEdge,
                                 static_cast<std::uint64_t>(lo),
                                 static_cast<std::uint64_t>(hi));
      if (parallel) job.cfg.parallel = false;  // edge level owns the threads
      jobs.push_back(std::move(job));
    }

    std::vector<spectral::SolverReport> reports(jobs.size());
    std::vector<std::string> errors(jobs.size());
    auto solve_one = [&](std::size_t k) {
      try {
        reports[k] = config.solver_override
                         ? config.solver_override(jobs[k].problem, jobs[k].cfg)
                         : spectral::solve_edge(jobs[k].problem, jobs[k].cfg);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    };
#if CANLEARN_HAVE_OPENMP
    if (parallel && jobs.size() > 1) {
#pragma omp parallel for schedule(dynamic)
      for (std::int64_t k = 0; k < static_cast<std::int64_t>(jobs.size()); ++k)
        solve_one(static_cast<std::size_t>(k));
    } else
#endif
      for (std::size_t k = 0; k < jobs.size(); ++k) solve_one(k);
    for (const std::string& err : errors)
      if (!err.empty()) throw Error("learn_can: solve failed: " + err);

    for (std::size_t k = 0; k < jobs.size(); ++k) {
      trace.solved.push_back({jobs[k].low, jobs[k].high, reports[k]});
      if (reports[k].converged) {
        accepted(jobs[k].high, jobs[k].low) = 1;
        graph.edges.push_back(CanEdge{jobs[k].low, jobs[k].high,
                                      jobs[k].problem.structure, reports[k].map});
      }
    }
    implied = transitive_closure(accepted);
  }

  graph.learned = accepted;
  validate_graph(graph);
  return {std::move(graph), std::move(trace)};
}

std::optional<StiefelMap> composed_map(const CanGraph& graph, int low, int high) {
  const int n = static_cast<int>(graph.measures.size());
  if (low < 0 || high >= n || low >= high) return std::nullopt;
  // BFS over accepted edges from `low` toward coarser nodes; predecessors give
  // a deterministic (lowest-intermediate-first) path.
  std::vector<int> pred(n, -1);
  std::deque<int> frontier{low};
  std::vector<bool> seen(n, false);
  seen[low] = true;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    if (u == high) break;
    for (int v = u + 1; v < n; ++v) {
      if (seen[v] || graph.learned(v, u) != 1) continue;
      seen[v] = true;
      pred[v] = u;
      frontier.push_back(v);
    }
  }
  if (!seen[high]) return std::nullopt;
  std::vector<int> path{high};
  while (path.back() != low) path.push_back(pred[path.back()]);
  // path is coarse→fine; compose fine-side inward
  std::optional<StiefelMap> acc;
  for (std::size_t s = path.size() - 1; s > 0; --s) {
    const int u = path[s], v = path[s - 1];  // edge u (finer) → v (coarser)
    const CanEdge* edge = nullptr;
    for (const CanEdge& e : graph.edges)
      if (e.low == u && e.high == v) edge = &e;
    if (!edge || !edge->map) return std::nullopt;
    acc = acc ? compose(*edge->map, *acc) : *edge->map;
  }
  return acc;
}

Evaluation evaluate_against_truth(const BoolMat& learned, const BoolMat& truth) {
  if (learned.rows() != truth.rows() || learned.cols() != truth.cols())
    throw ShapeError("evaluate_against_truth: size mismatch");
  const BoolMat lc = transitive_closure(learned);
  const BoolMat tc = transitive_closure(truth);
  const int n = static_cast<int>(lc.rows());
  int tp = 0, fp = 0, fn = 0, tn = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const bool got = lc(i, j) == 1, want = tc(i, j) == 1;
      tp += got && want;
      fp += got && !want;
      fn += !got && want;
      tn += !got && !want;
    }
  Evaluation ev;
  ev.tpr = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 1.0;
  ev.fpr = (fp + tn) ? static_cast<double>(fp) / (fp + tn) : 0.0;
  return ev;
}

void save_trace(const SearchTrace& trace, const std::filesystem::path& path) {
  nlohmann::json j;
  j["version"] = 1;
  j["p_history"] = nlohmann::json::array();
  for (const BoolMat& p : trace.p_history) {
    nlohmann::json mat = nlohmann::json::array();
    for (int i = 0; i < p.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < p.cols(); ++k) row.push_back(p(i, k));
      mat.push_back(std::move(row));
    }
    j["p_history"].push_back(std::move(mat));
  }
  j["solved"] = nlohmann::json::array();
  for (const SearchTrace::Solved& s : trace.solved) {
    nlohmann::json row{{"low", s.low},
                       {"high", s.high},
                       {"converged", s.report.converged},
                       {"trial", s.report.trial_index},
                       {"iterations", s.report.iterations},
                       {"residuals", s.report.final_residuals}};
    if (s.report.kl) row["kl"] = *s.report.kl;
    j["solved"].push_back(std::move(row));
  }
  j["skipped"] = nlohmann::json::array();
  for (const SearchTrace::Skipped& s : trace.skipped)
    j["skipped"].push_back({{"low", s.low}, {"high", s.high}, {"reason", s.reason}});

  std::ofstream out(path);
  if (!out) throw IoError("save_trace: cannot open " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw IoError("save_trace: write failed for " + path.string());
}

}  // namespace canlearn::search
