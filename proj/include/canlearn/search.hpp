#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canlearn/interlace.hpp"
#include "canlearn/model.hpp"
#include "canlearn/spectral.hpp"

namespace canlearn::search {

struct SearchConfig {
  spectral::SolverConfig solver;
  double interlace_tol = 1e-9;
  // Parallelize the independent solves inside one subdiagonal stage; trial-level
  // parallelism is turned off per solve so the two levels don't nest.
  bool parallel_edges = true;
  // Test seam: replaces spectral::solve_edge when set.
  std::function<spectral::SolverReport(const spectral::EdgeProblem&,
                                       const spectral::SolverConfig&)>
      solver_override;
};

struct SearchTrace {
  std::vector<BoolMat> p_history;  // candidate matrix after each stage's closure
  struct Solved {
    int low = 0, high = 0;
    spectral::SolverReport report;
  };
  struct Skipped {
    int low = 0, high = 0;
    std::string reason;  // "closure" | "infeasible"
  };
  std::vector<Solved> solved;
  std::vector<Skipped> skipped;
};

// Candidate relation P from pairwise spectral feasibility. Measures must be in
// strictly descending dim order; entry (coarser, finer) of the returned matrix
// is 1 when the pair passes. Sweeps subdiagonals outward, skips entries already
// implied by the running transitive closure, and closes after each sweep.
BoolMat build_candidates(const std::vector<GaussianMeasure>& measures,
                         double interlace_tol = 1e-9, SearchTrace* trace = nullptr);

using StructureMapping = std::map<std::pair<int, int>, AbstractionStructure>;

// Full network learner: builds P, then walks the subdiagonal stages launching
// one solve per not-yet-implied candidate (edge seed derived from the base seed
// and the node pair). Edges implied by the closure of the accepted relation are
// skipped, never solved. Throws MissingStructure when a candidate pair has no
// entry in `structures`.
std::pair<CanGraph, SearchTrace> learn_can(const std::vector<GaussianMeasure>& measures,
                                           const StructureMapping& structures,
                                           const SearchConfig& config);

// Composition of learned maps along a path of accepted edges, or nullopt when
// the pair is not connected in the learned relation.
std::optional<StiefelMap> composed_map(const CanGraph& graph, int low, int high);

struct Evaluation {
  double fpr = 0.0;
  double tpr = 1.0;
};

// Compares transitive closures over all strictly-lower-triangular pairs.
// Degenerate denominators give tpr = 1 (nothing to recover) or fpr = 0.
Evaluation evaluate_against_truth(const BoolMat& learned, const BoolMat& truth);

void save_trace(const SearchTrace& trace, const std::filesystem::path& path);

}  // namespace canlearn::search
