#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "canlearn/numerics.hpp"

namespace canlearn {

// Zero-mean Gaussian node stalk: covariance with cached spectrum and rank.
struct GaussianMeasure {
  int dim = 0;
  Mat covariance;
  SymEig eig;
  int rank = 0;
};

// Symmetrizes, eigendecomposes, and rank-annotates; rejects matrices with an
// eigenvalue below -1e-9 * largest.
GaussianMeasure validate_measure(const Mat& covariance);

// Binary partition structure B (ℓ×h, embedding orientation): each low-level
// variable belongs to exactly one high-level block, every block non-empty.
struct AbstractionStructure {
  Mat b;
  int low_dim() const { return static_cast<int>(b.rows()); }
  int high_dim() const { return static_cast<int>(b.cols()); }
};

AbstractionStructure make_structure(const Mat& b);

// Embedding map V with orthonormal columns supported on B; the abstraction is
// the transpose. Column supports are disjoint, so (B⊙V)ᵀ(B⊙V) is diagonal and
// orthonormality reduces to unit column norms.
struct StiefelMap {
  Mat v;  // dense, exactly zero off-support
  AbstractionStructure structure;
  Mat effective() const { return structure.b.cwiseProduct(v); }
};

// Masks v by the support, then enforces the invariants (1e-8 orthonormality).
StiefelMap make_stiefel_map(const Mat& v, const AbstractionStructure& structure);

struct CanEdge {
  int low = 0;   // finer node index (earlier in the descending-dim ordering)
  int high = 0;  // coarser node index
  AbstractionStructure structure;
  std::optional<StiefelMap> map;
};

struct CanGraph {
  std::vector<GaussianMeasure> measures;  // strictly descending dim
  std::vector<CanEdge> edges;
  BoolMat candidate;     // P: entry (coarser, finer), strictly lower triangular
  BoolMat learned;       // A: same convention
  std::string topology;  // optional label carried by generated truths
};

// Checks node ordering and edge index sanity.
void validate_graph(const CanGraph& graph);

// Composition (outer: m→h) ∘ (inner: ℓ→m) → ℓ→h. The boolean structure
// product stays a partition; the map product stays on the Stiefel manifold.
AbstractionStructure compose(const AbstractionStructure& outer,
                             const AbstractionStructure& inner);
StiefelMap compose(const StiefelMap& outer, const StiefelMap& inner);

// Dataset JSON round trip (schema documented in README).
void save_dataset(const CanGraph& graph, const std::filesystem::path& path);
CanGraph load_dataset(const std::filesystem::path& path);

}  // namespace canlearn
