#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "canlearn/model.hpp"
#include "canlearn/rng.hpp"

namespace canlearn::synth {

enum class Topology { chain, star, tree };

Topology parse_topology(const std::string& name);  // UsageError on unknown name
std::string topology_name(Topology t);

struct GenSpec {
  int n_nodes = 2;
  int dim_low = 2;
  int dim_high = 4;  // defaults to 2·n_nodes via make_spec
  Topology topology = Topology::chain;
  std::uint64_t seed = 0;
};

GenSpec make_spec(int n_nodes, Topology topology, std::uint64_t seed);

// Surjective random partition: the first h shuffled rows pin one block each,
// remaining rows land uniformly.
AbstractionStructure sample_partition(int l, int h, rng::Rng& r);
AbstractionStructure sample_partition(int l, int h, std::uint64_t seed);

// Per-column normal draws on the support block, normalized to unit norm;
// disjoint blocks make the columns orthonormal automatically.
StiefelMap sample_stiefel_on_support(const AbstractionStructure& structure, rng::Rng& r);
StiefelMap sample_stiefel_on_support(const AbstractionStructure& structure,
                                     std::uint64_t seed);

// G Gᵀ/(2·dim) + 1e-3·I with G iid standard normal dim×2dim.
GaussianMeasure sample_spd(int dim, rng::Rng& r);
GaussianMeasure sample_spd(int dim, std::uint64_t seed);

struct LocalInstance {
  GaussianMeasure low;
  GaussianMeasure high;  // (B⊙V*)ᵀ Σℓ (B⊙V*): feasible by construction
  AbstractionStructure structure;
  StiefelMap planted;
};

LocalInstance gen_local_instance(int l, int h, std::uint64_t seed);

// Truth network: nodes with distinct dims in [2, 2N] sorted descending,
// topology edges over positions (root = coarsest = last), every closure pair
// carried as an edge with composed structure and map. learned holds the
// reduction relation, candidate the closure. Measures are zero-covariance
// placeholders (sections carry the real ones).
CanGraph gen_can(const GenSpec& spec);

// Root gets an SPD draw; children are pushforwards Σ_child = WΣ_parent Wᵀ
// along reduction edges (BFS from the root). All non-root covariances are
// semidefinite with the root's rank.
std::vector<GaussianMeasure> gen_global_section(const CanGraph& truth,
                                                std::uint64_t seed);

}  // namespace canlearn::synth
