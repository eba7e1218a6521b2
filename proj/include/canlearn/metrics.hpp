#pragma once

#include "canlearn/model.hpp"

namespace canlearn::metrics {

// KL divergence of the abstraction pushforward against the high-level
// measure: Tr(M† Σh) + log gdet(M) − log gdet(Σh) − r_h with M = WᵀΣℓW.
// No ½ factor; pseudo-inverse and gdet share the 1e-9 relative rank cut.
// Negative round-off (≥ −1e-9) clamps to 0. When rank(M) ≠ r_h the value is
// still returned and *rank_mismatch (if given) is set.
double kl_divergence_raw(const Mat& w, const GaussianMeasure& low,
                         const GaussianMeasure& high, bool* rank_mismatch = nullptr);
double kl_divergence(const StiefelMap& map, const GaussianMeasure& low,
                     const GaussianMeasure& high, bool* rank_mismatch = nullptr);

// Objective of the network problem: sum of edge KLs (MissingMap if any edge
// lacks its map).
double smoothness_energy(const CanGraph& graph);

// ‖V̂ − V*‖_F / ‖V*‖_F after flipping each estimated column to nonnegative
// inner product with the truth (disjoint supports make per-column signs
// independently unidentifiable).
double frobenius_up_to_sign(const StiefelMap& estimate, const StiefelMap& truth);

// F1 of the thresholded support of the estimate against the structure.
double f1_structure(const StiefelMap& estimate, const AbstractionStructure& truth,
                    double zero_tol = 1e-6);

// True iff the thresholded support forms a (partial) partition: at most one
// nonzero per row, at least one per column.
bool constructiveness(const StiefelMap& estimate, double zero_tol = 1e-6);

}  // namespace canlearn::metrics
