#pragma once

#include <optional>
#include <vector>

#include "canlearn/model.hpp"

namespace canlearn {

// First failed bound of the interlacing chain λ_i ≤ κ_i ≤ λ_{i+ℓ−h}
// (indices 0-based here).
struct InterlaceViolation {
  int index = 0;
  enum class Bound { lower, upper } bound = Bound::lower;
  double lambda_i = 0.0;
  double kappa_i = 0.0;
  double lambda_upper = 0.0;
};

struct FeasibilityVerdict {
  bool feasible = true;
  std::optional<InterlaceViolation> first_violation;
};

// Necessary spectral condition for a structure-supported embedding to exist.
// tol is relative to the largest low-level eigenvalue; zero eigenvalues of
// semidefinite inputs participate in the chain.
FeasibilityVerdict check_interlacing(const GaussianMeasure& low,
                                     const GaussianMeasure& high,
                                     double tol = 1e-9);

// True iff all measures share one numerical rank and their descending nonzero
// eigenvalues agree pairwise within rel_tol * the pair's largest eigenvalue.
bool shared_nonzero_spectra(const std::vector<GaussianMeasure>& measures,
                            double rel_tol = 1e-6);

}  // namespace canlearn
