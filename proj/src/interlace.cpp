#include "canlearn/interlace.hpp"

#include <algorithm>
#include <limits>

namespace canlearn {

FeasibilityVerdict check_interlacing(const GaussianMeasure& low,
                                     const GaussianMeasure& high, double tol) {
  const int l = low.dim, h = high.dim;
  if (l <= h) throw ShapeError("check_interlacing: needs low dim > high dim");
  const Vec& lambda = low.eig.eigenvalues;   // ascending, length ℓ
  const Vec& kappa = high.eig.eigenvalues;   // ascending, length h
  const double scale =
      std::max(lambda.cwiseAbs().maxCoeff(), std::numeric_limits<double>::epsilon());
  const double slack = tol * scale;
  FeasibilityVerdict v;
  for (int i = 0; i < h; ++i) {
    const double lo = lambda(i), hi = lambda(i + l - h), k = kappa(i);
    if (k < lo - slack) {
      v.feasible = false;
      v.first_violation =
          InterlaceViolation{i, InterlaceViolation::Bound::lower, lo, k, hi};
      return v;
    }
    if (k > hi + slack) {
      v.feasible = false;
      v.first_violation =
          InterlaceViolation{i, InterlaceViolation::Bound::upper, lo, k, hi};
      return v;
    }
  }
  return v;
}

bool shared_nonzero_spectra(const std::vector<GaussianMeasure>& measures,
                            double rel_tol) {
  if (measures.size() < 2)
    throw InvalidInput("shared_nonzero_spectra: needs at least two measures");
  const int k = measures.front().rank;
  for (const GaussianMeasure& m : measures)
    if (m.rank != k) return false;
  // descending nonzero eigenvalues per measure
  auto top = [&](const GaussianMeasure& m, int i) {
    return m.eig.eigenvalues(m.dim - 1 - i);
  };
  for (std::size_t a = 0; a + 1 < measures.size(); ++a)
    for (std::size_t b = a + 1; b < measures.size(); ++b) {
      const double scale = std::max(top(measures[a], 0), top(measures[b], 0));
      for (int i = 0; i < k; ++i)
        if (std::abs(top(measures[a], i) - top(measures[b], i)) > rel_tol * scale)
          return false;
    }
  return true;
}

}  // namespace canlearn
