#include "canlearn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace canlearn::metrics {

double kl_divergence_raw(const Mat& w, const GaussianMeasure& low,
                         const GaussianMeasure& high, bool* rank_mismatch) {
  if (w.rows() != low.dim || w.cols() != high.dim)
    throw ShapeError("kl_divergence: map shape mismatch");
  const Mat m = w.transpose() * low.covariance * w;
  const SymEig es = sym_eig(m);
  const int rank_m = numerical_rank(es.eigenvalues);
  if (rank_mismatch) *rank_mismatch = (rank_m != high.rank);

  const double scale_m =
      std::max(es.eigenvalues.cwiseAbs().maxCoeff(), std::numeric_limits<double>::epsilon());
  const double thr_m = 1e-9 * scale_m;
  // pseudo-inverse and gdet from the same spectral cut
  Mat pinv = Mat::Zero(high.dim, high.dim);
  double log_gdet_m = 0.0;
  for (int i = 0; i < high.dim; ++i) {
    const double lam = es.eigenvalues(i);
    if (lam > thr_m) {
      pinv += es.eigenvectors.col(i) * es.eigenvectors.col(i).transpose() / lam;
      log_gdet_m += std::log(lam);
    }
  }
  const double scale_h = std::max(high.eig.eigenvalues.cwiseAbs().maxCoeff(),
                                  std::numeric_limits<double>::epsilon());
  const double thr_h = 1e-9 * scale_h;
  double log_gdet_h = 0.0;
  for (int i = 0; i < high.dim; ++i)
    if (high.eig.eigenvalues(i) > thr_h) log_gdet_h += std::log(high.eig.eigenvalues(i));

  const double value =
      (pinv * high.covariance).trace() + log_gdet_m - log_gdet_h - high.rank;
  return value < 0.0 ? 0.0 : value;
}

double kl_divergence(const StiefelMap& map, const GaussianMeasure& low,
                     const GaussianMeasure& high, bool* rank_mismatch) {
  return kl_divergence_raw(map.effective(), low, high, rank_mismatch);
}

double smoothness_energy(const CanGraph& graph) {
  double sum = 0.0;
  for (const CanEdge& e : graph.edges) {
    if (!e.map) throw MissingMap("smoothness_energy: edge without map");
    sum += kl_divergence(*e.map, graph.measures[e.low], graph.measures[e.high]);
  }
  return sum;
}

double frobenius_up_to_sign(const StiefelMap& estimate, const StiefelMap& truth) {
  if (estimate.v.rows() != truth.v.rows() || estimate.v.cols() != truth.v.cols())
    throw ShapeError("frobenius_up_to_sign: shape mismatch");
  if (estimate.structure.b != truth.structure.b)
    throw StructureMismatch("frobenius_up_to_sign: structures differ");
  const Mat ve = estimate.effective();
  const Mat vt = truth.effective();
  double sq = 0.0;
  for (Eigen::Index j = 0; j < ve.cols(); ++j) {
    const double sign = ve.col(j).dot(vt.col(j)) < 0.0 ? -1.0 : 1.0;
    sq += (sign * ve.col(j) - vt.col(j)).squaredNorm();
  }
  return std::sqrt(sq) / vt.norm();
}

namespace {

int support_counts(const Mat& v, const Mat& b, double zero_tol, int* fp, int* fn) {
  int tp = 0;
  *fp = *fn = 0;
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      const bool pred = std::abs(v(i, j)) > zero_tol;
      const bool truth = b(i, j) == 1.0;
      if (pred && truth) ++tp;
      else if (pred) ++*fp;
      else if (truth) ++*fn;
    }
  return tp;
}

}  // namespace

double f1_structure(const StiefelMap& estimate, const AbstractionStructure& truth,
                    double zero_tol) {
  if (estimate.v.rows() != truth.b.rows() || estimate.v.cols() != truth.b.cols())
    throw ShapeError("f1_structure: shape mismatch");
  int fp = 0, fn = 0;
  const int tp = support_counts(estimate.v, truth.b, zero_tol, &fp, &fn);
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

bool constructiveness(const StiefelMap& estimate, double zero_tol) {
  const Mat& v = estimate.v;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    int nnz = 0;
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      if (std::abs(v(i, j)) > zero_tol) ++nnz;
    if (nnz > 1) return false;
  }
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    int nnz = 0;
    for (Eigen::Index i = 0; i < v.rows(); ++i)
      if (std::abs(v(i, j)) > zero_tol) ++nnz;
    if (nnz < 1) return false;
  }
  return true;
}

}  // namespace canlearn::metrics
