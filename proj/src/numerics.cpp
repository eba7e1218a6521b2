#include "canlearn/numerics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace canlearn {

SymEig sym_eig(const Mat& m) {
  if (m.rows() != m.cols()) throw InvalidMatrix("sym_eig: matrix not square");
  if (!m.allFinite()) throw InvalidMatrix("sym_eig: non-finite entries");
  Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success) throw InvalidMatrix("sym_eig: decomposition failed");
  return SymEig{es.eigenvalues(), es.eigenvectors()};
}

int numerical_rank(const Vec& eigenvalues, double rel_tol) {
  if (eigenvalues.size() == 0) throw InvalidInput("numerical_rank: empty spectrum");
  const double scale =
      std::max(eigenvalues.cwiseAbs().maxCoeff(), std::numeric_limits<double>::epsilon());
  const double thr = rel_tol * scale;
  int rank = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues[i] > thr) ++rank;
  return rank;
}

Mat polar_orthogonal_factor(const Mat& s) {
  if (s.rows() < s.cols()) throw ShapeError("polar_orthogonal_factor: needs rows >= cols");
  Eigen::JacobiSVD<Mat> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma(0) <= 0.0 ||
      sigma(sigma.size() - 1) < 1e-12 * sigma(0))
    throw DegenerateProx("polar_orthogonal_factor: rank-deficient input");
  return svd.matrixU() * svd.matrixV().transpose();
}

BoolMat transitive_closure(const BoolMat& r) {
  const Eigen::Index n = r.rows();
  if (r.cols() != n) throw ShapeError("transitive_closure: matrix not square");
  BoolMat c = r.unaryExpr([](int v) { return v ? 1 : 0; });
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      if (c(i, k))
        for (Eigen::Index j = 0; j < n; ++j)
          if (c(k, j)) c(i, j) = 1;
  return c;
}

BoolMat transitive_reduction(const BoolMat& r) {
  const Eigen::Index n = r.rows();
  if (r.cols() != n) throw ShapeError("transitive_reduction: matrix not square");
  BoolMat c = transitive_closure(r);
  for (Eigen::Index i = 0; i < n; ++i)
    if (c(i, i)) throw NotADag("transitive_reduction: relation contains a cycle");
  BoolMat red = c;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (c(i, j))
        for (Eigen::Index m = 0; m < n; ++m)
          if (m != i && m != j && c(i, m) && c(m, j)) {
            red(i, j) = 0;
            break;
          }
  return red;
}

}  // namespace canlearn
