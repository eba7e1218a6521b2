#pragma once

#include <Eigen/Dense>

#include "canlearn/errors.hpp"

namespace canlearn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using BoolMat = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;  // entries 0/1

// Eigendecomposition of a symmetric matrix, eigenvalues ascending,
// column i of eigenvectors paired with eigenvalue i.
struct SymEig {
  Vec eigenvalues;
  Mat eigenvectors;
};

// Symmetrizes as (M + Mᵀ)/2 before decomposing.
SymEig sym_eig(const Mat& m);

// Number of eigenvalues strictly above rel_tol * max(|λ|, machine epsilon).
// Expects ascending input.
int numerical_rank(const Vec& eigenvalues, double rel_tol = 1e-9);

// U Wᵀ from the thin SVD S = U Σ Wᵀ: the Frobenius-nearest point of St(ℓ,h).
// Throws DegenerateProx when σ_min < 1e-12 σ_max (caller retries the trial).
Mat polar_orthogonal_factor(const Mat& s);

// Smallest transitive superset of the relation; idempotent. Works on any
// boolean relation; the search only feeds strictly lower-triangular DAGs.
BoolMat transitive_closure(const BoolMat& r);

// Minimal relation with the same closure. Input must be transitively closed
// and acyclic (NotADag otherwise): removes (i,j) whenever some m gives
// (i,m) and (m,j).
BoolMat transitive_reduction(const BoolMat& r);

}  // namespace canlearn
