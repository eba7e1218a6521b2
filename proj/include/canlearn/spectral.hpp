#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "canlearn/model.hpp"
#include "canlearn/rng.hpp"

namespace canlearn::spectral {

// Per-edge feasibility problem: find V ∈ St(ℓ,h) supported on B and
// T ∈ St(r_ℓ,r_h) with T = Aᵀ(B⊙V)C. A carries the low-level spectrum
// (A Aᵀ = Σℓ); C whitens the high level (Cᵀ Σh C = I), which is what makes
// orthonormality of T equivalent to the covariance-matching condition.
struct EdgeProblem {
  GaussianMeasure low;
  GaussianMeasure high;
  AbstractionStructure structure;
  Mat a_factor;  // ℓ × r_ℓ
  Mat c_factor;  // h × r_h
  int r_low = 0;
  int r_high = 0;

  // cached constants for the V-update (the normal matrix never changes)
  std::vector<std::pair<int, int>> support;  // column-major (row, col) list
  Eigen::LLT<Mat> v_normal;                  // factor of I + K_B K_Bᵀ
};

EdgeProblem build_problem(const GaussianMeasure& low, const GaussianMeasure& high,
                          const AbstractionStructure& structure);

struct SolverState {
  Mat v, y, psi;  // ℓ×h
  Mat t, upsilon; // r_ℓ×r_h
  int iter = 0;
};

struct SolverConfig {
  int max_iter = 1000;
  double tol = 1e-3;
  int ntrials = 10;
  std::uint64_t seed = 0;
  bool kl_report = false;
  bool parallel = true;  // chunked OpenMP over trials; reports match serial
};

// Order: primal ‖B⊙V−Y‖, primal ‖T−Aᵀ(B⊙V)C‖, dual ‖ΔY‖, dual ‖ΔT‖ (Frobenius).
using Residuals = std::array<double, 4>;

struct SolverReport {
  bool converged = false;
  int trial_index = 0;  // 1-based; best trial when not converged
  int iterations = 0;
  Residuals final_residuals{};
  std::optional<double> kl;
  std::optional<StiefelMap> map;
};

// One ADMM sweep each; see the SolverState/EdgeProblem docs for conventions.
Mat update_v(const SolverState& state, const EdgeProblem& problem);
Mat update_y(const SolverState& state, const EdgeProblem& problem);
Mat update_t(const SolverState& state, const EdgeProblem& problem);
std::pair<Mat, Mat> update_duals(const SolverState& state, const EdgeProblem& problem);
Residuals residuals(const SolverState& prev, const SolverState& curr,
                    const EdgeProblem& problem);

// Random start: per-block normalized normal V (a Stiefel point by disjoint
// supports), Y = B⊙V, T = polar(Aᵀ(B⊙V)C), zero duals.
SolverState init_state(const EdgeProblem& problem, rng::Rng& r);

// Runs one trial from the given state; returns true on residual convergence.
bool run_trial(const EdgeProblem& problem, const SolverConfig& config,
               SolverState& state, Residuals& out);

// Up to ntrials seeded restarts; stops at the first convergent trial and
// reports it (serial and parallel paths return identical reports).
SolverReport solve_edge(const EdgeProblem& problem, const SolverConfig& config);

}  // namespace canlearn::spectral
