#include "canlearn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef CANLEARN_HAVE_OPENMP
#include <omp.h>
#endif

#include "canlearn/metrics.hpp"

namespace canlearn::spectral {

namespace {

// Columns of the factor are eigenvector * λ^{±1/2}, strongest eigenvalue first.
Mat spectrum_factor(const GaussianMeasure& m, int rank, bool whiten) {
  Mat f(m.dim, rank);
  for (int c = 0; c < rank; ++c) {
    const int src = m.dim - 1 - c;  // ascending storage → descending pick
    const double lam = m.eig.eigenvalues(src);
    const double scale = whiten ? 1.0 / std::sqrt(lam) : std::sqrt(lam);
    f.col(c) = m.eig.eigenvectors.col(src) * scale;
  }
  return f;
}

}  // namespace

EdgeProblem build_problem(const GaussianMeasure& low, const GaussianMeasure& high,
                          const AbstractionStructure& structure) {
  if (structure.low_dim() != low.dim || structure.high_dim() != high.dim)
    throw StructureMismatch("build_problem: structure dims mismatch measures");
  if (low.rank < high.rank)
    throw RankOrderViolation("build_problem: low rank < high rank");

  EdgeProblem p;
  p.low = low;
  p.high = high;
  p.structure = structure;
  p.r_low = low.rank;
  p.r_high = high.rank;
  p.a_factor = spectrum_factor(low, p.r_low, /*whiten=*/false);
  p.c_factor = spectrum_factor(high, p.r_high, /*whiten=*/true);

  const int l = low.dim, h = high.dim;
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < l; ++i)
      if (structure.b(i, j) == 1.0) p.support.emplace_back(i, j);

  // K_B row for support entry (i,j) is C.row(j) ⊗ A.row(i), so the Gram matrix
  // factors entrywise: (K_B K_Bᵀ)[s,s'] = (A Aᵀ)(i_s,i_s') (C Cᵀ)(j_s,j_s').
  const Mat aat = p.a_factor * p.a_factor.transpose();
  const Mat cct = p.c_factor * p.c_factor.transpose();
  const int ns = static_cast<int>(p.support.size());
  Mat normal = Mat::Identity(ns, ns);
  for (int s = 0; s < ns; ++s)
    for (int s2 = 0; s2 < ns; ++s2)
      normal(s, s2) += aat(p.support[s].first, p.support[s2].first) *
                       cct(p.support[s].second, p.support[s2].second);
  p.v_normal.compute(normal);
  if (p.v_normal.info() != Eigen::Success)
    throw InvalidMatrix("build_problem: V-update normal matrix not SPD");
  return p;
}

Mat update_v(const SolverState& state, const EdgeProblem& problem) {
  // right-hand side b = vec(Y − Ψ) + vec(A(T − Υ)Cᵀ), restricted to the support
  const Mat lhs = state.y - state.psi;
  const Mat rhs = problem.a_factor * (state.t - state.upsilon) *
                  problem.c_factor.transpose();
  const int ns = static_cast<int>(problem.support.size());
  Vec b(ns);
  for (int s = 0; s < ns; ++s) {
    const auto [i, j] = problem.support[s];
    b(s) = lhs(i, j) + rhs(i, j);
  }
  const Vec x = problem.v_normal.solve(b);
  Mat v = Mat::Zero(problem.low.dim, problem.high.dim);
  for (int s = 0; s < ns; ++s) v(problem.support[s].first, problem.support[s].second) = x(s);
  return v;
}

Mat update_y(const SolverState& state, const EdgeProblem& problem) {
  return polar_orthogonal_factor(problem.structure.b.cwiseProduct(state.v) + state.psi);
}

Mat update_t(const SolverState& state, const EdgeProblem& problem) {
  const Mat w = problem.structure.b.cwiseProduct(state.v);
  return polar_orthogonal_factor(problem.a_factor.transpose() * w * problem.c_factor +
                                 state.upsilon);
}

std::pair<Mat, Mat> update_duals(const SolverState& state, const EdgeProblem& problem) {
  const Mat w = problem.structure.b.cwiseProduct(state.v);
  const Mat awc = problem.a_factor.transpose() * w * problem.c_factor;
  return {state.psi + (w - state.y), state.upsilon + (awc - state.t)};
}

Residuals residuals(const SolverState& prev, const SolverState& curr,
                    const EdgeProblem& problem) {
  const Mat w = problem.structure.b.cwiseProduct(curr.v);
  const Mat awc = problem.a_factor.transpose() * w * problem.c_factor;
  return {(w - curr.y).norm(), (curr.t - awc).norm(), (curr.y - prev.y).norm(),
          (curr.t - prev.t).norm()};
}

SolverState init_state(const EdgeProblem& problem, rng::Rng& r) {
  const int l = problem.low.dim, h = problem.high.dim;
  Mat v = Mat::Zero(l, h);
  for (int j = 0; j < h; ++j) {
    double norm2 = 0.0;
    for (int i = 0; i < l; ++i)
      if (problem.structure.b(i, j) == 1.0) {
        v(i, j) = r.normal();
        norm2 += v(i, j) * v(i, j);
      }
    if (norm2 <= 0.0) throw DegenerateProx("init_state: zero column draw");
    v.col(j) /= std::sqrt(norm2);
  }
  SolverState s;
  s.v = v;
  s.y = problem.structure.b.cwiseProduct(v);
  s.t = polar_orthogonal_factor(problem.a_factor.transpose() * s.y * problem.c_factor);
  s.psi = Mat::Zero(l, h);
  s.upsilon = Mat::Zero(problem.r_low, problem.r_high);
  s.iter = 0;
  return s;
}

bool run_trial(const EdgeProblem& problem, const SolverConfig& config,
               SolverState& state, Residuals& out) {
  out = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (int k = 0; k < config.max_iter; ++k) {
    state.v = update_v(state, problem);
    const Mat w = problem.structure.b.cwiseProduct(state.v);
    const Mat awc = problem.a_factor.transpose() * w * problem.c_factor;
    const Mat y_new = polar_orthogonal_factor(w + state.psi);
    const Mat t_new = polar_orthogonal_factor(awc + state.upsilon);
    out = {(w - y_new).norm(), (t_new - awc).norm(), (y_new - state.y).norm(),
           (t_new - state.t).norm()};
    state.psi += w - y_new;
    state.upsilon += awc - t_new;
    state.y = y_new;
    state.t = t_new;
    state.iter = k + 1;
    if (*std::max_element(out.begin(), out.end()) <= config.tol) return true;
  }
  return false;
}

namespace {

struct TrialResult {
  bool ran = false;
  bool converged = false;
  int iterations = 0;
  Residuals res{std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity()};
  Mat v;  // kept only to extract the map of the winning trial
};

TrialResult execute_trial(const EdgeProblem& problem, const SolverConfig& config,
                          std::uint64_t trial_seed) {
  TrialResult r;
  r.ran = true;
  try {
    rng::Rng stream(trial_seed);
    SolverState state = init_state(problem, stream);
    r.converged = run_trial(problem, config, state, r.res);
    r.iterations = state.iter;
    r.v = state.v;
  } catch (const DegenerateProx&) {
    // retryable: the trial counts as non-convergent, the next seed differs
    r.converged = false;
  }
  return r;
}

double worst(const Residuals& r) { return *std::max_element(r.begin(), r.end()); }

SolverReport finalize(const EdgeProblem& problem, const SolverConfig& config,
                      const TrialResult& r, int trial_index) {
  SolverReport rep;
  rep.converged = r.converged;
  rep.trial_index = trial_index + 1;
  rep.iterations = r.iterations;
  rep.final_residuals = r.res;
  if (r.converged) {
    // project residual-level orthonormality error off the returned map
    Mat v = polar_orthogonal_factor(problem.structure.b.cwiseProduct(r.v));
    rep.map = make_stiefel_map(v, problem.structure);
    if (config.kl_report)
      rep.kl = metrics::kl_divergence(*rep.map, problem.low, problem.high);
  }
  return rep;
}

}  // namespace

SolverReport solve_edge(const EdgeProblem& problem, const SolverConfig& config) {
  if (config.ntrials < 1 || config.max_iter < 1 || config.tol <= 0.0)
    throw InvalidInput("solve_edge: bad config");
  std::vector<std::uint64_t> seeds(config.ntrials);
  for (int j = 0; j < config.ntrials; ++j)
    seeds[j] = rng::derive(config.seed, rng::kTagTrial, static_cast<std::uint64_t>(j));

  std::vector<TrialResult> results(config.ntrials);
  int chunk = 1;
#ifdef CANLEARN_HAVE_OPENMP
  if (config.parallel) chunk = std::max(1, omp_get_max_threads());
#endif

  int first_converged = -1;
  for (int base = 0; base < config.ntrials && first_converged < 0; base += chunk) {
    const int end = std::min(config.ntrials, base + chunk);
#ifdef CANLEARN_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (config.parallel && end - base > 1)
#endif
    for (int j = base; j < end; ++j) results[j] = execute_trial(problem, config, seeds[j]);
    for (int j = base; j < end; ++j)
      if (results[j].converged) {
        first_converged = j;
        break;
      }
  }

  if (first_converged >= 0)
    return finalize(problem, config, results[first_converged], first_converged);

  int best = 0;
  for (int j = 1; j < config.ntrials; ++j)
    if (worst(results[j].res) < worst(results[best].res)) best = j;
  return finalize(problem, config, results[best], best);
}

}  // namespace canlearn::spectral
