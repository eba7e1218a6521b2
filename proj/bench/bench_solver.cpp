// Timing comparison of the serial and OpenMP paths. Both must return the
// same reports; this target exists to show the speedup, not to test.
//
// Usage: bench_solver [repeats]
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "canlearn/rng.hpp"
#include "canlearn/search.hpp"
#include "canlearn/spectral.hpp"
#include "canlearn/synth.hpp"

#if CANLEARN_HAVE_OPENMP
#include <omp.h>
#endif

using namespace canlearn;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct EdgeCase {
  const char* name;
  int l, h;
  int ntrials;
  std::uint64_t seed;
};

void bench_solve_edge(int repeats) {
  const std::vector<EdgeCase> cases{
      {"planted (12,4), 32 trials", 12, 4, 32, 1001},
      {"planted (12,6), 32 trials", 12, 6, 32, 1002},
      {"planted (16,8), 16 trials", 16, 8, 16, 1003},
  };
  std::printf("%-28s %12s %12s %9s %8s\n", "solve_edge", "serial (s)",
              "parallel (s)", "speedup", "match");
  for (const EdgeCase& ec : cases) {
    const synth::LocalInstance inst = synth::gen_local_instance(ec.l, ec.h, ec.seed);
    const spectral::EdgeProblem problem =
        spectral::build_problem(inst.low, inst.high, inst.structure);
    spectral::SolverConfig cfg;
    cfg.ntrials = ec.ntrials;
    cfg.seed = ec.seed;
    cfg.kl_report = true;

    double serial = 0.0, parallel = 0.0;
    bool match = true;
    for (int rep = 0; rep < repeats; ++rep) {
      cfg.parallel = false;
      auto t0 = Clock::now();
      const spectral::SolverReport a = spectral::solve_edge(problem, cfg);
      serial += seconds_since(t0);

      cfg.parallel = true;
      t0 = Clock::now();
      const spectral::SolverReport b = spectral::solve_edge(problem, cfg);
      parallel += seconds_since(t0);

      match = match && a.converged == b.converged && a.trial_index == b.trial_index &&
              a.iterations == b.iterations &&
              a.final_residuals == b.final_residuals;
    }
    std::printf("%-28s %12.4f %12.4f %8.2fx %8s\n", ec.name, serial / repeats,
                parallel / repeats, serial / parallel,
                match ? "yes" : "NO");
  }
}

void bench_learn_can(int repeats) {
  std::printf("\n%-28s %12s %12s %9s %8s\n", "learn_can (n=6)", "serial (s)",
              "parallel (s)", "speedup", "match");
  const std::vector<std::pair<const char*, synth::Topology>> topologies{
      {"chain", synth::Topology::chain},
      {"star", synth::Topology::star},
      {"tree", synth::Topology::tree},
  };
  for (const auto& [name, topo] : topologies) {
    const std::uint64_t seed = rng::derive(2024, static_cast<std::uint64_t>(topo));
    const CanGraph truth = synth::gen_can(synth::make_spec(6, topo, seed));
    const std::vector<GaussianMeasure> measures =
        synth::gen_global_section(truth, rng::derive(seed, rng::kTagSection, 0));

    search::StructureMapping structures;
    for (const CanEdge& e : truth.edges) structures[{e.low, e.high}] = e.structure;
    const int n = static_cast<int>(truth.measures.size());
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (!structures.count({i, j}))
          structures[{i, j}] = synth::sample_partition(
              truth.measures[i].dim, truth.measures[j].dim,
              rng::derive(seed, rng::kTagStructure, static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(j)));

    search::SearchConfig config;
    config.solver.ntrials = 32;
    config.solver.seed = seed;

    double serial = 0.0, parallel = 0.0;
    bool match = true;
    for (int rep = 0; rep < repeats; ++rep) {
      config.parallel_edges = false;
      config.solver.parallel = false;
      auto t0 = Clock::now();
      const auto [ga, ta] = search::learn_can(measures, structures, config);
      serial += seconds_since(t0);

      config.parallel_edges = true;
      config.solver.parallel = true;
      t0 = Clock::now();
      const auto [gb, tb] = search::learn_can(measures, structures, config);
      parallel += seconds_since(t0);

      match = match && (ga.learned - gb.learned).cwiseAbs().sum() == 0 &&
              ta.solved.size() == tb.solved.size() &&
              ta.skipped.size() == tb.skipped.size();
    }
    std::printf("%-28s %12.4f %12.4f %8.2fx %8s\n", name, serial / repeats,
                parallel / repeats, serial / parallel, match ? "yes" : "NO");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
#if CANLEARN_HAVE_OPENMP
  std::printf("OpenMP enabled, max threads = %d, repeats = %d\n\n",
              omp_get_max_threads(), repeats);
#else
  std::printf("OpenMP disabled (serial build), repeats = %d\n\n", repeats);
#endif
  bench_solve_edge(repeats);
  bench_learn_can(repeats);
  return 0;
}
