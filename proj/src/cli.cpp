#include "canlearn/cli.hpp"

#include <chrono>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "canlearn/metrics.hpp"
#include "canlearn/model.hpp"
#include "canlearn/report.hpp"
#include "canlearn/rng.hpp"
#include "canlearn/search.hpp"
#include "canlearn/spectral.hpp"
#include "canlearn/synth.hpp"

#if CANLEARN_HAVE_OPENMP
#include <omp.h>
#endif

namespace canlearn::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string numbered_file(const std::string& stem, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d.json", stem.c_str(), index);
  return buf;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::parse_error& e) {
    throw SchemaError("config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw SchemaError("config " + path + ": expected an object");
  return cfg;
}

// precedence: explicit flag > config file > (seed only) CANLEARN_SEED env
template <typename T>
void from_config(const CLI::App& cmd, const std::string& flag, const json& cfg,
                 const std::string& key, T& value) {
  if (cmd.count(flag) > 0 || !cfg.contains(key)) return;
  try {
    value = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError("config key '" + key + "': wrong type");
  }
}

void seed_from_env(const CLI::App& cmd, const json& cfg, std::uint64_t& seed) {
  if (cmd.count("--seed") > 0 || cfg.contains("seed")) return;
  if (const char* env = std::getenv("CANLEARN_SEED")) {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError("CANLEARN_SEED is not an unsigned integer");
    }
  }
}

fs::path manifest_beside(const fs::path& output) {
  const fs::path dir = output.parent_path();
  return dir.empty() ? fs::path("manifest.json") : dir / "manifest.json";
}

void finish_manifest(report::RunManifest manifest, const json& params,
                     const fs::path& where) {
  manifest.params_json = params.dump();
  manifest.finished = report::iso_utc_now();
  report::write_manifest(manifest, where);
}

std::uint64_t trailing_digits(const std::string& stem) {
  std::size_t end = stem.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
  if (end == stem.size()) return 0;
  return std::stoull(stem.substr(end));
}

int cmd_gen_local(int l, int h, std::uint64_t seed, int count,
                  const std::string& out_dir) {
  if (h < 1 || l <= h) throw UsageError("gen-local: needs --l > --h >= 1");
  if (count < 1) throw UsageError("gen-local: --count must be positive");
  report::RunManifest manifest{"gen-local", "", seed, report::iso_utc_now(), "", {}};
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir);
  for (int i = 0; i < count; ++i) {
    const synth::LocalInstance inst =
        synth::gen_local_instance(l, h, rng::derive(seed, rng::kTagInstance,
                                                    static_cast<std::uint64_t>(i)));
    CanGraph g;
    g.measures = {inst.low, inst.high};
    g.edges = {CanEdge{0, 1, inst.structure, inst.planted}};
    g.candidate = BoolMat::Zero(2, 2);
    g.candidate(1, 0) = 1;
    g.learned = g.candidate;
    const fs::path out = fs::path(out_dir) / numbered_file("instance", i);
    save_dataset(g, out);
    manifest.outputs.push_back(out.string());
  }
  finish_manifest(std::move(manifest),
                  json{{"l", l}, {"h", h}, {"seed", seed}, {"count", count},
                       {"out-dir", out_dir}},
                  fs::path(out_dir) / "manifest.json");
  return 0;
}

int cmd_gen_can(const std::string& topology, int n, int sections,
                std::uint64_t seed, const std::string& out_dir) {
  const synth::Topology topo = synth::parse_topology(topology);
  if (n < 2) throw UsageError("gen-can: --n must be at least 2");
  if (sections < 0) throw UsageError("gen-can: --sections must be nonnegative");
  report::RunManifest manifest{"gen-can", "", seed, report::iso_utc_now(), "", {}};
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir);

  const CanGraph truth = synth::gen_can(synth::make_spec(n, topo, seed));
  const fs::path truth_path = fs::path(out_dir) / "truth.json";
  save_dataset(truth, truth_path);
  manifest.outputs.push_back(truth_path.string());

  for (int s = 0; s < sections; ++s) {
    CanGraph section;
    section.measures = synth::gen_global_section(
        truth, rng::derive(seed, rng::kTagSection, static_cast<std::uint64_t>(s)));
    const fs::path out = fs::path(out_dir) / numbered_file("section", s);
    save_dataset(section, out);
    manifest.outputs.push_back(out.string());
  }
  finish_manifest(std::move(manifest),
                  json{{"topology", topology}, {"n", n}, {"sections", sections},
                       {"seed", seed}, {"out-dir", out_dir}},
                  fs::path(out_dir) / "manifest.json");
  return 0;
}

int cmd_solve_local(const std::string& input, int ntrials, double tol, int max_iter,
                    std::uint64_t seed, const std::string& report_path, bool serial) {
  const CanGraph g = load_dataset(input);
  if (g.measures.size() != 2 || g.edges.size() != 1 || g.edges[0].low != 0 ||
      g.edges[0].high != 1)
    throw SchemaError(input + ": not a single-edge local instance");
  const CanEdge& edge = g.edges[0];
  const spectral::EdgeProblem problem =
      spectral::build_problem(g.measures[0], g.measures[1], edge.structure);

  spectral::SolverConfig config;
  config.max_iter = max_iter;
  config.tol = tol;
  config.ntrials = ntrials;
  config.seed = seed;
  config.kl_report = true;
  config.parallel = !serial;
  report::RunManifest manifest{"solve-local", "", seed, report::iso_utc_now(), "", {}};
  const spectral::SolverReport rep = spectral::solve_edge(problem, config);

  report::LocalRow row;
  row.instance = fs::path(input).stem().string();
  row.l = g.measures[0].dim;
  row.h = g.measures[1].dim;
  row.seed = seed;
  row.ntrials = ntrials;
  row.converged = rep.converged;
  row.trial = rep.trial_index;
  row.iterations = rep.iterations;
  row.residuals = rep.final_residuals;
  row.kl = rep.kl;
  if (rep.map) {
    if (edge.map) row.frob_dist = metrics::frobenius_up_to_sign(*rep.map, *edge.map);
    row.f1 = metrics::f1_structure(*rep.map, edge.structure);
    row.constructive = metrics::constructiveness(*rep.map);
  }
  report::append_csv_row(report_path, report::kLocalHeader, report::to_csv(row));
  manifest.outputs.push_back(report_path);
  finish_manifest(std::move(manifest),
                  json{{"input", input}, {"ntrials", ntrials}, {"tol", tol},
                       {"max-iter", max_iter}, {"seed", seed}, {"report", report_path}},
                  manifest_beside(report_path));
  return rep.converged ? 0 : 4;
}

int cmd_learn_can(const std::string& truth_path, const std::string& section_path,
                  int ntrials, double tol, int max_iter, std::uint64_t seed,
                  const std::string& report_path, const std::string& trace_path,
                  bool have_section_seed, std::uint64_t section_seed, bool serial) {
  const CanGraph truth = load_dataset(truth_path);
  const CanGraph section = load_dataset(section_path);
  const int n = static_cast<int>(truth.measures.size());
  if (static_cast<int>(section.measures.size()) != n)
    throw SchemaError("section/truth node count mismatch");
  for (int i = 0; i < n; ++i)
    if (section.measures[i].dim != truth.measures[i].dim)
      throw SchemaError("section/truth dim mismatch at node " + std::to_string(i));

  // Structures: ground truth where a true relation exists, otherwise a
  // seed-deterministic random partition (the solver must reject those pairs).
  search::StructureMapping structures;
  for (const CanEdge& e : truth.edges) structures[{e.low, e.high}] = e.structure;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!structures.count({i, j}))
        structures[{i, j}] = synth::sample_partition(
            truth.measures[i].dim, truth.measures[j].dim,
            rng::derive(seed, rng::kTagStructure, static_cast<std::uint64_t>(i),
                        static_cast<std::uint64_t>(j)));

  search::SearchConfig config;
  config.solver.max_iter = max_iter;
  config.solver.tol = tol;
  config.solver.ntrials = ntrials;
  config.solver.seed = seed;
  config.solver.parallel = !serial;
  config.parallel_edges = !serial;

  report::RunManifest manifest{"learn-can", "", seed, report::iso_utc_now(), "", {}};
  const auto t0 = std::chrono::steady_clock::now();
  auto [learned, trace] = search::learn_can(section.measures, structures, config);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const search::Evaluation ev =
      search::evaluate_against_truth(learned.learned, truth.learned);

  report::CanRow row;
  row.topology = truth.topology.empty() ? "unknown" : truth.topology;
  row.n = n;
  row.section_seed = have_section_seed
                         ? section_seed
                         : trailing_digits(fs::path(section_path).stem().string());
  row.ntrials = ntrials;
  row.solves_launched = static_cast<int>(trace.solved.size());
  row.solves_skipped = static_cast<int>(trace.skipped.size());
  row.fpr = ev.fpr;
  row.tpr = ev.tpr;
  row.wall_seconds = wall;
  report::append_csv_row(report_path, report::kCanHeader, report::to_csv(row));
  manifest.outputs.push_back(report_path);
  if (!trace_path.empty()) {
    search::save_trace(trace, trace_path);
    manifest.outputs.push_back(trace_path);
  }
  finish_manifest(std::move(manifest),
                  json{{"truth", truth_path}, {"section", section_path},
                       {"ntrials", ntrials}, {"tol", tol}, {"max-iter", max_iter},
                       {"seed", seed}, {"report", report_path},
                       {"trace", trace_path},
                       {"section-seed", row.section_seed}},
                  manifest_beside(report_path));
  return 0;
}

int cmd_report(const std::vector<std::string>& reports, const std::string& out) {
  report::RunManifest manifest{"report", "", 0, report::iso_utc_now(), "", {}};
  std::vector<fs::path> paths(reports.begin(), reports.end());
  report::write_summary(report::aggregate_reports(paths), out);
  manifest.outputs.push_back(out);
  finish_manifest(std::move(manifest), json{{"reports", reports}, {"out", out}},
                  manifest_beside(out));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Learn consistent causal-abstraction networks from Gaussian covariances"};
  app.name("canlearn");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  int threads = 0;
  bool serial = false;
  app.add_option("--config", config_path, "JSON config file mirroring flags (flags win)");
  app.add_option("--threads", threads, "cap worker threads (default: all cores)");
  app.add_flag("--serial", serial, "run everything single-threaded");

  // long-only help on subcommands: -h would collide with gen-local's --h
  const auto add_sub = [&app](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->set_help_flag("--help", "print help and exit");
    return sub;
  };

  CLI::App* gl = add_sub("gen-local", "generate planted local instances");
  int gl_l = 12, gl_h = 4, gl_count = 1;
  std::uint64_t gl_seed = 0;
  std::string gl_out;
  gl->add_option("--l", gl_l, "low-level dimension");
  gl->add_option("--h", gl_h, "high-level dimension");
  gl->add_option("--seed", gl_seed, "base seed");
  gl->add_option("--count", gl_count, "number of instances");
  gl->add_option("--out-dir", gl_out, "output directory")->required();

  CLI::App* gc = add_sub("gen-can", "generate a CAN truth and global sections");
  std::string gc_topology = "chain", gc_out;
  int gc_n = 6, gc_sections = 1;
  std::uint64_t gc_seed = 0;
  gc->add_option("--topology", gc_topology, "chain|star|tree");
  gc->add_option("--n", gc_n, "number of nodes");
  gc->add_option("--sections", gc_sections, "number of global sections");
  gc->add_option("--seed", gc_seed, "base seed");
  gc->add_option("--out-dir", gc_out, "output directory")->required();

  CLI::App* sl = add_sub("solve-local", "solve one planted local instance");
  std::string sl_input, sl_report;
  int sl_ntrials = 10, sl_max_iter = 1000;
  double sl_tol = 1e-3;
  std::uint64_t sl_seed = 0;
  sl->add_option("--input", sl_input, "local instance dataset")->required();
  sl->add_option("--ntrials", sl_ntrials, "restart budget");
  sl->add_option("--tol", sl_tol, "residual tolerance");
  sl->add_option("--max-iter", sl_max_iter, "iteration cap per trial");
  sl->add_option("--seed", sl_seed, "base seed");
  sl->add_option("--report", sl_report, "CSV report to append to")->required();

  CLI::App* lc = add_sub("learn-can", "learn a CAN from one global section");
  std::string lc_truth, lc_section, lc_report, lc_trace;
  int lc_ntrials = 10, lc_max_iter = 1000;
  double lc_tol = 1e-3;
  std::uint64_t lc_seed = 0, lc_section_seed = 0;
  lc->add_option("--truth", lc_truth, "truth dataset")->required();
  lc->add_option("--section", lc_section, "global-section dataset")->required();
  lc->add_option("--ntrials", lc_ntrials, "restart budget per edge");
  lc->add_option("--tol", lc_tol, "residual tolerance");
  lc->add_option("--max-iter", lc_max_iter, "iteration cap per trial");
  lc->add_option("--seed", lc_seed, "base seed");
  lc->add_option("--report", lc_report, "CSV report to append to")->required();
  lc->add_option("--trace", lc_trace, "optional search trace JSON");
  CLI::Option* lc_ss =
      lc->add_option("--section-seed", lc_section_seed,
                     "report column override (default: filename digits)");

  CLI::App* rp = add_sub("report", "aggregate report CSVs into a summary");
  std::vector<std::string> rp_reports;
  std::string rp_out;
  rp->add_option("--reports", rp_reports, "input report CSVs")->required();
  rp->add_option("--out", rp_out, "summary CSV path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const json cfg = load_config(config_path);
    from_config(app, "--threads", cfg, "threads", threads);
    from_config(app, "--serial", cfg, "serial", serial);
#if CANLEARN_HAVE_OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif

    if (gl->parsed()) {
      from_config(*gl, "--l", cfg, "l", gl_l);
      from_config(*gl, "--h", cfg, "h", gl_h);
      from_config(*gl, "--seed", cfg, "seed", gl_seed);
      from_config(*gl, "--count", cfg, "count", gl_count);
      from_config(*gl, "--out-dir", cfg, "out-dir", gl_out);
      seed_from_env(*gl, cfg, gl_seed);
      return cmd_gen_local(gl_l, gl_h, gl_seed, gl_count, gl_out);
    }
    if (gc->parsed()) {
      from_config(*gc, "--topology", cfg, "topology", gc_topology);
      from_config(*gc, "--n", cfg, "n", gc_n);
      from_config(*gc, "--sections", cfg, "sections", gc_sections);
      from_config(*gc, "--seed", cfg, "seed", gc_seed);
      from_config(*gc, "--out-dir", cfg, "out-dir", gc_out);
      seed_from_env(*gc, cfg, gc_seed);
      return cmd_gen_can(gc_topology, gc_n, gc_sections, gc_seed, gc_out);
    }
    if (sl->parsed()) {
      from_config(*sl, "--ntrials", cfg, "ntrials", sl_ntrials);
      from_config(*sl, "--tol", cfg, "tol", sl_tol);
      from_config(*sl, "--max-iter", cfg, "max-iter", sl_max_iter);
      from_config(*sl, "--seed", cfg, "seed", sl_seed);
      seed_from_env(*sl, cfg, sl_seed);
      return cmd_solve_local(sl_input, sl_ntrials, sl_tol, sl_max_iter, sl_seed,
                             sl_report, serial);
    }
    if (lc->parsed()) {
      from_config(*lc, "--ntrials", cfg, "ntrials", lc_ntrials);
      from_config(*lc, "--tol", cfg, "tol", lc_tol);
      from_config(*lc, "--max-iter", cfg, "max-iter", lc_max_iter);
      from_config(*lc, "--seed", cfg, "seed", lc_seed);
      seed_from_env(*lc, cfg, lc_seed);
      const bool have_ss = lc_ss->count() > 0 || cfg.contains("section-seed");
      from_config(*lc, "--section-seed", cfg, "section-seed", lc_section_seed);
      return cmd_learn_can(lc_truth, lc_section, lc_ntrials, lc_tol, lc_max_iter,
                           lc_seed, lc_report, lc_trace, have_ss, lc_section_seed,
                           serial);
    }
    return cmd_report(rp_reports, rp_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace canlearn::cli
