#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "canlearn/errors.hpp"

namespace canlearn::report {

inline constexpr const char* kToolVersion = "canlearn 0.1.0";

inline constexpr const char* kLocalHeader =
    "instance,l,h,seed,ntrials,converged,trial,iterations,"
    "res_p1,res_p2,res_d1,res_d2,kl,frob_dist,f1,constructive";
inline constexpr const char* kCanHeader =
    "topology,n,section_seed,ntrials,solves_launched,solves_skipped,"
    "fpr,tpr,wall_seconds";

struct LocalRow {
  std::string instance;
  int l = 0, h = 0;
  std::uint64_t seed = 0;
  int ntrials = 0;
  bool converged = false;
  int trial = 0;  // 1-based; best trial when not converged
  int iterations = 0;
  std::array<double, 4> residuals{};
  std::optional<double> kl;  // absent fields serialize as empty cells
  std::optional<double> frob_dist;
  std::optional<double> f1;
  std::optional<bool> constructive;
};

struct CanRow {
  std::string topology;
  int n = 0;
  std::uint64_t section_seed = 0;
  int ntrials = 0;
  int solves_launched = 0;
  int solves_skipped = 0;
  double fpr = 0.0;
  double tpr = 1.0;
  double wall_seconds = 0.0;  // %.3f; the one nondeterministic column
};

// Doubles print as %.17g (lossless round trip); wall_seconds as %.3f;
// booleans as 1/0.
std::string format_double(double x);
std::string to_csv(const LocalRow& row);
std::string to_csv(const CanRow& row);

// Appends one data line, writing the header first when the file is new/empty.
void append_csv_row(const std::filesystem::path& path, const std::string& header,
                    const std::string& row);

// Quantile with linear interpolation between order statistics
// (h = (n−1)q, x = v_⌊h⌋ + (h−⌊h⌋)(v_⌊h⌋₊₁ − v_⌊h⌋) on the ascending sort).
double quantile(std::vector<double> values, double q);

struct SummaryRow {
  std::string group;   // local: l<l>_h<h>_t<ntrials>; can: <topology>_n<n>_t<ntrials>
  std::string metric;
  int count = 0;
  double q25 = 0.0, median = 0.0, q75 = 0.0;
};

// Reads local/CAN report CSVs (auto-detected by header), groups per
// configuration, and computes quartiles per metric, skipping empty cells.
std::vector<SummaryRow> aggregate_reports(const std::vector<std::filesystem::path>& reports);
void write_summary(const std::vector<SummaryRow>& rows, const std::filesystem::path& out);

struct RunManifest {
  std::string command;
  std::string params_json;  // canonical JSON of every result-affecting parameter
  std::uint64_t seed = 0;
  std::string started;  // ISO 8601 UTC
  std::string finished;
  std::vector<std::string> outputs;
};

std::string fnv1a_hex(const std::string& bytes);
std::string iso_utc_now();

// Writes manifest.json-style files atomically (tmp + rename). The digest is
// FNV-1a over command, params, and seed.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace canlearn::report
