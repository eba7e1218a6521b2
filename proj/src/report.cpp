#include "canlearn/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace canlearn::report {

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, x);
  return buf;
}

std::string opt_cell(const std::optional<double>& x) {
  return x ? format_double(*x) : std::string();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_double(double x) { return fmt("%.17g", x); }

std::string to_csv(const LocalRow& row) {
  std::ostringstream s;
  s << row.instance << ',' << row.l << ',' << row.h << ',' << row.seed << ','
    << row.ntrials << ',' << (row.converged ? 1 : 0) << ',' << row.trial << ','
    << row.iterations;
  for (double r : row.residuals) s << ',' << format_double(r);
  s << ',' << opt_cell(row.kl) << ',' << opt_cell(row.frob_dist) << ','
    << opt_cell(row.f1) << ',';
  if (row.constructive) s << (*row.constructive ? 1 : 0);
  return s.str();
}

std::string to_csv(const CanRow& row) {
  std::ostringstream s;
  s << row.topology << ',' << row.n << ',' << row.section_seed << ','
    << row.ntrials << ',' << row.solves_launched << ',' << row.solves_skipped
    << ',' << format_double(row.fpr) << ',' << format_double(row.tpr) << ','
    << fmt("%.3f", row.wall_seconds);
  return s.str();
}

void append_csv_row(const std::filesystem::path& path, const std::string& header,
                    const std::string& row) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) ||
                     std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open report " + path.string());
  if (fresh) out << header << '\n';
  out << row << '\n';
  if (!out) throw IoError("write failed for report " + path.string());
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("quantile: q outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::vector<SummaryRow> aggregate_reports(
    const std::vector<std::filesystem::path>& reports) {
  // group → metric → samples, in first-seen order
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> samples;
  auto add = [&](const std::string& group, const std::string& metric,
                 const std::string& cell) {
    if (cell.empty()) return;
    const auto key = std::make_pair(group, metric);
    if (!samples.count(key)) order.push_back(key);
    samples[key].push_back(std::stod(cell));
  };

  for (const std::filesystem::path& path : reports) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty report " + path.string());
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    const bool local = line == kLocalHeader;
    if (!local && line != kCanHeader)
      throw IoError("unrecognized report header in " + path.string());
    const std::size_t width = split_csv(line).size();
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::vector<std::string> f = split_csv(line);
      if (f.size() != width)
        throw IoError("malformed row " + std::to_string(lineno) + " in " +
                      path.string());
      try {
        if (local) {
          const std::string group = "l" + f[1] + "_h" + f[2] + "_t" + f[4];
          add(group, "converged", f[5]);
          add(group, "iterations", f[7]);
          add(group, "kl", f[12]);
          add(group, "frob_dist", f[13]);
          add(group, "f1", f[14]);
          add(group, "constructive", f[15]);
        } else {
          const std::string group = f[0] + "_n" + f[1] + "_t" + f[3];
          add(group, "solves_launched", f[4]);
          add(group, "solves_skipped", f[5]);
          add(group, "fpr", f[6]);
          add(group, "tpr", f[7]);
          add(group, "wall_seconds", f[8]);
        }
      } catch (const std::exception&) {
        throw IoError("malformed row " + std::to_string(lineno) + " in " +
                      path.string());
      }
    }
  }

  std::vector<SummaryRow> rows;
  for (const auto& key : order) {
    const std::vector<double>& v = samples[key];
    rows.push_back(SummaryRow{key.first, key.second, static_cast<int>(v.size()),
                              quantile(v, 0.25), quantile(v, 0.5),
                              quantile(v, 0.75)});
  }
  return rows;
}

void write_summary(const std::vector<SummaryRow>& rows,
                   const std::filesystem::path& out) {
  std::ofstream f(out);
  if (!f) throw IoError("cannot open summary " + out.string());
  f << "group,metric,count,q25,median,q75\n";
  for (const SummaryRow& r : rows)
    f << r.group << ',' << r.metric << ',' << r.count << ','
      << format_double(r.q25) << ',' << format_double(r.median) << ','
      << format_double(r.q75) << '\n';
  if (!f) throw IoError("write failed for summary " + out.string());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string iso_utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json params = nlohmann::json::parse(manifest.params_json);
  nlohmann::json digest_input{
      {"command", manifest.command}, {"params", params}, {"seed", manifest.seed}};
  nlohmann::json j{{"command", manifest.command},
                   {"config_digest", fnv1a_hex(digest_input.dump())},
                   {"seed", manifest.seed},
                   {"version", kToolVersion},
                   {"started", manifest.started},
                   {"finished", manifest.finished},
                   {"outputs", manifest.outputs},
                   {"params", params}};
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot open " + tmp.string());
    out << j.dump(1) << '\n';
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("atomic rename failed for " + path.string());
}

}  // namespace canlearn::report
