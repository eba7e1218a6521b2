#include "canlearn/model.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

namespace canlearn {

using nlohmann::json;

GaussianMeasure validate_measure(const Mat& covariance) {
  if (covariance.rows() != covariance.cols())
    throw NotSquare("validate_measure: covariance not square");
  if (!covariance.allFinite()) throw InvalidMatrix("validate_measure: non-finite entries");
  GaussianMeasure m;
  m.dim = static_cast<int>(covariance.rows());
  m.covariance = 0.5 * (covariance + covariance.transpose());
  m.eig = sym_eig(m.covariance);
  const double largest = std::max(m.eig.eigenvalues.cwiseAbs().maxCoeff(), 0.0);
  if (m.eig.eigenvalues(0) < -1e-9 * largest)
    throw NotPsd("validate_measure: negative eigenvalue " +
                 std::to_string(m.eig.eigenvalues(0)));
  m.rank = numerical_rank(m.eig.eigenvalues);
  return m;
}

AbstractionStructure make_structure(const Mat& b) {
  if (b.rows() < b.cols() || b.cols() < 1)
    throw ShapeError("make_structure: needs rows >= cols >= 1");
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      if (b(i, j) != 0.0 && b(i, j) != 1.0)
        throw ShapeError("make_structure: entries must be 0/1");
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    if (b.row(i).sum() != 1.0)
      throw ShapeError("make_structure: each row needs exactly one 1");
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    if (b.col(j).sum() < 1.0)
      throw ShapeError("make_structure: each column needs at least one 1");
  return AbstractionStructure{b};
}

StiefelMap make_stiefel_map(const Mat& v, const AbstractionStructure& structure) {
  if (v.rows() != structure.b.rows() || v.cols() != structure.b.cols())
    throw StructureMismatch("make_stiefel_map: shape mismatch with structure");
  StiefelMap m{structure.b.cwiseProduct(v), structure};
  const Mat gram = m.v.transpose() * m.v;
  const Eigen::Index h = m.v.cols();
  // disjoint supports make the Gram diagonal; check that explicitly
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < h; ++j) {
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(gram(i, j) - want) > 1e-8)
        throw ShapeError("make_stiefel_map: columns not orthonormal on support");
    }
  return m;
}

void validate_graph(const CanGraph& graph) {
  const int n = static_cast<int>(graph.measures.size());
  for (int i = 0; i + 1 < n; ++i)
    if (graph.measures[i].dim <= graph.measures[i + 1].dim)
      throw ShapeError("validate_graph: node dims must strictly descend");
  for (const CanEdge& e : graph.edges) {
    if (e.low < 0 || e.high < 0 || e.low >= n || e.high >= n || e.low >= e.high)
      throw ShapeError("validate_graph: bad edge indices");
    if (graph.measures[e.low].dim <= graph.measures[e.high].dim)
      throw ShapeError("validate_graph: edge must go finer -> coarser");
    if (e.structure.low_dim() != graph.measures[e.low].dim ||
        e.structure.high_dim() != graph.measures[e.high].dim)
      throw ShapeError("validate_graph: edge structure dims mismatch");
  }
}

AbstractionStructure compose(const AbstractionStructure& outer,
                             const AbstractionStructure& inner) {
  if (inner.high_dim() != outer.low_dim())
    throw ShapeError("compose: inner high dim != outer low dim");
  Mat prod = inner.b * outer.b;
  Mat b = prod.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
  return make_structure(b);
}

StiefelMap compose(const StiefelMap& outer, const StiefelMap& inner) {
  AbstractionStructure b = compose(outer.structure, inner.structure);
  // per-row single blocks make the product exactly zero off the composed support
  Mat v = inner.effective() * outer.effective();
  return make_stiefel_map(v, b);
}

namespace {

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json matrix_to_json(const BoolMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw SchemaError(where + ": expected non-empty array");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw SchemaError(where + ": expected array of arrays");
  const std::size_t cols = j[0].size();
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw SchemaError(where + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) throw SchemaError(where + ": non-numeric entry");
      m(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

BoolMat boolmat_from_json(const json& j, const std::string& where) {
  Mat m = matrix_from_json(j, where);
  BoolMat b(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(i, c) != 0.0 && m(i, c) != 1.0)
        throw SchemaError(where + ": entries must be 0/1");
      b(i, c) = static_cast<int>(m(i, c));
    }
  return b;
}

}  // namespace

void save_dataset(const CanGraph& graph, const std::filesystem::path& path) {
  json doc;
  doc["version"] = 1;
  doc["measures"] = json::array();
  for (const GaussianMeasure& m : graph.measures)
    doc["measures"].push_back({{"dim", m.dim}, {"covariance", matrix_to_json(m.covariance)}});
  doc["edges"] = json::array();
  for (const CanEdge& e : graph.edges) {
    json je{{"low", e.low}, {"high", e.high}, {"b", matrix_to_json(e.structure.b)}};
    if (e.map) je["v"] = matrix_to_json(e.map->v);
    doc["edges"].push_back(std::move(je));
  }
  if (graph.candidate.size() > 0) doc["candidate"] = matrix_to_json(graph.candidate);
  if (graph.learned.size() > 0) doc["learned"] = matrix_to_json(graph.learned);
  if (!graph.topology.empty()) doc["topology"] = graph.topology;

  std::ofstream out(path);
  if (!out) throw IoError("save_dataset: cannot open " + path.string());
  out << doc.dump(1) << "\n";
  if (!out) throw IoError("save_dataset: write failed for " + path.string());
}

CanGraph load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_dataset: cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError("load_dataset: " + std::string(e.what()));
  }
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != 1)
    throw SchemaError("version: expected integer 1");
  if (!doc.contains("measures")) throw SchemaError("measures: missing");

  CanGraph g;
  const json& jm = doc["measures"];
  if (!jm.is_array()) throw SchemaError("measures: expected array");
  for (std::size_t i = 0; i < jm.size(); ++i) {
    const std::string where = "measures[" + std::to_string(i) + "]";
    if (!jm[i].contains("dim") || !jm[i].contains("covariance"))
      throw SchemaError(where + ": needs dim and covariance");
    Mat cov = matrix_from_json(jm[i]["covariance"], where + ".covariance");
    if (cov.rows() != jm[i]["dim"].get<int>())
      throw SchemaError(where + ": covariance size != declared dim");
    g.measures.push_back(validate_measure(cov));
  }
  if (doc.contains("edges")) {
    const json& je = doc["edges"];
    if (!je.is_array()) throw SchemaError("edges: expected array");
    for (std::size_t i = 0; i < je.size(); ++i) {
      const std::string where = "edges[" + std::to_string(i) + "]";
      if (!je[i].contains("low") || !je[i].contains("high") || !je[i].contains("b"))
        throw SchemaError(where + ": needs low, high, b");
      CanEdge e;
      e.low = je[i]["low"].get<int>();
      e.high = je[i]["high"].get<int>();
      e.structure = make_structure(matrix_from_json(je[i]["b"], where + ".b"));
      if (je[i].contains("v"))
        e.map = make_stiefel_map(matrix_from_json(je[i]["v"], where + ".v"), e.structure);
      g.edges.push_back(std::move(e));
    }
  }
  if (doc.contains("candidate")) g.candidate = boolmat_from_json(doc["candidate"], "candidate");
  if (doc.contains("learned")) g.learned = boolmat_from_json(doc["learned"], "learned");
  if (doc.contains("topology")) {
    if (!doc["topology"].is_string()) throw SchemaError("topology: expected string");
    g.topology = doc["topology"].get<std::string>();
  }
  validate_graph(g);
  return g;
}

}  // namespace canlearn
