#include "canlearn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>

namespace canlearn::synth {

Topology parse_topology(const std::string& name) {
  if (name == "chain") return Topology::chain;
  if (name == "star") return Topology::star;
  if (name == "tree") return Topology::tree;
  throw UsageError("unknown topology '" + name + "' (chain|star|tree)");
}

std::string topology_name(Topology t) {
  switch (t) {
    case Topology::chain: return "chain";
    case Topology::star: return "star";
    default: return "tree";
  }
}

GenSpec make_spec(int n_nodes, Topology topology, std::uint64_t seed) {
  if (n_nodes < 2) throw UsageError("make_spec: needs at least two nodes");
  return GenSpec{n_nodes, 2, 2 * n_nodes, topology, seed};
}

AbstractionStructure sample_partition(int l, int h, rng::Rng& r) {
  if (h < 1 || l <= h) throw ShapeError("sample_partition: needs l > h >= 1");
  std::vector<int> rows(l);
  std::iota(rows.begin(), rows.end(), 0);
  for (int i = l - 1; i > 0; --i)
    std::swap(rows[i], rows[r.uniform_int(0, static_cast<std::uint64_t>(i))]);
  Mat b = Mat::Zero(l, h);
  for (int j = 0; j < h; ++j) b(rows[j], j) = 1.0;  // surjectivity
  for (int k = h; k < l; ++k)
    b(rows[k], r.uniform_int(0, static_cast<std::uint64_t>(h - 1))) = 1.0;
  return make_structure(b);
}

AbstractionStructure sample_partition(int l, int h, std::uint64_t seed) {
  rng::Rng r(seed);
  return sample_partition(l, h, r);
}

StiefelMap sample_stiefel_on_support(const AbstractionStructure& structure, rng::Rng& r) {
  const int l = structure.low_dim(), h = structure.high_dim();
  Mat v = Mat::Zero(l, h);
  for (int j = 0; j < h; ++j) {
    double norm2 = 0.0;
    for (int i = 0; i < l; ++i)
      if (structure.b(i, j) == 1.0) {
        v(i, j) = r.normal();
        norm2 += v(i, j) * v(i, j);
      }
    v.col(j) /= std::sqrt(norm2);
  }
  return make_stiefel_map(v, structure);
}

StiefelMap sample_stiefel_on_support(const AbstractionStructure& structure,
                                     std::uint64_t seed) {
  rng::Rng r(seed);
  return sample_stiefel_on_support(structure, r);
}

GaussianMeasure sample_spd(int dim, rng::Rng& r) {
  if (dim < 1) throw InvalidInput("sample_spd: dim >= 1");
  Mat g(dim, 2 * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < 2 * dim; ++j) g(i, j) = r.normal();
  Mat cov = g * g.transpose() / (2.0 * dim) + 1e-3 * Mat::Identity(dim, dim);
  return validate_measure(cov);
}

GaussianMeasure sample_spd(int dim, std::uint64_t seed) {
  rng::Rng r(seed);
  return sample_spd(dim, r);
}

LocalInstance gen_local_instance(int l, int h, std::uint64_t seed) {
  rng::Rng r(seed);
  LocalInstance inst{sample_spd(l, r), {}, {}, {}};
  inst.structure = sample_partition(l, h, r);
  inst.planted = sample_stiefel_on_support(inst.structure, r);
  const Mat w = inst.planted.effective();
  inst.high = validate_measure(w.transpose() * inst.low.covariance * w);
  return inst;
}

CanGraph gen_can(const GenSpec& spec) {
  const int n = spec.n_nodes;
  if (n < 2) throw UsageError("gen_can: needs at least two nodes");
  rng::Rng r(spec.seed);

  // distinct dims in [dim_low, dim_high], sorted descending (finest first)
  std::vector<int> pool(spec.dim_high - spec.dim_low + 1);
  std::iota(pool.begin(), pool.end(), spec.dim_low);
  if (static_cast<int>(pool.size()) < n)
    throw UsageError("gen_can: dim range too small for distinct dims");
  for (int i = static_cast<int>(pool.size()) - 1; i > 0; --i)
    std::swap(pool[i], pool[r.uniform_int(0, static_cast<std::uint64_t>(i))]);
  std::vector<int> dims(pool.begin(), pool.begin() + n);
  std::sort(dims.begin(), dims.end(), std::greater<int>());

  // one parent per non-root position; parents are strictly coarser positions
  std::vector<int> parent(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    switch (spec.topology) {
      case Topology::chain: parent[i] = i + 1; break;
      case Topology::star: parent[i] = n - 1; break;
      case Topology::tree:
        parent[i] = static_cast<int>(r.uniform_int(static_cast<std::uint64_t>(i + 1),
                                                   static_cast<std::uint64_t>(n - 1)));
        break;
    }
  }

  std::map<std::pair<int, int>, CanEdge> edges;
  for (int i = 0; i < n - 1; ++i) {
    CanEdge e;
    e.low = i;
    e.high = parent[i];
    e.structure = sample_partition(dims[i], dims[e.high], r);
    e.map = sample_stiefel_on_support(e.structure, r);
    edges[{i, e.high}] = std::move(e);
  }
  // closure pairs along each node's ancestor chain, maps by composition
  for (int i = 0; i < n - 1; ++i) {
    int j = parent[i];
    AbstractionStructure b = edges[{i, j}].structure;
    StiefelMap w = *edges[{i, j}].map;
    while (j < n - 1) {
      const int k = parent[j];
      b = compose(edges[{j, k}].structure, b);
      w = compose(*edges[{j, k}].map, w);
      j = k;
      if (!edges.count({i, j})) edges[{i, j}] = CanEdge{i, j, b, w};
    }
  }

  CanGraph g;
  g.topology = topology_name(spec.topology);
  for (int i = 0; i < n; ++i)
    g.measures.push_back(validate_measure(Mat::Zero(dims[i], dims[i])));
  g.candidate = BoolMat::Zero(n, n);
  g.learned = BoolMat::Zero(n, n);
  for (auto& [key, e] : edges) {
    g.candidate(key.second, key.first) = 1;  // entry (coarser, finer)
    g.edges.push_back(std::move(e));
  }
  for (int i = 0; i < n - 1; ++i) g.learned(parent[i], i) = 1;
  validate_graph(g);
  return g;
}

std::vector<GaussianMeasure> gen_global_section(const CanGraph& truth,
                                                std::uint64_t seed) {
  const int n = static_cast<int>(truth.measures.size());
  const int root = n - 1;
  std::vector<Mat> cov(n);
  cov[root] = sample_spd(truth.measures[root].dim, seed).covariance;

  // BFS outward from the root along reduction edges (learned holds them)
  std::vector<bool> seen(n, false);
  seen[root] = true;
  std::queue<int> frontier;
  frontier.push(root);
  while (!frontier.empty()) {
    const int p = frontier.front();
    frontier.pop();
    for (int i = 0; i < n; ++i) {
      if (seen[i] || truth.learned(p, i) != 1) continue;  // i finer, p its parent
      const CanEdge* edge = nullptr;
      for (const CanEdge& e : truth.edges)
        if (e.low == i && e.high == p) edge = &e;
      if (!edge || !edge->map)
        throw MissingMap("gen_global_section: reduction edge lacks map");
      const Mat w = edge->map->effective();
      cov[i] = w * cov[p] * w.transpose();
      seen[i] = true;
      frontier.push(i);
    }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw DisconnectedTopology("gen_global_section: node unreachable");

  std::vector<GaussianMeasure> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(validate_measure(cov[i]));
  return out;
}

}  // namespace canlearn::synth
