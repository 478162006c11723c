#pragma once

// Combinatorial trees, their graph metric, synthetic generators and the
// planar layout used to initialize embeddings.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hypstab {

using Point2 = std::array<double, 2>;
using Edge = std::pair<std::size_t, std::size_t>;

struct TreeInstance {
  std::size_t nodes = 0;
  std::vector<Edge> edges;
  std::vector<Point2> layout;  // empty or one entry per node
  std::string name;

  /// Edge count, index range and connectivity. Throws on violation.
  void validate() const;
};

class DistanceTable {
 public:
  DistanceTable() = default;
  explicit DistanceTable(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  double max() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

inline std::vector<std::vector<std::size_t>> adjacency(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) throw std::invalid_argument("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("self-loop in tree");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

/// Hop distances from `source`; unreachable nodes get -1.
inline std::vector<long> bfs_hops(const std::vector<std::vector<std::size_t>>& adj, std::size_t source) {
  std::vector<long> hops(adj.size(), -1);
  std::queue<std::size_t> q;
  hops[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t v : adj[u]) {
      if (hops[v] < 0) {
        hops[v] = hops[u] + 1;
        q.push(v);
      }
    }
  }
  return hops;
}

inline void TreeInstance::validate() const {
  if (nodes == 0) throw std::invalid_argument("tree has no nodes");
  if (edges.size() + 1 != nodes) throw std::invalid_argument("tree must have exactly nodes-1 edges");
  if (!layout.empty() && layout.size() != nodes) throw std::invalid_argument("layout size does not match node count");
  const auto hops = bfs_hops(adjacency(nodes, edges), 0);
  if (std::find(hops.begin(), hops.end(), -1L) != hops.end()) throw std::invalid_argument("tree is disconnected");
}

/// All-pairs hop distances by BFS from every node.
inline DistanceTable tree_metric(const TreeInstance& t) {
  const auto adj = adjacency(t.nodes, t.edges);
  DistanceTable d(t.nodes);
  for (std::size_t s = 0; s < t.nodes; ++s) {
    const auto hops = bfs_hops(adj, s);
    for (std::size_t v = 0; v < t.nodes; ++v) {
      if (hops[v] < 0) throw std::invalid_argument("tree_metric: graph is disconnected");
      d(s, v) = static_cast<double>(hops[v]);
    }
  }
  return d;
}

/// Centre on the centroid and scale uniformly so the bounding box fits
/// [-0.5, 0.5]^2.
inline std::vector<Point2> normalize_layout(std::vector<Point2> pts) {
  if (pts.empty()) return pts;
  Point2 c{0.0, 0.0};
  for (const auto& p : pts) {
    c[0] += p[0];
    c[1] += p[1];
  }
  c[0] /= static_cast<double>(pts.size());
  c[1] /= static_cast<double>(pts.size());
  double extent = 0.0;
  for (auto& p : pts) {
    p[0] -= c[0];
    p[1] -= c[1];
    extent = std::max({extent, std::abs(p[0]), std::abs(p[1])});
  }
  if (extent == 0.0) return pts;
  const double s = 0.5 / extent;
  for (auto& p : pts) {
    p[0] *= s;
    p[1] *= s;
  }
  return pts;
}

/// Layered drawing of a tree rooted at 0: depth on y (downwards), leaves on
/// consecutive x slots in DFS order, parents centred over their children.
inline std::vector<Point2> layered_layout(std::size_t n, const std::vector<Edge>& edges) {
  const auto adj = adjacency(n, edges);
  std::vector<Point2> pos(n, Point2{0.0, 0.0});
  std::vector<long> parent(n, -1);
  std::vector<std::size_t> order;
  std::vector<std::size_t> stack{0};
  std::vector<bool> seen(n, false);
  seen[0] = true;
  std::vector<std::size_t> depth(n, 0);
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    order.push_back(u);
    // reverse so that children are visited in ascending index order
    for (auto it = adj[u].rbegin(); it != adj[u].rend(); ++it) {
      if (!seen[*it]) {
        seen[*it] = true;
        parent[*it] = static_cast<long>(u);
        depth[*it] = depth[u] + 1;
        stack.push_back(*it);
      }
    }
  }
  double next_leaf = 0.0;
  for (std::size_t u : order) {
    bool leaf = true;
    for (std::size_t v : adj[u]) leaf = leaf && (static_cast<long>(v) == parent[u]);
    if (leaf) pos[u][0] = next_leaf++;
  }
  // post-order: children before parents
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t u = *it;
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t v : adj[u]) {
      if (static_cast<long>(v) == parent[u]) continue;
      sum += pos[v][0];
      ++k;
    }
    if (k > 0) pos[u][0] = sum / static_cast<double>(k);
    pos[u][1] = -static_cast<double>(depth[u]);
  }
  return pos;
}

enum class TreeKind { path, star, balanced, caterpillar, random };

struct TreeParams {
  std::size_t n = 0;         // path, star, caterpillar spine, random
  std::size_t branching = 2; // balanced
  std::size_t depth = 0;     // balanced
  std::size_t legs = 1;      // caterpillar
};

inline TreeInstance generate_tree(TreeKind kind, const TreeParams& p, std::uint64_t seed = 0) {
  TreeInstance t;
  switch (kind) {
    case TreeKind::path: {
      if (p.n < 1) throw std::invalid_argument("path needs n >= 1");
      t.nodes = p.n;
      for (std::size_t i = 1; i < p.n; ++i) t.edges.emplace_back(i - 1, i);
      t.name = "path(" + std::to_string(p.n) + ")";
      break;
    }
    case TreeKind::star: {
      // star(n): a hub plus n leaves
      if (p.n < 1) throw std::invalid_argument("star needs n >= 1 leaves");
      t.nodes = p.n + 1;
      for (std::size_t i = 1; i <= p.n; ++i) t.edges.emplace_back(0, i);
      t.name = "star(" + std::to_string(p.n) + ")";
      break;
    }
    case TreeKind::balanced: {
      if (p.branching < 1) throw std::invalid_argument("balanced needs branching >= 1");
      std::size_t level = 1;
      t.nodes = 1;
      for (std::size_t d = 0; d < p.depth; ++d) {
        level *= p.branching;
        t.nodes += level;
      }
      for (std::size_t i = 1; i < t.nodes; ++i) t.edges.emplace_back((i - 1) / p.branching, i);
      t.name = "balanced(" + std::to_string(p.branching) + "," + std::to_string(p.depth) + ")";
      break;
    }
    case TreeKind::caterpillar: {
      if (p.n < 1) throw std::invalid_argument("caterpillar needs a spine of n >= 1");
      t.nodes = p.n * (1 + p.legs);
      for (std::size_t i = 1; i < p.n; ++i) t.edges.emplace_back(i - 1, i);
      std::size_t next = p.n;
      for (std::size_t i = 0; i < p.n; ++i) {
        for (std::size_t l = 0; l < p.legs; ++l) t.edges.emplace_back(i, next++);
      }
      t.name = "caterpillar(" + std::to_string(p.n) + "," + std::to_string(p.legs) + ")";
      break;
    }
    case TreeKind::random: {
      if (p.n < 1) throw std::invalid_argument("random tree needs n >= 1");
      t.nodes = p.n;
      std::mt19937_64 rng(seed);
      for (std::size_t i = 1; i < p.n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        t.edges.emplace_back(pick(rng), i);
      }
      t.name = "random(" + std::to_string(p.n) + ",seed=" + std::to_string(seed) + ")";
      break;
    }
  }
  t.layout = normalize_layout(layered_layout(t.nodes, t.edges));
  t.validate();
  return t;
}

namespace detail {
inline std::size_t parse_size(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad integer in tree spec: '" + std::string(s) + "'");
  }
  return v;
}
}  // namespace detail

/// "path:10", "star:8", "balanced:2:3", "caterpillar:6:2", "random:50".
inline TreeInstance tree_from_spec(std::string_view spec, std::uint64_t seed = 0) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  const std::string_view kind = parts[0];
  auto arg = [&](std::size_t i) {
    if (i >= parts.size()) throw std::invalid_argument("tree spec '" + std::string(spec) + "' is missing arguments");
    return detail::parse_size(parts[i]);
  };
  auto expect = [&](std::size_t count) {
    if (parts.size() != count) throw std::invalid_argument("tree spec '" + std::string(spec) + "' has wrong arity");
  };
  TreeParams p;
  if (kind == "path") {
    expect(2);
    p.n = arg(1);
    return generate_tree(TreeKind::path, p, seed);
  }
  if (kind == "star") {
    expect(2);
    p.n = arg(1);
    return generate_tree(TreeKind::star, p, seed);
  }
  if (kind == "balanced") {
    expect(3);
    p.branching = arg(1);
    p.depth = arg(2);
    return generate_tree(TreeKind::balanced, p, seed);
  }
  if (kind == "caterpillar") {
    expect(3);
    p.n = arg(1);
    p.legs = arg(2);
    return generate_tree(TreeKind::caterpillar, p, seed);
  }
  if (kind == "random") {
    expect(2);
    p.n = arg(1);
    return generate_tree(TreeKind::random, p, seed);
  }
  throw std::invalid_argument("unknown tree kind '" + std::string(kind) + "'");
}

}  // namespace hypstab
