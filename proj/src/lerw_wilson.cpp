#include "loopsoup/lerw_wilson.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

#include "loopsoup/loop_enum.hpp"
#include "loopsoup/summation.hpp"

namespace loopsoup {

Path loop_erase(std::span<const int> path) {
  Path out;
  if (path.empty()) return out;
  std::unordered_map<int, std::size_t> last;
  for (std::size_t j = 0; j < path.size(); ++j) last[path[j]] = j;
  std::size_t j = last.at(path[0]);
  out.push_back(path[0]);
  while (j + 1 < path.size()) {
    j = last.at(path[j + 1]);
    out.push_back(path[j]);
  }
  return out;
}

bool is_self_avoiding(std::span<const int> path) {
  std::set<int> seen;
  for (int x : path) {
    if (!seen.insert(x).second) return false;
  }
  return true;
}

BoundaryProblem::BoundaryProblem(WeightMatrix q, std::vector<int> interior)
    : q_(std::move(q)), interior_(std::move(interior)), position_(static_cast<std::size_t>(q_.size()), -1) {
  if (interior_.empty()) throw Error(ErrorKind::InvalidInput, "interior must be nonempty");
  for (std::size_t i = 0; i < interior_.size(); ++i) {
    const int x = interior_[i];
    if (x < 0 || x >= q_.size()) throw Error(ErrorKind::UnknownSite, "interior site out of range");
    if (position_[static_cast<std::size_t>(x)] >= 0) throw Error(ErrorKind::InvalidInput, "repeated interior site");
    position_[static_cast<std::size_t>(x)] = static_cast<int>(i);
  }
  for (int x = 0; x < q_.size(); ++x) {
    if (position_[static_cast<std::size_t>(x)] < 0) boundary_.push_back(x);
  }
  if (boundary_.empty()) throw Error(ErrorKind::InvalidInput, "boundary must be nonempty");
  q_interior_ = restrict_to_indices(q_, interior_);
  require_acceptable(q_interior_);
}

void BoundaryProblem::validate_path(std::span<const int> eta) const {
  if (eta.size() < 2) throw Error(ErrorKind::InvalidPath, "path must have length >= 1");
  for (int x : eta) {
    if (x < 0 || x >= q_.size()) throw Error(ErrorKind::InvalidPath, "site out of range");
  }
  if (!is_self_avoiding(eta)) throw Error(ErrorKind::InvalidPath, "path is not self-avoiding");
  for (std::size_t j = 0; j + 1 < eta.size(); ++j) {
    if (!is_interior(eta[j])) throw Error(ErrorKind::InvalidPath, "path leaves the interior early");
  }
  if (is_interior(eta.back())) throw Error(ErrorKind::InvalidPath, "path must end on the boundary");
}

Complex lerw_measure_formula(const BoundaryProblem& problem, std::span<const int> eta) {
  problem.validate_path(eta);
  std::vector<int> ordering;
  for (std::size_t j = 0; j + 1 < eta.size(); ++j) ordering.push_back(problem.interior_position(eta[j]));
  return path_weight(problem.weights(), eta) * greens_diagonal_product(problem.interior_weights(), ordering);
}

double lerw_tail_bound(const BoundaryProblem& problem, int start, int end, int max_length) {
  // Paths of length > L spend at least L steps inside A before exiting.
  const RMatrix abs_a = problem.interior_weights().abs();
  const auto k = abs_a.rows();
  RVector exit(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    exit(a) = std::abs(problem.weights()(problem.interior()[static_cast<std::size_t>(a)], end));
  }
  const RMatrix majorant = neumann_tail_majorant(abs_a, max_length - 1);
  return (majorant * exit)(problem.interior_position(start));
}

std::map<Path, Complex> lerw_bruteforce_all(const BoundaryProblem& problem, int start, int max_length) {
  if (max_length < 1) throw Error(ErrorKind::InvalidInput, "length cap must be >= 1");
  if (!problem.is_interior(start)) throw Error(ErrorKind::InvalidPath, "start must be interior");
  const WeightMatrix& q = problem.weights();
  const auto& interior = problem.interior();
  const auto& boundary = problem.boundary();

  std::map<Path, CompensatedSum> sums;
  Path prefix{start};
  std::vector<Complex> weights{Complex{1.0, 0.0}};
  std::vector<std::size_t> cursor{0};
  while (!cursor.empty()) {
    const std::size_t depth = cursor.size() - 1;
    if (cursor[depth] == 0) {
      // First arrival at this prefix: record every exit to the boundary.
      Path erased = loop_erase(prefix);
      const int here = prefix.back();
      for (int b : boundary) {
        if (!q.in_support(here, b)) continue;
        Path eta = erased;
        eta.push_back(b);
        sums[eta] += weights[depth] * q(here, b);
      }
    }
    // Interior continuation while the path length stays <= max_length - 1.
    if (static_cast<int>(depth) + 1 >= max_length || cursor[depth] >= interior.size()) {
      cursor.pop_back();
      prefix.pop_back();
      weights.pop_back();
      continue;
    }
    const int here = prefix.back();
    const int y = interior[cursor[depth]++];
    if (!q.in_support(here, y)) continue;
    prefix.push_back(y);
    weights.push_back(weights[depth] * q(here, y));
    cursor.push_back(0);
  }
  std::map<Path, Complex> out;
  for (const auto& [eta, sum] : sums) out.emplace_hint(out.end(), eta, sum.value());
  return out;
}

LerwSum lerw_measure_bruteforce(const BoundaryProblem& problem, std::span<const int> eta, int max_length) {
  problem.validate_path(eta);
  const auto sums = lerw_bruteforce_all(problem, eta.front(), max_length);
  LerwSum out;
  const auto it = sums.find(Path(eta.begin(), eta.end()));
  if (it != sums.end()) out.value = it->second;
  out.tail_bound = lerw_tail_bound(problem, eta.front(), eta.back(), max_length);
  return out;
}

SimpleGraph::SimpleGraph(int vertex_count, std::vector<std::pair<int, int>> edges)
    : n_(vertex_count), adjacency_(static_cast<std::size_t>(vertex_count)) {
  if (n_ < 1) throw Error(ErrorKind::InvalidInput, "graph needs at least one vertex");
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_ || b >= n_) throw Error(ErrorKind::InvalidInput, "edge endpoint out of range");
    if (a == b) throw Error(ErrorKind::InvalidInput, "self-loops are not allowed");
    const auto key = std::minmax(a, b);
    if (!seen.insert(key).second) throw Error(ErrorKind::InvalidInput, "repeated edge");
  }
  edges_.assign(seen.begin(), seen.end());
  for (auto [a, b] : edges_) {
    adjacency_[static_cast<std::size_t>(a)].push_back(b);
    adjacency_[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

SimpleGraph SimpleGraph::complete(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) edges.emplace_back(a, b);
  }
  return SimpleGraph(n, std::move(edges));
}

SimpleGraph SimpleGraph::cycle(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < n; ++a) edges.emplace_back(a, (a + 1) % n);
  return SimpleGraph(n, std::move(edges));
}

SimpleGraph SimpleGraph::path(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a + 1 < n; ++a) edges.emplace_back(a, a + 1);
  return SimpleGraph(n, std::move(edges));
}

SimpleGraph SimpleGraph::random_connected(int n, double extra, Rng& rng) {
  std::set<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    edges.insert(std::minmax(v, pick(rng)));
  }
  std::bernoulli_distribution add(extra);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (!edges.count({a, b}) && add(rng)) edges.insert({a, b});
    }
  }
  return SimpleGraph(n, {edges.begin(), edges.end()});
}

bool SimpleGraph::connected() const {
  std::vector<bool> seen(static_cast<std::size_t>(n_), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int x = frontier.front();
    frontier.pop();
    for (int y : neighbors(x)) {
      if (!seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = true;
        ++reached;
        frontier.push(y);
      }
    }
  }
  return reached == n_;
}

RMatrix SimpleGraph::adjacency() const {
  RMatrix k = RMatrix::Zero(n_, n_);
  for (auto [a, b] : edges_) {
    k(a, b) = 1.0;
    k(b, a) = 1.0;
  }
  return k;
}

RMatrix SimpleGraph::graph_laplacian() const {
  RMatrix l = -adjacency();
  for (int x = 0; x < n_; ++x) l(x, x) = degree(x);
  return l;
}

WeightMatrix SimpleGraph::walk_matrix() const {
  RMatrix q = RMatrix::Zero(n_, n_);
  for (int x = 0; x < n_; ++x) {
    for (int y : neighbors(x)) q(x, y) = 1.0 / degree(x);
  }
  return WeightMatrix::from_real(q);
}

SpanningTree::SpanningTree(int root, std::vector<int> parent) : root_(root), parent_(std::move(parent)) {}

std::vector<std::pair<int, int>> SpanningTree::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int v = 0; v < static_cast<int>(parent_.size()); ++v) {
    if (v != root_) out.push_back(std::minmax(v, parent_[static_cast<std::size_t>(v)]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool SpanningTree::valid_in(const SimpleGraph& graph) const {
  const int n = graph.vertex_count();
  if (static_cast<int>(parent_.size()) != n || root_ < 0 || root_ >= n) return false;
  if (parent_[static_cast<std::size_t>(root_)] != -1) return false;
  std::set<std::pair<int, int>> graph_edges(graph.edges().begin(), graph.edges().end());
  for (int v = 0; v < n; ++v) {
    if (v == root_) continue;
    const int p = parent_[static_cast<std::size_t>(v)];
    if (p < 0 || p >= n || !graph_edges.count(std::minmax(v, p))) return false;
    // Following parents must reach the root within n steps.
    int cur = v;
    int steps = 0;
    while (cur != root_ && steps <= n) {
      cur = parent_[static_cast<std::size_t>(cur)];
      ++steps;
    }
    if (cur != root_) return false;
  }
  return true;
}

SpanningTree wilson_sample(const SimpleGraph& graph, int root, Rng& rng, std::uint64_t step_cap) {
  const int n = graph.vertex_count();
  if (root < 0 || root >= n) throw Error(ErrorKind::InvalidInput, "root out of range");
  if (!graph.connected()) throw Error(ErrorKind::Disconnected, "graph is not connected");
  std::vector<bool> in_tree(static_cast<std::size_t>(n), false);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  in_tree[static_cast<std::size_t>(root)] = true;
  std::uint64_t steps = 0;
  Path walk;
  for (int start = 0; start < n; ++start) {
    if (in_tree[static_cast<std::size_t>(start)]) continue;
    walk.assign(1, start);
    while (!in_tree[static_cast<std::size_t>(walk.back())]) {
      const auto& nbrs = graph.neighbors(walk.back());
      std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
      walk.push_back(nbrs[pick(rng)]);
      if (++steps > step_cap) throw Error(ErrorKind::Disconnected, "walk step cap exceeded before covering");
    }
    const Path branch = loop_erase(walk);
    for (std::size_t j = 0; j + 1 < branch.size(); ++j) {
      parent[static_cast<std::size_t>(branch[j])] = branch[j + 1];
      in_tree[static_cast<std::size_t>(branch[j])] = true;
    }
  }
  return SpanningTree(root, std::move(parent));
}

std::int64_t tree_count_det(const SimpleGraph& graph, int root) {
  const int n = graph.vertex_count();
  if (root < 0 || root >= n) throw Error(ErrorKind::InvalidInput, "root out of range");
  if (!graph.connected()) throw Error(ErrorKind::Disconnected, "graph is not connected");
  if (n == 1) return 1;
  const std::vector<int> keep = complement(n, std::span<const int>(&root, 1));
  const RMatrix full = graph.graph_laplacian();
  RMatrix reduced(n - 1, n - 1);
  for (int a = 0; a < n - 1; ++a) {
    for (int b = 0; b < n - 1; ++b) reduced(a, b) = full(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
  }
  const double det = determinant(reduced);
  const double rounded = std::round(det);
  if (std::abs(det - rounded) >= 1e-6) {
    throw Error(ErrorKind::NumericalFailure, "reduced Laplacian determinant is not near an integer");
  }
  return static_cast<std::int64_t>(rounded);
}

namespace {

int find_root(std::vector<int>& uf, int x) {
  while (uf[static_cast<std::size_t>(x)] != x) {
    uf[static_cast<std::size_t>(x)] = uf[static_cast<std::size_t>(uf[static_cast<std::size_t>(x)])];
    x = uf[static_cast<std::size_t>(x)];
  }
  return x;
}

SpanningTree orient(int n, int root, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (auto [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<int> parent(static_cast<std::size_t>(n), -2);
  parent[static_cast<std::size_t>(root)] = -1;
  std::queue<int> frontier;
  frontier.push(root);
  while (!frontier.empty()) {
    const int x = frontier.front();
    frontier.pop();
    for (int y : adj[static_cast<std::size_t>(x)]) {
      if (parent[static_cast<std::size_t>(y)] == -2) {
        parent[static_cast<std::size_t>(y)] = x;
        frontier.push(y);
      }
    }
  }
  return SpanningTree(root, std::move(parent));
}

}  // namespace

std::vector<SpanningTree> enumerate_spanning_trees(const SimpleGraph& graph, int root) {
  const int n = graph.vertex_count();
  if (n > kMaxEnumerationVertices) throw Error(ErrorKind::TooLarge, "spanning-tree enumeration limited to 8 vertices");
  const auto& edges = graph.edges();
  const int m = static_cast<int>(edges.size());
  const int need = n - 1;
  std::vector<SpanningTree> trees;
  if (need == 0) {
    trees.push_back(SpanningTree(root, std::vector<int>{-1}));
    return trees;
  }
  if (m < need) return trees;

  // Lexicographic walk over all need-subsets of the edge list.
  std::vector<int> pick(static_cast<std::size_t>(need));
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<int> uf(static_cast<std::size_t>(n));
  std::vector<std::pair<int, int>> chosen;
  while (true) {
    std::iota(uf.begin(), uf.end(), 0);
    bool acyclic = true;
    chosen.clear();
    for (int i : pick) {
      auto [a, b] = edges[static_cast<std::size_t>(i)];
      const int ra = find_root(uf, a);
      const int rb = find_root(uf, b);
      if (ra == rb) {
        acyclic = false;
        break;
      }
      uf[static_cast<std::size_t>(ra)] = rb;
      chosen.emplace_back(a, b);
    }
    if (acyclic) trees.push_back(orient(n, root, chosen));

    int i = need - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - need + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < need; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return trees;
}

}  // namespace loopsoup
