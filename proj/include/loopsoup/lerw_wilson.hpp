#pragma once

// Chronological loop erasure, the loop-erased walk measure (closed form and
// exhaustive path sum), Wilson's algorithm and the matrix-tree count.

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "loopsoup/matrix_core.hpp"
#include "loopsoup/random.hpp"

namespace loopsoup {

inline constexpr std::uint64_t kWilsonStepCap = 100'000'000;
inline constexpr int kMaxEnumerationVertices = 8;

/// Last-exit loop erasure: j0 = last visit to w0, j_{k+1} = last visit to w_{j_k + 1}.
Path loop_erase(std::span<const int> path);

bool is_self_avoiding(std::span<const int> path);

/// Weights on the closure A-bar of an interior set A; only rows from A matter.
class BoundaryProblem {
 public:
  /// Throws InvalidInput for an empty interior or boundary, NotAcceptable
  /// unless Q restricted to the interior is acceptable.
  BoundaryProblem(WeightMatrix q, std::vector<int> interior);

  const WeightMatrix& weights() const noexcept { return q_; }
  const std::vector<int>& interior() const noexcept { return interior_; }
  const std::vector<int>& boundary() const noexcept { return boundary_; }
  bool is_interior(int x) const { return position_.at(static_cast<std::size_t>(x)) >= 0; }
  /// Index of x inside the interior list, -1 on the boundary.
  int interior_position(int x) const { return position_.at(static_cast<std::size_t>(x)); }
  /// Q_A as a matrix on the interior.
  const WeightMatrix& interior_weights() const noexcept { return q_interior_; }

  /// Throws InvalidPath unless eta is self-avoiding, has length >= 1,
  /// stays in A before its last point and ends on the boundary.
  void validate_path(std::span<const int> eta) const;

 private:
  WeightMatrix q_;
  std::vector<int> interior_;
  std::vector<int> boundary_;
  std::vector<int> position_;
  WeightMatrix q_interior_;
};

/// Q(eta) prod_{j<k} G_{A_j}(eta_j, eta_j).
Complex lerw_measure_formula(const BoundaryProblem& problem, std::span<const int> eta);

struct LerwSum {
  Complex value;
  double tail_bound = 0.0;
};

/// Sum of Q(w) over paths w from A to the boundary of length <= max_length
/// with LE(w) = eta.
LerwSum lerw_measure_bruteforce(const BoundaryProblem& problem, std::span<const int> eta, int max_length);

/// One exhaustive pass from `start`: path sums bucketed by loop erasure.
std::map<Path, Complex> lerw_bruteforce_all(const BoundaryProblem& problem, int start, int max_length);

/// Tail bound for lerw sums from `start` to boundary point `end`.
double lerw_tail_bound(const BoundaryProblem& problem, int start, int end, int max_length);

class SimpleGraph {
 public:
  /// Throws InvalidInput on self-loops, repeated edges or bad indices.
  SimpleGraph(int vertex_count, std::vector<std::pair<int, int>> edges);

  static SimpleGraph complete(int n);
  static SimpleGraph cycle(int n);
  static SimpleGraph path(int n);
  /// Random spanning tree plus each remaining pair with probability `extra`.
  static SimpleGraph random_connected(int n, double extra, Rng& rng);

  int vertex_count() const noexcept { return n_; }
  const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }
  const std::vector<int>& neighbors(int x) const { return adjacency_.at(static_cast<std::size_t>(x)); }
  int degree(int x) const { return static_cast<int>(neighbors(x).size()); }
  bool connected() const;

  /// K: 0/1 adjacency.
  RMatrix adjacency() const;
  /// D - K.
  RMatrix graph_laplacian() const;
  /// Q(x, y) = 1/d(x) for adjacent pairs.
  WeightMatrix walk_matrix() const;

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;  // (min, max), sorted
  std::vector<std::vector<int>> adjacency_;
};

class SpanningTree {
 public:
  SpanningTree(int root, std::vector<int> parent);

  int root() const noexcept { return root_; }
  const std::vector<int>& parent() const noexcept { return parent_; }
  /// Undirected edges (min, max), sorted.
  std::vector<std::pair<int, int>> edges() const;
  /// Acyclic, spanning, every edge present in the graph and every vertex reaches the root.
  bool valid_in(const SimpleGraph& graph) const;

 private:
  int root_;
  std::vector<int> parent_;  // parent_[root] == -1
};

/// Throws Disconnected when the graph is not connected or the step cap is hit.
SpanningTree wilson_sample(const SimpleGraph& graph, int root, Rng& rng,
                           std::uint64_t step_cap = kWilsonStepCap);

/// det of D - K with the root row and column removed.
std::int64_t tree_count_det(const SimpleGraph& graph, int root);

/// All spanning trees, rooted at `root`. Throws TooLarge above 8 vertices.
std::vector<SpanningTree> enumerate_spanning_trees(const SimpleGraph& graph, int root = 0);

}  // namespace loopsoup
