#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "loopsoup/fixtures.hpp"
#include "loopsoup/lerw_wilson.hpp"
#include "loopsoup/loop_enum.hpp"
#include "oracles.hpp"

using namespace loopsoup;

namespace {

/// Forward chronological erasure: walk along, cutting each loop as it closes.
Path erase_forward(const Path& path) {
  Path out;
  for (int x : path) {
    auto it = std::find(out.begin(), out.end(), x);
    if (it != out.end()) {
      out.erase(it + 1, out.end());
    } else {
      out.push_back(x);
    }
  }
  return out;
}

/// A = {0}, boundary {1}; Q(0,0) = q, Q(0,1) = p.
BoundaryProblem one_point_exit(double q, double p) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = q;
  m(0, 1) = p;
  return BoundaryProblem(WeightMatrix(m), {0});
}

BoundaryProblem two_interior_chain() {
  RMatrix m = RMatrix::Zero(4, 4);
  m(0, 1) = 0.4;
  m(1, 0) = 0.3;
  m(0, 0) = 0.2;
  m(0, 2) = 0.1;
  m(1, 3) = 0.25;
  return BoundaryProblem(WeightMatrix::from_real(m), {0, 1});
}

std::int64_t cayley(int n) {
  std::int64_t v = 1;
  for (int i = 0; i < n - 2; ++i) v *= n;
  return v;
}

}  // namespace

TEST_SUITE("lerw_wilson") {

TEST_CASE("loop_erase examples") {
  const Path sa{3, 1, 4, 2};
  CHECK(loop_erase(sa) == sa);
  const Path simple{0, 1, 0, 2};
  CHECK(loop_erase(simple) == Path{0, 2});
  const Path longer{0, 1, 2, 0, 1, 3};
  CHECK(loop_erase(longer) == Path{0, 1, 3});
  CHECK(loop_erase(Path{}).empty());
  const Path single{5};
  CHECK(loop_erase(single) == single);
}

TEST_CASE("loop_erase agrees with forward erasure and is self-avoiding") {
  Rng rng = substream(301, 0, 0);
  std::uniform_int_distribution<int> site(0, 4);
  std::uniform_int_distribution<int> len(1, 30);
  for (int trial = 0; trial < 3000; ++trial) {
    Path p(static_cast<std::size_t>(len(rng)));
    for (auto& x : p) x = site(rng);
    const Path le = loop_erase(p);
    CHECK(le == erase_forward(p));
    CHECK(is_self_avoiding(le));
    CHECK(le.front() == p.front());
    CHECK(le.back() == p.back());
    CHECK(loop_erase(le) == le);
  }
}

TEST_CASE("boundary problem validation") {
  CHECK_THROWS_AS(BoundaryProblem(fixtures::two_state(), {}), Error);
  CHECK_THROWS_AS(BoundaryProblem(fixtures::two_state(), {0, 1}), Error);
  RMatrix hot = RMatrix::Zero(2, 2);
  hot(0, 0) = 1.1;
  try {
    BoundaryProblem bad(WeightMatrix::from_real(hot), {0});
    FAIL("expected NotAcceptable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotAcceptable);
  }
  const auto problem = two_interior_chain();
  CHECK(problem.boundary() == std::vector<int>{2, 3});
  CHECK(problem.is_interior(1));
  CHECK_FALSE(problem.is_interior(3));
  CHECK_THROWS_AS(problem.validate_path(Path{0, 1, 0, 2}), Error);
  CHECK_THROWS_AS(problem.validate_path(Path{0, 1}), Error);
  CHECK_THROWS_AS(problem.validate_path(Path{2, 3}), Error);
  CHECK_NOTHROW(problem.validate_path(Path{0, 1, 3}));
}

TEST_CASE("lerw formula examples") {
  const auto problem = one_point_exit(0.5, 0.3);
  const Path eta{0, 1};
  CHECK(std::abs(lerw_measure_formula(problem, eta) - 0.3 / (1 - 0.5)) < 1e-15);

  // No loops inside A: the measure is just Q(eta).
  RMatrix m = RMatrix::Zero(3, 3);
  m(0, 1) = 0.4;
  m(1, 2) = 0.7;
  const BoundaryProblem free(WeightMatrix::from_real(m), {0, 1});
  const Path path{0, 1, 2};
  CHECK(std::abs(lerw_measure_formula(free, path) - 0.28) < 1e-15);
  const auto brute = lerw_measure_bruteforce(free, path, 2);
  CHECK(std::abs(brute.value - 0.28) < 1e-15);
  CHECK(brute.tail_bound == 0.0);
}

TEST_CASE("lerw brute force examples") {
  const auto problem = one_point_exit(0.5, 0.3);
  const Path eta{0, 1};
  const auto brute = lerw_measure_bruteforce(problem, eta, 20);
  double geometric = 0.0;
  for (int n = 0; n < 20; ++n) geometric += 0.3 * std::pow(0.5, n);
  CHECK(brute.value.real() == doctest::Approx(geometric).epsilon(1e-14));
  CHECK(std::abs(brute.value - lerw_measure_formula(problem, eta)) <= brute.tail_bound + 1e-15);
}

TEST_CASE("two-interior chain: formula vs brute force") {
  const auto problem = two_interior_chain();
  for (const Path& eta : {Path{0, 2}, Path{0, 1, 3}, Path{1, 3}, Path{1, 0, 2}}) {
    const auto brute = lerw_measure_bruteforce(problem, eta, 24);
    CHECK(std::abs(brute.value - lerw_measure_formula(problem, eta)) <= brute.tail_bound + 1e-14);
  }
}

TEST_CASE("brute-force bucket map agrees with walk oracle") {
  const auto problem = two_interior_chain();
  const CMatrix& q = problem.weights().entries();
  const int max_length = 7;
  for (int start : problem.interior()) {
    const auto buckets = lerw_bruteforce_all(problem, start, max_length);
    std::map<Path, Complex> expected;
    for (int steps = 1; steps <= max_length; ++steps) {
      oracle::for_each_walk(4, start, steps, [&](const std::vector<int>& w) {
        for (std::size_t j = 0; j + 1 < w.size(); ++j) {
          if (!problem.is_interior(w[j])) return;
        }
        if (problem.is_interior(w.back())) return;
        const Complex weight = oracle::walk_weight(q, w);
        if (weight == Complex(0.0)) return;
        expected[erase_forward(w)] += weight;
      });
    }
    for (const auto& [eta, value] : expected) {
      REQUIRE(buckets.count(eta) == 1);
      CHECK(std::abs(buckets.at(eta) - value) < 1e-14);
    }
  }
}

TEST_CASE("lerw fixtures: formula within tail bound for every self-avoiding path") {
  for (const auto& [name, problem] : fixtures::lerw_problems()) {
    CAPTURE(name);
    for (int start : problem.interior()) {
      const auto buckets = lerw_bruteforce_all(problem, start, 10);
      for (const auto& [eta, value] : buckets) {
        const double tail = lerw_tail_bound(problem, start, eta.back(), 10);
        CHECK(std::abs(value - lerw_measure_formula(problem, eta)) <= tail + 1e-13);
      }
    }
  }
}

TEST_CASE("graph construction") {
  CHECK_THROWS_AS(SimpleGraph(2, {{0, 0}}), Error);
  CHECK_THROWS_AS(SimpleGraph(2, {{0, 1}, {1, 0}}), Error);
  CHECK_THROWS_AS(SimpleGraph(2, {{0, 2}}), Error);
  const auto k4 = SimpleGraph::complete(4);
  CHECK(k4.edges().size() == 6);
  CHECK(k4.degree(2) == 3);
  CHECK(k4.connected());
  CHECK_FALSE(SimpleGraph(3, {{0, 1}}).connected());
  const RMatrix lap = k4.graph_laplacian();
  CHECK(lap.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
  const auto walk = SimpleGraph::cycle(4).walk_matrix();
  CHECK(walk(0, 1) == Complex(0.5));
  CHECK(walk(0, 2) == Complex(0.0));
  Rng rng = substream(302, 0, 0);
  for (int i = 0; i < 20; ++i) CHECK(SimpleGraph::random_connected(6, 0.3, rng).connected());
}

TEST_CASE("tree_count_det examples") {
  CHECK(tree_count_det(SimpleGraph::path(3), 0) == 1);
  CHECK(tree_count_det(SimpleGraph::complete(3), 0) == 3);
  CHECK(tree_count_det(SimpleGraph::complete(4), 2) == 16);
  CHECK(tree_count_det(SimpleGraph::cycle(4), 1) == 4);
  for (int n = 2; n <= 9; ++n) CHECK(tree_count_det(SimpleGraph::complete(n), 0) == cayley(n));
}

TEST_CASE("enumerate_spanning_trees examples") {
  CHECK(enumerate_spanning_trees(SimpleGraph::complete(3)).size() == 3);
  CHECK(enumerate_spanning_trees(SimpleGraph::cycle(4)).size() == 4);
  CHECK(enumerate_spanning_trees(SimpleGraph::path(5)).size() == 1);
  CHECK(enumerate_spanning_trees(SimpleGraph::complete(6)).size() == 1296);
  CHECK_THROWS_AS(enumerate_spanning_trees(SimpleGraph::complete(9)), Error);
  CHECK(enumerate_spanning_trees(SimpleGraph(3, {{0, 1}})).empty());
}

TEST_CASE("matrix-tree: enumeration equals determinant, trees are distinct and valid") {
  for (const auto& [name, graph] : fixtures::tree_count_graphs()) {
    CAPTURE(name);
    const auto trees = enumerate_spanning_trees(graph);
    std::set<std::vector<std::pair<int, int>>> distinct;
    for (const auto& t : trees) {
      CHECK(t.valid_in(graph));
      distinct.insert(t.edges());
    }
    CHECK(distinct.size() == trees.size());
    for (int root = 0; root < graph.vertex_count(); ++root) {
      CHECK(tree_count_det(graph, root) == static_cast<std::int64_t>(trees.size()));
    }
  }
}

TEST_CASE("spanning tree validity") {
  const auto k3 = SimpleGraph::complete(3);
  CHECK(SpanningTree(0, {-1, 0, 1}).valid_in(k3));
  CHECK_FALSE(SpanningTree(0, {-1, 2, 1}).valid_in(k3));  // cycle 1 <-> 2
  CHECK_FALSE(SpanningTree(0, {-1, 0, 1}).valid_in(SimpleGraph(3, {{0, 1}, {0, 2}})));
}

TEST_CASE("wilson on a tree returns the tree") {
  const auto path = SimpleGraph::path(5);
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng rng = substream(303, 0, i);
    const auto tree = wilson_sample(path, 2, rng);
    CHECK(tree.valid_in(path));
    CHECK(tree.edges() == path.edges());
    CHECK(tree.root() == 2);
  }
}

TEST_CASE("wilson rejects disconnected graphs") {
  Rng rng = substream(304, 0, 0);
  try {
    wilson_sample(SimpleGraph(4, {{0, 1}, {2, 3}}), 0, rng);
    FAIL("expected Disconnected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Disconnected);
  }
}

TEST_CASE("wilson uniformity: every tree within 3 binomial sigma at 1e5 samples") {
  const std::pair<const char*, SimpleGraph> graphs[] = {{"K3", SimpleGraph::complete(3)}, {"K4", SimpleGraph::complete(4)}};
  for (std::uint64_t gi = 0; gi < 2; ++gi) {
    const auto& [name, graph] = graphs[gi];
    CAPTURE(name);
    const auto trees = enumerate_spanning_trees(graph);
    std::map<std::vector<std::pair<int, int>>, std::uint64_t> counts;
    for (const auto& t : trees) counts[t.edges()] = 0;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng = substream(42, 201 * 16 + gi, i);
      const auto tree = wilson_sample(graph, 0, rng);
      REQUIRE(counts.count(tree.edges()) == 1);
      ++counts[tree.edges()];
    }
    const double p = 1.0 / static_cast<double>(trees.size());
    const double sigma = std::sqrt(n * p * (1 - p));
    std::vector<std::uint64_t> observed;
    for (const auto& [edges, c] : counts) {
      CHECK(std::abs(static_cast<double>(c) - n * p) <= 3 * sigma);
      observed.push_back(c);
    }
    const std::vector<double> uniform(trees.size(), p);
    CHECK(chi_square_pvalue(observed, uniform) > 1e-3);
  }
}

}  // TEST_SUITE
