#pragma once

// Standard weight matrices, boundary problems and graphs used by the
// verification suites, plus seeded random generators for acceptable weights.

#include <string>
#include <vector>

#include "loopsoup/lerw_wilson.hpp"
#include "loopsoup/matrix_core.hpp"
#include "loopsoup/random.hpp"

namespace loopsoup::fixtures {

struct NamedMatrix {
  std::string name;
  WeightMatrix q;
};

struct NamedGraph {
  std::string name;
  SimpleGraph graph;
};

struct NamedProblem {
  std::string name;
  BoundaryProblem problem;
};

enum class Structure { General, Symmetric, Hermitian };

/// Q with |Q| of spectral radius exactly `rho`. Entries are kept with
/// probability `density` (diagonal always kept); complex when `complex_entries`.
WeightMatrix random_acceptable(int n, double rho, Rng& rng, bool complex_entries = false,
                               Structure structure = Structure::General, double density = 1.0);

/// Same, but positive real entries.
WeightMatrix random_positive(int n, double rho, Rng& rng, Structure structure = Structure::General);

WeightMatrix one_point(double q);
/// [[0, 1/2], [1/2, 0]].
WeightMatrix two_state();
/// [[0, i/2], [-i/2, 0]].
WeightMatrix hermitian_two_state();
/// Random symmetric positive 4-site matrix with rho(|Q|) = 0.6 (seed 20240601).
WeightMatrix symmetric_four_site();
/// Random Hermitian 3-site matrix with rho(|Q|) = 0.5 (seed 20240602).
WeightMatrix hermitian_three_site();

/// Positive fixtures for soup Monte Carlo: one-point 0.3 and 0.5, two-state, four-site.
std::vector<NamedMatrix> positive_fixtures();
/// Real symmetric fixtures for the isomorphism identities.
std::vector<NamedMatrix> symmetric_fixtures();
/// Hermitian fixtures for the doubling checks.
std::vector<NamedMatrix> hermitian_fixtures();

/// 20 seeded random acceptable matrices, n <= 4, rho <= 0.7, real and
/// complex, whose rooted-loop count up to `max_length` stays under `loop_cap`.
std::vector<NamedMatrix> random_identity_fixtures(int max_length, double loop_cap, std::uint64_t seed = 7);

/// Boundary problems with three interior sites.
std::vector<NamedProblem> lerw_problems(std::uint64_t seed = 11);

/// Componentwise values from {0, 0.1, 0.2, 0.5}, keeping Q_f acceptable with margin >= 0.05.
std::vector<RVector> f_grid(const WeightMatrix& q);

std::vector<NamedGraph> tree_count_graphs(std::uint64_t seed = 5);

}  // namespace loopsoup::fixtures
