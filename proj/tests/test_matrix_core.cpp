#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "loopsoup/fixtures.hpp"
#include "loopsoup/matrix_core.hpp"
#include "oracles.hpp"

using namespace loopsoup;

namespace {

WeightMatrix chain3() {
  RMatrix q(3, 3);
  q << 0.0, 0.3, 0.0, 0.2, 0.0, 0.4, 0.0, 0.1, 0.0;
  return WeightMatrix::from_real(q);
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<WeightMatrix> random_matrices(int count, std::uint64_t seed) {
  std::vector<WeightMatrix> out;
  for (int i = 0; i < count; ++i) {
    Rng rng = substream(seed, 0, static_cast<std::uint64_t>(i));
    const int n = 1 + i % 5;
    out.push_back(fixtures::random_acceptable(n, 0.3 + 0.05 * (i % 10), rng, i % 2 == 1));
  }
  return out;
}

}  // namespace

TEST_SUITE("matrix_core") {

TEST_CASE("state space labels") {
  StateSpace s({"a", "b", "c"});
  CHECK(s.size() == 3);
  CHECK(s.index("b") == 1);
  CHECK(s.contains("c"));
  CHECK_FALSE(s.contains("d"));
  CHECK_THROWS_AS(s.index("d"), Error);
  CHECK_THROWS_AS(StateSpace({"a", "a"}), Error);
  CHECK_THROWS_AS(StateSpace(std::vector<std::string>{}), Error);
  CHECK(StateSpace::indexed(2).labels() == std::vector<std::string>{"0", "1"});
}

TEST_CASE("weight matrix validation and flags") {
  CHECK_THROWS_AS(WeightMatrix(CMatrix::Zero(2, 3)), Error);
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    WeightMatrix w(bad);
    FAIL("expected InvalidMatrix");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidMatrix);
  }
  CHECK_THROWS_AS(WeightMatrix(StateSpace::indexed(3), CMatrix::Zero(2, 2)), Error);

  const auto two = fixtures::two_state();
  CHECK(two.flags().real);
  CHECK(two.flags().positive);
  CHECK(two.flags().symmetric);
  CHECK(two.flags().hermitian);

  const auto herm = fixtures::hermitian_two_state();
  CHECK_FALSE(herm.flags().real);
  CHECK_FALSE(herm.flags().positive);
  CHECK_FALSE(herm.flags().symmetric);
  CHECK(herm.flags().hermitian);
}

TEST_CASE("spectral radius examples") {
  CHECK(spectral_radius_abs(WeightMatrix::zero(2)) == 0.0);
  CHECK(spectral_radius_abs(fixtures::one_point(0.5)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(spectral_radius_abs(fixtures::two_state()) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(spectral_radius_abs(fixtures::hermitian_two_state()) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("spectral radius agrees with eigenvalue oracle") {
  for (const auto& q : random_matrices(20, 101)) {
    Eigen::EigenSolver<RMatrix> es(q.abs());
    const double oracle = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(spectral_radius_abs(q) == doctest::Approx(oracle).epsilon(1e-8));
  }
  // Reducible and cyclic supports.
  RMatrix nil = RMatrix::Zero(3, 3);
  nil(0, 1) = 0.9;
  nil(1, 2) = 0.9;
  CHECK(spectral_radius_nonnegative(nil) == doctest::Approx(0.0).epsilon(1e-6));
  RMatrix cyc = RMatrix::Zero(3, 3);
  cyc(0, 1) = cyc(1, 2) = cyc(2, 0) = 0.5;
  CHECK(spectral_radius_nonnegative(cyc) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("acceptability gate") {
  CHECK(certify(fixtures::one_point(0.5)).acceptable);
  CHECK(certify(fixtures::one_point(0.5)).margin == doctest::Approx(0.5));
  CHECK_FALSE(certify(fixtures::one_point(1.0)).acceptable);
  RMatrix big(2, 2);
  big << 0.6, 0.6, 0.6, 0.6;
  try {
    require_acceptable(WeightMatrix::from_real(big));
    FAIL("expected NotAcceptable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotAcceptable);
  }
  // Acceptability is about |Q|, not Q: the signed matrix has spectral radius 0.
  RMatrix signed_q(2, 2);
  signed_q << 0.6, 0.6, -0.6, -0.6;
  CHECK_FALSE(certify(WeightMatrix::from_real(signed_q)).acceptable);
}

TEST_CASE("laplacian examples") {
  CHECK(max_abs(laplacian(WeightMatrix::zero(2)).entries() - CMatrix::Identity(2, 2)) == 0.0);
  CHECK(laplacian(fixtures::one_point(0.5))(0, 0) == Complex(0.5));
  CMatrix expected(2, 2);
  expected << 1.0, -0.5, -0.5, 1.0;
  CHECK(max_abs(laplacian(fixtures::two_state()).entries() - expected) == 0.0);
}

TEST_CASE("greens_exact examples") {
  CHECK(std::abs(greens_exact(fixtures::one_point(0.5))(0, 0) - 2.0) < 1e-15);
  CHECK(max_abs(greens_exact(WeightMatrix::zero(3)).entries - CMatrix::Identity(3, 3)) == 0.0);
  CMatrix expected(2, 2);
  expected << 4.0 / 3, 2.0 / 3, 2.0 / 3, 4.0 / 3;
  CHECK(max_abs(greens_exact(fixtures::two_state()).entries - expected) < 1e-14);
  CHECK_THROWS_AS(greens_exact(fixtures::one_point(1.0)), Error);
}

TEST_CASE("greens_exact inverts the laplacian") {
  for (const auto& q : random_matrices(20, 102)) {
    const auto g = greens_exact(q);
    const CMatrix residual = g.entries * laplacian(q).entries() - CMatrix::Identity(q.size(), q.size());
    CHECK(max_abs(residual) < 1e-12);
  }
}

TEST_CASE("greens_series examples") {
  const auto g = greens_series(fixtures::one_point(0.5), 10);
  CHECK(g(0, 0).real() == doctest::Approx(1.9990234375).epsilon(1e-15));
  CHECK(g.tail_bound <= std::pow(0.5, 11) / 0.5 * (1 + 1e-12));
  CHECK(std::abs(2.0 - g(0, 0)) <= g.tail_bound);
  CHECK(g.source == GreensFunction::Source::TruncatedSeries);
  CHECK(g.series_length == 10);

  const auto zero = greens_series(WeightMatrix::zero(2), 0);
  CHECK(max_abs(zero.entries - CMatrix::Identity(2, 2)) == 0.0);
  CHECK(zero.tail_bound == 0.0);

  const auto exact = greens_exact(fixtures::two_state());
  for (int length : {5, 10, 20, 40}) {
    const auto s = greens_series(fixtures::two_state(), length);
    CHECK(max_abs(s.entries - exact.entries) <= s.tail_bound);
  }
}

TEST_CASE("greens_series property: error within certified tail, tail shrinks") {
  for (const auto& q : random_matrices(20, 103)) {
    const auto exact = greens_exact(q);
    double previous = std::numeric_limits<double>::infinity();
    for (int length : {2, 6, 12, 24}) {
      const auto s = greens_series(q, length);
      CHECK(max_abs(s.entries - exact.entries) <= s.tail_bound * (1 + 1e-9) + 1e-14);
      CHECK(max_abs(s.entries - oracle::neumann(q.entries(), length)) < 1e-12);
      CHECK(s.tail_bound <= previous);
      previous = s.tail_bound;
    }
  }
}

TEST_CASE("neumann tail majorant dominates the true tail entrywise") {
  for (const auto& q : random_matrices(10, 104)) {
    const auto exact = greens_exact(q).entries;
    const RMatrix major = neumann_tail_majorant(q.abs(), 5);
    const RMatrix tail = (exact - oracle::neumann(q.entries(), 5)).cwiseAbs();
    CHECK((major - tail).minCoeff() >= -1e-12);
  }
}

TEST_CASE("restrict examples") {
  const auto two = fixtures::two_state();
  const std::vector<std::string> all{"0", "1"};
  CHECK(max_abs(restrict_to(two, all).entries() - two.entries()) == 0.0);
  const std::vector<std::string> x{"0"};
  const auto one = restrict_to(two, x);
  CHECK(one.size() == 1);
  CHECK(one(0, 0) == Complex(0.0));

  const auto chain = chain3();
  const std::vector<std::string> pair{"1", "2"};
  const auto block = restrict_to(chain, pair);
  CHECK(block(0, 0) == chain(1, 1));
  CHECK(block(0, 1) == chain(1, 2));
  CHECK(block(1, 0) == chain(2, 1));
  CHECK(block(1, 1) == chain(2, 2));
  CHECK(block.space().labels() == pair);

  const std::vector<std::string> missing{"7"};
  CHECK_THROWS_AS(restrict_to(two, missing), Error);
}

TEST_CASE("first_return_weight examples") {
  const auto one = fixtures::one_point(0.5);
  CHECK(std::abs(first_return_weight(one, 0, FirstReturnMode::ViaGreens).value - 0.5) < 1e-15);
  CHECK(std::abs(first_return_weight(one, 0, FirstReturnMode::BruteForce, 5).value - 0.5) < 1e-15);
  const auto two = fixtures::two_state();
  CHECK(std::abs(first_return_weight(two, 0, FirstReturnMode::ViaGreens).value - 0.25) < 1e-15);
  CHECK(std::abs(first_return_weight(two, 1, FirstReturnMode::BruteForce, 6).value - 0.25) < 1e-15);
  CHECK(std::abs(first_return_weight(WeightMatrix::zero(2), 1, FirstReturnMode::ViaGreens).value) == 0.0);
}

TEST_CASE("first return: renewal identity and brute-force oracle") {
  for (const auto& q : random_matrices(12, 105)) {
    if (q.size() > 3) continue;
    const auto g = greens_exact(q);
    for (int x = 0; x < q.size(); ++x) {
      const auto via = first_return_weight(q, x, FirstReturnMode::ViaGreens);
      CHECK(std::abs(g(x, x) * (1.0 - via.value) - 1.0) < 1e-12);
      const auto brute = first_return_weight(q, x, FirstReturnMode::BruteForce, 12);
      CHECK(std::abs(brute.value - via.value) <= brute.tail_bound + 1e-13);
    }
  }
}

TEST_CASE("perturb examples") {
  const auto two = fixtures::two_state();
  CHECK(max_abs(perturb(two, CVector::Zero(2)).entries() - two.entries()) == 0.0);
  const auto p = perturb(fixtures::one_point(0.5), CVector::Constant(1, 1.0));
  CHECK(p(0, 0) == Complex(0.25));
  CVector f(2);
  f << 1.0, 0.0;
  const auto half = perturb(two, f);
  CHECK(half(0, 1) == Complex(0.25));
  CHECK(half(1, 0) == Complex(0.5));
  try {
    perturb(two, CVector::Constant(2, -1.0));
    FAIL("expected DivisionByZero");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivisionByZero);
  }
  CHECK_THROWS_AS(perturb(two, CVector::Zero(3)), Error);
}

TEST_CASE("perturbed green's function equals (I + D_f - Q)^{-1}(I + D_f)") {
  for (const auto& q : random_matrices(10, 106)) {
    const int n = q.size();
    CVector f(n);
    for (int x = 0; x < n; ++x) f(x) = 0.1 * (x + 1);
    const CMatrix d = CMatrix::Identity(n, n) + diagonal(f);
    const CMatrix expected = (d - q.entries()).inverse() * d;
    CHECK(max_abs(greens_exact(perturb(q, f)).entries - expected) < 1e-12);
    CHECK(perturbation_margin(q, f).acceptable);
  }
}

TEST_CASE("determinant agrees with Leibniz expansion") {
  for (const auto& q : random_matrices(15, 107)) {
    const CMatrix lap = laplacian(q).entries();
    const Complex oracle_det = oracle::leibniz_det(lap);
    CHECK(std::abs(determinant(lap) - oracle_det) < 1e-12 * std::max(1.0, std::abs(oracle_det)));
    CHECK(std::abs(laplacian_determinant(q) - oracle_det) < 1e-12 * std::max(1.0, std::abs(oracle_det)));
  }
  RMatrix r(2, 2);
  r << 2.0, 1.0, 1.0, 3.0;
  CHECK(determinant(r) == doctest::Approx(5.0));
}

TEST_CASE("greens_diagonal_product examples") {
  const int x[] = {0};
  CHECK(std::abs(greens_diagonal_product(fixtures::one_point(0.5), x) - 2.0) < 1e-15);
  const int xy[] = {0, 1};
  const int yx[] = {1, 0};
  CHECK(std::abs(greens_diagonal_product(fixtures::two_state(), xy) - 4.0 / 3) < 1e-15);
  CHECK(std::abs(greens_diagonal_product(fixtures::two_state(), yx) - 4.0 / 3) < 1e-15);
  const int abc[] = {0, 1, 2};
  CHECK(greens_diagonal_product(WeightMatrix::zero(3), abc) == Complex(1.0));
  const int repeated[] = {0, 0};
  CHECK_THROWS_AS(greens_diagonal_product(fixtures::two_state(), repeated), Error);
}

TEST_CASE("greens_diagonal_product is ordering independent and equals 1/det") {
  for (const auto& q : random_matrices(15, 108)) {
    std::vector<int> order(static_cast<std::size_t>(q.size()));
    std::iota(order.begin(), order.end(), 0);
    const Complex target = 1.0 / oracle::leibniz_det(laplacian(q).entries());
    do {
      CHECK(std::abs(greens_diagonal_product(q, order) - target) <= 1e-10 * std::abs(target));
    } while (std::next_permutation(order.begin(), order.end()));
  }
}

TEST_CASE("complement") {
  const int removed[] = {1, 3};
  CHECK(complement(5, removed) == std::vector<int>{0, 2, 4});
}

}  // TEST_SUITE
