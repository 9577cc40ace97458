#pragma once

// Real and complex Gaussian free fields, their Laplace transforms, the
// loop-soup isomorphism checks and the two-sheet doubling of Hermitian
// weights.

#include <cstdint>
#include <vector>

#include "loopsoup/matrix_core.hpp"
#include "loopsoup/random.hpp"
#include "loopsoup/soup_field.hpp"

namespace loopsoup {

inline constexpr double kCholeskyResidual = 1e-10;

/// Centered Gaussian field with covariance G, sampled as C z with C C^T = G.
class GFFModel {
 public:
  /// Throws NotPositiveDefinite unless G is symmetric positive definite.
  explicit GFFModel(RMatrix covariance);

  /// Covariance G = (I - Q)^{-1} for symmetric real acceptable Q.
  static GFFModel from_weights(const WeightMatrix& q);

  const RMatrix& covariance() const noexcept { return covariance_; }
  /// Lower-triangular Cholesky factor.
  const RMatrix& factor() const noexcept { return factor_; }
  /// G^{-1}.
  const RMatrix& laplacian() const noexcept { return laplacian_; }
  int size() const noexcept { return static_cast<int>(covariance_.rows()); }

 private:
  RMatrix covariance_;
  RMatrix factor_;
  RMatrix laplacian_;
};

RVector gff_sample(const GFFModel& model, Rng& rng);

/// Sample i drawn on substream (seed, stream, i).
std::vector<RVector> sample_gff_fields(const GFFModel& model, std::size_t count, std::uint64_t seed,
                                       std::uint64_t stream);

/// Q = I - G^{-1}.
WeightMatrix weights_from_covariance(const RMatrix& covariance);

/// E[exp(-phi^2 . f / 2)] = 1 / sqrt(det(Delta + D_f) det G).
double gff_transform_closed(const WeightMatrix& q, const RVector& f);

struct IdentityCheck {
  Complex lhs;
  Complex rhs;
  double abs_error = 0.0;
};

/// lhs: nu_{1/2} times trivial_{1/2} transforms; rhs: the GFF transform.
IdentityCheck isomorphism_identity_check(const WeightMatrix& q, const RVector& f);

struct IsomorphismMc {
  TransformReport gff;   // exp(-phi^2 . f / 2)
  TransformReport soup;  // rho_{1/2} samples
};

/// Empirical transforms of phi^2/2 and of rho_{1/2} at each f, against the
/// common closed form. Samples are shared across the f grid.
std::vector<IsomorphismMc> isomorphism_mc_check(const WeightMatrix& q, const std::vector<RVector>& fs,
                                                std::size_t samples, std::uint64_t seed);

struct MomentComparison {
  double mean_lhs = 0, mean_rhs = 0, mean_sigma = 0;
  double var_lhs = 0, var_rhs = 0, var_sigma = 0;
  bool within(double sigmas) const {
    return std::abs(mean_lhs - mean_rhs) <= sigmas * mean_sigma && std::abs(var_lhs - var_rhs) <= sigmas * var_sigma;
  }
};

struct ChiSquareDecomposition {
  TransformReport gaussian;   // Z^2/2 with Z ~ N(0, 1/(1-q))
  TransformReport soup_plus;  // L_{1/2} + Gamma(1/2, 1)
  MomentComparison moments;
};

ChiSquareDecomposition chi_square_decomposition_check(double q, double s, std::size_t samples, std::uint64_t seed);

struct DoubledWeights {
  WeightMatrix weights;  // [[Q_R, -Q_I], [Q_I, Q_R]] on A then A*
  bool acceptable = false;
  std::string warning;   // nonempty when the doubled matrix is not acceptable
};

/// Throws InvalidInput unless Q' is Hermitian.
DoubledWeights double_weights(const WeightMatrix& q_prime);

/// [[G_R, -G_I], [G_I, G_R]].
RMatrix double_covariance(const CMatrix& g_prime);

class ComplexGFFModel {
 public:
  /// G' Hermitian positive definite; throws NotPositiveDefinite otherwise.
  explicit ComplexGFFModel(CMatrix covariance_prime);
  static ComplexGFFModel from_weights(const WeightMatrix& q_prime);

  const CMatrix& covariance_prime() const noexcept { return covariance_prime_; }
  const GFFModel& doubled() const noexcept { return doubled_; }
  int size() const noexcept { return static_cast<int>(covariance_prime_.rows()); }

 private:
  CMatrix covariance_prime_;
  GFFModel doubled_;
};

/// psi_x = phi_x + i phi_{x*}; E[psi psi^H] = 2 G'.
CVector complex_gff_sample(const ComplexGFFModel& model, Rng& rng);

/// h = psi / sqrt(2); E[h h^H] = G'.
inline CVector normalized_view(const CVector& psi) { return psi / std::sqrt(2.0); }

struct ComplexCovarianceEstimate {
  CMatrix covariance;         // mean of psi psi^H
  CMatrix pseudo_covariance;  // mean of psi psi^T
  RMatrix covariance_sigma;   // entrywise MC standard error (modulus)
  RMatrix pseudo_sigma;
};

ComplexCovarianceEstimate estimate_complex_covariance(const ComplexGFFModel& model, std::size_t samples,
                                                      std::uint64_t seed, std::uint64_t stream);

struct PushforwardReport {
  double max_abs_error = 0.0;
  std::uint64_t loops_checked = 0;
  Complex pushforward_sum;  // sum over loops of Phi_* m
  Complex prime_sum;        // sum over loops of m'
  double sum_tail = 0.0;    // tail bound shared by both sums
};

/// Per-loop comparison of the lifted measure against m'(w) + m'(w^R).
PushforwardReport pushforward_check(const WeightMatrix& q_prime, int max_length,
                                    std::uint64_t budget = kDefaultLoopBudget);

struct DoublingDeterminants {
  Complex det_doubled;       // det G on the doubled space
  Complex det_prime_squared; // (det G')^2
  double relative_error = 0.0;
  double eigenvalue_mismatch = 0.0;  // max gap after sorting
};

/// det G vs (det G')^2 and eigenvalue multiset doubling, for G' = (I - Q')^{-1}.
DoublingDeterminants doubling_determinants(const WeightMatrix& q_prime);

}  // namespace loopsoup
