#pragma once

// Complex-parameter Poisson laws, exact loop-soup sampling for positive
// weights, discrete and continuous occupation fields, and the closed-form
// and empirical Laplace functionals of those fields.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "loopsoup/loop_enum.hpp"
#include "loopsoup/matrix_core.hpp"
#include "loopsoup/random.hpp"

namespace loopsoup {

// ---------------------------------------------------------------------------
// Poisson laws with complex parameter

struct ComplexPoissonLaw {
  Complex lambda;
  int kmax = 0;
  std::vector<Complex> masses;     // q(k) = e^{-lambda} lambda^k / k!, k = 0..kmax
  double variation_norm = 0.0;     // exp(|lambda| - Re lambda)
  double tabulated_variation = 0;  // sum |q(k)| over the table
  double tail_bound = 0.0;         // sum_{k > kmax} |q(k)|

  Complex operator[](int k) const { return masses.at(static_cast<std::size_t>(k)); }
};

/// Smallest kmax whose tail bound is below `tolerance`.
int default_kmax(Complex lambda, double tolerance = 1e-12);

ComplexPoissonLaw complex_poisson(Complex lambda, std::optional<int> kmax = std::nullopt);

/// Convolution on the common truncated support 0..min(kmax).
std::vector<Complex> convolve(const ComplexPoissonLaw& a, const ComplexPoissonLaw& b);

struct TruncatedTransform {
  Complex value;       // sum_{k <= kmax} e^{k alpha} q(k)
  Complex closed;      // exp(lambda (e^alpha - 1))
  double tail_bound;   // bound on the omitted terms
};

TruncatedTransform poisson_laplace(const ComplexPoissonLaw& law, Complex alpha);

// ---------------------------------------------------------------------------
// Loop soups

/// m(all loops) = -log det(I - Q) for positive acceptable Q.
double soup_total_mass(const WeightMatrix& q);

struct LoopSoupSample {
  double intensity = 0.0;
  int n_sites = 0;
  std::vector<RootedLoop> loops;  // multiset, in draw order

  /// Loop -> multiplicity C(w).
  std::map<RootedLoop, int> multiplicities() const;
};

/// Exact sampler for the loop soup of a positive acceptable Q. Immutable
/// after construction; safe to share across threads.
class LoopSoupSampler {
 public:
  explicit LoopSoupSampler(const WeightMatrix& q);

  double total_mass() const noexcept { return mass_; }
  double spectral_radius() const noexcept { return rho_; }
  int n_sites() const noexcept { return n_; }

  /// One loop drawn from m / total_mass.
  RootedLoop sample_loop(Rng& rng) const;
  /// Loop length alone; P(n) = trace(Q^n) / (n mass).
  int sample_length(Rng& rng) const;
  LoopSoupSample sample_soup(double t, Rng& rng) const;

 private:
  RootedLoop sample_body(int length, Rng& rng) const;
  double tail_envelope(int length) const;

  RMatrix q_;
  int n_ = 0;
  double mass_ = 0.0;
  double rho_ = 0.0;
  std::vector<RMatrix> powers_;  // Q^0 .. Q^cached
  std::vector<double> cumulative_;  // cumulative_[n-1] = sum_{k<=n} trace(Q^k)/k
};

/// Convenience wrapper: builds a sampler and draws one soup.
LoopSoupSample sample_soup(const WeightMatrix& q, double t, Rng& rng);

// ---------------------------------------------------------------------------
// Occupation fields

struct OccupationField {
  enum class Kind { Discrete, Continuous };

  Kind kind = Kind::Discrete;
  RVector values;
  bool includes_trivial = false;

  double operator[](int x) const { return values(x); }
};

/// L(x) = sum_w C(w) N^w(x).
OccupationField discrete_occupation(const LoopSoupSample& soup);

/// Gamma(L(x) + t_trivial, 1) per site.
OccupationField continuous_occupation(const OccupationField& discrete, double t_trivial, Rng& rng);

/// N independent continuous fields at intensity t, sample i on substream (seed, stream, i).
std::vector<OccupationField> sample_continuous_fields(const LoopSoupSampler& sampler, double t, double t_trivial,
                                                      std::size_t count, std::uint64_t seed, std::uint64_t stream);

// ---------------------------------------------------------------------------
// Laplace functionals

/// (det G_f / det G)^t, principal branch continued along s -> s f.
Complex nu_transform_closed(const WeightMatrix& q, const CVector& f, double t);

/// prod_x (1 + f(x))^{-t}.
Complex trivial_transform_closed(const CVector& f, double t);

struct TransformReport {
  RVector f;
  Complex closed_form;
  Complex empirical;
  double mc_stderr = 0.0;
  std::size_t samples = 0;

  double deviation() const { return std::abs(closed_form - empirical); }
  bool within(double sigmas) const { return deviation() <= sigmas * mc_stderr; }
};

/// Mean and standard error of exp(-L . f) over the samples.
TransformReport empirical_transform(const std::vector<OccupationField>& samples, const RVector& f);

struct ReversalCheck {
  Complex direct;     // (det G_f / det G)^{2t}
  Complex reversed;   // exp(t sum_{|w|<=L} [m_f^R - m^R])
  double tail_bound;  // bound on |direct - reversed| from truncation
};

ReversalCheck reversal_symmetrization_check(const WeightMatrix& q, const CVector& f, double t, int max_length);

struct VariationBound {
  double alpha;
  double tail_bound;
};

/// alpha = exp(t sum_w (|m(w)| - Re m(w))), truncated at max_length.
VariationBound variation_bound_alpha(const WeightMatrix& q, double t, int max_length);

}  // namespace loopsoup
