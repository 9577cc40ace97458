#pragma once

// Complex weight matrices on finite state spaces: acceptability, Laplacian,
// Green's functions (exact and Neumann series), restrictions, diagonal
// perturbations, determinants and first-return weights.

#include <span>
#include <string>
#include <vector>

#include "loopsoup/core_types.hpp"

namespace loopsoup {

inline constexpr double kFlagTolerance = 1e-12;
inline constexpr double kAcceptTolerance = 1e-9;
inline constexpr double kPivotTolerance = 1e-14;
inline constexpr double kSupportThreshold = 1e-15;

struct MatrixFlags {
  bool real = false;
  bool positive = false;  // every entry real and >= 0
  bool symmetric = false;
  bool hermitian = false;
};

class WeightMatrix {
 public:
  WeightMatrix() = default;
  /// Throws InvalidMatrix on shape mismatch or non-finite entries.
  WeightMatrix(StateSpace space, CMatrix entries);
  explicit WeightMatrix(const CMatrix& entries);

  static WeightMatrix from_real(const RMatrix& entries);
  static WeightMatrix zero(std::size_t n);

  const StateSpace& space() const noexcept { return space_; }
  const CMatrix& entries() const noexcept { return entries_; }
  const MatrixFlags& flags() const noexcept { return flags_; }
  int size() const noexcept { return static_cast<int>(entries_.rows()); }

  Complex operator()(int x, int y) const { return entries_(x, y); }

  /// Entrywise modulus |Q|.
  RMatrix abs() const { return entries_.cwiseAbs(); }

  /// Edges (x, y) with |Q(x, y)| > kSupportThreshold.
  bool in_support(int x, int y) const { return std::abs(entries_(x, y)) > kSupportThreshold; }

 private:
  StateSpace space_;
  CMatrix entries_;
  MatrixFlags flags_;
};

struct AcceptabilityCertificate {
  double spectral_radius_abs = 0.0;
  bool acceptable = false;
  double margin = 0.0;
};

struct GreensFunction {
  enum class Source { ExactInverse, TruncatedSeries };

  StateSpace space;
  CMatrix entries;
  Source source = Source::ExactInverse;
  int series_length = 0;  // L, for TruncatedSeries
  double tail_bound = 0.0;

  Complex operator()(int x, int y) const { return entries(x, y); }
};

/// Spectral radius of the nonnegative matrix |Q|.
double spectral_radius_abs(const WeightMatrix& q);
double spectral_radius_nonnegative(const RMatrix& a);

AcceptabilityCertificate certify(const WeightMatrix& q);

/// Throws NotAcceptable unless certify(q).acceptable.
AcceptabilityCertificate require_acceptable(const WeightMatrix& q);

WeightMatrix laplacian(const WeightMatrix& q);

/// G = (I - Q)^{-1} by partially pivoted LU.
GreensFunction greens_exact(const WeightMatrix& q);

/// sum_{j=0}^{L} Q^j with a certified max-norm tail bound.
GreensFunction greens_series(const WeightMatrix& q, int length);

/// Entrywise majorant of the Neumann tail: |Q|^{L+1} (I - |Q|)^{-1}.
RMatrix neumann_tail_majorant(const RMatrix& abs_q, int length);

/// Submatrix on the given labels, in the order given.
WeightMatrix restrict_to(const WeightMatrix& q, std::span<const std::string> labels);
WeightMatrix restrict_to_indices(const WeightMatrix& q, std::span<const int> indices);

/// D_f(x, y) = delta_{x,y} f(x).
CMatrix diagonal(const CVector& f);

/// Q_f = D_{1/(1+f)} Q (rows scaled by the departure site).
WeightMatrix perturb(const WeightMatrix& q, const CVector& f);

/// Acceptability certificate of Q_f; exposes the "f small enough" margin.
AcceptabilityCertificate perturbation_margin(const WeightMatrix& q, const CVector& f);

/// Determinant via LU, product of pivots.
Complex determinant(const CMatrix& m);
double determinant(const RMatrix& m);

/// det(I - Q).
Complex laplacian_determinant(const WeightMatrix& q);

struct FirstReturnWeight {
  Complex value;
  double tail_bound = 0.0;  // 0 for via_greens
};

enum class FirstReturnMode { ViaGreens, BruteForce };

/// f_x: weight of loops at x with no intermediate visit to x.
FirstReturnWeight first_return_weight(const WeightMatrix& q, int x, FirstReturnMode mode,
                                      int max_length = 0);

/// prod_j G_{A_j}(x_j, x_j) with A_j = A minus {x_1..x_{j-1}}; `ordering` may be a
/// prefix of the sites (this is F_V for V = ordering).
Complex greens_diagonal_product(const WeightMatrix& q, std::span<const int> ordering);

/// Positions 0..n-1 not in `removed`, ascending.
std::vector<int> complement(int n, std::span<const int> removed);

}  // namespace loopsoup
