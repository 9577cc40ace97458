#pragma once

// Rooted and unrooted loops, exhaustive loop enumeration and the
// brute-force loop-measure sums that serve as oracles for the determinant
// identities.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "loopsoup/matrix_core.hpp"

namespace loopsoup {

inline constexpr std::uint64_t kDefaultLoopBudget = 10'000'000;

/// [w0, ..., wn] with w0 == wn and n >= 1.
class RootedLoop {
 public:
  RootedLoop() = default;
  /// Throws InvalidPath unless first == last and length >= 1.
  explicit RootedLoop(Path sites);

  const Path& sites() const noexcept { return sites_; }
  int length() const noexcept { return static_cast<int>(sites_.size()) - 1; }
  int root() const { return sites_.front(); }
  /// The step word w0..w_{n-1}.
  std::span<const int> word() const { return {sites_.data(), sites_.size() - 1}; }

  RootedLoop reversed() const;
  /// Rotation starting at word position k.
  RootedLoop rotated(int k) const;

  bool operator==(const RootedLoop&) const = default;
  auto operator<=>(const RootedLoop&) const = default;

 private:
  Path sites_;
};

struct UnrootedLoop {
  RootedLoop canonical;  // least rotation
  int period = 1;        // d: number of distinct rotations
  int length = 1;

  bool operator==(const UnrootedLoop&) const = default;
};

struct LoopMeasureValue {
  Complex rooted;    // Q(w) / |w|
  Complex unrooted;  // d / |w| * Q(w)
};

/// prod Q(w_{j-1}, w_j); 1 for the trivial path.
Complex path_weight(const WeightMatrix& q, std::span<const int> path);

/// Start index of the lexicographically least rotation (Booth).
int least_rotation(std::span<const int> word);

/// Smallest p dividing |word| such that the word is p-periodic.
int minimal_period(std::span<const int> word);

UnrootedLoop canonicalize(const RootedLoop& loop);

LoopMeasureValue loop_measure(const WeightMatrix& q, const RootedLoop& loop);

/// N^w(x): visits to x among w_1..w_n.
int local_time(const RootedLoop& loop, int x);
std::vector<int> local_times(const RootedLoop& loop, int n_sites);

/// m_f(w) = m(w) prod_{j=1}^{n} 1/(1 + f(w_j)).
Complex perturbed_measure(const WeightMatrix& q, const CVector& f, const RootedLoop& loop);

using LoopVisitor = std::function<void(std::span<const int> sites, Complex weight)>;

/// Streams every rooted loop of length 1..max_length supported on nonzero
/// entries of q, ordered by length then lexicographically. Returns the loop
/// count. Throws LoopBudgetExceeded once more than `budget` loops are produced.
std::uint64_t enumerate_rooted_loops(const WeightMatrix& q, int max_length, const LoopVisitor& visit,
                                     std::uint64_t budget = kDefaultLoopBudget);

/// Number of rooted loops of each length 1..L on the support, via traces of
/// powers of the 0/1 support matrix.
std::vector<double> count_rooted_loops(const WeightMatrix& q, int max_length);

/// F(A) = 1 / det(I - Q).
Complex F_exact(const WeightMatrix& q);

/// F_V(A) = prod_j G_{A_j}(x_j, x_j) over the ordering of V.
Complex F_V_exact(const WeightMatrix& q, std::span<const int> v_ordering);

struct FTruncated {
  Complex value;          // exp(rooted_sum)
  double tail_bound = 0;  // certified |F - value|
  Complex rooted_sum;     // sum of m(w), |w| <= L
  Complex unrooted_sum;   // sum of m~(w~), |w~| <= L
  double sum_tail = 0;    // certified |sum_{|w|>L} m(w)|
  std::uint64_t loops = 0;
};

/// exp of the truncated loop-measure sum, restricted to loops meeting
/// `meeting` when given.
FTruncated F_truncated(const WeightMatrix& q, int max_length,
                       std::optional<std::span<const int>> meeting = std::nullopt,
                       std::uint64_t budget = kDefaultLoopBudget);

struct FTruncatedAll {
  FTruncated total;
  std::vector<FTruncated> per_site;  // loops meeting each single site
};

/// F_truncated for the whole space and for every single site, in one pass.
FTruncatedAll F_truncated_all(const WeightMatrix& q, int max_length, std::uint64_t budget = kDefaultLoopBudget);

/// Certified bound on sum_{n > L} trace(|Q|^n) / n.
double loop_sum_tail_bound(int n_sites, double rho, int max_length);

}  // namespace loopsoup
