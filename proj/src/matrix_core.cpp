#include "loopsoup/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace loopsoup {

namespace {

MatrixFlags compute_flags(const CMatrix& q) {
  MatrixFlags flags{true, true, true, true};
  const Eigen::Index n = q.rows();
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      const Complex v = q(x, y);
      if (std::abs(v.imag()) > kFlagTolerance) flags.real = false;
      if (std::abs(v.imag()) > kFlagTolerance || v.real() < -kFlagTolerance) flags.positive = false;
      if (std::abs(v - q(y, x)) > kFlagTolerance) flags.symmetric = false;
      if (std::abs(v - std::conj(q(y, x))) > kFlagTolerance) flags.hermitian = false;
    }
  }
  return flags;
}

// Power iteration with Collatz-Wielandt bracketing. Returns a negative value
// when the bracket cannot be formed or does not close.
double collatz_wielandt(const RMatrix& a) {
  const Eigen::Index n = a.rows();
  RVector v = RVector::Ones(n);
  for (int iter = 0; iter < 10000; ++iter) {
    RVector w = a * v;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v(i) <= 0.0) return -1.0;
      const double ratio = w(i) / v(i);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    if (hi == 0.0) return 0.0;
    if (hi - lo <= 1e-12 * hi) return 0.5 * (hi + lo);
    const double norm = w.maxCoeff();
    if (norm <= 0.0) return -1.0;
    v = w / norm;
  }
  return -1.0;
}

}  // namespace

WeightMatrix::WeightMatrix(StateSpace space, CMatrix entries)
    : space_(std::move(space)), entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw Error(ErrorKind::InvalidMatrix, "weight matrix must be square");
  }
  if (static_cast<std::size_t>(entries_.rows()) != space_.size()) {
    throw Error(ErrorKind::InvalidMatrix, "matrix dimension does not match state space size");
  }
  for (Eigen::Index i = 0; i < entries_.size(); ++i) {
    const Complex v = entries_.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(ErrorKind::InvalidMatrix, "non-finite matrix entry");
    }
  }
  flags_ = compute_flags(entries_);
}

WeightMatrix::WeightMatrix(const CMatrix& entries)
    : WeightMatrix(StateSpace::indexed(static_cast<std::size_t>(entries.rows())), entries) {}

WeightMatrix WeightMatrix::from_real(const RMatrix& entries) {
  return WeightMatrix(CMatrix(entries.cast<Complex>()));
}

WeightMatrix WeightMatrix::zero(std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  return WeightMatrix(CMatrix::Zero(size, size));
}

double spectral_radius_nonnegative(const RMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::InvalidMatrix, "matrix must be square");
  if (!a.allFinite()) throw Error(ErrorKind::InvalidMatrix, "non-finite matrix entry");
  if (a.size() == 0) return 0.0;
  const double rho = collatz_wielandt(a);
  if (rho >= 0.0) return rho;
  Eigen::EigenSolver<RMatrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "eigenvalue computation failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius_abs(const WeightMatrix& q) { return spectral_radius_nonnegative(q.abs()); }

AcceptabilityCertificate certify(const WeightMatrix& q) {
  AcceptabilityCertificate cert;
  cert.spectral_radius_abs = spectral_radius_abs(q);
  cert.acceptable = cert.spectral_radius_abs < 1.0 - kAcceptTolerance;
  cert.margin = 1.0 - cert.spectral_radius_abs;
  return cert;
}

AcceptabilityCertificate require_acceptable(const WeightMatrix& q) {
  auto cert = certify(q);
  if (!cert.acceptable) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "spectral radius of |Q| is %.6g (must be < 1 - %g)", cert.spectral_radius_abs,
                  kAcceptTolerance);
    throw Error(ErrorKind::NotAcceptable, buf);
  }
  return cert;
}

WeightMatrix laplacian(const WeightMatrix& q) {
  const auto n = q.size();
  return WeightMatrix(q.space(), CMatrix::Identity(n, n) - q.entries());
}

Complex determinant(const CMatrix& m) {
  if (m.size() == 0) return {1.0, 0.0};
  return Eigen::PartialPivLU<CMatrix>(m).determinant();
}

double determinant(const RMatrix& m) {
  if (m.size() == 0) return 1.0;
  return Eigen::PartialPivLU<RMatrix>(m).determinant();
}

Complex laplacian_determinant(const WeightMatrix& q) {
  return determinant(CMatrix(CMatrix::Identity(q.size(), q.size()) - q.entries()));
}

GreensFunction greens_exact(const WeightMatrix& q) {
  require_acceptable(q);
  const auto n = q.size();
  const CMatrix delta = CMatrix::Identity(n, n) - q.entries();
  Eigen::PartialPivLU<CMatrix> lu(delta);
  const CMatrix& packed = lu.matrixLU();
  for (int i = 0; i < n; ++i) {
    if (std::abs(packed(i, i)) < kPivotTolerance) {
      throw Error(ErrorKind::NumericallySingular, "LU pivot below tolerance");
    }
  }
  GreensFunction g;
  g.space = q.space();
  g.entries = lu.inverse();
  g.source = GreensFunction::Source::ExactInverse;
  return g;
}

RMatrix neumann_tail_majorant(const RMatrix& abs_q, int length) {
  const auto n = abs_q.rows();
  RMatrix power = RMatrix::Identity(n, n);
  for (int j = 0; j <= length; ++j) power = power * abs_q;
  const RMatrix resolvent = (RMatrix::Identity(n, n) - abs_q).partialPivLu().inverse();
  return power * resolvent;
}

GreensFunction greens_series(const WeightMatrix& q, int length) {
  if (length < 0) throw Error(ErrorKind::InvalidInput, "series length must be >= 0");
  const auto cert = require_acceptable(q);
  const auto n = q.size();
  CMatrix sum = CMatrix::Identity(n, n);
  CMatrix power = CMatrix::Identity(n, n);
  for (int j = 1; j <= length; ++j) {
    power = power * q.entries();
    sum += power;
  }
  const double rho = cert.spectral_radius_abs;
  // The spectral envelope n rho^{L+1}/(1-rho) is not a bound for non-normal
  // |Q|; take the larger of it and the exact nonnegative majorant.
  const double envelope = n * std::pow(rho, length + 1) / (1.0 - rho);
  const double majorant = neumann_tail_majorant(q.abs(), length).maxCoeff();
  GreensFunction g;
  g.space = q.space();
  g.entries = std::move(sum);
  g.source = GreensFunction::Source::TruncatedSeries;
  g.series_length = length;
  g.tail_bound = rho == 0.0 ? 0.0 : std::max(envelope, majorant);
  return g;
}

WeightMatrix restrict_to_indices(const WeightMatrix& q, std::span<const int> indices) {
  if (indices.empty()) throw Error(ErrorKind::InvalidInput, "restriction set must be nonempty");
  const auto k = static_cast<Eigen::Index>(indices.size());
  CMatrix sub(k, k);
  std::vector<std::string> labels;
  labels.reserve(indices.size());
  for (Eigen::Index a = 0; a < k; ++a) {
    const int x = indices[static_cast<std::size_t>(a)];
    if (x < 0 || x >= q.size()) throw Error(ErrorKind::UnknownSite, "site index out of range");
    labels.push_back(q.space().label(x));
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = q(x, indices[static_cast<std::size_t>(b)]);
  }
  return WeightMatrix(StateSpace(std::move(labels)), std::move(sub));
}

WeightMatrix restrict_to(const WeightMatrix& q, std::span<const std::string> labels) {
  std::vector<int> indices;
  indices.reserve(labels.size());
  for (const auto& label : labels) indices.push_back(q.space().index(label));
  return restrict_to_indices(q, indices);
}

CMatrix diagonal(const CVector& f) { return f.asDiagonal(); }

WeightMatrix perturb(const WeightMatrix& q, const CVector& f) {
  if (f.size() != q.size()) throw Error(ErrorKind::InvalidInput, "perturbation has wrong length");
  CMatrix scaled = q.entries();
  for (int x = 0; x < q.size(); ++x) {
    const Complex denom = 1.0 + f(x);
    if (std::abs(denom) == 0.0) {
      throw Error(ErrorKind::DivisionByZero, "1 + f(x) vanishes at site " + q.space().label(x));
    }
    scaled.row(x) /= denom;
  }
  return WeightMatrix(q.space(), std::move(scaled));
}

AcceptabilityCertificate perturbation_margin(const WeightMatrix& q, const CVector& f) {
  return certify(perturb(q, f));
}

std::vector<int> complement(int n, std::span<const int> removed) {
  std::vector<bool> gone(static_cast<std::size_t>(n), false);
  for (int x : removed) gone.at(static_cast<std::size_t>(x)) = true;
  std::vector<int> rest;
  for (int x = 0; x < n; ++x) {
    if (!gone[static_cast<std::size_t>(x)]) rest.push_back(x);
  }
  return rest;
}

namespace {

FirstReturnWeight first_return_brute_force(const WeightMatrix& q, int x, int max_length) {
  if (max_length < 1) throw Error(ErrorKind::InvalidInput, "brute-force length cap must be >= 1");
  constexpr long long kPathBudget = 50'000'000;
  const int n = q.size();
  Complex total{0.0, 0.0};
  long long visited = 0;

  // Depth-first over excursions x -> (sites != x)* -> x.
  std::function<void(int, Complex, int)> walk = [&](int site, Complex weight, int steps) {
    if (++visited > kPathBudget) {
      throw Error(ErrorKind::LoopBudgetExceeded, "first-return enumeration exceeded budget");
    }
    for (int y = 0; y < n; ++y) {
      if (!q.in_support(site, y)) continue;
      const Complex next = weight * q(site, y);
      if (y == x) {
        total += next;
      } else if (steps + 1 < max_length) {
        walk(y, next, steps + 1);
      }
    }
  };
  walk(x, Complex{1.0, 0.0}, 0);

  // Excursions longer than the cap: |Q|(x,B) |Q_B|^{L-1} (I - |Q_B|)^{-1} |Q|(B,x).
  const std::vector<int> others = complement(n, std::span<const int>(&x, 1));
  double tail = 0.0;
  if (!others.empty()) {
    const RMatrix abs_q = q.abs();
    const auto k = static_cast<Eigen::Index>(others.size());
    RMatrix sub(k, k);
    RVector out(k);
    RVector back(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      out(a) = abs_q(x, others[static_cast<std::size_t>(a)]);
      back(a) = abs_q(others[static_cast<std::size_t>(a)], x);
      for (Eigen::Index b = 0; b < k; ++b) {
        sub(a, b) = abs_q(others[static_cast<std::size_t>(a)], others[static_cast<std::size_t>(b)]);
      }
    }
    const RMatrix majorant = neumann_tail_majorant(sub, max_length - 2);
    tail = out.dot(majorant * back);
  }
  return {total, tail};
}

}  // namespace

FirstReturnWeight first_return_weight(const WeightMatrix& q, int x, FirstReturnMode mode,
                                      int max_length) {
  require_acceptable(q);
  if (x < 0 || x >= q.size()) throw Error(ErrorKind::UnknownSite, "site index out of range");
  if (mode == FirstReturnMode::BruteForce) return first_return_brute_force(q, x, max_length);
  const Complex gxx = greens_exact(q)(x, x);
  if (std::abs(gxx) == 0.0) throw Error(ErrorKind::DivisionByZero, "G(x,x) vanishes");
  return {1.0 - 1.0 / gxx, 0.0};
}

Complex greens_diagonal_product(const WeightMatrix& q, std::span<const int> ordering) {
  require_acceptable(q);
  const int n = q.size();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int x : ordering) {
    if (x < 0 || x >= n) throw Error(ErrorKind::UnknownSite, "site index out of range");
    if (seen[static_cast<std::size_t>(x)]) throw Error(ErrorKind::InvalidInput, "repeated site in ordering");
    seen[static_cast<std::size_t>(x)] = true;
  }
  Complex product{1.0, 0.0};
  for (std::size_t j = 0; j < ordering.size(); ++j) {
    // A_j: all sites except ordering[0..j-1]; position of ordering[j] within it.
    const std::vector<int> remaining = complement(n, ordering.subspan(0, j));
    const auto pos = std::find(remaining.begin(), remaining.end(), ordering[j]) - remaining.begin();
    const WeightMatrix sub = restrict_to_indices(q, remaining);
    const auto k = static_cast<Eigen::Index>(remaining.size());
    const CMatrix delta = CMatrix::Identity(k, k) - sub.entries();
    CVector unit = CVector::Zero(k);
    unit(pos) = 1.0;
    const CVector column = delta.partialPivLu().solve(unit);
    product *= column(pos);
  }
  return product;
}

}  // namespace loopsoup
