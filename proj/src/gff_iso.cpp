#include "loopsoup/gff_iso.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace loopsoup {

namespace {

constexpr std::uint64_t kStreamGff = 101;
constexpr std::uint64_t kStreamSoup = 102;
constexpr std::uint64_t kStreamChiGauss = 103;
constexpr std::uint64_t kStreamChiSoup = 104;

double scale_of(const RMatrix& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

void require_symmetric_real(const WeightMatrix& q) {
  if (!q.flags().real || !q.flags().symmetric) {
    throw Error(ErrorKind::OutOfDomain, "real symmetric weights required");
  }
}

CMatrix checked_hermitian_pd(CMatrix g) {
  if (g.rows() != g.cols()) throw Error(ErrorKind::InvalidMatrix, "covariance must be square");
  const double tol = 1e-10 * std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorKind::NotPositiveDefinite, "covariance is not Hermitian");
  }
  Eigen::LLT<CMatrix> llt(g);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "covariance is not positive definite");
  return g;
}

}  // namespace

GFFModel::GFFModel(RMatrix covariance) : covariance_(std::move(covariance)) {
  if (covariance_.rows() != covariance_.cols() || covariance_.size() == 0) {
    throw Error(ErrorKind::InvalidMatrix, "covariance must be square and nonempty");
  }
  const double tol = kCholeskyResidual * scale_of(covariance_);
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorKind::NotPositiveDefinite, "covariance is not symmetric");
  }
  Eigen::LLT<RMatrix> llt(covariance_);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "covariance is not positive definite");
  factor_ = llt.matrixL();
  if ((factor_ * factor_.transpose() - covariance_).cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorKind::NumericalFailure, "Cholesky residual above tolerance");
  }
  laplacian_ = llt.solve(RMatrix::Identity(covariance_.rows(), covariance_.cols()));
}

GFFModel GFFModel::from_weights(const WeightMatrix& q) {
  require_symmetric_real(q);
  return GFFModel(greens_exact(q).entries.real());
}

RVector gff_sample(const GFFModel& model, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RVector z(model.size());
  for (int i = 0; i < model.size(); ++i) z(i) = normal(rng);
  return model.factor() * z;
}

std::vector<RVector> sample_gff_fields(const GFFModel& model, std::size_t count, std::uint64_t seed,
                                       std::uint64_t stream) {
  std::vector<RVector> out(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = substream(seed, stream, i);
    out[i] = gff_sample(model, rng);
  });
  return out;
}

WeightMatrix weights_from_covariance(const RMatrix& covariance) {
  const GFFModel model(covariance);
  return WeightMatrix::from_real(RMatrix::Identity(model.size(), model.size()) - model.laplacian());
}

double gff_transform_closed(const WeightMatrix& q, const RVector& f) {
  require_symmetric_real(q);
  require_acceptable(q);
  if (f.size() != q.size()) throw Error(ErrorKind::InvalidInput, "test function has wrong length");
  const RMatrix delta = RMatrix::Identity(q.size(), q.size()) - q.entries().real();
  const RMatrix shifted = delta + RMatrix(f.asDiagonal());
  Eigen::LLT<RMatrix> llt(shifted);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::OutOfDomain, "Delta + D_f is not positive definite");
  const double det_shifted = determinant(shifted);
  const double det_green = 1.0 / determinant(delta);
  return 1.0 / std::sqrt(det_shifted * det_green);
}

IdentityCheck isomorphism_identity_check(const WeightMatrix& q, const RVector& f) {
  const CVector fc = f.cast<Complex>();
  IdentityCheck out;
  out.lhs = nu_transform_closed(q, fc, 0.5) * trivial_transform_closed(fc, 0.5);
  out.rhs = gff_transform_closed(q, f);
  out.abs_error = std::abs(out.lhs - out.rhs);
  return out;
}

std::vector<IsomorphismMc> isomorphism_mc_check(const WeightMatrix& q, const std::vector<RVector>& fs,
                                                std::size_t samples, std::uint64_t seed) {
  require_symmetric_real(q);
  const GFFModel model = GFFModel::from_weights(q);
  const auto phis = sample_gff_fields(model, samples, seed, kStreamGff);
  std::vector<OccupationField> half_squares(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    half_squares[i].kind = OccupationField::Kind::Continuous;
    half_squares[i].values = 0.5 * phis[i].array().square().matrix();
  }
  const LoopSoupSampler sampler(q);
  const auto rho = sample_continuous_fields(sampler, 0.5, 0.5, samples, seed, kStreamSoup);

  std::vector<IsomorphismMc> out;
  for (const auto& f : fs) {
    const double closed = gff_transform_closed(q, f);
    IsomorphismMc entry{empirical_transform(half_squares, f), empirical_transform(rho, f)};
    entry.gff.closed_form = closed;
    entry.soup.closed_form = closed;
    out.push_back(std::move(entry));
  }
  return out;
}

ChiSquareDecomposition chi_square_decomposition_check(double q, double s, std::size_t samples, std::uint64_t seed) {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorKind::InvalidInput, "q must lie in (0, 1)");
  const WeightMatrix weights = WeightMatrix::from_real(RMatrix::Constant(1, 1, q));
  const GFFModel model(RMatrix::Constant(1, 1, 1.0 / (1.0 - q)));
  const auto phis = sample_gff_fields(model, samples, seed, kStreamChiGauss);
  std::vector<OccupationField> gaussian(samples);
  std::vector<double> gaussian_values(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    gaussian_values[i] = 0.5 * phis[i](0) * phis[i](0);
    gaussian[i].kind = OccupationField::Kind::Continuous;
    gaussian[i].values = RVector::Constant(1, gaussian_values[i]);
  }
  const LoopSoupSampler sampler(weights);
  const auto soup = sample_continuous_fields(sampler, 0.5, 0.5, samples, seed, kStreamChiSoup);
  std::vector<double> soup_values(samples);
  for (std::size_t i = 0; i < samples; ++i) soup_values[i] = soup[i].values(0);

  ChiSquareDecomposition out;
  const RVector f = RVector::Constant(1, s);
  const double closed = std::sqrt((1.0 - q) / (1.0 - q + s));
  out.gaussian = empirical_transform(gaussian, f);
  out.soup_plus = empirical_transform(soup, f);
  out.gaussian.closed_form = closed;
  out.soup_plus.closed_form = closed;

  const auto a = summarize(gaussian_values);
  const auto b = summarize(soup_values);
  out.moments.mean_lhs = a.mean;
  out.moments.mean_rhs = b.mean;
  out.moments.mean_sigma = std::hypot(a.stderr_mean, b.stderr_mean);
  out.moments.var_lhs = a.variance;
  out.moments.var_rhs = b.variance;
  out.moments.var_sigma = std::hypot(variance_stderr(gaussian_values), variance_stderr(soup_values));
  return out;
}

DoubledWeights double_weights(const WeightMatrix& q_prime) {
  if (!q_prime.flags().hermitian) throw Error(ErrorKind::InvalidInput, "doubling requires Hermitian weights");
  const int n = q_prime.size();
  const RMatrix re = q_prime.entries().real();
  const RMatrix im = q_prime.entries().imag();
  RMatrix doubled(2 * n, 2 * n);
  doubled << re, -im, im, re;
  std::vector<std::string> labels = q_prime.space().labels();
  for (const auto& label : q_prime.space().labels()) labels.push_back(label + "*");
  DoubledWeights out{WeightMatrix(StateSpace(std::move(labels)), doubled.cast<Complex>()), false, {}};
  const auto cert = certify(out.weights);
  out.acceptable = cert.acceptable;
  if (!out.acceptable) {
    out.warning = "doubled weights are not acceptable (spectral radius of |Q| = " +
                  std::to_string(cert.spectral_radius_abs) + "); loop checks on the doubled space are skipped";
  }
  return out;
}

RMatrix double_covariance(const CMatrix& g_prime) {
  const auto n = g_prime.rows();
  RMatrix g(2 * n, 2 * n);
  g << g_prime.real(), -g_prime.imag(), g_prime.imag(), g_prime.real();
  return g;
}

ComplexGFFModel::ComplexGFFModel(CMatrix covariance_prime)
    : covariance_prime_(checked_hermitian_pd(std::move(covariance_prime))),
      doubled_(double_covariance(covariance_prime_)) {}

ComplexGFFModel ComplexGFFModel::from_weights(const WeightMatrix& q_prime) {
  if (!q_prime.flags().hermitian) throw Error(ErrorKind::InvalidInput, "Hermitian weights required");
  return ComplexGFFModel(greens_exact(q_prime).entries);
}

CVector complex_gff_sample(const ComplexGFFModel& model, Rng& rng) {
  const RVector phi = gff_sample(model.doubled(), rng);
  const int n = model.size();
  CVector psi(n);
  for (int x = 0; x < n; ++x) psi(x) = Complex(phi(x), phi(n + x));
  return psi;
}

ComplexCovarianceEstimate estimate_complex_covariance(const ComplexGFFModel& model, std::size_t samples,
                                                      std::uint64_t seed, std::uint64_t stream) {
  if (samples < 2) throw Error(ErrorKind::InvalidInput, "need at least two samples");
  const int n = model.size();
  std::vector<CVector> psis(samples);
  parallel_for(samples, [&](std::size_t i) {
    Rng rng = substream(seed, stream, i);
    psis[i] = complex_gff_sample(model, rng);
  });

  ComplexCovarianceEstimate est;
  est.covariance = CMatrix::Zero(n, n);
  est.pseudo_covariance = CMatrix::Zero(n, n);
  est.covariance_sigma = RMatrix::Zero(n, n);
  est.pseudo_sigma = RMatrix::Zero(n, n);
  std::vector<double> re(samples);
  std::vector<double> im(samples);
  auto reduce = [&](auto&& product, Complex& mean, double& sigma) {
    for (std::size_t i = 0; i < samples; ++i) {
      const Complex v = product(psis[i]);
      re[i] = v.real();
      im[i] = v.imag();
    }
    const auto sr = summarize(re);
    const auto si = summarize(im);
    mean = Complex(sr.mean, si.mean);
    sigma = std::hypot(sr.stderr_mean, si.stderr_mean);
  };
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      reduce([&](const CVector& p) { return p(x) * std::conj(p(y)); }, est.covariance(x, y), est.covariance_sigma(x, y));
      reduce([&](const CVector& p) { return p(x) * p(y); }, est.pseudo_covariance(x, y), est.pseudo_sigma(x, y));
    }
  }
  return est;
}

PushforwardReport pushforward_check(const WeightMatrix& q_prime, int max_length, std::uint64_t budget) {
  const DoubledWeights doubled = double_weights(q_prime);
  const CMatrix& lifted = doubled.weights.entries();
  const int n = q_prime.size();
  PushforwardReport report;
  Path reversed;
  report.loops_checked = enumerate_rooted_loops(
      q_prime, max_length,
      [&](std::span<const int> sites, Complex weight) {
        const int k = static_cast<int>(sites.size()) - 1;
        // Every sheet assignment of w_0..w_{k-1} closes up (w'_k on w'_0's sheet).
        Complex lifted_sum{0.0, 0.0};
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits) {
          auto lift = [&](int j) { return sites[static_cast<std::size_t>(j)] + n * static_cast<int>((bits >> (j % k)) & 1U); };
          Complex w{1.0, 0.0};
          for (int j = 1; j <= k; ++j) w *= lifted(lift(j - 1), lift(j));
          lifted_sum += w;
        }
        reversed.assign(sites.rbegin(), sites.rend());
        const Complex pushforward = lifted_sum / static_cast<double>(k);
        const Complex prime = weight / static_cast<double>(k);
        const Complex symmetrized = prime + path_weight(q_prime, reversed) / static_cast<double>(k);
        report.max_abs_error = std::max(report.max_abs_error, std::abs(pushforward - symmetrized));
        report.pushforward_sum += pushforward;
        report.prime_sum += prime;
      },
      budget);
  if (doubled.acceptable) {
    report.sum_tail = loop_sum_tail_bound(2 * n, spectral_radius_abs(doubled.weights), max_length);
  } else {
    report.sum_tail = std::numeric_limits<double>::infinity();
  }
  return report;
}

DoublingDeterminants doubling_determinants(const WeightMatrix& q_prime) {
  if (!q_prime.flags().hermitian) throw Error(ErrorKind::InvalidInput, "Hermitian weights required");
  const CMatrix g_prime = greens_exact(q_prime).entries;
  const RMatrix g = double_covariance(g_prime);
  DoublingDeterminants out;
  out.det_doubled = determinant(g);
  const Complex det_prime = determinant(g_prime);
  out.det_prime_squared = det_prime * det_prime;
  out.relative_error = std::abs(out.det_doubled - out.det_prime_squared) / std::abs(out.det_prime_squared);

  Eigen::SelfAdjointEigenSolver<CMatrix> prime_solver(g_prime, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<RMatrix> doubled_solver(g, Eigen::EigenvaluesOnly);
  std::vector<double> expected;
  for (Eigen::Index i = 0; i < prime_solver.eigenvalues().size(); ++i) {
    expected.push_back(prime_solver.eigenvalues()(i));
    expected.push_back(prime_solver.eigenvalues()(i));
  }
  std::vector<double> actual(doubled_solver.eigenvalues().data(),
                             doubled_solver.eigenvalues().data() + doubled_solver.eigenvalues().size());
  std::sort(expected.begin(), expected.end());
  std::sort(actual.begin(), actual.end());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    out.eigenvalue_mismatch = std::max(out.eigenvalue_mismatch, std::abs(actual[i] - expected[i]));
  }
  return out;
}

}  // namespace loopsoup
