#include "loopsoup/soup_field.hpp"

#include <cmath>
#include <numbers>

#include "loopsoup/summation.hpp"

namespace loopsoup {

// ---------------------------------------------------------------------------
// Complex Poisson laws

namespace {

double log_tail_bound(Complex lambda, int kmax) {
  const double r = std::abs(lambda);
  return -lambda.real() + r + (kmax + 1) * std::log(r) - std::lgamma(kmax + 2.0);
}

}  // namespace

int default_kmax(Complex lambda, double tolerance) {
  if (std::abs(lambda) == 0.0) return 0;
  const double log_tol = std::log(tolerance);
  int k = 0;
  while (log_tail_bound(lambda, k) >= log_tol) ++k;
  return k;
}

ComplexPoissonLaw complex_poisson(Complex lambda, std::optional<int> kmax) {
  ComplexPoissonLaw law;
  law.lambda = lambda;
  law.kmax = kmax.value_or(default_kmax(lambda));
  if (law.kmax < 0) throw Error(ErrorKind::InvalidInput, "kmax must be >= 0");
  law.masses.resize(static_cast<std::size_t>(law.kmax) + 1);
  law.masses[0] = std::exp(-lambda);
  for (int k = 1; k <= law.kmax; ++k) {
    law.masses[static_cast<std::size_t>(k)] = law.masses[static_cast<std::size_t>(k - 1)] * lambda / static_cast<double>(k);
  }
  law.variation_norm = std::exp(std::abs(lambda) - lambda.real());
  for (const auto& m : law.masses) law.tabulated_variation += std::abs(m);
  law.tail_bound = std::abs(lambda) == 0.0 ? 0.0 : std::exp(log_tail_bound(lambda, law.kmax));
  return law;
}

std::vector<Complex> convolve(const ComplexPoissonLaw& a, const ComplexPoissonLaw& b) {
  const int kmax = std::min(a.kmax, b.kmax);
  std::vector<Complex> out(static_cast<std::size_t>(kmax) + 1);
  for (int k = 0; k <= kmax; ++k) {
    for (int j = 0; j <= k; ++j) out[static_cast<std::size_t>(k)] += a[j] * b[k - j];
  }
  return out;
}

TruncatedTransform poisson_laplace(const ComplexPoissonLaw& law, Complex alpha) {
  TruncatedTransform out;
  const Complex step = std::exp(alpha);
  Complex factor{1.0, 0.0};
  for (const auto& m : law.masses) {
    out.value += factor * m;
    factor *= step;
  }
  out.closed = std::exp(law.lambda * (step - 1.0));
  // Omitted terms: e^{-Re lambda} sum_{k>kmax} (|lambda||e^alpha|)^k / k!.
  const double r = std::abs(law.lambda) * std::abs(step);
  out.tail_bound = r == 0.0 ? 0.0
                            : std::exp(-law.lambda.real() + r + (law.kmax + 1) * std::log(r) - std::lgamma(law.kmax + 2.0));
  return out;
}

// ---------------------------------------------------------------------------
// Loop soups

namespace {

void require_positive(const WeightMatrix& q) {
  if (!q.flags().positive) {
    throw Error(ErrorKind::NotPositive, "soups are sampled only for nonnegative real weights; complex soups are measures");
  }
}

}  // namespace

double soup_total_mass(const WeightMatrix& q) {
  require_positive(q);
  require_acceptable(q);
  return -std::log(laplacian_determinant(q).real());
}

std::map<RootedLoop, int> LoopSoupSample::multiplicities() const {
  std::map<RootedLoop, int> counts;
  for (const auto& loop : loops) ++counts[loop];
  return counts;
}

LoopSoupSampler::LoopSoupSampler(const WeightMatrix& q) {
  require_positive(q);
  rho_ = require_acceptable(q).spectral_radius_abs;
  q_ = q.entries().real().cwiseMax(0.0);
  n_ = q.size();
  mass_ = soup_total_mass(q);

  powers_.push_back(RMatrix::Identity(n_, n_));
  if (mass_ <= 0.0) return;
  // Cache powers until the certified remaining mass is negligible.
  double running = 0.0;
  for (int length = 1; length < 100000; ++length) {
    powers_.push_back(powers_.back() * q_);
    running += powers_.back().trace() / length;
    cumulative_.push_back(running);
    if (tail_envelope(length) < 1e-13 * mass_) break;
  }
}

double LoopSoupSampler::tail_envelope(int length) const {
  return loop_sum_tail_bound(n_, rho_, length);
}

int LoopSoupSampler::sample_length(Rng& rng) const {
  if (mass_ <= 0.0) throw Error(ErrorKind::InvalidInput, "soup has zero total mass");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double target = unit(rng) * mass_;
  for (std::size_t i = 0; i < cumulative_.size(); ++i) {
    if (target <= cumulative_[i]) return static_cast<int>(i) + 1;
  }
  // Beyond the cache: extend partial sums on demand until the target is
  // covered or the certified tail can no longer separate it.
  RMatrix power = powers_.back();
  double running = cumulative_.back();
  for (int length = static_cast<int>(cumulative_.size()) + 1;; ++length) {
    power = power * q_;
    running += power.trace() / length;
    if (target <= running || tail_envelope(length) <= std::numeric_limits<double>::epsilon() * mass_) {
      return length;
    }
  }
}

RootedLoop LoopSoupSampler::sample_body(int length, Rng& rng) const {
  std::vector<RMatrix> local;
  const std::vector<RMatrix>* powers = &powers_;
  if (static_cast<std::size_t>(length) >= powers_.size()) {
    local = powers_;
    while (local.size() <= static_cast<std::size_t>(length)) local.push_back(local.back() * q_);
    powers = &local;
  }
  const RMatrix& top = (*powers)[static_cast<std::size_t>(length)];

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto choose = [&](const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double target = unit(rng) * total;
    double acc = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      last_positive = static_cast<int>(i);
      if (target < acc) return static_cast<int>(i);
    }
    return last_positive;
  };

  std::vector<double> weights(static_cast<std::size_t>(n_));
  for (int x = 0; x < n_; ++x) weights[static_cast<std::size_t>(x)] = top(x, x);
  const int root = choose(weights);

  Path sites{root};
  for (int j = 1; j < length; ++j) {
    const int z = sites.back();
    const RMatrix& rest = (*powers)[static_cast<std::size_t>(length - j)];
    for (int y = 0; y < n_; ++y) weights[static_cast<std::size_t>(y)] = q_(z, y) * rest(y, root);
    sites.push_back(choose(weights));
  }
  sites.push_back(root);
  return RootedLoop(std::move(sites));
}

RootedLoop LoopSoupSampler::sample_loop(Rng& rng) const { return sample_body(sample_length(rng), rng); }

LoopSoupSample LoopSoupSampler::sample_soup(double t, Rng& rng) const {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidInput, "soup intensity must be > 0");
  LoopSoupSample soup;
  soup.intensity = t;
  soup.n_sites = n_;
  if (mass_ <= 0.0) return soup;
  std::poisson_distribution<long long> count(t * mass_);
  const long long k = count(rng);
  soup.loops.reserve(static_cast<std::size_t>(k));
  for (long long i = 0; i < k; ++i) soup.loops.push_back(sample_loop(rng));
  return soup;
}

LoopSoupSample sample_soup(const WeightMatrix& q, double t, Rng& rng) {
  return LoopSoupSampler(q).sample_soup(t, rng);
}

// ---------------------------------------------------------------------------
// Occupation fields

OccupationField discrete_occupation(const LoopSoupSample& soup) {
  OccupationField field;
  field.kind = OccupationField::Kind::Discrete;
  field.values = RVector::Zero(soup.n_sites);
  for (const auto& loop : soup.loops) {
    const auto& s = loop.sites();
    for (std::size_t j = 1; j < s.size(); ++j) field.values(s[j]) += 1.0;
  }
  return field;
}

OccupationField continuous_occupation(const OccupationField& discrete, double t_trivial, Rng& rng) {
  if (discrete.kind != OccupationField::Kind::Discrete) {
    throw Error(ErrorKind::InvalidInput, "continuous occupation is built from a discrete field");
  }
  if (t_trivial < 0.0) throw Error(ErrorKind::InvalidShape, "trivial-loop time must be >= 0");
  OccupationField field;
  field.kind = OccupationField::Kind::Continuous;
  field.includes_trivial = t_trivial > 0.0;
  field.values = RVector::Zero(discrete.values.size());
  for (Eigen::Index x = 0; x < discrete.values.size(); ++x) {
    const double shape = discrete.values(x) + t_trivial;
    if (shape < 0.0) throw Error(ErrorKind::InvalidShape, "negative gamma shape");
    if (shape == 0.0) continue;
    std::gamma_distribution<double> gamma(shape, 1.0);
    field.values(x) = gamma(rng);
  }
  return field;
}

std::vector<OccupationField> sample_continuous_fields(const LoopSoupSampler& sampler, double t, double t_trivial,
                                                      std::size_t count, std::uint64_t seed, std::uint64_t stream) {
  std::vector<OccupationField> fields(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = substream(seed, stream, i);
    const auto soup = sampler.sample_soup(t, rng);
    fields[i] = continuous_occupation(discrete_occupation(soup), t_trivial, rng);
  });
  return fields;
}

// ---------------------------------------------------------------------------
// Laplace functionals

Complex nu_transform_closed(const WeightMatrix& q, const CVector& f, double t) {
  require_acceptable(q);
  require_acceptable(perturb(q, f));
  const Complex base = laplacian_determinant(q);
  // Continue arg(det G_{sf} / det G) from s = 0 and refuse to pick a branch
  // once it leaves the principal strip.
  constexpr int kSteps = 256;
  double arg = 0.0;
  Complex previous{1.0, 0.0};
  Complex ratio{1.0, 0.0};
  for (int i = 1; i <= kSteps; ++i) {
    const double s = static_cast<double>(i) / kSteps;
    const Complex det = laplacian_determinant(perturb(q, CVector(s * f)));
    if (std::abs(det) == 0.0) throw Error(ErrorKind::BranchAmbiguity, "det(I - Q_sf) vanishes along the path");
    ratio = base / det;
    arg += std::arg(ratio / previous);
    previous = ratio;
  }
  if (std::abs(arg) >= std::numbers::pi) {
    throw Error(ErrorKind::BranchAmbiguity, "determinant ratio winds across the negative real axis");
  }
  return std::exp(t * Complex(std::log(std::abs(ratio)), arg));
}

Complex trivial_transform_closed(const CVector& f, double t) {
  Complex product{1.0, 0.0};
  const bool integer_t = std::floor(t) == t;
  for (Eigen::Index x = 0; x < f.size(); ++x) {
    const Complex base = 1.0 + f(x);
    if (std::abs(base) == 0.0) throw Error(ErrorKind::DivisionByZero, "1 + f(x) vanishes");
    const bool positive_real = std::abs(base.imag()) <= kFlagTolerance && base.real() > 0.0;
    if (positive_real) {
      product *= std::pow(base.real(), -t);
    } else if (integer_t) {
      product *= std::pow(base, -t);
    } else {
      throw Error(ErrorKind::BranchAmbiguity, "non-integer power of a base off the positive axis");
    }
  }
  return product;
}

TransformReport empirical_transform(const std::vector<OccupationField>& samples, const RVector& f) {
  if (samples.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least two samples");
  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) values[i] = std::exp(-samples[i].values.dot(f));
  const auto summary = summarize(values);
  TransformReport report;
  report.f = f;
  report.empirical = summary.mean;
  report.mc_stderr = summary.stderr_mean;
  report.samples = samples.size();
  return report;
}

ReversalCheck reversal_symmetrization_check(const WeightMatrix& q, const CVector& f, double t, int max_length) {
  const double rho = require_acceptable(q).spectral_radius_abs;
  const WeightMatrix qf = perturb(q, f);
  const double rho_f = require_acceptable(qf).spectral_radius_abs;

  CompensatedSum sum;
  Path reversed;
  enumerate_rooted_loops(q, max_length, [&](std::span<const int> sites, Complex weight) {
    reversed.assign(sites.rbegin(), sites.rend());
    const Complex reverse_weight = path_weight(q, reversed);
    Complex visits{1.0, 0.0};
    for (std::size_t j = 1; j < sites.size(); ++j) visits /= 1.0 + f(sites[j]);
    const double n = static_cast<double>(sites.size() - 1);
    const Complex m_sym = (weight + reverse_weight) / n;
    sum += m_sym * visits - m_sym;
  });

  ReversalCheck out;
  out.direct = nu_transform_closed(q, f, 2.0 * t);
  out.reversed = std::exp(t * sum.value());
  const double tail = 2.0 * (loop_sum_tail_bound(q.size(), rho, max_length) +
                             loop_sum_tail_bound(q.size(), rho_f, max_length));
  out.tail_bound = std::abs(out.reversed) * std::expm1(t * tail);
  return out;
}

VariationBound variation_bound_alpha(const WeightMatrix& q, double t, int max_length) {
  const double rho = require_acceptable(q).spectral_radius_abs;
  if (q.flags().positive) return {1.0, 0.0};
  CompensatedSum sum;
  enumerate_rooted_loops(q, max_length, [&](std::span<const int> sites, Complex weight) {
    const Complex m = weight / static_cast<double>(sites.size() - 1);
    sum += std::abs(m) - m.real();
  });
  const double alpha = std::exp(t * sum.value().real());
  const double tail = 2.0 * loop_sum_tail_bound(q.size(), rho, max_length);
  return {alpha, alpha * std::expm1(t * tail)};
}

}  // namespace loopsoup
