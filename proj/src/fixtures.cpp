#include "loopsoup/fixtures.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "loopsoup/loop_enum.hpp"

namespace loopsoup::fixtures {

namespace {

WeightMatrix scale_to(const CMatrix& raw, double rho) {
  const double current = spectral_radius_nonnegative(raw.cwiseAbs());
  if (current <= 0.0) throw Error(ErrorKind::InvalidInput, "raw matrix has zero spectral radius");
  return WeightMatrix(CMatrix(raw * (rho / current)));
}

CMatrix draw_raw(int n, Rng& rng, bool complex_entries, Structure structure, double density, bool positive) {
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::uniform_real_distribution<double> sign(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * 3.141592653589793);
  std::bernoulli_distribution keep(density);
  auto entry = [&]() -> Complex {
    if (positive) return {mag(rng), 0.0};
    if (complex_entries) return std::polar(mag(rng), phase(rng));
    return {sign(rng) < 0 ? -mag(rng) : mag(rng), 0.0};
  };
  CMatrix raw = CMatrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (structure != Structure::General && y < x) continue;
      if (!keep(rng)) continue;
      Complex v = entry();
      if (x == y && structure == Structure::Hermitian) v = {std::abs(v), 0.0};
      raw(x, y) = v;
      if (structure == Structure::Symmetric) raw(y, x) = v;
      if (structure == Structure::Hermitian) raw(y, x) = std::conj(v);
    }
  }
  return raw;
}

}  // namespace

WeightMatrix random_acceptable(int n, double rho, Rng& rng, bool complex_entries, Structure structure, double density) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const CMatrix raw = draw_raw(n, rng, complex_entries, structure, density, false);
    if (spectral_radius_nonnegative(raw.cwiseAbs()) > 1e-3) return scale_to(raw, rho);
  }
  throw Error(ErrorKind::InvalidInput, "could not draw a matrix with nonzero spectral radius");
}

WeightMatrix random_positive(int n, double rho, Rng& rng, Structure structure) {
  return scale_to(draw_raw(n, rng, false, structure, 1.0, true), rho);
}

WeightMatrix one_point(double q) { return WeightMatrix::from_real(RMatrix::Constant(1, 1, q)); }

WeightMatrix two_state() {
  RMatrix q(2, 2);
  q << 0.0, 0.5, 0.5, 0.0;
  return WeightMatrix::from_real(q);
}

WeightMatrix hermitian_two_state() {
  CMatrix q(2, 2);
  q << Complex(0, 0), Complex(0, 0.5), Complex(0, -0.5), Complex(0, 0);
  return WeightMatrix(q);
}

WeightMatrix symmetric_four_site() {
  Rng rng = substream(20240601, 0, 0);
  return random_positive(4, 0.6, rng, Structure::Symmetric);
}

WeightMatrix hermitian_three_site() {
  Rng rng = substream(20240602, 0, 0);
  return random_acceptable(3, 0.5, rng, true, Structure::Hermitian);
}

std::vector<NamedMatrix> positive_fixtures() {
  return {{"one_point_q0.3", one_point(0.3)},
          {"one_point_q0.5", one_point(0.5)},
          {"two_state", two_state()},
          {"symmetric_four_site", symmetric_four_site()}};
}

std::vector<NamedMatrix> symmetric_fixtures() {
  auto out = positive_fixtures();
  // A signed symmetric fixture: the identity needs symmetry, not positivity.
  Rng rng = substream(20240603, 0, 0);
  out.push_back({"signed_symmetric_three_site", random_acceptable(3, 0.6, rng, false, Structure::Symmetric)});
  return out;
}

std::vector<NamedMatrix> hermitian_fixtures() {
  return {{"hermitian_two_state", hermitian_two_state()},
          {"hermitian_three_site", hermitian_three_site()},
          {"two_state", two_state()}};
}

std::vector<NamedMatrix> random_identity_fixtures(int max_length, double loop_cap, std::uint64_t seed) {
  std::vector<NamedMatrix> out;
  std::uniform_real_distribution<double> radius(0.3, 0.7);
  for (std::uint64_t i = 0; out.size() < 20; ++i) {
    Rng rng = substream(seed, 1, i);
    const int n = 1 + static_cast<int>(out.size() % 4);
    const bool complex_entries = out.size() % 2 == 1;
    double density = 1.0;
    for (int attempt = 0; attempt < 50; ++attempt) {
      const WeightMatrix q = random_acceptable(n, radius(rng), rng, complex_entries, Structure::General, density);
      const auto counts = count_rooted_loops(q, max_length);
      if (std::accumulate(counts.begin(), counts.end(), 0.0) <= loop_cap) {
        out.push_back({"random_" + std::to_string(out.size()) + (complex_entries ? "_complex" : "_real") + "_n" +
                           std::to_string(n),
                       q});
        break;
      }
      density *= 0.85;
    }
  }
  return out;
}

std::vector<NamedProblem> lerw_problems(std::uint64_t seed) {
  std::vector<NamedProblem> out;
  const std::vector<int> interior{0, 1, 2};
  const char* kinds[] = {"positive", "positive", "signed", "complex"};
  for (int i = 0; i < 4; ++i) {
    Rng rng = substream(seed, 2, static_cast<std::uint64_t>(i));
    const std::string kind = kinds[i];
    WeightMatrix inner = kind == "positive" ? random_positive(3, 0.7, rng)
                                            : random_acceptable(3, 0.6, rng, kind == "complex");
    CMatrix full = CMatrix::Zero(5, 5);
    full.topLeftCorner(3, 3) = inner.entries();
    std::uniform_real_distribution<double> exit(0.05, 0.3);
    for (int x = 0; x < 3; ++x) {
      for (int b = 3; b < 5; ++b) full(x, b) = kind == "complex" ? Complex(exit(rng), exit(rng)) : Complex(exit(rng), 0.0);
    }
    out.push_back({"lerw_" + kind + "_" + std::to_string(i), BoundaryProblem(WeightMatrix(full), interior)});
  }
  return out;
}

std::vector<RVector> f_grid(const WeightMatrix& q) {
  static constexpr double kValues[] = {0.0, 0.1, 0.2, 0.5};
  const int n = q.size();
  std::vector<RVector> candidates;
  for (double v : kValues) candidates.push_back(RVector::Constant(n, v));
  for (int shift = 0; shift < 4; ++shift) {
    RVector f(n);
    for (int x = 0; x < n; ++x) f(x) = kValues[static_cast<std::size_t>((x + shift) % 4)];
    candidates.push_back(f);
  }
  std::vector<RVector> grid;
  std::set<std::vector<double>> seen;
  for (const auto& f : candidates) {
    if (!seen.insert(std::vector<double>(f.data(), f.data() + f.size())).second) continue;
    if (perturbation_margin(q, f.cast<Complex>()).margin < 0.05) continue;
    grid.push_back(f);
  }
  return grid;
}

std::vector<NamedGraph> tree_count_graphs(std::uint64_t seed) {
  std::vector<NamedGraph> out{{"K3", SimpleGraph::complete(3)},
                              {"C4", SimpleGraph::cycle(4)},
                              {"K4", SimpleGraph::complete(4)}};
  for (int i = 0; i < 5; ++i) {
    Rng rng = substream(seed, 3, static_cast<std::uint64_t>(i));
    const int n = 4 + i % 3;
    out.push_back({"random_graph_" + std::to_string(i) + "_n" + std::to_string(n),
                   SimpleGraph::random_connected(n, 0.4, rng)});
  }
  return out;
}

}  // namespace loopsoup::fixtures
