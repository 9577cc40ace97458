#include "loopsoup/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <future>
#include <numeric>
#include <set>

#include "loopsoup/fixtures.hpp"
#include "loopsoup/gff_iso.hpp"
#include "loopsoup/lerw_wilson.hpp"
#include "loopsoup/loop_enum.hpp"
#include "loopsoup/soup_field.hpp"

namespace loopsoup::harness {

using io::json;

namespace {

// Substream ids; one per randomized suite.
constexpr std::uint64_t kStreamWilson = 201;
constexpr std::uint64_t kStreamSoupCount = 202;
constexpr std::uint64_t kStreamTransform = 203;
constexpr std::uint64_t kStreamIsomorphism = 204;
constexpr std::uint64_t kStreamChiSquare = 205;
constexpr std::uint64_t kStreamComplexGff = 206;
constexpr std::uint64_t kStreamSample = 301;

constexpr double kFloatSlack = 1e-12;

const char* status_name(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Inconclusive: return "inconclusive";
  }
  return "fail";
}

json cjson(Complex z) { return io::complex_to_json(z); }

std::string vector_text(const RVector& f) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.3g", i ? "," : "", f(i));
    out += buf;
  }
  return out + "]";
}

std::vector<double> to_std(const RVector& f) { return {f.data(), f.data() + f.size()}; }

struct ReportBuilder {
  const RunConfig& config;

  CheckReport make(const std::string& check, const std::string& anchor, const std::string& fixture,
                   const json& inputs, json lhs, json rhs, double error, double tolerance,
                   std::optional<double> bound = std::nullopt) const {
    CheckReport r;
    r.check = check;
    r.anchor = anchor;
    r.fixture = fixture;
    r.inputs_digest = digest(inputs.dump());
    r.lhs = std::move(lhs);
    r.rhs = std::move(rhs);
    r.error = error;
    r.tolerance = config.tolerance(check, tolerance);
    r.bound = bound;
    r.status = error <= r.tolerance ? Status::Pass : Status::Fail;
    return r;
  }

  /// |lhs - rhs| against a certified truncation bound, reported as the ratio.
  CheckReport bounded(const std::string& check, const std::string& anchor, const std::string& fixture,
                      const json& inputs, Complex lhs, Complex rhs, double bound) const {
    const double ratio = std::abs(lhs - rhs) / (bound + kFloatSlack * std::max(1.0, std::abs(rhs)));
    return make(check, anchor, fixture, inputs, cjson(lhs), cjson(rhs), ratio, 1.0, bound);
  }

  CheckReport inconclusive(const std::string& check, const std::string& anchor, const std::string& fixture,
                           std::size_t samples) const {
    CheckReport r;
    r.check = check;
    r.anchor = anchor;
    r.fixture = fixture;
    r.inputs_digest = digest(json{{"samples", samples}, {"seed", config.seed}}.dump());
    r.lhs = nullptr;
    r.rhs = nullptr;
    r.tolerance = config.tolerance(check, 0.0);
    r.status = Status::Inconclusive;
    return r;
  }

  /// MC comparison: deviation in units of the standard error.
  CheckReport monte_carlo(const std::string& check, const std::string& anchor, const std::string& fixture,
                          const json& inputs, const TransformReport& t, double sigmas) const {
    json lhs = {{"empirical", cjson(t.empirical)}, {"stderr", t.mc_stderr}, {"samples", t.samples}};
    const double z = t.mc_stderr > 0 ? t.deviation() / t.mc_stderr : (t.deviation() == 0 ? 0.0 : 1e300);
    return make(check, anchor, fixture, inputs, std::move(lhs), cjson(t.closed_form), z, sigmas);
  }
};

// ---------------------------------------------------------------------------
// Fixture loading

struct Fixtures {
  std::vector<fixtures::NamedMatrix> matrices;   // general identity fixtures
  std::vector<fixtures::NamedMatrix> symmetric;  // real symmetric
  std::vector<fixtures::NamedMatrix> hermitian;
  std::vector<fixtures::NamedGraph> graphs;
};

Fixtures load_fixtures(const RunConfig& config) {
  Fixtures fx;
  fx.matrices = {{"one_point_q0.5", fixtures::one_point(0.5)},
                 {"two_state", fixtures::two_state()},
                 {"zero_two_site", WeightMatrix::zero(2)},
                 {"symmetric_four_site", fixtures::symmetric_four_site()},
                 {"hermitian_two_state", fixtures::hermitian_two_state()},
                 {"hermitian_three_site", fixtures::hermitian_three_site()}};
  for (auto& m : fixtures::random_identity_fixtures(config.loop_length, 1e6)) {
    if (m.q.size() <= 3) fx.matrices.push_back(std::move(m));
  }
  fx.symmetric = fixtures::symmetric_fixtures();
  fx.hermitian = fixtures::hermitian_fixtures();
  fx.graphs = fixtures::tree_count_graphs();

  for (const auto& path : config.matrix_fixtures) {
    WeightMatrix q = io::matrix_from_json(io::read_json_file(path));
    require_acceptable(q);
    if (q.flags().real && q.flags().symmetric) fx.symmetric.push_back({path, q});
    if (q.flags().hermitian) fx.hermitian.push_back({path, q});
    fx.matrices.push_back({path, std::move(q)});
  }
  for (const auto& path : config.graph_fixtures) {
    auto g = io::graph_from_json(io::read_json_file(path));
    if (!g.graph.connected()) throw Error(ErrorKind::Disconnected, path + ": graph is not connected");
    fx.graphs.push_back({path, std::move(g.graph)});
  }
  return fx;
}

/// Largest L' <= L whose rooted-loop count fits the enumeration budget.
int feasible_length(const WeightMatrix& q, int max_length, double budget = 5e6) {
  const auto counts = count_rooted_loops(q, max_length);
  double total = 0.0;
  int feasible = 0;
  for (int k = 0; k < max_length; ++k) {
    total += counts[static_cast<std::size_t>(k)];
    if (total > budget) break;
    feasible = k + 1;
  }
  return std::max(feasible, 1);
}

json matrix_inputs(const WeightMatrix& q, int length = 0) {
  json j = io::matrix_to_json(q);
  if (length > 0) j["L"] = length;
  return j;
}

// ---------------------------------------------------------------------------
// Deterministic suites

std::vector<CheckReport> suite_greens_product(const ReportBuilder& rb, const Fixtures& fx) {
  std::vector<CheckReport> out;
  for (const auto& [name, q] : fx.matrices) {
    if (q.size() > 6) continue;
    const Complex target = 1.0 / laplacian_determinant(q);
    std::vector<int> order(static_cast<std::size_t>(q.size()));
    std::iota(order.begin(), order.end(), 0);
    double worst = 0.0;
    Complex worst_value = target;
    do {
      const Complex value = greens_diagonal_product(q, order);
      const double rel = std::abs(value - target) / std::abs(target);
      if (rel >= worst) {
        worst = rel;
        worst_value = value;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    out.push_back(rb.make("greens_product", "1/det Δ = ∏ G_{A_j}(x_j, x_j)", name, matrix_inputs(q),
                          cjson(worst_value), cjson(target), worst, 1e-9));
  }
  return out;
}

std::vector<CheckReport> suite_loop_sums(const ReportBuilder& rb, const Fixtures& fx, int max_length) {
  std::vector<CheckReport> out;
  for (const auto& [name, q] : fx.matrices) {
    const int length = feasible_length(q, max_length);
    const auto inputs = matrix_inputs(q, length);
    const FTruncatedAll sums = F_truncated_all(q, length);
    const FTruncated& total = sums.total;
    out.push_back(rb.bounded("loop_sum_determinant", "F(A) = 1/det Δ", name, inputs, total.value, F_exact(q),
                             total.tail_bound));
    const double scale = std::max(1.0, std::abs(total.rooted_sum));
    out.push_back(rb.make("rooted_unrooted_sum", "Σ m(ω) = Σ m̃(ω̃)", name, inputs, cjson(total.rooted_sum),
                          cjson(total.unrooted_sum), std::abs(total.rooted_sum - total.unrooted_sum) / scale, 1e-12));

    const GreensFunction g = greens_exact(q);
    for (int x = 0; x < q.size(); ++x) {
      const FTruncated& meeting = sums.per_site[static_cast<std::size_t>(x)];
      out.push_back(rb.bounded("site_loop_sum", "F_x(A) = G(x,x)", name + "@" + q.space().label(x), inputs,
                               meeting.value, g(x, x), meeting.tail_bound));
    }
  }
  return out;
}

std::vector<CheckReport> suite_renewal(const ReportBuilder& rb, const Fixtures& fx, int max_length) {
  std::vector<CheckReport> out;
  for (const auto& [name, q] : fx.matrices) {
    if (q.size() > 3) continue;
    const int length = std::min(max_length, q.size() == 3 ? 14 : 24);
    const GreensFunction g = greens_exact(q);
    for (int x = 0; x < q.size(); ++x) {
      const auto exact = first_return_weight(q, x, FirstReturnMode::ViaGreens);
      const auto brute = first_return_weight(q, x, FirstReturnMode::BruteForce, length);
      const std::string fixture = name + "@" + q.space().label(x);
      const Complex product = g(x, x) * (1.0 - exact.value);
      out.push_back(rb.make("renewal_identity", "G(x,x) = 1/(1 − f_x)", fixture, matrix_inputs(q), cjson(product),
                            cjson(1.0), std::abs(product - 1.0), 1e-10));
      out.push_back(rb.bounded("first_return_oracle", "f_x = 1 − 1/G(x,x)", fixture, matrix_inputs(q, length),
                               brute.value, exact.value, brute.tail_bound));
    }
  }
  return out;
}

std::vector<CheckReport> suite_lerw(const ReportBuilder& rb, int max_length) {
  std::vector<CheckReport> out;
  for (const auto& [name, problem] : fixtures::lerw_problems()) {
    double worst = -1.0;
    Complex worst_formula;
    Complex worst_brute;
    double worst_tail = 0.0;
    int paths = 0;
    for (int start : problem.interior()) {
      const auto sums = lerw_bruteforce_all(problem, start, max_length);
      // Every self-avoiding interior prefix from `start`, then each exit.
      std::vector<int> others;
      for (int x : problem.interior()) {
        if (x != start) others.push_back(x);
      }
      std::vector<Path> prefixes{{start}};
      for (std::size_t mask = 1; mask < (std::size_t{1} << others.size()); ++mask) {
        std::vector<int> subset;
        for (std::size_t b = 0; b < others.size(); ++b) {
          if (mask >> b & 1U) subset.push_back(others[b]);
        }
        std::sort(subset.begin(), subset.end());
        do {
          Path p{start};
          p.insert(p.end(), subset.begin(), subset.end());
          prefixes.push_back(p);
        } while (std::next_permutation(subset.begin(), subset.end()));
      }
      for (const auto& prefix : prefixes) {
        for (int b : problem.boundary()) {
          Path eta = prefix;
          eta.push_back(b);
          const Complex formula = lerw_measure_formula(problem, eta);
          const auto it = sums.find(eta);
          const Complex brute = it == sums.end() ? Complex{} : it->second;
          const double tail = lerw_tail_bound(problem, start, b, max_length);
          const double ratio = std::abs(formula - brute) / (tail + kFloatSlack);
          ++paths;
          if (ratio > worst) {
            worst = ratio;
            worst_formula = formula;
            worst_brute = brute;
            worst_tail = tail;
          }
        }
      }
    }
    json inputs = matrix_inputs(problem.weights(), max_length);
    inputs["interior"] = problem.interior();
    auto report = rb.make("lerw_measure", "Q̂(η;A) = Q(η) F_η(A)", name + " (" + std::to_string(paths) + " paths)",
                          inputs, cjson(worst_brute), cjson(worst_formula), worst, 1.0, worst_tail);
    out.push_back(std::move(report));
  }
  return out;
}

std::vector<CheckReport> suite_matrix_tree(const ReportBuilder& rb, const Fixtures& fx) {
  std::vector<CheckReport> out;
  for (const auto& [name, graph] : fx.graphs) {
    if (graph.vertex_count() > kMaxEnumerationVertices) continue;
    const auto trees = enumerate_spanning_trees(graph);
    std::set<std::int64_t> by_root;
    for (int root = 0; root < graph.vertex_count(); ++root) by_root.insert(tree_count_det(graph, root));
    const std::int64_t det = *by_root.begin();
    const double error = std::abs(static_cast<double>(trees.size()) - static_cast<double>(det)) +
                         static_cast<double>(by_root.size() - 1);
    io::LabeledGraph labeled{{}, graph};
    for (int v = 0; v < graph.vertex_count(); ++v) labeled.vertices.push_back(std::to_string(v));
    out.push_back(rb.make("matrix_tree", "number of spanning trees = det[D − K]", name, io::graph_to_json(labeled),
                          json(trees.size()), json(det), error, 0.0));
  }
  return out;
}

std::vector<CheckReport> suite_reversal(const ReportBuilder& rb, const Fixtures& fx, int max_length) {
  std::vector<CheckReport> out;
  for (const auto& [name, q] : fx.hermitian) {
    const int length = feasible_length(q, max_length);
    for (const auto& f : fixtures::f_grid(q)) {
      for (double t : {0.5, 1.0}) {
        const auto check = reversal_symmetrization_check(q, f.cast<Complex>(), t, length);
        json inputs = matrix_inputs(q, length);
        inputs["f"] = to_std(f);
        inputs["t"] = t;
        out.push_back(rb.bounded("reversal_symmetrization", "μ_{2t} = μ_{t,m^R}",
                                 name + " f=" + vector_text(f) + " t=" + std::to_string(t).substr(0, 3), inputs,
                                 check.reversed, check.direct, check.tail_bound));
      }
    }
  }
  return out;
}

std::vector<CheckReport> suite_isomorphism_identity(const ReportBuilder& rb, const Fixtures& fx) {
  std::vector<CheckReport> out;
  for (const auto& [name, q] : fx.symmetric) {
    for (const auto& f : fixtures::f_grid(q)) {
      const auto check = isomorphism_identity_check(q, f);
      json inputs = matrix_inputs(q);
      inputs["f"] = to_std(f);
      out.push_back(rb.make("isomorphism_identity", "ν_{1/2}·ν^⊤_{1/2} = 1/√det(Δ+D_f) · 1/√det G",
                            name + " f=" + vector_text(f), inputs, cjson(check.lhs), cjson(check.rhs), check.abs_error,
                            1e-9));
    }
  }
  return out;
}

std::vector<CheckReport> suite_doubling(const ReportBuilder& rb, const Fixtures& fx, int pushforward_length) {
  std::vector<CheckReport> out;
  for (const auto& [name, q] : fx.hermitian) {
    const auto inputs = matrix_inputs(q, pushforward_length);
    const auto dets = doubling_determinants(q);
    out.push_back(rb.make("det_squared", "det G = (det G′)²", name, inputs, cjson(dets.det_doubled),
                          cjson(dets.det_prime_squared), dets.relative_error, 1e-9));
    out.push_back(rb.make("eigenvalue_doubling", "eigenvalues of G = eigenvalues of G′, each doubled", name, inputs,
                          json(dets.eigenvalue_mismatch), json(0.0), dets.eigenvalue_mismatch, 1e-8));
    if (q.size() <= 3) {
      const auto push = pushforward_check(q, pushforward_length);
      out.push_back(rb.make("pushforward", "Φ_* m(ω) = m′(ω) + m′(ω^R)",
                            name + " (" + std::to_string(push.loops_checked) + " loops)", inputs,
                            json(push.max_abs_error), json(0.0), push.max_abs_error, 1e-10));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Randomized suites

std::vector<CheckReport> suite_wilson(const ReportBuilder& rb, std::size_t samples) {
  std::vector<CheckReport> out;
  const std::vector<fixtures::NamedGraph> graphs{{"K3", SimpleGraph::complete(3)},
                                                 {"K4", SimpleGraph::complete(4)},
                                                 {"C4", SimpleGraph::cycle(4)}};
  const char* anchor = "every spanning tree is equally likely";
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto& [name, graph] = graphs[gi];
    if (samples < kMinMcSamples) {
      out.push_back(rb.inconclusive("wilson_uniformity", anchor, name, samples));
      continue;
    }
    const auto trees = enumerate_spanning_trees(graph);
    std::map<std::vector<std::pair<int, int>>, std::size_t> index;
    for (std::size_t i = 0; i < trees.size(); ++i) index[trees[i].edges()] = i;
    std::vector<std::size_t> which(samples);
    parallel_for(samples, [&](std::size_t i) {
      Rng rng = substream(rb.config.seed, kStreamWilson * 16 + gi, i);
      which[i] = index.at(wilson_sample(graph, 0, rng).edges());
    });
    std::vector<std::uint64_t> counts(trees.size(), 0);
    for (auto w : which) ++counts[w];
    const std::vector<double> uniform(trees.size(), 1.0 / static_cast<double>(trees.size()));
    const double p = chi_square_pvalue(counts, uniform);
    // Reported as the p-value; pass when p > 0.001, i.e. error = 0.001 - p <= 0.
    json inputs = {{"graph", name}, {"samples", samples}, {"seed", rb.config.seed}};
    out.push_back(rb.make("wilson_uniformity", anchor, name, inputs, json(counts), json(uniform), 1e-3 - p, 0.0));
  }
  return out;
}

std::vector<CheckReport> suite_soup_count(const ReportBuilder& rb, std::size_t samples) {
  std::vector<CheckReport> out;
  const char* anchor = "loop count ~ Poisson(t·m(loops))";
  const double t = 2.0;
  const auto positive = fixtures::positive_fixtures();
  for (std::size_t fi = 0; fi < positive.size(); ++fi) {
    const auto& [name, q] = positive[fi];
    if (samples < kMinMcSamples) {
      out.push_back(rb.inconclusive("soup_count_law", anchor, name, samples));
      continue;
    }
    const std::size_t n = std::max<std::size_t>(samples, 10000);
    const LoopSoupSampler sampler(q);
    std::vector<double> counts(n);
    std::vector<double> steps_mismatch(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
      Rng rng = substream(rb.config.seed, kStreamSoupCount * 16 + fi, i);
      const auto soup = sampler.sample_soup(t, rng);
      counts[i] = static_cast<double>(soup.loops.size());
      double steps = 0.0;
      for (const auto& loop : soup.loops) steps += loop.length();
      steps_mismatch[i] = std::abs(discrete_occupation(soup).values.sum() - steps);
    });
    const auto s = summarize(counts);
    const double lambda = t * sampler.total_mass();
    const double rel = std::max(std::abs(s.mean - lambda), std::abs(s.variance - lambda)) / lambda;
    json inputs = matrix_inputs(q);
    inputs["t"] = t;
    inputs["samples"] = n;
    out.push_back(rb.make("soup_count_law", anchor, name, inputs, json{{"mean", s.mean}, {"variance", s.variance}},
                          json(lambda), rel, 0.05));
    const double mismatch = *std::max_element(steps_mismatch.begin(), steps_mismatch.end());
    out.push_back(rb.make("local_time_total", "Σ_x L(x) = Σ_ω |ω|", name, inputs, json(mismatch), json(0.0), mismatch,
                          0.0));
  }
  return out;
}

std::vector<CheckReport> suite_transform(const ReportBuilder& rb, std::size_t samples) {
  std::vector<CheckReport> out;
  const char* anchor = "ν_t[exp(−ℒ·f)] = (det G_f/det G)^t";
  const auto positive = fixtures::positive_fixtures();
  for (std::size_t fi = 0; fi < positive.size(); ++fi) {
    const auto& [name, q] = positive[fi];
    if (samples < kMinMcSamples) {
      out.push_back(rb.inconclusive("soup_transform", anchor, name, samples));
      continue;
    }
    const LoopSoupSampler sampler(q);
    for (double t : {0.5, 1.0}) {
      const auto fields =
          sample_continuous_fields(sampler, t, 0.0, samples, rb.config.seed, kStreamTransform * 16 + fi * 2 + (t == 1.0));
      auto grid = fixtures::f_grid(q);
      if (q.size() == 1) grid.push_back(RVector::Constant(1, 1.0));
      for (const auto& f : grid) {
        auto report = empirical_transform(fields, f);
        report.closed_form = nu_transform_closed(q, f.cast<Complex>(), t);
        json inputs = matrix_inputs(q);
        inputs["f"] = to_std(f);
        inputs["t"] = t;
        inputs["samples"] = samples;
        out.push_back(rb.monte_carlo("soup_transform", anchor, name + " f=" + vector_text(f) + " t=" +
                                                                 std::to_string(t).substr(0, 3),
                                     inputs, report, 4.0));
      }
    }
  }
  return out;
}

std::vector<CheckReport> suite_isomorphism_mc(const ReportBuilder& rb, std::size_t samples) {
  std::vector<CheckReport> out;
  const char* anchor = "law of ½φ² is ρ_{1/2}";
  const auto positive = fixtures::positive_fixtures();
  for (std::size_t fi = 0; fi < positive.size(); ++fi) {
    const auto& [name, q] = positive[fi];
    if (samples < kMinMcSamples) {
      out.push_back(rb.inconclusive("isomorphism_mc", anchor, name, samples));
      continue;
    }
    const auto grid = fixtures::f_grid(q);
    const auto results = isomorphism_mc_check(q, grid, samples, rb.config.seed * 1000003 + kStreamIsomorphism * 16 + fi);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      json inputs = matrix_inputs(q);
      inputs["f"] = to_std(grid[i]);
      inputs["samples"] = samples;
      const std::string label = name + " f=" + vector_text(grid[i]);
      out.push_back(rb.monte_carlo("isomorphism_mc_gff", anchor, label, inputs, results[i].gff, 4.0));
      out.push_back(rb.monte_carlo("isomorphism_mc_soup", anchor, label, inputs, results[i].soup, 4.0));
    }
  }
  return out;
}

std::vector<CheckReport> suite_chi_square(const ReportBuilder& rb, std::size_t samples) {
  std::vector<CheckReport> out;
  const char* anchor = "Z²/2 ~ ℒ_{1/2} + Gamma(1/2,1)";
  int index = 0;
  for (double q : {0.3, 0.5}) {
    const std::string name = "one_point_q" + std::to_string(q).substr(0, 3);
    if (samples < kMinMcSamples) {
      out.push_back(rb.inconclusive("chi_square_decomposition", anchor, name, samples));
      continue;
    }
    const auto check =
        chi_square_decomposition_check(q, 1.0, samples, rb.config.seed * 1000003 + kStreamChiSquare * 16 + index++);
    json inputs = {{"q", q}, {"s", 1.0}, {"samples", samples}};
    const auto& m = check.moments;
    const double z_mean = std::abs(m.mean_lhs - m.mean_rhs) / m.mean_sigma;
    const double z_var = std::abs(m.var_lhs - m.var_rhs) / m.var_sigma;
    out.push_back(rb.make("chi_square_moments", anchor, name, inputs,
                          json{{"mean", m.mean_lhs}, {"variance", m.var_lhs}},
                          json{{"mean", m.mean_rhs}, {"variance", m.var_rhs}}, std::max(z_mean, z_var), 4.0));
    out.push_back(rb.monte_carlo("chi_square_transform_gaussian", anchor, name, inputs, check.gaussian, 4.0));
    out.push_back(rb.monte_carlo("chi_square_transform_soup", anchor, name, inputs, check.soup_plus, 4.0));
  }
  return out;
}

std::vector<CheckReport> suite_complex_gff(const ReportBuilder& rb, std::size_t samples) {
  std::vector<CheckReport> out;
  const char* anchor = "E[ψψ^H] = 2G′, E[ψψ^T] = 0";
  const auto hermitian = fixtures::hermitian_fixtures();
  for (std::size_t fi = 0; fi < hermitian.size(); ++fi) {
    const auto& [name, q] = hermitian[fi];
    if (samples < kMinMcSamples) {
      out.push_back(rb.inconclusive("complex_gff_covariance", anchor, name, samples));
      continue;
    }
    const auto model = ComplexGFFModel::from_weights(q);
    const auto est = estimate_complex_covariance(model, samples, rb.config.seed, kStreamComplexGff * 16 + fi);
    const CMatrix target = 2.0 * model.covariance_prime();
    double worst_cov = 0.0;
    double worst_pseudo = 0.0;
    for (int x = 0; x < model.size(); ++x) {
      for (int y = 0; y < model.size(); ++y) {
        worst_cov = std::max(worst_cov, std::abs(est.covariance(x, y) - target(x, y)) / est.covariance_sigma(x, y));
        worst_pseudo = std::max(worst_pseudo, std::abs(est.pseudo_covariance(x, y)) / est.pseudo_sigma(x, y));
      }
    }
    json inputs = matrix_inputs(q);
    inputs["samples"] = samples;
    out.push_back(rb.make("complex_gff_covariance", anchor, name, inputs, json(worst_cov), json(0.0), worst_cov, 4.0));
    out.push_back(rb.make("complex_gff_pseudo_covariance", anchor, name, inputs, json(worst_pseudo), json(0.0),
                          worst_pseudo, 4.0));
  }
  return out;
}

using Suite = std::function<std::vector<CheckReport>()>;

std::vector<CheckReport> run_suites(const RunConfig& config, const std::vector<Suite>& suites) {
  std::vector<std::future<std::vector<CheckReport>>> running;
  std::vector<CheckReport> all;
  for (const auto& suite : suites) {
    running.push_back(std::async(std::launch::async, [&suite, &config] {
      const auto start = std::chrono::steady_clock::now();
      auto reports = suite();
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      if (config.record_timing) {
        for (auto& r : reports) r.runtime_ms = ms;
      }
      return reports;
    }));
  }
  for (auto& f : running) {
    auto reports = f.get();
    all.insert(all.end(), std::make_move_iterator(reports.begin()), std::make_move_iterator(reports.end()));
  }
  return all;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config and reports

double RunConfig::tolerance(const std::string& check, double fallback) const {
  const auto it = tolerances.find(check);
  return it == tolerances.end() ? fallback : it->second;
}

void RunConfig::validate() const {
  if (samples < 1 || wilson_samples < 1) throw Error(ErrorKind::InvalidInput, "sample counts must be >= 1");
  if (loop_length < 1 || lerw_length < 1 || pushforward_length < 1) {
    throw Error(ErrorKind::InvalidInput, "length caps must be >= 1");
  }
  for (const auto& [check, tol] : tolerances) {
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidInput, "tolerance for " + check + " must be > 0");
  }
}

json config_to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"samples", c.samples},
          {"wilson_samples", c.wilson_samples},
          {"loop_length", c.loop_length},
          {"lerw_length", c.lerw_length},
          {"pushforward_length", c.pushforward_length},
          {"tolerances", c.tolerances},
          {"matrix_fixtures", c.matrix_fixtures},
          {"graph_fixtures", c.graph_fixtures},
          {"output", c.output},
          {"record_timing", c.record_timing}};
}

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::InvalidInput, "config must be a JSON object");
  RunConfig c;
  try {
    c.seed = doc.value("seed", c.seed);
    c.samples = doc.value("samples", c.samples);
    c.wilson_samples = doc.value("wilson_samples", c.wilson_samples);
    c.loop_length = doc.value("loop_length", c.loop_length);
    c.lerw_length = doc.value("lerw_length", c.lerw_length);
    c.pushforward_length = doc.value("pushforward_length", c.pushforward_length);
    c.tolerances = doc.value("tolerances", c.tolerances);
    c.matrix_fixtures = doc.value("matrix_fixtures", c.matrix_fixtures);
    c.graph_fixtures = doc.value("graph_fixtures", c.graph_fixtures);
    c.output = doc.value("output", c.output);
    c.record_timing = doc.value("record_timing", c.record_timing);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

json report_to_json(const CheckReport& r) {
  json j = {{"check", r.check},
            {"anchor", r.anchor},
            {"fixture", r.fixture},
            {"inputs_digest", r.inputs_digest},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"error", r.error},
            {"tolerance", r.tolerance},
            {"status", status_name(r.status)},
            {"pass", r.pass()}};
  if (r.bound) j["bound"] = *r.bound;
  if (r.runtime_ms) j["runtime_ms"] = *r.runtime_ms;
  return j;
}

std::string digest(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<CheckReport> run_verify(const RunConfig& config) {
  config.validate();
  const Fixtures fx = load_fixtures(config);
  const ReportBuilder rb{config};
  return run_suites(config, {
                                [&] { return suite_greens_product(rb, fx); },
                                [&] { return suite_loop_sums(rb, fx, config.loop_length); },
                                [&] { return suite_renewal(rb, fx, config.loop_length * 2); },
                                [&] { return suite_lerw(rb, config.lerw_length); },
                                [&] { return suite_matrix_tree(rb, fx); },
                                [&] { return suite_reversal(rb, fx, config.loop_length); },
                                [&] { return suite_isomorphism_identity(rb, fx); },
                                [&] { return suite_doubling(rb, fx, config.pushforward_length); },
                            });
}

std::vector<CheckReport> run_mc(const RunConfig& config) {
  config.validate();
  const ReportBuilder rb{config};
  return run_suites(config, {
                                [&] { return suite_wilson(rb, config.wilson_samples); },
                                [&] { return suite_soup_count(rb, config.samples); },
                                [&] { return suite_transform(rb, config.samples); },
                                [&] { return suite_isomorphism_mc(rb, config.samples); },
                                [&] { return suite_chi_square(rb, config.samples); },
                                [&] { return suite_complex_gff(rb, config.samples); },
                            });
}

int exit_code(const std::vector<CheckReport>& reports) {
  bool inconclusive = false;
  for (const auto& r : reports) {
    if (r.status == Status::Fail) return kCheckFailure;
    if (r.status == Status::Inconclusive) inconclusive = true;
  }
  return inconclusive ? kInconclusive : kPass;
}

void write_reports(const std::vector<CheckReport>& reports, std::ostream& out) {
  for (const auto& r : reports) out << report_to_json(r).dump() << '\n';
}

std::optional<SampleKind> parse_sample_kind(const std::string& name) {
  if (name == "soup") return SampleKind::Soup;
  if (name == "gff") return SampleKind::Gff;
  if (name == "tree") return SampleKind::Tree;
  if (name == "field") return SampleKind::Field;
  return std::nullopt;
}

void run_sample(const RunConfig& config, const SampleRequest& request, std::ostream& out) {
  auto meta = [&](std::size_t i) { return json{{"seed", config.seed}, {"substream", i}}; };
  auto load_matrix = [&](WeightMatrix fallback) {
    return request.matrix_path ? io::matrix_from_json(io::read_json_file(*request.matrix_path)) : fallback;
  };
  switch (request.kind) {
    case SampleKind::Soup:
    case SampleKind::Field: {
      const WeightMatrix q = load_matrix(fixtures::one_point(0.5));
      if (!q.flags().positive) {
        throw Error(ErrorKind::NotPositive,
                    "refusing to sample: complex or signed weights define a complex measure, not a distribution");
      }
      const LoopSoupSampler sampler(q);
      for (std::size_t i = 0; i < request.count; ++i) {
        Rng rng = substream(config.seed, kStreamSample, i);
        const auto soup = sampler.sample_soup(request.intensity, rng);
        json line = meta(i);
        line["t"] = request.intensity;
        if (request.kind == SampleKind::Soup) {
          line.update(io::loops_to_json(soup));
        } else {
          line.update(io::field_to_json(continuous_occupation(discrete_occupation(soup), 0.0, rng)));
        }
        out << line.dump() << '\n';
      }
      break;
    }
    case SampleKind::Gff: {
      const WeightMatrix q = load_matrix(fixtures::two_state());
      const GFFModel model = GFFModel::from_weights(q);
      for (std::size_t i = 0; i < request.count; ++i) {
        Rng rng = substream(config.seed, kStreamSample, i);
        const RVector phi = gff_sample(model, rng);
        json line = meta(i);
        line["field"] = to_std(phi);
        out << line.dump() << '\n';
      }
      break;
    }
    case SampleKind::Tree: {
      const SimpleGraph graph = request.graph_path ? io::graph_from_json(io::read_json_file(*request.graph_path)).graph
                                                   : SimpleGraph::complete(4);
      for (std::size_t i = 0; i < request.count; ++i) {
        Rng rng = substream(config.seed, kStreamSample, i);
        const auto tree = wilson_sample(graph, 0, rng);
        json line = meta(i);
        line["root"] = tree.root();
        json edges = json::array();
        for (auto [a, b] : tree.edges()) edges.push_back({a, b});
        line["edges"] = std::move(edges);
        out << line.dump() << '\n';
      }
      break;
    }
  }
}

}  // namespace loopsoup::harness
