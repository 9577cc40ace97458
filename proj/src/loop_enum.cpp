#include "loopsoup/loop_enum.hpp"

#include <algorithm>
#include <cmath>

#include "loopsoup/summation.hpp"

namespace loopsoup {

RootedLoop::RootedLoop(Path sites) : sites_(std::move(sites)) {
  if (sites_.size() < 2) throw Error(ErrorKind::InvalidPath, "rooted loop needs length >= 1");
  if (sites_.front() != sites_.back()) throw Error(ErrorKind::InvalidPath, "rooted loop must end at its root");
}

RootedLoop RootedLoop::reversed() const {
  Path rev(sites_.rbegin(), sites_.rend());
  return RootedLoop(std::move(rev));
}

RootedLoop RootedLoop::rotated(int k) const {
  const int n = length();
  Path out;
  out.reserve(sites_.size());
  for (int j = 0; j <= n; ++j) out.push_back(sites_[static_cast<std::size_t>((k + j) % n)]);
  return RootedLoop(std::move(out));
}

Complex path_weight(const WeightMatrix& q, std::span<const int> path) {
  Complex w{1.0, 0.0};
  for (std::size_t j = 1; j < path.size(); ++j) w *= q(path[j - 1], path[j]);
  return w;
}

int least_rotation(std::span<const int> word) {
  // Booth's algorithm over the doubled word.
  const int n = static_cast<int>(word.size());
  if (n == 0) return 0;
  auto at = [&](int i) { return word[static_cast<std::size_t>(i % n)]; };
  thread_local std::vector<int> fail;
  fail.assign(static_cast<std::size_t>(2 * n), -1);
  int k = 0;
  for (int j = 1; j < 2 * n; ++j) {
    const int c = at(j);
    int i = fail[static_cast<std::size_t>(j - k - 1)];
    while (i != -1 && c != at(k + i + 1)) {
      if (c < at(k + i + 1)) k = j - i - 1;
      i = fail[static_cast<std::size_t>(i)];
    }
    if (c != at(k + i + 1)) {
      if (c < at(k)) k = j;
      fail[static_cast<std::size_t>(j - k)] = -1;
    } else {
      fail[static_cast<std::size_t>(j - k)] = i + 1;
    }
  }
  return k % n;
}

int minimal_period(std::span<const int> word) {
  const int n = static_cast<int>(word.size());
  if (n == 0) return 0;
  thread_local std::vector<int> border;
  border.assign(static_cast<std::size_t>(n) + 1, 0);
  border[0] = -1;
  int k = -1;
  for (int i = 0; i < n; ++i) {
    while (k >= 0 && word[static_cast<std::size_t>(k)] != word[static_cast<std::size_t>(i)]) {
      k = border[static_cast<std::size_t>(k)];
    }
    ++k;
    border[static_cast<std::size_t>(i) + 1] = k;
  }
  const int p = n - border[static_cast<std::size_t>(n)];
  return n % p == 0 ? p : n;
}

UnrootedLoop canonicalize(const RootedLoop& loop) {
  const auto word = loop.word();
  return {loop.rotated(least_rotation(word)), minimal_period(word), loop.length()};
}

LoopMeasureValue loop_measure(const WeightMatrix& q, const RootedLoop& loop) {
  const Complex w = path_weight(q, loop.sites());
  const double n = loop.length();
  return {w / n, static_cast<double>(minimal_period(loop.word())) / n * w};
}

int local_time(const RootedLoop& loop, int x) {
  const auto& s = loop.sites();
  return static_cast<int>(std::count(s.begin() + 1, s.end(), x));
}

std::vector<int> local_times(const RootedLoop& loop, int n_sites) {
  std::vector<int> counts(static_cast<std::size_t>(n_sites), 0);
  const auto& s = loop.sites();
  for (std::size_t j = 1; j < s.size(); ++j) ++counts.at(static_cast<std::size_t>(s[j]));
  return counts;
}

Complex perturbed_measure(const WeightMatrix& q, const CVector& f, const RootedLoop& loop) {
  Complex factor{1.0, 0.0};
  const auto& s = loop.sites();
  for (std::size_t j = 1; j < s.size(); ++j) {
    const Complex denom = 1.0 + f(s[j]);
    if (std::abs(denom) == 0.0) throw Error(ErrorKind::DivisionByZero, "1 + f vanishes on the loop");
    factor /= denom;
  }
  return loop_measure(q, loop).rooted * factor;
}

std::uint64_t enumerate_rooted_loops(const WeightMatrix& q, int max_length, const LoopVisitor& visit,
                                     std::uint64_t budget) {
  if (max_length < 1) throw Error(ErrorKind::InvalidInput, "loop length cap must be >= 1");
  const int n = q.size();
  std::vector<std::vector<int>> next(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (q.in_support(x, y)) next[static_cast<std::size_t>(x)].push_back(y);
    }
  }

  std::uint64_t produced = 0;
  Path sites;
  std::vector<Complex> prefix;  // prefix[j] = weight of sites[0..j]
  for (int length = 1; length <= max_length; ++length) {
    for (int root = 0; root < n; ++root) {
      sites.assign(1, root);
      prefix.assign(1, Complex{1.0, 0.0});
      // Iterative DFS with explicit cursor per depth.
      std::vector<std::size_t> cursor(1, 0);
      while (!cursor.empty()) {
        const std::size_t depth = cursor.size() - 1;
        const int here = sites[depth];
        const auto& options = next[static_cast<std::size_t>(here)];
        if (cursor[depth] >= options.size()) {
          cursor.pop_back();
          sites.pop_back();
          prefix.pop_back();
          continue;
        }
        const int y = options[cursor[depth]++];
        if (static_cast<int>(depth) + 1 == length) {
          if (y != root) continue;
          if (++produced > budget) {
            throw Error(ErrorKind::LoopBudgetExceeded,
                        "loop enumeration exceeded budget of " + std::to_string(budget));
          }
          sites.push_back(y);
          visit(sites, prefix[depth] * q(here, y));
          sites.pop_back();
          continue;
        }
        sites.push_back(y);
        prefix.push_back(prefix[depth] * q(here, y));
        cursor.push_back(0);
      }
    }
  }
  return produced;
}

std::vector<double> count_rooted_loops(const WeightMatrix& q, int max_length) {
  const int n = q.size();
  RMatrix support = RMatrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) support(x, y) = q.in_support(x, y) ? 1.0 : 0.0;
  }
  std::vector<double> counts;
  RMatrix power = RMatrix::Identity(n, n);
  for (int k = 1; k <= max_length; ++k) {
    power = power * support;
    counts.push_back(power.trace());
  }
  return counts;
}

Complex F_exact(const WeightMatrix& q) {
  require_acceptable(q);
  return 1.0 / laplacian_determinant(q);
}

Complex F_V_exact(const WeightMatrix& q, std::span<const int> v_ordering) {
  return greens_diagonal_product(q, v_ordering);
}

double loop_sum_tail_bound(int n_sites, double rho, int max_length) {
  if (rho == 0.0) return 0.0;
  return n_sites * std::pow(rho, max_length + 1) / ((max_length + 1) * (1.0 - rho));
}

FTruncated F_truncated(const WeightMatrix& q, int max_length, std::optional<std::span<const int>> meeting,
                       std::uint64_t budget) {
  const auto cert = require_acceptable(q);
  std::vector<bool> in_v(static_cast<std::size_t>(q.size()), !meeting.has_value());
  if (meeting) {
    for (int x : *meeting) in_v.at(static_cast<std::size_t>(x)) = true;
  }

  FTruncated out;
  CompensatedSum rooted;
  CompensatedSum unrooted;
  out.loops = enumerate_rooted_loops(
      q, max_length,
      [&](std::span<const int> sites, Complex weight) {
        const auto word = sites.subspan(0, sites.size() - 1);
        if (meeting && std::none_of(word.begin(), word.end(), [&](int x) { return in_v[static_cast<std::size_t>(x)]; })) {
          return;
        }
        const double n = static_cast<double>(word.size());
        rooted += weight / n;
        // Each unrooted class is counted once, at its least rotation.
        const int d = minimal_period(word);
        if (least_rotation(word) % d == 0) {
          unrooted += static_cast<double>(d) / n * weight;
        }
      },
      budget);
  out.rooted_sum = rooted.value();
  out.unrooted_sum = unrooted.value();
  out.value = std::exp(out.rooted_sum);
  out.sum_tail = loop_sum_tail_bound(q.size(), cert.spectral_radius_abs, max_length);
  out.tail_bound = std::abs(out.value) * std::expm1(out.sum_tail);
  return out;
}

FTruncatedAll F_truncated_all(const WeightMatrix& q, int max_length, std::uint64_t budget) {
  const auto cert = require_acceptable(q);
  const auto n_sites = static_cast<std::size_t>(q.size());
  FTruncatedAll out;
  out.per_site.resize(n_sites);
  std::vector<CompensatedSum> rooted(n_sites + 1);
  std::vector<CompensatedSum> unrooted(n_sites + 1);
  std::vector<char> seen(n_sites, 0);
  out.total.loops = enumerate_rooted_loops(
      q, max_length,
      [&](std::span<const int> sites, Complex weight) {
        const auto word = sites.subspan(0, sites.size() - 1);
        const double n = static_cast<double>(word.size());
        const Complex m = weight / n;
        const int d = minimal_period(word);
        const bool canonical = least_rotation(word) % d == 0;
        const Complex m_unrooted = static_cast<double>(d) / n * weight;
        auto add = [&](std::size_t slot, FTruncated& acc) {
          rooted[slot] += m;
          if (canonical) unrooted[slot] += m_unrooted;
          ++acc.loops;
        };
        add(n_sites, out.total);
        std::fill(seen.begin(), seen.end(), 0);
        for (int x : word) {
          const auto site = static_cast<std::size_t>(x);
          if (!seen[site]) add(site, out.per_site[site]);
          seen[site] = 1;
        }
      },
      budget);
  const double sum_tail = loop_sum_tail_bound(q.size(), cert.spectral_radius_abs, max_length);
  auto finish = [&](std::size_t slot, FTruncated& acc) {
    acc.rooted_sum = rooted[slot].value();
    acc.unrooted_sum = unrooted[slot].value();
    acc.value = std::exp(acc.rooted_sum);
    acc.sum_tail = sum_tail;
    acc.tail_bound = std::abs(acc.value) * std::expm1(sum_tail);
  };
  finish(n_sites, out.total);
  for (std::size_t x = 0; x < n_sites; ++x) finish(x, out.per_site[x]);
  return out;
}

}  // namespace loopsoup
