#pragma once
// Independent reference implementations used by the tests. Nothing here calls
// into the library's algorithms; only plain data types are shared.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Perm = std::vector<std::uint32_t>;  // card -> location

// Every permutation of [n] in lexicographic order.
inline std::vector<Perm> all_perms(std::size_t n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), 0u);
  std::vector<Perm> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Exchange the cards at locations l and r.
inline Perm swap_locations(Perm p, std::uint32_t l, std::uint32_t r) {
  for (auto& s : p) {
    if (s == l) s = r;
    else if (s == r) s = l;
  }
  return p;
}

// Renewal step written from the verbal description: the card at state 0
// trades places with the card at state u, then every card moves one state up.
inline Perm renewal_move(Perm p, std::uint32_t u) {
  const auto n = static_cast<std::uint32_t>(p.size());
  p = swap_locations(std::move(p), 0, u);
  for (auto& s : p) s = (s + 1) % n;
  return p;
}

// Renewal matrix typed in from its definition.
inline Eigen::MatrixXd renewal_matrix(std::size_t n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t c = 0; c < n; ++c) m(0, c) = 1.0 / n;
  for (std::size_t i = 1; i < n; ++i) {
    m(i, 1) += 1.0 / n;
    m(i, (i + 1) % n) += 1.0 - 1.0 / n;
  }
  return m;
}

inline std::vector<std::complex<double>> renewal_eigenvalues(std::size_t n) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(renewal_matrix(n), false);
  std::vector<std::complex<double>> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
  return out;
}

// Greedy matching distance between two multisets of the same size: the
// largest distance of any point to its nearest unused partner.
inline double multiset_distance(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0;
  for (const auto& x : a) {
    std::size_t best = 0;
    double d = INFINITY;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (std::abs(x - b[k]) < d) {
        d = std::abs(x - b[k]);
        best = k;
      }
    }
    worst = std::max(worst, d);
    b.erase(b.begin() + static_cast<long>(best));
  }
  return worst;
}

// Plain bisection for y on (2 pi m + pi/4, 2 pi m + pi/2) in
// y / sin y = exp(y cot y - 1), then zeta = (y cot y - 1) + i y.
inline std::complex<double> zeta_by_bisection(int m) {
  const double pi = std::acos(-1.0);
  const auto g = [](double y) { return y / std::sin(y) - std::exp(y * std::cos(y) / std::sin(y) - 1.0); };
  double lo = 2 * pi * m + pi / 4, hi = 2 * pi * m + pi / 2;
  const bool lo_neg = g(lo) < 0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((g(mid) < 0) == lo_neg) lo = mid;
    else hi = mid;
  }
  const double y = 0.5 * (lo + hi);
  return {y * std::cos(y) / std::sin(y) - 1.0, y};
}

// Dense brute-force TV curve for the shuffle with locations seq[t-1] from the
// identity: full n! x n! transition matrices applied to a dense vector.
inline std::vector<double> dense_tv_curve(std::size_t n, const std::vector<std::uint32_t>& seq) {
  const auto perms = all_perms(n);
  std::map<Perm, std::size_t> index;
  for (std::size_t k = 0; k < perms.size(); ++k) index[perms[k]] = k;
  const std::size_t N = perms.size();
  std::vector<Eigen::MatrixXd> kernels(n, Eigen::MatrixXd::Zero(N, N));
  for (std::uint32_t l = 0; l < n; ++l) {
    for (std::size_t k = 0; k < N; ++k) {
      for (std::uint32_t r = 0; r < n; ++r) kernels[l](index[swap_locations(perms[k], l, r)], k) += 1.0 / n;
    }
  }
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(N);
  mu(0) = 1.0;
  const auto tv = [&] { return 0.5 * (mu.array() - 1.0 / N).abs().sum(); };
  std::vector<double> curve{tv()};
  for (auto l : seq) {
    mu = kernels[l] * mu;
    curve.push_back(tv());
  }
  return curve;
}

}  // namespace oracle
