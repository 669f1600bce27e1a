#include "shuffle/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace shuffle {

namespace {

constexpr double kPi = std::numbers::pi;

void require_deck(std::size_t n, std::size_t minimum) {
  if (n < minimum) {
    throw std::invalid_argument("deck size " + std::to_string(n) + " below minimum " +
                                std::to_string(minimum));
  }
}

// Horner evaluation of Q(g) = sum_{k=0}^{d} (k+1) g^k and its derivative.
std::pair<Complex, Complex> quotient_and_derivative(std::size_t degree, Complex g) {
  Complex q = 0.0;
  Complex dq = 0.0;
  for (std::size_t k = degree + 1; k-- > 0;) {
    dq = dq * g + q;
    q = q * g + static_cast<double>(k + 1);
  }
  return {q, dq};
}

}  // namespace

std::vector<RowEntry> renewal_row(std::size_t n, State i) {
  require_deck(n, 2);
  if (i >= n) throw std::out_of_range("renewal row index out of range");
  const double inv = 1.0 / static_cast<double>(n);
  std::vector<RowEntry> row;
  if (i == 0) {
    row.reserve(n);
    for (State c = 0; c < n; ++c) row.push_back({c, inv});
    return row;
  }
  const State next = static_cast<State>((i + 1) % n);
  row.push_back({1, inv});
  if (next == 1) {
    row.front().probability += 1.0 - inv;
  } else {
    row.push_back({next, 1.0 - inv});
  }
  std::sort(row.begin(), row.end(), [](const RowEntry& a, const RowEntry& b) { return a.column < b.column; });
  return row;
}

Eigen::MatrixXd renewal_matrix_dense(std::size_t n) {
  require_deck(n, 2);
  if (n > 4096) throw std::invalid_argument("dense renewal matrix limited to n <= 4096");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (State i = 0; i < n; ++i) {
    for (const auto& e : renewal_row(n, i)) m(i, e.column) += e.probability;
  }
  return m;
}

std::vector<Complex> apply_renewal(std::span<const Complex> f) {
  const std::size_t n = f.size();
  require_deck(n, 2);
  const double inv = 1.0 / static_cast<double>(n);
  std::vector<Complex> out(n);
  Complex total = 0.0;
  for (const auto& v : f) total += v;
  out[0] = total * inv;
  for (std::size_t i = 1; i < n; ++i) out[i] = f[1] * inv + (1.0 - inv) * f[(i + 1) % n];
  return out;
}

Complex psi(Complex z) { return std::exp(z) - z - 1.0; }

Complex log1p(Complex w) {
  const double x = w.real();
  const double y = w.imag();
  if (std::abs(w) > 0.5) return std::log(1.0 + w);
  return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
}

Complex phi(double n, Complex z) { return std::exp(n * log1p(z / n)) - z - 1.0; }

Complex solve_zeta(int m, const SolverOptions& options) {
  if (m < 1) throw std::invalid_argument("branch index must be >= 1");
  if (!(options.tol > 0)) throw std::invalid_argument("tolerance must be positive");

  // Imaginary part: log(y / sin y) = y cos y / sin y - 1 on the bracket, where
  // the left side is below the right at a = pi/4 and above it at a = pi/2.
  const double base = 2.0 * kPi * m;
  double lo = base + kPi / 4.0;
  double hi = base + kPi / 2.0;
  const auto mismatch = [](double y) {
    const double s = std::sin(y);
    return std::log(y / s) - (y * std::cos(y) / s - 1.0);
  };
  int iterations = 0;
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi &&
         iterations < options.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mismatch(mid) < 0.0 ? lo : hi) = mid;
    ++iterations;
  }
  const double y = 0.5 * (lo + hi);
  Complex z{y * std::cos(y) / std::sin(y) - 1.0, y};

  // Newton polish on psi; psi'(z) = e^z - 1.
  for (; iterations < options.max_iterations; ++iterations) {
    const Complex r = psi(z);
    const Complex step = r / (std::exp(z) - 1.0);
    z -= step;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ConvergenceError("zeta iteration diverged", z);
    }
    if (std::abs(step) <= 1e-3 * options.tol * std::max(1.0, std::abs(z))) break;
  }
  if (std::abs(psi(z)) > options.tol) {
    throw ConvergenceError("zeta residual " + std::to_string(std::abs(psi(z))) + " above tolerance", z);
  }
  if (!(z.imag() > base + kPi / 4.0 && z.imag() < base + kPi / 2.0)) {
    throw ConvergenceError("zeta left its bracket", z);
  }
  return z;
}

SpectralPair solve_gamma(std::size_t n, Complex zeta, const SolverOptions& options, int m) {
  require_deck(n, 8);
  if (std::abs(zeta) < 1e-6) throw std::invalid_argument("zeta must be a nonzero root of psi");

  const double target = static_cast<double>(n);
  // Continuation schedule: 2^k * n for k = K..0 with 2^K * n >= 1e5.
  std::vector<double> schedule;
  for (double nu = target; nu < 1e5; nu *= 2.0) schedule.push_back(nu);
  std::reverse(schedule.begin(), schedule.end());
  if (schedule.empty() || schedule.back() != target) schedule.push_back(target);
  if (schedule.front() < 1e5) schedule.insert(schedule.begin(), 1e5 * 2.0);

  Complex z = zeta;
  int total = 0;
  for (double nu : schedule) {
    bool converged = false;
    for (int it = 0; it < options.max_iterations; ++it, ++total) {
      const Complex w = log1p(z / nu);
      const Complex value = std::exp(nu * w) - z - 1.0;
      const Complex slope = std::exp((nu - 1.0) * w) - 1.0;
      const Complex step = value / slope;
      z -= step;
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw ConvergenceError("Newton on phi_n diverged", z);
      }
      if (std::abs(step) <= 1e-3 * options.tol * std::max(1.0, std::abs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw ConvergenceError("Newton on phi_n hit the iteration cap", z);
    if (std::abs(z) < 1e-3) throw ConvergenceError("Newton on phi_n collapsed to the trivial root", z);
  }

  SpectralPair out;
  out.n = n;
  out.m = m;
  out.zeta = zeta;
  out.z_n = z;
  out.omega = 1.0 + z / target;
  out.gamma = 1.0 / out.omega;
  out.lambda = out.gamma * (1.0 - 1.0 / target);
  // 1 - lambda = (1 + z) / (n omega) exactly.
  out.rho = std::abs(1.0 + z) / std::abs(out.omega);
  out.psi_residual = std::abs(psi(zeta));
  const double gamma_pow_n = std::exp(-target * log1p(z / target).real());
  out.poly_residual = gamma_pow_n * std::abs(phi(target, z));
  out.iterations = total;
  if (out.poly_residual > options.tol) {
    throw ConvergenceError("polynomial residual above tolerance", z);
  }
  return out;
}

SpectralPair spectral_pair(std::size_t n, int m, const SolverOptions& options) {
  return solve_gamma(n, solve_zeta(m, options), options, m);
}

double char_poly_residual(std::size_t n, Complex gamma) {
  const double nd = static_cast<double>(n);
  return std::abs(std::pow(gamma, static_cast<int>(n - 1)) * ((nd - 1.0) * gamma - nd) + 1.0);
}

std::vector<Complex> all_gamma_roots(std::size_t n) {
  require_deck(n, 2);
  if (n > 64) throw std::invalid_argument("all_gamma_roots is limited to n <= 64");
  std::vector<Complex> roots{1.0, 1.0};
  const std::size_t degree = n - 2;
  if (degree > 0) {
    const auto d = static_cast<Eigen::Index>(degree);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
    const double lead = static_cast<double>(degree + 1);
    for (Eigen::Index i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index k = 0; k < d; ++k) companion(k, d - 1) = -static_cast<double>(k + 1) / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    for (Eigen::Index k = 0; k < d; ++k) {
      Complex g = solver.eigenvalues()[k];
      for (int it = 0; it < 20; ++it) {
        const auto [q, dq] = quotient_and_derivative(degree, g);
        if (std::abs(dq) == 0.0) break;
        const Complex next = g - q / dq;
        if (std::abs(quotient_and_derivative(degree, next).first) >= std::abs(q)) break;
        g = next;
      }
      roots.push_back(g);
    }
  }
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    const double aa = std::arg(a), ab = std::arg(b);
    if (std::abs(aa - ab) > 1e-12) return aa < ab;
    return std::abs(a) < std::abs(b);
  });
  return roots;
}

Eigenfunction eigenfunction(std::size_t n, Complex gamma) {
  require_deck(n, 2);
  if (std::abs(gamma) < 1e-14 || std::abs(gamma - 1.0) < 1e-14) {
    throw std::invalid_argument("gamma in {0, 1}: use special_eigenvectors() for lambda = 0 or 1");
  }
  const double nd = static_cast<double>(n);
  Eigenfunction f;
  f.n = n;
  f.gamma = gamma;
  f.lambda = gamma * (1.0 - 1.0 / nd);
  f.values.assign(n, 0.0);
  // Powers via exp((j-1) log gamma) rather than repeated multiplication.
  const Complex log_gamma = log1p(gamma - 1.0);
  const Complex increment = (gamma - 1.0) - 1.0 / (nd - 1.0);  // gamma - n/(n-1)
  Complex partial = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    f.values[k] = 1.0 + increment * partial;
    partial += std::exp(static_cast<double>(k - 1) * log_gamma);
  }
  double sq = 0.0;
  for (const auto& v : f.values) {
    sq += std::norm(v);
    f.norm_inf = std::max(f.norm_inf, std::abs(v));
  }
  f.norm2 = std::sqrt(sq / nd);
  return f;
}

Eigenfunction rescaled(const Eigenfunction& f, Complex scale) {
  Eigenfunction out = f;
  for (auto& v : out.values) v *= scale;
  out.norm2 *= std::abs(scale);
  out.norm_inf *= std::abs(scale);
  return out;
}

double eigen_residual(const Eigenfunction& f) {
  const auto mf = apply_renewal(f.values);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) worst = std::max(worst, std::abs(mf[i] - f.lambda * f.values[i]));
  return worst;
}

SpecialEigenvectors special_eigenvectors(std::size_t n) {
  require_deck(n, 2);
  SpecialEigenvectors out;
  out.unit.assign(n, 1.0);
  out.zero.assign(n, -1.0);
  out.zero[1] = static_cast<double>(n) - 1.0;
  return out;
}

Eigenfunction slowest_eigenfunction(std::size_t n) {
  const auto roots = all_gamma_roots(n);
  const double nd = static_cast<double>(n);
  const Complex* best = nullptr;
  double best_gap = 0.0;
  for (const auto& g : roots) {
    if (std::abs(g - 1.0) < 1e-6) continue;
    const double gap = std::abs(1.0 - g * (1.0 - 1.0 / nd));
    if (!best || gap < best_gap - 1e-12 ||
        (std::abs(gap - best_gap) <= 1e-12 && g.imag() > best->imag())) {
      best = &g;
      best_gap = gap;
    }
  }
  if (!best) throw std::invalid_argument("no nontrivial eigenvalue for n=" + std::to_string(n));
  return eigenfunction(n, *best);
}

}  // namespace shuffle
