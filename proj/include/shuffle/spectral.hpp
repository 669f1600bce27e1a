#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "shuffle/permutation.hpp"

namespace shuffle {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Renewal matrix M of a single card. Row 0 is uniform; row i >= 1 has 1/n in
// column 1 and 1 - 1/n in column i + 1 (mod n).
// ---------------------------------------------------------------------------

struct RowEntry {
  State column;
  double probability;
};

// Nonzero entries of row i, sorted by column, duplicate columns merged.
std::vector<RowEntry> renewal_row(std::size_t n, State i);

// Dense view, n <= 4096.
Eigen::MatrixXd renewal_matrix_dense(std::size_t n);

// M f in O(n).
std::vector<Complex> apply_renewal(std::span<const Complex> f);

// ---------------------------------------------------------------------------
// Roots
// ---------------------------------------------------------------------------

struct SolverOptions {
  double tol = 1e-12;
  int max_iterations = 200;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Complex last_iterate)
      : std::runtime_error(what), last_iterate_(last_iterate) {}
  Complex last_iterate() const { return last_iterate_; }

 private:
  Complex last_iterate_;
};

// psi(z) = e^z - z - 1.
Complex psi(Complex z);
// phi_n(z) = (1 + z/n)^n - z - 1, evaluated as exp(n log1p(z/n)) - z - 1.
// `n` may be any real >= 1 (used for continuation in n).
Complex phi(double n, Complex z);
// log(1 + w) accurate for small |w|.
Complex log1p(Complex w);

// Nonzero root of psi on branch m >= 1, with Im in (2 pi m + pi/4, 2 pi m + pi/2).
// The imaginary part solves y / sin y = exp(y cos y / sin y - 1) by bisection
// on that bracket; the complex root is then polished by Newton on psi.
Complex solve_zeta(int m, const SolverOptions& options = {});

struct SpectralPair {
  std::size_t n = 0;
  int m = 1;
  Complex zeta;
  Complex z_n;     // root of phi_n continued from zeta
  Complex omega;   // 1 + z_n / n
  Complex gamma;   // 1 / omega, root of (n-1) g^n - n g^(n-1) + 1
  Complex lambda;  // (1 - 1/n) gamma, eigenvalue of M
  double rho = 0;  // n |1 - lambda|
  double psi_residual = 0;   // |psi(zeta)|
  double poly_residual = 0;  // |gamma|^n |phi_n(z_n)|, the polynomial residual
  int iterations = 0;
};

// Newton on phi_n seeded at zeta. The root is tracked by continuation in n
// (phi_nu for nu decreasing geometrically towards n), so small n stays on the
// branch of zeta. Requires n >= 8.
SpectralPair solve_gamma(std::size_t n, Complex zeta, const SolverOptions& options = {}, int m = 1);

// solve_zeta + solve_gamma.
SpectralPair spectral_pair(std::size_t n, int m = 1, const SolverOptions& options = {});

// |(n-1) g^n - n g^(n-1) + 1| by direct evaluation (small n).
double char_poly_residual(std::size_t n, Complex gamma);

// All n roots of (n-1) g^n - n g^(n-1) + 1 for 2 <= n <= 64, including the
// double root at 1. After factoring out (g - 1)^2 the quotient is
// sum_{k=0}^{n-2} (k + 1) g^k; its roots come from a companion-matrix
// eigensolve and are Newton-polished. Sorted by argument, then modulus.
std::vector<Complex> all_gamma_roots(std::size_t n);

// ---------------------------------------------------------------------------
// Eigenfunctions
// ---------------------------------------------------------------------------

struct Eigenfunction {
  std::size_t n = 0;
  std::vector<Complex> values;
  Complex gamma;
  Complex lambda;
  double norm2 = 0;     // l2 norm w.r.t. the uniform measure on [n]
  double norm_inf = 0;

  Complex operator[](State s) const { return values[s]; }
};

// f_0 = 0, f_1 = 1, f_k = 1 + (gamma - n/(n-1)) sum_{j=1}^{k-1} gamma^(j-1).
// Throws std::invalid_argument for gamma in {0, 1}; those eigenvalues are
// covered by special_eigenvectors().
Eigenfunction eigenfunction(std::size_t n, Complex gamma);

// Same eigenfunction multiplied by `scale` (norms updated).
Eigenfunction rescaled(const Eigenfunction& f, Complex scale);

// max_i |(M f)_i - lambda f_i|.
double eigen_residual(const Eigenfunction& f);

struct SpecialEigenvectors {
  std::vector<double> unit;  // (1, ..., 1), eigenvalue 1
  std::vector<double> zero;  // (-1, n-1, -1, ..., -1), eigenvalue 0
};
SpecialEigenvectors special_eigenvectors(std::size_t n);

// Nontrivial eigenpair with the smallest |1 - lambda| among all_gamma_roots
// (ties broken towards Im >= 0). Small n only.
Eigenfunction slowest_eigenfunction(std::size_t n);

}  // namespace shuffle
