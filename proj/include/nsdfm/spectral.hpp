#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "nsdfm/errors.hpp"

namespace nsdfm {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

enum class Kernel { bartlett, parzen };

inline double kernel_weight(Kernel k, double u) {
  const double a = std::abs(u);
  if (a > 1.0) return 0.0;
  switch (k) {
    case Kernel::bartlett:
      return 1.0 - a;
    case Kernel::parzen:
      if (a <= 0.5) return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
      return 2.0 * (1.0 - a) * (1.0 - a) * (1.0 - a);
  }
  throw config_error("unknown kernel");
}

// Rule-of-thumb bandwidth floor(0.75 sqrt(T)).
inline int default_bandwidth(int T) {
  const int b = static_cast<int>(std::floor(0.75 * std::sqrt(static_cast<double>(T))));
  return b < 1 ? 1 : b;
}

// Lag-window spectral density estimate of a differenced panel on the grid
// theta_h = pi h / (B + 1/2), h = -B..B. matrices[B + h] holds the
// Hermitian slice at theta_h; eigvals (filled by dynamic_eigenvalues) has
// one row per eigenvalue index (descending) and one column per grid point.
struct SpectralDensity {
  int bandwidth = 0;
  Kernel kernel = Kernel::bartlett;
  std::vector<double> grid;
  std::vector<Eigen::MatrixXcd> matrices;
  Eigen::MatrixXd eigvals;

  int nfreq() const { return static_cast<int>(grid.size()); }
  // index of theta = 0 in the grid
  int zero_index() const { return bandwidth; }
};

// Sample autocovariance of order k >= 0 for a (differenced, zero-mean)
// panel: (1/T) sum_t d_t d_{t+k}'. The divisor is always T.
inline Eigen::MatrixXd autocovariance(const Eigen::MatrixXd& diffs, int k) {
  const Eigen::Index T = diffs.cols();
  if (k < 0) throw estimation_error("autocovariance: negative lag");
  if (k >= T) throw estimation_error("autocovariance: lag exceeds sample");
  const Eigen::Index m = T - k;
  Eigen::MatrixXd g = diffs.leftCols(m) * diffs.rightCols(m).transpose();
  return g / static_cast<double>(T);
}

inline SpectralDensity lag_window_spectrum(const Eigen::MatrixXd& diffs, int bandwidth,
                                           Kernel kernel = Kernel::bartlett) {
  const Eigen::Index n = diffs.rows();
  const Eigen::Index T = diffs.cols();
  if (bandwidth < 1) throw config_error("bandwidth must be positive");
  if (bandwidth >= T)
    throw estimation_error("bandwidth " + std::to_string(bandwidth) +
                           " too large for T = " + std::to_string(T));

  std::vector<Eigen::MatrixXd> gam(static_cast<size_t>(bandwidth) + 1);
  std::vector<double> w(static_cast<size_t>(bandwidth) + 1);
  for (int k = 0; k <= bandwidth; ++k) {
    w[static_cast<size_t>(k)] =
        kernel_weight(kernel, static_cast<double>(k) / static_cast<double>(bandwidth));
    gam[static_cast<size_t>(k)] = autocovariance(diffs, k);
  }

  SpectralDensity sd;
  sd.bandwidth = bandwidth;
  sd.kernel = kernel;
  const int nfreq = 2 * bandwidth + 1;
  sd.grid.resize(static_cast<size_t>(nfreq));
  sd.matrices.resize(static_cast<size_t>(nfreq));
  const double denom = static_cast<double>(bandwidth) + 0.5;
  for (int h = -bandwidth; h <= bandwidth; ++h)
    sd.grid[static_cast<size_t>(h + bandwidth)] = kPi * static_cast<double>(h) / denom;

  // h >= 0 assembled directly, negative frequencies by conjugation
  for (int h = 0; h <= bandwidth; ++h) {
    const double theta = sd.grid[static_cast<size_t>(h + bandwidth)];
    Eigen::MatrixXd re = gam[0] * w[0];
    Eigen::MatrixXd im = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= bandwidth; ++k) {
      const double wk = w[static_cast<size_t>(k)];
      if (wk == 0.0) continue;
      const Eigen::MatrixXd& g = gam[static_cast<size_t>(k)];
      const double c = std::cos(static_cast<double>(k) * theta);
      const double s = std::sin(static_cast<double>(k) * theta);
      // g e^{-ik theta} + g' e^{+ik theta}
      re += wk * c * (g + g.transpose());
      im += wk * s * (g.transpose() - g);
    }
    re /= 2.0 * kPi;
    im /= 2.0 * kPi;
    Eigen::MatrixXcd slice(n, n);
    slice.real() = re;
    slice.imag() = im;
    // Hermitian symmetrization kills rounding asymmetry
    slice = 0.5 * (slice + slice.adjoint()).eval();
    sd.matrices[static_cast<size_t>(bandwidth + h)] = slice;
    if (h > 0) sd.matrices[static_cast<size_t>(bandwidth - h)] = slice.conjugate();
  }
  return sd;
}

// Fills sd.eigvals with the dynamic eigenvalues (descending within each
// frequency). Eigenvalues at -theta equal those at theta, so only the
// nonnegative half is decomposed.
inline const Eigen::MatrixXd& dynamic_eigenvalues(SpectralDensity& sd) {
  if (sd.matrices.empty()) throw estimation_error("dynamic_eigenvalues: empty density");
  const Eigen::Index n = sd.matrices.front().rows();
  const int B = sd.bandwidth;
  sd.eigvals.resize(n, sd.nfreq());
  for (int h = 0; h <= B; ++h) {
    Eigen::VectorXd vals;
    if (h == 0) {
      // theta = 0 slice is real symmetric
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sd.matrices[static_cast<size_t>(B)].real());
      if (es.info() != Eigen::Success)
        throw estimation_error("dynamic_eigenvalues: decomposition failed at theta = 0");
      vals = es.eigenvalues().reverse();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sd.matrices[static_cast<size_t>(B + h)]);
      if (es.info() != Eigen::Success)
        throw estimation_error("dynamic_eigenvalues: decomposition failed");
      vals = es.eigenvalues().reverse();
    }
    sd.eigvals.col(B + h) = vals;
    if (h > 0) sd.eigvals.col(B - h) = vals;
  }
  return sd.eigvals;
}

}  // namespace nsdfm
