#pragma once

// SpectralField: a real, 2*pi-periodic, zero-mean function held as grid
// samples together with its Fourier coefficients c_k, |k| <= n/2. The two
// representations are kept consistent eagerly; the k = 0 and Nyquist
// coefficients are identically zero, so odd-order derivatives and the
// Hilbert multiplier are unambiguous and every field is real-valued.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "vicinal/fft.hpp"
#include "vicinal/grid.hpp"

namespace vicinal {

class MeanNotZero : public Error {
 public:
  explicit MeanNotZero(double mean)
      : Error("samples have nonzero mean " + std::to_string(mean) +
              "; project_zero_mean first") {}
};

class SpectralField {
 public:
  /// Zero field.
  explicit SpectralField(const PeriodicGrid& grid)
      : grid_(grid),
        samples_(grid.size(), 0.0),
        coeffs_(grid.size() / 2 + 1, {0.0, 0.0}) {}

  const PeriodicGrid& grid() const { return grid_; }
  int size() const { return grid_.size(); }
  const std::vector<double>& samples() const { return samples_; }
  double sample(int j) const { return samples_[j]; }

  /// Half-spectrum coefficient, k in [0, n/2].
  const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }

  /// Signed-mode coefficient c_k with conjugate symmetry for k < 0.
  std::complex<double> coeff(int k) const {
    const int a = std::abs(k);
    if (a > grid_.size() / 2) return {0.0, 0.0};
    return k >= 0 ? coeffs_[a] : std::conj(coeffs_[a]);
  }

  double max_abs() const {
    double m = 0.0;
    for (double s : samples_) m = std::max(m, std::abs(s));
    return m;
  }

  /// Builds a field from coefficients; k=0 and Nyquist entries are dropped.
  static SpectralField from_coeffs(const PeriodicGrid& grid,
                                   std::vector<std::complex<double>> coeffs) {
    SpectralField f(grid);
    coeffs.resize(grid.size() / 2 + 1, {0.0, 0.0});
    coeffs[0] = 0.0;
    coeffs.back() = 0.0;
    f.coeffs_ = std::move(coeffs);
    detail::dft_inverse(grid.size(), f.coeffs_, f.samples_);
    return f;
  }

  /// Builds a field from samples assumed mean-free; projects k=0 and Nyquist.
  static SpectralField from_samples_unchecked(const PeriodicGrid& grid,
                                              const std::vector<double>& samples) {
    std::vector<std::complex<double>> c;
    detail::dft_forward(samples, c);
    return from_coeffs(grid, std::move(c));
  }

 private:
  PeriodicGrid grid_;
  std::vector<double> samples_;
  std::vector<std::complex<double>> coeffs_;
};

inline double mean(const std::vector<double>& samples) {
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

/// Subtracts the mean; idempotent.
inline std::vector<double> project_zero_mean(std::vector<double> samples) {
  const double m = mean(samples);
  for (double& s : samples) s -= m;
  return samples;
}

/// Field from samples; requires |mean| <= 1e-10 * max(1, max|samples|).
inline SpectralField make_field(const PeriodicGrid& grid,
                                const std::vector<double>& samples) {
  if (static_cast<int>(samples.size()) != grid.size())
    throw Error("sample count does not match grid size");
  double mx = 1.0;
  for (double s : samples) mx = std::max(mx, std::abs(s));
  const double m = mean(samples);
  if (std::abs(m) > 1e-10 * mx) throw MeanNotZero(m);
  return SpectralField::from_samples_unchecked(grid, project_zero_mean(samples));
}

/// Hilbert transform, Fourier multiplier -i*sgn(k).
inline SpectralField hilbert(const SpectralField& f) {
  std::vector<std::complex<double>> c = f.coeffs();
  const std::complex<double> minus_i(0.0, -1.0);
  for (std::size_t k = 1; k < c.size(); ++k) c[k] *= minus_i;
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

/// Spectral derivative of given order, multiplier (ik)^order.
inline SpectralField derivative(const SpectralField& f, int order) {
  if (order < 1 || order > 4) throw Error("derivative order must be in 1..4");
  std::vector<std::complex<double>> c = f.coeffs();
  for (std::size_t k = 1; k < c.size(); ++k) {
    std::complex<double> ik(0.0, static_cast<double>(k));
    std::complex<double> mult = 1.0;
    for (int m = 0; m < order; ++m) mult *= ik;
    c[k] *= mult;
  }
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

/// The unique zero-mean antiderivative, multiplier 1/(ik).
inline SpectralField antiderivative_zero_mean(const SpectralField& f) {
  std::vector<std::complex<double>> c = f.coeffs();
  for (std::size_t k = 1; k < c.size(); ++k)
    c[k] /= std::complex<double>(0.0, static_cast<double>(k));
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

/// L2 pairing by uniform-weight quadrature, exact for band-limited products.
inline double inner_product(const SpectralField& f, const SpectralField& g) {
  if (!(f.grid() == g.grid())) throw GridMismatch();
  double s = 0.0;
  for (int j = 0; j < f.size(); ++j) s += f.sample(j) * g.sample(j);
  return f.grid().dx() * s;
}

/// L^p norm by quadrature; p = infinity gives max |samples|.
inline double norm_lp(const SpectralField& f, double p) {
  if (p < 1.0) throw Error("norm_lp requires p >= 1");
  if (std::isinf(p)) return f.max_abs();
  double s = 0.0;
  for (int j = 0; j < f.size(); ++j) s += std::pow(std::abs(f.sample(j)), p);
  return std::pow(f.grid().dx() * s, 1.0 / p);
}

inline double norm_l2(const SpectralField& f) { return norm_lp(f, 2.0); }

}  // namespace vicinal
