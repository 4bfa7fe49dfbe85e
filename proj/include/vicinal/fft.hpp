#pragma once

// Thin wrapper around FFTW for the real <-> half-spectrum transforms used by
// SpectralField. Coefficients follow the physical-grid convention
//   c_k = (1/n) sum_j s_j exp(-i k x_j),   x_j = -pi + 2*pi*j/n,
// so c_k = (-1)^k / n * FFTW_r2c(s)[k]. Plans are cached per thread; plan
// creation and destruction go through FFTW's (non thread-safe) planner under
// a global mutex, execution is lock-free.

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace vicinal::detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftWorkspace {
 public:
  explicit FftWorkspace(int n) : n_(n) {
    real_ = fftw_alloc_real(n);
    cplx_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(n, real_, cplx_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(n, cplx_, real_, FFTW_ESTIMATE);
  }

  ~FftWorkspace() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(cplx_);
  }

  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;

  void forward(const std::vector<double>& samples,
               std::vector<std::complex<double>>& coeffs) {
    const int m = n_ / 2 + 1;
    for (int j = 0; j < n_; ++j) real_[j] = samples[j];
    fftw_execute(fwd_);
    coeffs.resize(m);
    double sign = 1.0;
    for (int k = 0; k < m; ++k) {
      coeffs[k] = sign / n_ * std::complex<double>(cplx_[k][0], cplx_[k][1]);
      sign = -sign;
    }
  }

  void inverse(const std::vector<std::complex<double>>& coeffs,
               std::vector<double>& samples) {
    const int m = n_ / 2 + 1;
    double sign = 1.0;
    for (int k = 0; k < m; ++k) {
      const std::complex<double> c = sign * coeffs[k];
      cplx_[k][0] = c.real();
      cplx_[k][1] = c.imag();
      sign = -sign;
    }
    fftw_execute(bwd_);
    samples.resize(n_);
    for (int j = 0; j < n_; ++j) samples[j] = real_[j];
  }

 private:
  int n_;
  double* real_;
  fftw_complex* cplx_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

inline FftWorkspace& workspace(int n) {
  thread_local std::map<int, FftWorkspace> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.try_emplace(n, n).first;
  return it->second;
}

/// c_k (k = 0..n/2) from samples; unnormalized-free, see header comment.
inline void dft_forward(const std::vector<double>& samples,
                        std::vector<std::complex<double>>& coeffs) {
  workspace(static_cast<int>(samples.size())).forward(samples, coeffs);
}

/// Samples from half-spectrum coefficients (conjugate symmetry implied).
inline void dft_inverse(int n, const std::vector<std::complex<double>>& coeffs,
                        std::vector<double>& samples) {
  workspace(n).inverse(coeffs, samples);
}

}  // namespace vicinal::detail
