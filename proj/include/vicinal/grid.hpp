#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace vicinal {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
 public:
  GridMismatch() : Error("fields live on different grids") {}
};

/// Uniform periodic grid on [-pi, pi) with an even number of nodes.
class PeriodicGrid {
 public:
  explicit PeriodicGrid(int n) : n_(n), dx_(kTwoPi / n) {
    if (n < 8 || n % 2 != 0)
      throw Error("grid size must be even and >= 8, got " + std::to_string(n));
    nodes_.resize(n);
    for (int j = 0; j < n; ++j) nodes_[j] = -kPi + dx_ * j;
  }

  int size() const { return n_; }
  double dx() const { return dx_; }
  double node(int j) const { return nodes_[j]; }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Number of independent nonzero Fourier modes (Nyquist excluded).
  int max_mode() const { return n_ / 2 - 1; }

  friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) {
    return a.n_ == b.n_;
  }

 private:
  int n_;
  double dx_;
  std::vector<double> nodes_;
};

}  // namespace vicinal
