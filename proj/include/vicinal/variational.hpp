#pragma once

// Duality pairings <Hu, v> = int H(u_xx) v_x dx and
// <Bu, v> = int [u_xx v_xx - H(u_xx) v_x] dx, plus the residuals of the two
// variational inequalities that characterize a step of the flow:
//   plain form:       <u_t, v-u> - <Hu, v-u> + int [Phi_a(v_xx)-Phi_a(u_xx)]
//   convexified form: <u_t, v-u> + <Bu, v-u> + psi(v) - psi(u)
// The two differ by exactly (1/2) || (v-u)_xx ||_2^2.

#include <random>
#include <string>
#include <vector>

#include "vicinal/energy.hpp"
#include "vicinal/field.hpp"

namespace vicinal {

inline double pairing_H(const SpectralField& u, const SpectralField& v) {
  if (!(u.grid() == v.grid())) throw GridMismatch();
  return inner_product(hilbert(derivative(u, 2)), derivative(v, 1));
}

inline double pairing_B(const SpectralField& u, const SpectralField& v) {
  if (!(u.grid() == v.grid())) throw GridMismatch();
  return inner_product(derivative(u, 2), derivative(v, 2)) - pairing_H(u, v);
}

/// <Bw, w> = ||w_xx||^2 - <Hw, w> >= 0, zero exactly on span{sin x, cos x}.
inline double monotonicity_gap(const SpectralField& w) { return pairing_B(w, w); }

/// psi(u) = int Psi_a(u_xx) dx = F_a(u) - ||u_xx||^2 / 2.
inline double functional_psi(const SpectralField& u, const BarrierParams& p) {
  const double f = functional_F_a(u, p);
  if (std::isinf(f)) return f;
  const SpectralField uxx = derivative(u, 2);
  return f - 0.5 * inner_product(uxx, uxx);
}

struct ViResidual {
  double value;
  std::string direction_id;
  bool convexified;
};

/// Left-hand side of the selected variational inequality at state u with
/// discrete time derivative u_dot, tested against direction v. +inf when v
/// is inadmissible (the inequality is vacuous there).
inline ViResidual vi_residual(const SpectralField& u_dot, const SpectralField& u,
                              const SpectralField& v, const BarrierParams& p,
                              bool convexified) {
  if (!(u.grid() == v.grid()) || !(u.grid() == u_dot.grid())) throw GridMismatch();
  const double fa_u = functional_F_a(u, p);
  if (std::isinf(fa_u)) throw Error("vi_residual requires F_a(u) finite");

  std::vector<double> d(u.size());
  for (int j = 0; j < u.size(); ++j) d[j] = v.sample(j) - u.sample(j);
  const SpectralField diff = SpectralField::from_samples_unchecked(u.grid(), d);

  const double transport = inner_product(u_dot, diff);
  if (convexified) {
    const double psi_v = functional_psi(v, p);
    if (std::isinf(psi_v)) return {kInf, "", true};
    return {transport + pairing_B(u, diff) + psi_v - functional_psi(u, p), "", true};
  }
  const double fa_v = functional_F_a(v, p);
  if (std::isinf(fa_v)) return {kInf, "", false};
  return {transport - pairing_H(u, diff) + fa_v - fa_u, "", false};
}

struct ViDirection {
  SpectralField v;
  std::string id;
};

/// Admissible test directions v = u + eps*e for e in {sin kx, cos kx: k <= 8}
/// and a few random band-limited fields, eps halved until min(v_xx + a) > 0.
inline std::vector<ViDirection> vi_direction_battery(const SpectralField& u,
                                                     const BarrierParams& p,
                                                     int max_k = 8,
                                                     int n_random = 8,
                                                     std::uint64_t seed = 0x5eedbeef) {
  std::vector<std::pair<SpectralField, std::string>> perturbations;
  const PeriodicGrid& grid = u.grid();
  for (int k = 1; k <= max_k; ++k) {
    std::vector<std::complex<double>> cs(grid.size() / 2 + 1, {0.0, 0.0});
    cs[k] = std::complex<double>(0.0, -0.5);  // sin kx
    perturbations.emplace_back(SpectralField::from_coeffs(grid, cs),
                               "sin" + std::to_string(k));
    std::vector<std::complex<double>> cc(grid.size() / 2 + 1, {0.0, 0.0});
    cc[k] = std::complex<double>(0.5, 0.0);  // cos kx
    perturbations.emplace_back(SpectralField::from_coeffs(grid, cc),
                               "cos" + std::to_string(k));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < n_random; ++r) {
    std::vector<std::complex<double>> c(grid.size() / 2 + 1, {0.0, 0.0});
    for (int k = 1; k <= std::min(12, grid.size() / 2 - 1); ++k)
      c[k] = std::complex<double>(gauss(rng), gauss(rng)) / (2.0 * k * k);
    perturbations.emplace_back(SpectralField::from_coeffs(grid, std::move(c)),
                               "rand" + std::to_string(r));
  }

  std::vector<ViDirection> battery;
  for (const auto& [e, id] : perturbations) {
    for (double sign : {+1.0, -1.0}) {
      double eps = 1.0;
      SpectralField v(grid);
      for (int halvings = 0; halvings < 60; ++halvings) {
        std::vector<double> s(grid.size());
        for (int j = 0; j < grid.size(); ++j)
          s[j] = u.sample(j) + sign * eps * e.sample(j);
        v = SpectralField::from_samples_unchecked(grid, s);
        if (min_slope(v, p) > 0.0) break;
        eps *= 0.5;
      }
      battery.push_back({v, (sign > 0 ? "+" : "-") + id});
    }
  }
  return battery;
}

}  // namespace vicinal
