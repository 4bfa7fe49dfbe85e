#pragma once

// Barrier potential Phi_a(xi) = Phi(xi + a) with Phi(xi) = xi log xi + xi^3/6
// on (0, inf), 0 at 0, +inf below, together with the integral functionals it
// induces. +inf is an ordinary extended-real value here, not an exception:
// the minimizing-movement line search treats it as "reject step".

#include <cmath>
#include <limits>

#include "vicinal/field.hpp"

namespace vicinal {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

struct BarrierParams {
  double a;
  explicit BarrierParams(double a_) : a(a_) {
    if (!(a > 1e-8)) throw Error("barrier constant a must exceed 1e-8");
  }
};

/// Phi(xi): +inf for xi < 0, 0 at 0, xi log xi + xi^3/6 for xi > 0.
inline double phi(double xi) {
  if (xi < 0.0) return kInf;
  if (xi == 0.0) return 0.0;
  return xi * std::log(xi) + xi * xi * xi / 6.0;
}

inline double phi_a(double xi, const BarrierParams& p) { return phi(xi + p.a); }

inline double phi_a_prime(double xi, const BarrierParams& p) {
  const double s = xi + p.a;
  if (!(s > 0.0)) throw DomainError("phi_a' requires xi > -a");
  return std::log(s) + 0.5 * s * s + 1.0;
}

inline double phi_a_second(double xi, const BarrierParams& p) {
  const double s = xi + p.a;
  if (!(s > 0.0)) throw DomainError("phi_a'' requires xi > -a");
  return 1.0 / s + s;
}

/// Psi_a(xi) = Phi_a(xi) - xi^2/2, the convexified potential.
inline double psi_a(double xi, const BarrierParams& p) {
  const double v = phi_a(xi, p);
  return std::isinf(v) ? v : v - 0.5 * xi * xi;
}

/// Psi_a''(xi) = xi + a + 1/(xi + a) - 1 >= 1 on (-a, inf).
inline double psi_a_second(double xi, const BarrierParams& p) {
  return phi_a_second(xi, p) - 1.0;
}

inline double min_slope(const SpectralField& u, const BarrierParams& p) {
  const SpectralField uxx = derivative(u, 2);
  double m = kInf;
  for (int j = 0; j < u.size(); ++j) m = std::min(m, uxx.sample(j) + p.a);
  return m;
}

/// F_a(u) = int Phi_a(u_xx) dx by nodal quadrature; +inf once the slope
/// constraint fails at any node.
inline double functional_F_a(const SpectralField& u, const BarrierParams& p) {
  const SpectralField uxx = derivative(u, 2);
  double acc = 0.0;
  for (int j = 0; j < u.size(); ++j) {
    const double s = uxx.sample(j) + p.a;
    if (!(s > 0.0)) return kInf;
    acc += phi(s);
  }
  return u.grid().dx() * acc;
}

struct EnergyReport {
  double total;
  double hilbert_part;    // (1/2) int H(u_x) u_xx dx = -pi sum |k|^3 |c_k|^2
  double potential_part;  // F_a(u)
  double min_slope;       // min over nodes of u_xx + a
};

/// E(u) = (1/2) int H(u_x) u_xx dx + F_a(u); its L2 gradient is
/// [H(u_x) + Phi_a'(u_xx)]_xx, the right-hand side of the evolution.
inline EnergyReport energy_total(const SpectralField& u, const BarrierParams& p) {
  EnergyReport r{};
  double h = 0.0;
  for (int k = 1; k <= u.size() / 2; ++k)
    h += static_cast<double>(k) * k * k * std::norm(u.coeff(k));
  r.hilbert_part = -2.0 * kPi * h;  // both +k and -k modes
  r.potential_part = functional_F_a(u, p);
  r.min_slope = min_slope(u, p);
  r.total = r.hilbert_part + r.potential_part;
  return r;
}

/// The unique root of Phi_a' on (-a, inf); bisection then a Newton polish.
inline double phi_prime_root(const BarrierParams& p) {
  // Bracket: Phi_a' -> -inf at (-a)+ and is strictly increasing.
  double hi = std::max(1.0, 2.0 * p.a);
  while (phi_a_prime(hi, p) < 0.0) hi *= 2.0;
  double step = p.a / 2;
  while (phi_a_prime(-p.a + step, p) > 0.0) step /= 2;
  double lo = -p.a + step;
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi_a_prime(mid, p) < 0.0 ? lo : hi) = mid;
  }
  double b = 0.5 * (lo + hi);
  b -= phi_a_prime(b, p) / phi_a_second(b, p);
  return b;
}

}  // namespace vicinal
