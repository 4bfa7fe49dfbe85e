#pragma once

// Certification of computed trajectories against the defining weak form
//   int int u_t phi = int int [ H(u_xx) phi_x - Phi_a'(u_xx) phi_xx ],
// the variational inequalities, the initial-data condition, and the
// per-step integrability diagnostics. u_t is discretized by the backward
// difference of the scheme itself, so the residual certifies the computed
// object rather than a smoothed one.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "vicinal/stepper.hpp"
#include "vicinal/variational.hpp"

namespace vicinal {

/// Separable space-time test function phi(t, x) = eta(t) * trig(k x), with
/// eta a smooth bump vanishing to all orders at t = 0 and t = T.
class TestFunction {
 public:
  TestFunction(double T, int space_mode, bool use_sin, int time_profile)
      : T_(T), k_(space_mode), sin_(use_sin), profile_(time_profile) {
    // Normalize max |eta| to 1. The bump exp(-1/(t(T-t))) underflows for
    // small T, so the shift is found and applied in log space.
    shift_ = -kInf;
    for (int i = 1; i < 4000; ++i) {
      const double t = T_ * i / 4000.0;
      const double pv = std::abs(poly(t / T_));
      if (pv > 0.0) shift_ = std::max(shift_, log_bump(t) + std::log(pv));
    }
  }

  double T() const { return T_; }
  int space_mode() const { return k_; }
  std::string id() const {
    return (sin_ ? "sin" : "cos") + std::to_string(k_) + "_p" + std::to_string(profile_);
  }

  double eta(double t) const {
    if (t <= 0.0 || t >= T_) return 0.0;
    return std::exp(log_bump(t) - shift_) * poly(t / T_);
  }

  double eta_dot(double t) const {
    if (t <= 0.0 || t >= T_) return 0.0;
    const double b = std::exp(log_bump(t) - shift_);
    const double ldot = (T_ - 2.0 * t) / (t * t * (T_ - t) * (T_ - t));
    return b * (ldot * poly(t / T_) + poly_dot(t / T_) / T_);
  }

  double space(double x) const { return sin_ ? std::sin(k_ * x) : std::cos(k_ * x); }
  double space_dx(double x) const {
    return k_ * (sin_ ? std::cos(k_ * x) : -std::sin(k_ * x));
  }
  double space_dxx(double x) const { return -static_cast<double>(k_) * k_ * space(x); }

  double phi(double t, double x) const { return eta(t) * space(x); }
  double phi_t(double t, double x) const { return eta_dot(t) * space(x); }
  double phi_x(double t, double x) const { return eta(t) * space_dx(x); }
  double phi_xx(double t, double x) const { return eta(t) * space_dxx(x); }

 private:
  double log_bump(double t) const { return -1.0 / (t * (T_ - t)); }
  double poly(double s) const {
    double v = 1.0;
    for (int j = 0; j < profile_; ++j) v *= 2.0 * s - 1.0;
    return v;
  }
  double poly_dot(double s) const {
    if (profile_ == 0) return 0.0;
    double v = 2.0 * profile_;
    for (int j = 0; j < profile_ - 1; ++j) v *= 2.0 * s - 1.0;
    return v;
  }

  double T_;
  int k_;
  bool sin_;
  int profile_;
  double shift_ = 0.0;
};

/// 2 * max_k * m_time test functions: sin/cos modes k <= max_k crossed with
/// m_time bump-times-polynomial profiles.
inline std::vector<TestFunction> make_test_battery(double T, int max_k, int m_time) {
  if (!(T > 0.0)) throw Error("battery requires T > 0");
  std::vector<TestFunction> battery;
  for (int k = 1; k <= max_k; ++k)
    for (int j = 0; j < m_time; ++j) {
      battery.emplace_back(T, k, true, j);
      battery.emplace_back(T, k, false, j);
    }
  return battery;
}

struct ResidualEntry {
  std::string id;
  double lhs;
  double rhs;
  double residual;  // |lhs - rhs|
};

struct ResidualReport {
  double tau = 0.0;
  int grid_size = 0;
  double T = 0.0;
  std::vector<ResidualEntry> entries;
  double max_residual = 0.0;
};

/// Weak-form residual per test function: u_t is the scheme's backward
/// difference (the time derivative of the piecewise-linear Rothe
/// interpolant), time integrals use the midpoint rule, so the flux is
/// evaluated at the interpolant's midpoint state. Pairing the flux with the
/// implicit endpoint instead would reproduce the step's optimality
/// condition identically and certify nothing about the time discretization.
inline ResidualReport weak_form_residual(const Trajectory& traj, const BarrierParams& p,
                                         const std::vector<TestFunction>& battery) {
  if (traj.states.size() < 2) throw Error("residual needs >= 2 states");
  const PeriodicGrid& grid = traj.states.front().grid();
  const int n = grid.size();
  const double tau = traj.tau;

  ResidualReport report;
  report.tau = tau;
  report.grid_size = n;
  report.T = traj.times.back();

  const std::size_t steps = traj.states.size() - 1;
  // Per-step spatial data reused across the battery.
  std::vector<std::vector<double>> hux(steps), pprime(steps), incr(steps);
  for (std::size_t m = 0; m < steps; ++m) {
    const SpectralField& u0 = traj.states[m];
    const SpectralField& u1 = traj.states[m + 1];
    std::vector<double> mid(n);
    for (int j = 0; j < n; ++j) mid[j] = 0.5 * (u0.sample(j) + u1.sample(j));
    const SpectralField uxx =
        derivative(SpectralField::from_samples_unchecked(grid, mid), 2);
    const SpectralField h = hilbert(uxx);
    hux[m].resize(n);
    pprime[m].resize(n);
    incr[m].resize(n);
    for (int j = 0; j < n; ++j) {
      hux[m][j] = h.sample(j);
      pprime[m][j] = phi_a_prime(uxx.sample(j), p);
      incr[m][j] = u1.sample(j) - u0.sample(j);
    }
  }

  for (const TestFunction& tf : battery) {
    std::vector<double> sx(n), sdx(n), sdxx(n);
    for (int j = 0; j < n; ++j) {
      sx[j] = tf.space(grid.node(j));
      sdx[j] = tf.space_dx(grid.node(j));
      sdxx[j] = tf.space_dxx(grid.node(j));
    }
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t m = 0; m < steps; ++m) {
      const double tm = 0.5 * (traj.times[m] + traj.times[m + 1]);
      const double eta = tf.eta(tm);
      double a = 0.0, b = 0.0;
      for (int j = 0; j < n; ++j) {
        a += incr[m][j] * sx[j];
        b += hux[m][j] * sdx[j] - pprime[m][j] * sdxx[j];
      }
      lhs += eta * grid.dx() * a;          // int u_t phi, one tau absorbed
      rhs += tau * eta * grid.dx() * b;
    }
    report.entries.push_back({tf.id(), lhs, rhs, std::abs(lhs - rhs)});
    report.max_residual = std::max(report.max_residual, std::abs(lhs - rhs));
  }
  return report;
}

enum class AdmissibilityVerdict {
  SufficientConditionMet,
  SufficientConditionFailed,
  Inadmissible,
};

inline const char* to_string(AdmissibilityVerdict v) {
  switch (v) {
    case AdmissibilityVerdict::SufficientConditionMet: return "SufficientConditionMet";
    case AdmissibilityVerdict::SufficientConditionFailed: return "SufficientConditionFailed";
    default: return "Inadmissible";
  }
}

struct AdmissibilityReport {
  double r_value = 0.0;   // int u0_xx Phi_a'(u0_xx) dx
  double z0_norm = 0.0;   // || [-H(u0_x) - Phi_a'(u0_xx)]_xx ||_2
  double min_slope = 0.0;
  AdmissibilityVerdict verdict = AdmissibilityVerdict::Inadmissible;
};

inline AdmissibilityReport admissibility_report(const SpectralField& u0,
                                                const BarrierParams& p) {
  AdmissibilityReport rep;
  rep.min_slope = min_slope(u0, p);
  if (!(rep.min_slope > 0.0)) {
    rep.verdict = AdmissibilityVerdict::Inadmissible;
    return rep;
  }
  const SpectralField uxx = derivative(u0, 2);
  const int n = u0.size();
  std::vector<double> z(n), integrand(n);
  const SpectralField hux = hilbert(derivative(u0, 1));
  for (int j = 0; j < n; ++j) {
    const double pj = phi_a_prime(uxx.sample(j), p);
    integrand[j] = uxx.sample(j) * pj;
    z[j] = -hux.sample(j) - pj;
  }
  double acc = 0.0;
  for (double v : integrand) acc += v;
  rep.r_value = u0.grid().dx() * acc;
  rep.z0_norm =
      norm_l2(derivative(SpectralField::from_samples_unchecked(u0.grid(), z), 2));
  rep.verdict = rep.r_value <= 1e-10 ? AdmissibilityVerdict::SufficientConditionMet
                                     : AdmissibilityVerdict::SufficientConditionFailed;
  return rep;
}

struct IntegrabilityEntry {
  double time;
  double log_l1;        // int |log(u_xx + a)| dx
  double flux_pairing;  // int u_xx Phi_a'(u_xx) dx
  double upper_bound;   // <-u_t, u> + <Hu, u>
};

/// Per-step values of the Step-1 integrability chain; the pairing is
/// bounded by <-u_t, u> + <Hu, u> up to solver tolerance.
inline std::vector<IntegrabilityEntry> log_integrability_report(const Trajectory& traj,
                                                                const BarrierParams& p) {
  std::vector<IntegrabilityEntry> out;
  const double tau = traj.tau;
  for (std::size_t m = 0; m + 1 < traj.states.size(); ++m) {
    const SpectralField& u = traj.states[m + 1];
    const int n = u.size();
    const SpectralField uxx = derivative(u, 2);
    double log_l1 = 0.0, pairing = 0.0;
    for (int j = 0; j < n; ++j) {
      const double s = uxx.sample(j) + p.a;
      if (!(s > 0.0)) throw Error("trajectory state violates the slope constraint");
      log_l1 += std::abs(std::log(s));
      pairing += uxx.sample(j) * phi_a_prime(uxx.sample(j), p);
    }
    log_l1 *= u.grid().dx();
    pairing *= u.grid().dx();

    std::vector<double> ds(n);
    for (int j = 0; j < n; ++j)
      ds[j] = (u.sample(j) - traj.states[m].sample(j)) / tau;
    const SpectralField udot = SpectralField::from_samples_unchecked(u.grid(), ds);
    const double bound = -inner_product(udot, u) + pairing_H(u, u);
    out.push_back({traj.times[m + 1], log_l1, pairing, bound});
  }
  return out;
}

struct SurfaceHeight {
  std::vector<double> x;
  std::vector<double> h;
};

/// Height profile h(x) = u_x(x) + a x; h_x = u_xx + a > 0 and
/// h(x + 2 pi) - h(x) = 2 pi a by construction.
inline SurfaceHeight surface_height(const SpectralField& u, const BarrierParams& p) {
  if (!(min_slope(u, p) > 0.0)) throw Error("surface height needs an admissible state");
  const SpectralField ux = derivative(u, 1);
  SurfaceHeight s;
  s.x = u.grid().nodes();
  s.h.resize(u.size());
  for (int j = 0; j < u.size(); ++j) s.h[j] = ux.sample(j) + p.a * s.x[j];
  return s;
}

/// Both routes to the flux bracket: pointwise (1/h_x + h_x) h_xx from the
/// height profile versus the spectral derivative of Phi_a'(u_xx). Returns
/// the maximum nodal discrepancy.
inline double bracket_consistency(const SpectralField& u, const BarrierParams& p) {
  const SpectralField uxx = derivative(u, 2);
  const SpectralField uxxx = derivative(u, 3);
  const SpectralField hub = hilbert(uxx);
  const int n = u.size();

  std::vector<double> pn(n);
  for (int j = 0; j < n; ++j) pn[j] = phi_a_prime(uxx.sample(j), p);
  const SpectralField px =
      derivative(SpectralField::from_samples_unchecked(u.grid(), pn), 1);

  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const double hx = uxx.sample(j) + p.a;  // slope of the height profile
    const double via_h = hub.sample(j) + (1.0 / hx + hx) * uxxx.sample(j);
    const double via_u = hub.sample(j) + px.sample(j);
    worst = std::max(worst, std::abs(via_h - via_u));
  }
  return worst;
}

}  // namespace vicinal
