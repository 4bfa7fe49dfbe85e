#pragma once

// Rothe time discretization: each step minimizes
//   J(v) = (1/2 tau) ||v - u_prev||_2^2 + E(v)
// over the admissible set {min(v_xx + a) > 0}, whose first-order condition
// is the variational inequality certified elsewhere. Unknowns are the
// Fourier coefficients of v (k = 1..n/2-1, conjugate-symmetric); the
// Hilbert quadratic term is diagonal there, the barrier term is evaluated
// pseudospectrally at the nodes. A damped Newton iteration with Armijo
// backtracking does the minimization; any trial with a node at or below
// the slope floor delta_min is rejected inside the line search.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "vicinal/energy.hpp"
#include "vicinal/field.hpp"

namespace vicinal {

class NonConvergence : public Error {
 public:
  NonConvergence(int iters, double grad_norm, int step = -1)
      : Error("Newton did not reach tolerance in " + std::to_string(iters) +
              " iterations; |grad| = " + std::to_string(grad_norm) +
              (step >= 0 ? " (step " + std::to_string(step) + ")" : "")),
        iterations(iters),
        gradient_norm(grad_norm),
        step_index(step) {}
  int iterations;
  double gradient_norm;
  int step_index;
};

class SafeguardTriggered : public Error {
 public:
  explicit SafeguardTriggered(int step = -1)
      : Error("line search hit the slope floor delta_min" +
              (step >= 0 ? " at step " + std::to_string(step) : std::string()) +
              "; run aborted"),
        step_index(step) {}
  int step_index;
};

class SpectralUnderresolved : public Error {
 public:
  SpectralUnderresolved()
      : Error("initial state carries > 1e-8 of its energy in the top quarter "
              "of the spectrum; refine the grid") {}
};

struct StepConfig {
  double tau;
  double newton_tol = 1e-10;
  int max_iter = 60;
  double delta_min = 1e-8;
  double armijo = 1e-4;
  double shrink = 0.5;

  void validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw Error("tau must lie in (0, 1]");
    if (!(newton_tol > 0.0)) throw Error("newton_tol must be positive");
    if (max_iter < 1) throw Error("max_iter must be >= 1");
    if (!(delta_min > 0.0)) throw Error("delta_min must be positive");
    if (!(armijo > 0.0 && armijo < 0.5)) throw Error("armijo must lie in (0, 0.5)");
    if (!(shrink > 0.0 && shrink < 1.0)) throw Error("shrink must lie in (0, 1)");
  }
};

struct StepDiagnostics {
  int newton_iters = 0;
  double grad_norm = 0.0;
  double min_slope = 0.0;
  EnergyReport energy{};
  double increment_norm = 0.0;
};

struct Trajectory {
  double tau = 0.0;
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<StepDiagnostics> diagnostics;  // one per step
  bool initial_truncated = false;
};

/// J(v); +inf unless min(v_xx + a) > 0 at the nodes.
inline double step_objective(const SpectralField& v, const SpectralField& u_prev,
                             const BarrierParams& p, double tau) {
  if (!(tau > 0.0)) throw Error("tau must be positive");
  const EnergyReport e = energy_total(v, p);
  if (std::isinf(e.total)) return kInf;
  double move = 0.0;
  for (int j = 0; j < v.size(); ++j) {
    const double d = v.sample(j) - u_prev.sample(j);
    move += d * d;
  }
  return 0.5 / tau * v.grid().dx() * move + e.total;
}

/// L2 gradient field of J at an admissible v:
///   (v - u_prev)/tau - |k|^3-multiplier(v) + [Phi_a'(v_xx)]_xx.
inline SpectralField step_gradient(const SpectralField& v, const SpectralField& u_prev,
                                   const BarrierParams& p, double tau) {
  const int n = v.size();
  const SpectralField vxx = derivative(v, 2);
  std::vector<double> pn(n);
  for (int j = 0; j < n; ++j) pn[j] = phi_a_prime(vxx.sample(j), p);
  const SpectralField pxx =
      derivative(SpectralField::from_samples_unchecked(v.grid(), pn), 2);

  std::vector<std::complex<double>> g(n / 2 + 1, {0.0, 0.0});
  for (int k = 1; k < n / 2; ++k) {
    const double k3 = static_cast<double>(k) * k * k;
    g[k] = (v.coeff(k) - u_prev.coeff(k)) / tau - k3 * v.coeff(k) + pxx.coeff(k);
  }
  return SpectralField::from_coeffs(v.grid(), std::move(g));
}

namespace detail {

/// Newton system in the real coefficient unknowns (Re c_k, Im c_k), k >= 1.
/// The Phi'' block is assembled from one DFT of the nodal weights: with
/// W_m = sum_j Phi''(v_xx(x_j)) e^{-i m x_j},
///   d2J/dRe_k dRe_l = (4pi/tau - 4pi k^3) delta_kl + 2 dx k^2 l^2 Re(W_{k-l} + W_{k+l})
/// and the analogous sin/sin and cos/sin combinations.
inline void assemble_newton_system(const SpectralField& v, const SpectralField& u_prev,
                                   const BarrierParams& p, double tau,
                                   Eigen::MatrixXd& H, Eigen::VectorXd& G) {
  const int n = v.size();
  const int K = n / 2 - 1;
  const double dx = v.grid().dx();

  const SpectralField vxx = derivative(v, 2);
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) w[j] = phi_a_second(vxx.sample(j), p);
  std::vector<std::complex<double>> wc;
  detail::dft_forward(w, wc);
  auto W = [&](int m) -> std::complex<double> {
    m = ((m % n) + n) % n;
    if (m <= n / 2) return static_cast<double>(n) * wc[m];
    return static_cast<double>(n) * std::conj(wc[n - m]);
  };

  const SpectralField g = step_gradient(v, u_prev, p, tau);
  G.resize(2 * K);
  for (int k = 1; k <= K; ++k) {
    G(2 * (k - 1)) = 4.0 * kPi * g.coeff(k).real();
    G(2 * (k - 1) + 1) = 4.0 * kPi * g.coeff(k).imag();
  }

  H.setZero(2 * K, 2 * K);
  for (int k = 1; k <= K; ++k) {
    const double k3 = static_cast<double>(k) * k * k;
    const double diag = 4.0 * kPi * (1.0 / tau - k3);
    H(2 * (k - 1), 2 * (k - 1)) += diag;
    H(2 * (k - 1) + 1, 2 * (k - 1) + 1) += diag;
    for (int l = 1; l <= K; ++l) {
      const double f = 2.0 * dx * (static_cast<double>(k) * k) * (static_cast<double>(l) * l);
      const std::complex<double> wm = W(k - l), wp = W(k + l);
      // Direction fields: dRe_k <-> 2 cos kx, dIm_k <-> -2 sin kx.
      H(2 * (k - 1), 2 * (l - 1)) += f * (wm.real() + wp.real());
      H(2 * (k - 1) + 1, 2 * (l - 1) + 1) += f * (wm.real() - wp.real());
      H(2 * (k - 1), 2 * (l - 1) + 1) += f * (wp.imag() - wm.imag());
      H(2 * (k - 1) + 1, 2 * (l - 1)) += f * (wp.imag() + wm.imag());
    }
  }
}

}  // namespace detail

/// One implicit minimizing-movement step from an admissible u_prev.
inline std::pair<SpectralField, StepDiagnostics> implicit_step(
    const SpectralField& u_prev, const BarrierParams& p, const StepConfig& cfg) {
  cfg.validate();
  if (!(min_slope(u_prev, p) > 0.0))
    throw Error("implicit_step requires an admissible previous state");

  const int n = u_prev.size();
  const int K = n / 2 - 1;
  SpectralField v = u_prev;
  double jv = step_objective(v, u_prev, p, cfg.tau);

  Eigen::MatrixXd H;
  Eigen::VectorXd G;
  StepDiagnostics diag{};
  bool converged = false;
  double gnorm = kInf;

  for (int iter = 0; iter <= cfg.max_iter; ++iter) {
    gnorm = norm_l2(step_gradient(v, u_prev, p, cfg.tau));
    if (gnorm <= cfg.newton_tol) {
      diag.newton_iters = iter;
      converged = true;
      break;
    }
    if (iter == cfg.max_iter) break;

    detail::assemble_newton_system(v, u_prev, p, cfg.tau, H, G);
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success)
      throw Error("Newton Hessian not positive definite; convexity violated");
    const Eigen::VectorXd d = llt.solve(-G);
    const double slope = G.dot(d);

    std::vector<std::complex<double>> dc(n / 2 + 1, {0.0, 0.0});
    for (int k = 1; k <= K; ++k)
      dc[k] = std::complex<double>(d(2 * (k - 1)), d(2 * (k - 1) + 1));
    const SpectralField dir = SpectralField::from_coeffs(v.grid(), std::move(dc));

    // Armijo test with a roundoff floor: near the minimum the predicted
    // decrease sinks below the evaluation noise of J, where the plain test
    // would reject every step and stall above newton_tol.
    const double noise = 64.0 * 2.22e-16 * (1.0 + std::abs(jv));
    double s = 1.0;
    bool accepted = false;
    while (s >= 1e-14) {
      std::vector<std::complex<double>> tc(n / 2 + 1, {0.0, 0.0});
      for (int k = 1; k <= K; ++k) tc[k] = v.coeff(k) + s * dir.coeff(k);
      SpectralField trial = SpectralField::from_coeffs(v.grid(), std::move(tc));
      if (min_slope(trial, p) > cfg.delta_min) {
        const double jt = step_objective(trial, u_prev, p, cfg.tau);
        if (jt <= jv + cfg.armijo * s * slope + noise) {
          v = std::move(trial);
          jv = jt;
          accepted = true;
          break;
        }
      }
      s *= cfg.shrink;
    }
    if (!accepted) throw SafeguardTriggered();
  }
  if (!converged) throw NonConvergence(cfg.max_iter, gnorm);

  diag.grad_norm = gnorm;
  diag.min_slope = min_slope(v, p);
  diag.energy = energy_total(v, p);
  std::vector<double> inc(n);
  for (int j = 0; j < n; ++j) inc[j] = v.sample(j) - u_prev.sample(j);
  double s2 = 0.0;
  for (double d2 : inc) s2 += d2 * d2;
  diag.increment_norm = std::sqrt(v.grid().dx() * s2);
  return {v, diag};
}

struct TruncationStats {
  double measure = 0.0;  // |E^delta|: dx times the number of modified nodes
  double zeta = 0.0;
  double theta = 0.0;
  std::vector<double> uxx_delta;  // nodal truncated second derivative
  std::vector<double> ux_delta;   // nodal reconstructed first derivative
};

/// The two-step truncation: clip u_xx + a below delta at the nodes, restore
/// the zero average, then rebuild u_x and u by running integrals of the
/// correction with mean-zero constants zeta, theta. Inactive truncation
/// returns u unchanged.
inline std::pair<SpectralField, TruncationStats> truncate_second_derivative(
    const SpectralField& u, const BarrierParams& p, double delta) {
  if (!(delta > 0.0 && delta < p.a)) throw Error("delta must lie in (0, a)");
  const int n = u.size();
  const double dx = u.grid().dx();
  const SpectralField uxx = derivative(u, 2);
  const SpectralField ux = derivative(u, 1);

  TruncationStats st;
  std::vector<double> hat(n);
  int modified = 0;
  for (int j = 0; j < n; ++j) {
    const double s = uxx.sample(j);
    if (s + p.a < delta) {
      hat[j] = delta - p.a;
      ++modified;
    } else {
      hat[j] = s;
    }
  }
  st.measure = modified * dx;
  if (modified == 0) {
    st.uxx_delta = uxx.samples();
    st.ux_delta = ux.samples();
    return {u, st};
  }

  const double m = mean(hat);
  st.uxx_delta.resize(n);
  std::vector<double> diff(n);
  for (int j = 0; j < n; ++j) {
    st.uxx_delta[j] = hat[j] - m;
    diff[j] = st.uxx_delta[j] - uxx.sample(j);
  }

  // u_x^delta = u_x + running(diff) - zeta, zeta restoring the zero mean.
  std::vector<double> run(n, 0.0);
  for (int j = 1; j < n; ++j) run[j] = run[j - 1] + dx * diff[j - 1];
  st.zeta = mean(run);
  st.ux_delta.resize(n);
  std::vector<double> diff1(n);
  for (int j = 0; j < n; ++j) {
    diff1[j] = run[j] - st.zeta;
    st.ux_delta[j] = ux.sample(j) + diff1[j];
  }

  // u^delta = u + running(u_x^delta - u_x) - theta.
  std::vector<double> run2(n, 0.0);
  for (int j = 1; j < n; ++j) run2[j] = run2[j - 1] + dx * diff1[j - 1];
  st.theta = mean(run2);
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) out[j] = u.sample(j) + run2[j] - st.theta;
  return {SpectralField::from_samples_unchecked(u.grid(), out), st};
}

/// Fixed-step evolution from an admissible initial state.
inline Trajectory run_evolution(const SpectralField& u0, const BarrierParams& p,
                                double t_final, const StepConfig& cfg) {
  cfg.validate();
  if (!(t_final > 0.0)) throw Error("t_final must be positive");
  if (!(min_slope(u0, p) > 0.0)) throw Error("initial state is not admissible");

  // Resolution gate: top quarter of the spectrum must be negligible.
  double total = 0.0, top = 0.0;
  for (int k = 1; k <= u0.size() / 2; ++k) {
    const double e = std::norm(u0.coeff(k));
    total += e;
    if (k > 3 * u0.size() / 8) top += e;
  }
  if (top > 1e-8 * total) throw SpectralUnderresolved();

  Trajectory traj;
  traj.tau = cfg.tau;
  SpectralField state = u0;
  if (min_slope(state, p) < cfg.delta_min) {
    state = truncate_second_derivative(state, p, 10.0 * cfg.delta_min).first;
    traj.initial_truncated = true;
  }
  traj.times.push_back(0.0);
  traj.states.push_back(state);

  const int steps = static_cast<int>(std::ceil(t_final / cfg.tau - 1e-9));
  for (int nstep = 1; nstep <= steps; ++nstep) {
    try {
      auto [next, diag] = implicit_step(state, p, cfg);
      state = std::move(next);
      traj.times.push_back(nstep * cfg.tau);
      traj.states.push_back(state);
      traj.diagnostics.push_back(diag);
    } catch (const NonConvergence& e) {
      throw NonConvergence(e.iterations, e.gradient_norm, nstep);
    } catch (const SafeguardTriggered&) {
      throw SafeguardTriggered(nstep);
    }
  }
  return traj;
}

/// max_n ||u^{n+1} - u^n||_2 / tau, the discrete L^infinity-in-time bound on u_t.
inline double lipschitz_ratio(const Trajectory& traj) {
  if (traj.states.size() < 2) throw Error("lipschitz_ratio needs >= 2 states");
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < traj.states.size(); ++i) {
    double s2 = 0.0;
    for (int j = 0; j < traj.states[i].size(); ++j) {
      const double d = traj.states[i + 1].sample(j) - traj.states[i].sample(j);
      s2 += d * d;
    }
    worst = std::max(worst, std::sqrt(traj.states[i].grid().dx() * s2) / traj.tau);
  }
  return worst;
}

}  // namespace vicinal
