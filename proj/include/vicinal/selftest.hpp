#pragma once

// Built-in invariant suite behind `vicinal-flow selftest`: one deterministic
// pass over the structural identities each module guarantees. Meant as a
// field diagnostic, not a replacement for the full test suite.

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vicinal/stepper.hpp"
#include "vicinal/variational.hpp"
#include "vicinal/verification.hpp"

namespace vicinal::selftest {

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

inline SpectralField random_field(const PeriodicGrid& grid, std::mt19937_64& rng,
                                  int kmax, double amplitude) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::complex<double>> c(grid.size() / 2 + 1, {0.0, 0.0});
  for (int k = 1; k <= kmax && k < grid.size() / 2; ++k)
    c[k] = std::complex<double>(gauss(rng), gauss(rng)) / (2.0 * k);
  auto f = SpectralField::from_coeffs(grid, std::move(c));
  const double mx = f.max_abs();
  if (mx == 0.0) return f;
  std::vector<std::complex<double>> scaled = f.coeffs();
  for (auto& z : scaled) z *= amplitude / mx;
  return SpectralField::from_coeffs(grid, std::move(scaled));
}

inline double pv_kernel_hilbert(const SpectralField& f, double x, int M) {
  const double h = kTwoPi / M;
  double acc = 0.0;
  for (int l = 0; l < M; ++l) {
    const double y = -kPi + (l + 0.5) * h;
    double val = 0.0;
    for (int k = 1; k < f.size() / 2; ++k) {
      const std::complex<double> c = f.coeff(k);
      val += 2.0 * (c.real() * std::cos(k * (x - y)) - c.imag() * std::sin(k * (x - y)));
    }
    acc += val / std::tan(0.5 * y);
  }
  return acc * h / kTwoPi;
}

inline std::vector<Check> run_all() {
  std::vector<Check> checks;
  auto add = [&](const std::string& name, bool ok, double worst) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst=%.3e", worst);
    checks.push_back({name, ok, buf});
  };

  const PeriodicGrid grid(256);
  const BarrierParams a1(1.0);
  std::mt19937_64 rng(0x7e57);

  {  // Hilbert transform: isometry, involution, skew-adjointness, PV kernel.
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      auto f = random_field(grid, rng, 64, 1.0);
      auto hf = hilbert(f);
      worst = std::max(worst, std::abs(norm_l2(hf) / norm_l2(f) - 1.0));
      auto hhf = hilbert(hf);
      for (int j = 0; j < grid.size(); j += 5)
        worst = std::max(worst, std::abs(hhf.sample(j) + f.sample(j)));
      auto g = random_field(grid, rng, 64, 1.0);
      worst = std::max(worst, std::abs(inner_product(hf, g) + inner_product(f, hilbert(g))) /
                                  (1.0 + norm_l2(f) * norm_l2(g)));
    }
    add("hilbert.isometry+involution+skew", worst < 1e-12, worst);

    auto c3 = random_field(grid, rng, 3, 1.0);
    double kworst = 0.0;
    for (int j = 0; j < grid.size(); j += 17)
      kworst = std::max(kworst, std::abs(hilbert(c3).sample(j) -
                                         pv_kernel_hilbert(c3, grid.node(j), 2048)));
    add("hilbert.pv-kernel-agreement", kworst < 1e-6, kworst);
  }

  {  // Sharp Poincare inequality and its equality cases.
    double worst = -kInf;
    for (int t = 0; t < 40; ++t) {
      auto f = random_field(grid, rng, 32, 1.0);
      auto fx = derivative(f, 1);
      worst = std::max(worst, inner_product(f, f) - inner_product(fx, fx));
    }
    std::vector<std::complex<double>> c(129, {0.0, 0.0});
    c[1] = {0.3, -0.4};
    auto first = SpectralField::from_coeffs(grid, std::move(c));
    auto fx = derivative(first, 1);
    const double eq = std::abs(inner_product(fx, fx) - inner_product(first, first));
    add("poincare.sharp", worst <= 1e-10 && eq <= 1e-10, std::max(worst, eq));
  }

  {  // Monotonicity gap of B on pure modes and random fields.
    double worst = 0.0;
    for (int k : {1, 2, 3, 4}) {
      std::vector<std::complex<double>> c(129, {0.0, 0.0});
      c[k] = {0.0, -0.5};
      auto sk = SpectralField::from_coeffs(grid, std::move(c));
      worst = std::max(worst, std::abs(monotonicity_gap(sk) -
                                       kPi * std::pow(k, 3) * (k - 1.0)));
    }
    bool nonneg = true;
    for (int t = 0; t < 20; ++t) {
      auto w = random_field(grid, rng, 16, 1.0);
      nonneg = nonneg && monotonicity_gap(w) >= -1e-10;
    }
    add("pairing.monotonicity-gap", nonneg && worst < 1e-9, worst);
  }

  {  // Barrier potential: convexity moduli and root residual.
    double worst = 0.0;
    bool ok = true;
    for (double a : {0.5, 1.0, 2.0}) {
      BarrierParams p(a);
      std::uniform_real_distribution<double> xi(-a + 1e-6, 10.0);
      for (int i = 0; i < 2000; ++i) {
        const double x = xi(rng);
        ok = ok && psi_a_second(x, p) >= 1.0 && phi_a_second(x, p) >= 2.0;
      }
      const double res = std::abs(phi_a_prime(phi_prime_root(p), p));
      worst = std::max(worst, res);
      ok = ok && res <= 1e-12;
    }
    add("barrier.convexity+root", ok, worst);
  }

  {  // Energy: coefficient-space Hilbert part vs direct quadrature.
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      auto u = random_field(grid, rng, 12, 0.3);
      const double quad =
          0.5 * inner_product(hilbert(derivative(u, 1)), derivative(u, 2));
      worst = std::max(worst, std::abs(energy_total(u, a1).hilbert_part - quad));
    }
    add("energy.two-route-hilbert", worst < 1e-10, worst);
  }

  {  // VI forms differ by exactly half the H2 gap of the direction.
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      auto u = random_field(grid, rng, 6, 0.05);
      auto v = random_field(grid, rng, 6, 0.05);
      auto ud = random_field(grid, rng, 6, 0.1);
      const double plain = vi_residual(ud, u, v, a1, false).value;
      const double convex = vi_residual(ud, u, v, a1, true).value;
      std::vector<double> d(grid.size());
      for (int j = 0; j < grid.size(); ++j) d[j] = v.sample(j) - u.sample(j);
      auto dxx = derivative(SpectralField::from_samples_unchecked(grid, d), 2);
      worst = std::max(worst,
                       std::abs(convex - plain + 0.5 * inner_product(dxx, dxx)));
    }
    add("vi.half-gap-identity", worst < 1e-9, worst);
  }

  {  // A short run: dissipation, mass conservation, VI certification.
    StepConfig cfg{1e-3};
    std::vector<std::complex<double>> c(129, {0.0, 0.0});
    c[1] = {0.0, -0.05};
    auto u0 = SpectralField::from_coeffs(grid, std::move(c));
    auto traj = run_evolution(u0, a1, 0.02, cfg);
    double worst = -kInf;
    bool ok = true;
    double prev = energy_total(traj.states[0], a1).total;
    for (std::size_t m = 0; m < traj.diagnostics.size(); ++m) {
      const auto& d = traj.diagnostics[m];
      const double gap =
          d.energy.total + d.increment_norm * d.increment_norm / (2.0 * cfg.tau) - prev;
      worst = std::max(worst, gap);
      ok = ok && gap <= 1e-9 && d.min_slope > 0.0;
      prev = d.energy.total;
      ok = ok && std::abs(mean(traj.states[m + 1].samples())) <= 1e-12;
    }
    const auto& last = traj.states.back();
    std::vector<double> ds(grid.size());
    for (int j = 0; j < grid.size(); ++j)
      ds[j] = (last.sample(j) - traj.states[traj.states.size() - 2].sample(j)) / cfg.tau;
    auto udot = SpectralField::from_samples_unchecked(grid, ds);
    const double floor = -1e-8 * (1.0 + norm_l2(last));
    for (const auto& dir : vi_direction_battery(last, a1, 4, 2)) {
      ok = ok && vi_residual(udot, last, dir.v, a1, false).value >= floor &&
           vi_residual(udot, last, dir.v, a1, true).value >= floor;
    }
    add("stepper.dissipation+mass+vi", ok, worst);
  }

  {  // Truncation bounds on grazing-admissible data.
    std::vector<std::complex<double>> c(129, {0.0, 0.0});
    c[1] = {0.5, 0.0};
    auto uxx_target = SpectralField::from_coeffs(grid, std::move(c));  // cos x
    auto u = antiderivative_zero_mean(antiderivative_zero_mean(uxx_target));
    auto uxx = derivative(u, 2);
    bool ok = true;
    double worst = 0.0;
    for (double delta : {0.2, 0.05}) {
      auto [ud, st] = truncate_second_derivative(u, a1, delta);
      double l1 = 0.0;
      for (int j = 0; j < grid.size(); ++j)
        l1 += std::abs(st.uxx_delta[j] - uxx.sample(j));
      l1 *= grid.dx();
      ok = ok && l1 <= 2.0 * delta * st.measure + 1e-14;
      ok = ok && std::abs(st.zeta) <= 2.0 * delta * st.measure + 1e-14;
      ok = ok && std::abs(st.theta) <= 8.0 * kPi * delta * st.measure + 1e-14;
      double fl = kInf;
      for (double v : st.uxx_delta) fl = std::min(fl, v + a1.a);
      ok = ok && fl >= delta * (1.0 - st.measure / kTwoPi) - 1e-14;
      worst = std::max(worst, l1 - 2.0 * delta * st.measure);
    }
    add("truncation.step2-bounds", ok, worst);
  }

  {  // Height recovery: both bracket routes agree on smooth states.
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      auto f = random_field(grid, rng, 6, 1.0);
      auto fxx = derivative(f, 2);
      std::vector<std::complex<double>> c = f.coeffs();
      for (auto& z : c) z *= 0.35 / std::max(1e-12, fxx.max_abs());
      auto u = SpectralField::from_coeffs(grid, std::move(c));
      worst = std::max(worst, bracket_consistency(u, a1));
    }
    add("height.bracket-consistency", worst < 1e-8, worst);
  }

  return checks;
}

/// Prints one line per check; returns true when everything passed.
inline bool report(const std::vector<Check>& checks, std::FILE* out = stdout) {
  bool all = true;
  for (const auto& c : checks) {
    std::fprintf(out, "[%s] %-34s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                 c.detail.c_str());
    all = all && c.passed;
  }
  return all;
}

}  // namespace vicinal::selftest
