#pragma once

// Orchestration behind the CLI subcommands. Exit codes: 0 success,
// 2 configuration, 3 solver non-convergence, 4 certification failure,
// 5 I/O. Sweeps run independent configs concurrently, one output
// directory per run, parallelism capped by VICINAL_FLOW_THREADS.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "vicinal/config.hpp"
#include "vicinal/io.hpp"
#include "vicinal/selftest.hpp"
#include "vicinal/stepper.hpp"
#include "vicinal/verification.hpp"

namespace vicinal {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitCertification = 4;
inline constexpr int kExitIo = 5;

inline int cmd_run(const RunConfig& cfg, std::FILE* log = stdout) {
  namespace fs = std::filesystem;
  try {
    cfg.validate();
    const PeriodicGrid grid(cfg.n);
    const BarrierParams params(cfg.a);
    const SpectralField u0 = cfg.build_initial(grid);
    if (!(min_slope(u0, params) > 0.0)) {
      std::fprintf(stderr, "error: initial state violates min(u_xx + a) > 0\n");
      return kExitConfig;
    }

    const Trajectory traj = run_evolution(u0, params, cfg.t_final, cfg.step_config());

    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    int written = 0;
    for (std::size_t m = 0; m < traj.states.size(); ++m) {
      const bool last = m + 1 == traj.states.size();
      if (m % cfg.snapshot_every == 0 || last) {
        write_snapshot(dir / snapshot_filename(static_cast<int>(m)), traj.times[m],
                       traj.states[m], params);
        ++written;
      }
    }
    write_energy_log(dir / "energy.csv", traj, params);
    std::fprintf(log, "run: %zu steps, %d snapshots -> %s\n",
                 traj.states.size() - 1, written, cfg.output_dir.c_str());
    return kExitOk;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const NonConvergence& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  } catch (const SafeguardTriggered& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  } catch (const SpectralUnderresolved& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}

namespace detail {

struct Certification {
  bool passed = true;
  void require(bool ok, const std::string& what, std::FILE* log) {
    std::fprintf(log, "[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
    passed = passed && ok;
  }
};

}  // namespace detail

/// Re-certifies a finished run from its snapshot files and energy log.
inline int cmd_verify(const RunConfig& cfg, std::FILE* log = stdout) {
  namespace fs = std::filesystem;
  try {
    cfg.validate();
    const fs::path dir(cfg.output_dir);
    if (!fs::exists(dir)) {
      std::fprintf(stderr, "error: output directory %s not found\n",
                   cfg.output_dir.c_str());
      return kExitIo;
    }
    const PeriodicGrid grid(cfg.n);
    const BarrierParams params(cfg.a);

    std::vector<int> steps;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("snapshot_", 0) == 0 && name.size() == 19)
        steps.push_back(std::atoi(name.substr(9, 6).c_str()));
    }
    if (steps.size() < 2) {
      std::fprintf(stderr, "error: need at least two snapshots in %s\n",
                   cfg.output_dir.c_str());
      return kExitIo;
    }
    std::sort(steps.begin(), steps.end());

    detail::Certification cert;
    Trajectory traj;

    // 1. Loadable snapshots with intact invariants: zero mean, admissible
    //    slope, height column consistent with u_x + a x.
    bool invariants = true;
    std::string why;
    for (int s : steps) {
      const Snapshot snap = read_snapshot(dir / snapshot_filename(s));
      if (static_cast<int>(snap.u.size()) != cfg.n) {
        invariants = false;
        why = "grid size mismatch";
        break;
      }
      double mx = 1.0;
      for (double v : snap.u) mx = std::max(mx, std::abs(v));
      if (std::abs(mean(snap.u)) > 1e-12 * mx) {
        invariants = false;
        why = "zero-mean invariant violated at step " + std::to_string(s);
        break;
      }
      SpectralField state = SpectralField::from_samples_unchecked(grid, snap.u);
      // Reload must reproduce the written samples to full precision.
      double rerr = 0.0;
      for (int j = 0; j < cfg.n; ++j)
        rerr = std::max(rerr, std::abs(state.sample(j) - snap.u[j]));
      if (rerr > 1e-13 * mx) {
        invariants = false;
        why = "snapshot not spectrally representable at step " + std::to_string(s);
        break;
      }
      if (!(min_slope(state, params) > 0.0)) {
        invariants = false;
        why = "slope constraint violated at step " + std::to_string(s);
        break;
      }
      const SpectralField ux = derivative(state, 1);
      double herr = 0.0;
      for (int j = 0; j < cfg.n; ++j)
        herr = std::max(herr, std::abs(snap.h[j] - ux.sample(j) -
                                       params.a * grid.node(j)));
      if (herr > 1e-10) {
        invariants = false;
        why = "height column inconsistent at step " + std::to_string(s);
        break;
      }
      traj.times.push_back(snap.t);
      traj.states.push_back(std::move(state));
    }
    cert.require(invariants, invariants ? "snapshot invariants" : "snapshot invariants: " + why, log);
    if (!invariants) return kExitCertification;
    traj.tau = traj.times[1] - traj.times[0];

    // 2. Energy log agrees with recomputation from the states.
    bool elog_ok = true;
    std::vector<EnergyLogRow> rows;
    try {
      rows = read_energy_log(dir / "energy.csv");
    } catch (const IoError&) {
      elog_ok = false;
    }
    if (elog_ok) {
      for (std::size_t i = 0; i < steps.size(); ++i) {
        const int s = steps[i];
        if (s >= static_cast<int>(rows.size())) {
          elog_ok = false;
          break;
        }
        const EnergyReport e = energy_total(traj.states[i], params);
        elog_ok = elog_ok && std::abs(rows[s].total - e.total) <= 1e-8 &&
                  std::abs(rows[s].t - traj.times[i]) <= 1e-12;
      }
    }
    cert.require(elog_ok, "energy log consistency", log);

    // 3. Energy non-increasing along snapshots.
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < traj.states.size(); ++i)
      monotone = monotone && energy_total(traj.states[i + 1], params).total <=
                                 energy_total(traj.states[i], params).total + 1e-9;
    cert.require(monotone, "energy dissipation", log);

    // 4. Admissibility report for the initial state.
    const AdmissibilityReport arep = admissibility_report(traj.states.front(), params);
    write_admissibility_report(dir / "admissibility.txt", arep);
    cert.require(arep.verdict != AdmissibilityVerdict::Inadmissible,
                 std::string("initial admissibility (") + to_string(arep.verdict) + ")",
                 log);

    // 5. Weak-form residual of the snapshot trajectory.
    const ResidualReport rrep = weak_form_residual(
        traj, params,
        make_test_battery(traj.times.back(), cfg.battery_max_k, cfg.battery_m_time));
    write_residual_report(dir / "residuals.csv", rrep);
    cert.require(rrep.max_residual <= 1e-4,
                 "weak-form residual <= 1e-4 (max " +
                     std::to_string(rrep.max_residual) + ")",
                 log);

    // 6. Variational-inequality certification. The VI belongs to the
    //    scheme's own steps, so it is checked when snapshots are per-step.
    if (cfg.snapshot_every == 1) {
      bool vi_ok = true;
      const std::size_t stride = std::max<std::size_t>(1, (traj.states.size() - 1) / 10);
      for (std::size_t i = 1; i < traj.states.size(); i += stride) {
        const SpectralField& u = traj.states[i];
        std::vector<double> ds(cfg.n);
        for (int j = 0; j < cfg.n; ++j)
          ds[j] = (u.sample(j) - traj.states[i - 1].sample(j)) / traj.tau;
        const SpectralField udot = SpectralField::from_samples_unchecked(grid, ds);
        const double floor = -1e-8 * (1.0 + norm_l2(u));
        for (const auto& dirn : vi_direction_battery(u, params)) {
          vi_ok = vi_ok && vi_residual(udot, u, dirn.v, params, false).value >= floor &&
                  vi_residual(udot, u, dirn.v, params, true).value >= floor;
        }
      }
      cert.require(vi_ok, "variational inequality battery", log);
    } else {
      std::fprintf(log, "[SKIP] variational inequality battery (snapshot_every > 1)\n");
    }

    return cert.passed ? kExitOk : kExitCertification;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCertification;
  }
}

/// Runs one config per override set concurrently; returns the worst exit code.
inline int cmd_sweep(const RunConfig& base, const std::vector<std::string>& overrides,
                     std::FILE* log = stdout) {
  namespace fs = std::filesystem;
  if (overrides.empty()) {
    std::fprintf(stderr, "error: sweep needs at least one --set override\n");
    return kExitConfig;
  }
  std::vector<RunConfig> configs;
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    RunConfig cfg = base;
    std::istringstream in(overrides[i]);
    std::string item;
    try {
      while (std::getline(in, item, ',')) {
        item = detail::trim(item);
        if (!item.empty()) apply_override(cfg, item);
      }
      char sub[32];
      std::snprintf(sub, sizeof sub, "run_%03zu", i);
      cfg.output_dir = (fs::path(base.output_dir) / sub).string();
      cfg.validate();
    } catch (const Error& e) {
      std::fprintf(stderr, "error in override %zu: %s\n", i, e.what());
      return kExitConfig;
    }
    configs.push_back(std::move(cfg));
  }

  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  if (const char* cap = std::getenv("VICINAL_FLOW_THREADS")) {
    const long v = std::strtol(cap, nullptr, 10);
    if (v >= 1) workers = std::min<unsigned>(workers, static_cast<unsigned>(v));
  }
  workers = std::min<unsigned>(workers, configs.size());

  std::atomic<std::size_t> next(0);
  std::vector<int> codes(configs.size(), 0);
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < configs.size(); i = next.fetch_add(1))
      codes[i] = cmd_run(configs[i], stderr);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int worst = kExitOk;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    std::fprintf(log, "sweep %03zu: exit %d (%s)\n", i, codes[i],
                 configs[i].output_dir.c_str());
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

inline int cmd_selftest(std::FILE* log = stdout) {
  return selftest::report(selftest::run_all(), log) ? kExitOk : kExitCertification;
}

}  // namespace vicinal
