#pragma once

// Bit-stable CSV output: snapshots carry `# t=<time>` then x,u,u_x,u_xx,h
// rows, the energy log one row per state. Values are written with 17
// significant decimal digits so a reload reproduces every double exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vicinal/energy.hpp"
#include "vicinal/field.hpp"
#include "vicinal/stepper.hpp"
#include "vicinal/verification.hpp"

namespace vicinal {

class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {
inline std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}
}  // namespace detail

inline std::string snapshot_filename(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06d.csv", step);
  return buf;
}

inline void write_snapshot(const std::filesystem::path& path, double t,
                           const SpectralField& u, const BarrierParams& p) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const SpectralField ux = derivative(u, 1);
  const SpectralField uxx = derivative(u, 2);
  out << "# t=" << detail::full_precision(t) << "\n";
  out << "x,u,u_x,u_xx,h\n";
  for (int j = 0; j < u.size(); ++j) {
    const double x = u.grid().node(j);
    out << detail::full_precision(x) << ',' << detail::full_precision(u.sample(j))
        << ',' << detail::full_precision(ux.sample(j)) << ','
        << detail::full_precision(uxx.sample(j)) << ','
        << detail::full_precision(ux.sample(j) + p.a * x) << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

struct Snapshot {
  double t = 0.0;
  std::vector<double> x, u, ux, uxx, h;
};

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Snapshot snap;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# t=", 0) != 0)
    throw IoError(path.string() + ": missing '# t=' header");
  snap.t = std::strtod(line.c_str() + 4, nullptr);
  if (!std::getline(in, line) || line != "x,u,u_x,u_xx,h")
    throw IoError(path.string() + ": unexpected column header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v[5];
    const char* s = line.c_str();
    char* end = nullptr;
    for (int c = 0; c < 5; ++c) {
      v[c] = std::strtod(s, &end);
      if (end == s) throw IoError(path.string() + ": malformed row '" + line + "'");
      s = (*end == ',') ? end + 1 : end;
    }
    snap.x.push_back(v[0]);
    snap.u.push_back(v[1]);
    snap.ux.push_back(v[2]);
    snap.uxx.push_back(v[3]);
    snap.h.push_back(v[4]);
  }
  if (snap.u.empty()) throw IoError(path.string() + ": no data rows");
  return snap;
}

inline void write_energy_log(const std::filesystem::path& path, const Trajectory& traj,
                             const BarrierParams& p) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "t,E_total,E_hilbert,F_a,min_slope,lipschitz_ratio,newton_iters\n";
  const EnergyReport e0 = energy_total(traj.states.front(), p);
  out << detail::full_precision(traj.times.front()) << ','
      << detail::full_precision(e0.total) << ','
      << detail::full_precision(e0.hilbert_part) << ','
      << detail::full_precision(e0.potential_part) << ','
      << detail::full_precision(e0.min_slope) << ','
      << detail::full_precision(0.0) << ",0\n";
  for (std::size_t m = 0; m < traj.diagnostics.size(); ++m) {
    const StepDiagnostics& d = traj.diagnostics[m];
    out << detail::full_precision(traj.times[m + 1]) << ','
        << detail::full_precision(d.energy.total) << ','
        << detail::full_precision(d.energy.hilbert_part) << ','
        << detail::full_precision(d.energy.potential_part) << ','
        << detail::full_precision(d.min_slope) << ','
        << detail::full_precision(d.increment_norm / traj.tau) << ','
        << d.newton_iters << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

struct EnergyLogRow {
  double t, total, hilbert, potential, min_slope, lipschitz;
  int iters;
};

inline std::vector<EnergyLogRow> read_energy_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line != "t,E_total,E_hilbert,F_a,min_slope,lipschitz_ratio,newton_iters")
    throw IoError(path.string() + ": unexpected energy log header");
  std::vector<EnergyLogRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EnergyLogRow r{};
    double vals[6];
    const char* s = line.c_str();
    char* end = nullptr;
    for (int c = 0; c < 6; ++c) {
      vals[c] = std::strtod(s, &end);
      if (end == s) throw IoError(path.string() + ": malformed row '" + line + "'");
      s = (*end == ',') ? end + 1 : end;
    }
    r.t = vals[0];
    r.total = vals[1];
    r.hilbert = vals[2];
    r.potential = vals[3];
    r.min_slope = vals[4];
    r.lipschitz = vals[5];
    r.iters = static_cast<int>(std::strtol(s, &end, 10));
    rows.push_back(r);
  }
  return rows;
}

inline void write_residual_report(const std::filesystem::path& path,
                                  const ResidualReport& rep) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "# tau=" << detail::full_precision(rep.tau) << " n=" << rep.grid_size
      << " T=" << detail::full_precision(rep.T) << "\n";
  out << "phi,lhs,rhs,residual\n";
  for (const auto& e : rep.entries)
    out << e.id << ',' << detail::full_precision(e.lhs) << ','
        << detail::full_precision(e.rhs) << ',' << detail::full_precision(e.residual)
        << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_admissibility_report(const std::filesystem::path& path,
                                       const AdmissibilityReport& rep) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "r_value=" << detail::full_precision(rep.r_value) << "\n"
      << "z0_norm=" << detail::full_precision(rep.z0_norm) << "\n"
      << "min_slope=" << detail::full_precision(rep.min_slope) << "\n"
      << "verdict=" << to_string(rep.verdict) << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace vicinal
