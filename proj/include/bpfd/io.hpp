#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "bpfd/field.hpp"
#include "bpfd/stepping.hpp"

namespace bpfd {

/// Shortest round-trip decimal formatting, fixed across platforms so that
/// identical runs produce byte-identical files.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Snapshot: plain CSV, one row per y grid line (ascending y), values in
/// ascending x; a sidecar .meta file carries the grid shape and time.
inline void write_snapshot_csv(const Field2D& f, const std::string& path,
                               double t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (int j = 0; j < f.ny_tot(); ++j) {
    for (int i = 0; i < f.nx_tot(); ++i) {
      if (i) out << ',';
      out << format_double(f(i, j));
    }
    out << '\n';
  }
  std::ofstream meta(path + ".meta");
  if (!meta) throw std::runtime_error("cannot open " + path + ".meta");
  meta << "nx=" << f.nx_tot() << "\nny=" << f.ny_tot()
       << "\nt=" << format_double(t)
       << "\nbc=" << (f.grid.periodic() ? "periodic" : "dirichlet") << "\n";
}

class TelemetryWriter {
 public:
  TelemetryWriter() = default;
  explicit TelemetryWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path);
    out_ << "step,t,min,max,iterations,dmp_violation,bound_violation\n";
  }

  void write(const TelemetryRow& r) {
    if (!out_.is_open()) return;
    out_ << r.step << ',' << format_double(r.t) << ','
         << format_double(r.min) << ',' << format_double(r.max) << ','
         << r.iterations << ',' << format_double(r.dmp_violation) << ','
         << format_double(r.bound_violation) << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace bpfd
