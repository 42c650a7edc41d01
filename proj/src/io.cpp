#include "machzero/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace machzero {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  return out;
}

}  // namespace

void write_field_dump(const std::string& path, const ScalarField& field,
                      const FlowState& state) {
  const Mesh& mesh = *field.mesh;
  std::ofstream out = open_or_throw(path);
  out << "machzero-field v1 " << mesh.n_nodes() << " " << mesh.n_elems()
      << "\n";
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    out << fmt_double(mesh.nodes[i][0]) << " " << fmt_double(mesh.nodes[i][1])
        << " " << fmt_double(field.values[i]) << "\n";
  }
  for (const auto& c : mesh.elems) {
    out << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
  }
  out << "u\n";
  for (const auto& v : state.velocity) {
    out << fmt_double(v[0]) << " " << fmt_double(v[1]) << "\n";
  }
  out << "rho\n";
  for (double r : state.density) out << fmt_double(r) << "\n";
  out << "p\n";
  for (double p : state.pressure) out << fmt_double(p) << "\n";
  out << "mach\n";
  for (double m : state.mach_number) out << fmt_double(m) << "\n";
}

void write_vtk(const std::string& path, const ScalarField& field,
               const FlowState& state) {
  const Mesh& mesh = *field.mesh;
  std::ofstream out = open_or_throw(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "machzero field\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const auto& p : mesh.nodes) {
    out << fmt_double(p[0]) << " " << fmt_double(p[1]) << " 0\n";
  }
  out << "CELLS " << mesh.n_elems() << " " << 5 * mesh.n_elems() << "\n";
  for (const auto& c : mesh.elems) {
    out << "4 " << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
  }
  out << "CELL_TYPES " << mesh.n_elems() << "\n";
  for (int e = 0; e < mesh.n_elems(); ++e) out << "9\n";
  out << "POINT_DATA " << mesh.n_nodes() << "\n";
  out << "SCALARS potential double 1\nLOOKUP_TABLE default\n";
  for (double v : field.values) out << fmt_double(v) << "\n";
  out << "CELL_DATA " << mesh.n_elems() << "\n";
  out << "VECTORS velocity double\n";
  for (int e = 0; e < mesh.n_elems(); ++e) {
    double ut = 0.0, uz = 0.0;
    for (int q = 0; q < 4; ++q) {
      ut += state.velocity[4 * e + q][0];
      uz += state.velocity[4 * e + q][1];
    }
    out << fmt_double(ut / 4.0) << " " << fmt_double(uz / 4.0) << " 0\n";
  }
  auto cell_scalar = [&](const char* name, const std::vector<double>& v) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int e = 0; e < mesh.n_elems(); ++e) {
      double s = 0.0;
      for (int q = 0; q < 4; ++q) s += v[4 * e + q];
      out << fmt_double(s / 4.0) << "\n";
    }
  };
  cell_scalar("rho", state.density);
  cell_scalar("p", state.pressure);
  cell_scalar("mach", state.mach_number);
}

void write_sweep_csv(const std::string& path, const SweepReport& report) {
  std::ofstream out = open_or_throw(path);
  out << "param,err_u_max,err_rho_max,mach_max,weak_p_gap,flux_drift,"
         "cutoff_margin,iters\n";
  for (const auto& pt : report.points) {
    out << fmt_double(pt.param) << "," << fmt_double(pt.err_u_max) << ","
        << fmt_double(pt.err_rho_max) << "," << fmt_double(pt.mach_max) << ","
        << fmt_double(pt.weak_p_gap) << "," << fmt_double(pt.flux_drift)
        << "," << fmt_double(pt.cutoff_margin) << "," << pt.iters << "\n";
  }
}

void write_summary(const std::string& path, const SummaryLines& lines) {
  std::ofstream out = open_or_throw(path);
  for (const auto& [key, value] : lines) {
    out << key << " = " << value << "\n";
  }
}

std::string sweep_summary_text(const SweepReport& report) {
  std::ostringstream out;
  auto fit_line = [&](const char* name, const RateFit& fit) {
    out << name << "_slope = "
        << (fit.valid ? fmt_double(fit.slope) : std::string("n/a"))
        << " (residual " << fmt_double(fit.residual) << ", n " << fit.n_used
        << (fit.note.empty() ? "" : ", " + fit.note) << ")\n";
  };
  fit_line("err_u", report.fit_u);
  fit_line("err_rho", report.fit_rho);
  fit_line("mach", report.fit_mach);
  fit_line("weak_p_gap", report.fit_pgap);
  out << "window_avg_max = " << fmt_double(report.window_avg_max) << "\n";
  out << "poincare_max = " << fmt_double(report.poincare_max) << "\n";
  out << "grad_sup_over_l2 = " << fmt_double(report.grad_sup_over_l2) << "\n";
  if (report.kind == SweepReport::Kind::domain_length) {
    out << "decay_flagged = " << (report.decay_flagged ? "yes" : "no") << "\n";
    for (std::size_t k = 0; k + 2 < report.points.size(); ++k) {
      const double d0 = report.points[k].err_u_max;
      const double d1 = report.points[k + 1].err_u_max;
      out << "decay_ratio_L" << fmt_double(report.points[k + 1].param)
          << "_over_L" << fmt_double(report.points[k].param) << " = "
          << fmt_double(d0 > 0.0 ? d1 / d0 : 0.0) << "\n";
    }
  }
  for (const auto& note : report.notes) out << "note: " << note << "\n";
  return out.str();
}

}  // namespace machzero
