#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "affine/cli.hpp"

namespace affine::cli {

namespace {

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

double parse_cell(std::string_view cell, int line) {
  if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(Errc::ParseError, "csv line " + std::to_string(line) + ": bad number '" + std::string(cell) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_csv(const CsvTable& table) {
  std::string out = join(table.header) + '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw Error(Errc::ValidationError, "csv row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  int line_no = 0;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (header) {
      for (auto c : cells) table.header.emplace_back(c);
      header = false;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw Error(Errc::ParseError, "csv line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(table.header.size()) + " cells");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) row.push_back(parse_cell(c, line_no));
    table.rows.push_back(std::move(row));
  }
  if (header) throw Error(Errc::ParseError, "csv has no header row");
  return table;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(Errc::IoError, "write to " + path.string() + " failed");
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) { write_text(path, format_csv(table)); }

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + '\n'); }

double inv_beta_residual(const ModelParams& params, const ScalarInvariants& inv, double t,
                         const ScalarMomentState<>& s) {
  if (params.mu == 0.0) return s.beta - inv.c_rot * s.g1 - 0.5 * params.l;
  if (params.l == 0.0) return s.beta * std::exp(params.mu * t) / s.g1 - inv.c_rot;
  return std::numeric_limits<double>::quiet_NaN();
}

double bound_residual(const ModelParams& params, const ScalarInvariants& inv, const ScalarMomentState<>& s) {
  return inv.e_total * s.g1 - inv.ep0 * std::pow(inv.g1_0, 1.0 - params.gamma) * std::pow(s.g1, params.gamma) -
         (s.alpha * s.alpha + s.beta * s.beta);
}

CsvTable scalar_trajectory_table(const ModelParams& params, const ScalarInvariants& inv, const Trajectory<3>& traj,
                                 const std::vector<double>& times) {
  CsvTable table{{"t", "g1", "alpha", "beta", "E", "Ek", "Ep", "inv_beta_residual", "bound_residual"}, {}};
  table.rows.reserve(times.size());
  for (double t : times) {
    const auto s = ScalarMomentState<>::from_vector(traj.sample(t));
    const Energy e = scalar_energy(params, inv, s);
    table.rows.push_back({t, s.g1, s.alpha, s.beta, e.total, e.kinetic, e.potential,
                          inv_beta_residual(params, inv, t, s), bound_residual(params, inv, s)});
  }
  return table;
}

CsvTable matrix_trajectory_table(const ModelParams& params, const Trajectory<7>& traj,
                                 const std::vector<double>& times) {
  CsvTable table{{"t", "a", "b", "c", "d", "g1m", "g2m", "g3m", "delta", "d1"}, {}};
  table.rows.reserve(times.size());
  for (double t : times) {
    const auto s = MatrixMomentState<>::from_vector(traj.sample(t));
    table.rows.push_back({t, s.a, s.b, s.c, s.d, s.g1m, s.g2m, s.g3m, delta_of(params, s), s.a + s.d});
  }
  return table;
}

CsvTable audit_table(const std::vector<Functionals>& series) {
  CsvTable table{{"t", "m", "E", "J", "G", "F1", "F2"}, {}};
  for (const auto& f : series) table.rows.push_back({f.time, f.m, f.energy, f.j, f.g, f.f1, f.f2});
  return table;
}

CsvTable residual_table(const std::vector<ResidualRow>& rows) {
  CsvTable table{{"h", "dt", "res_mass", "res_momx", "res_momy", "res_entropy", "res_pressure"}, {}};
  for (const auto& r : rows) {
    table.rows.push_back(
        {r.h, r.dt, r.res.mass, r.res.momentum_x, r.res.momentum_y, r.res.entropy, r.res.pressure});
  }
  return table;
}

}  // namespace affine::cli
