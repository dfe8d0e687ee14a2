#include "cli_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "nehari/errors.hpp"

namespace nehari::cli {

namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

ordered_json vec(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

ordered_json to_json(const ConstraintReport& r) {
  ordered_json j;
  j["nontrivial"] = {{"ok", r.nontrivial}, {"piece_norms", vec(r.piece_norms)}};
  j["nehari"] = {{"ok", r.nehari_ok}, {"residuals", vec(r.residuals)}, {"bound", r.residual_bound}};
  j["energy_cap"] = {{"ok", r.energy_ok}, {"energy", r.energy}, {"cap", r.energy_cap}};
  j["norm_chain"] = {{"ok", r.norm_chain_ok},
                     {"norm_remainder", r.norm_remainder},
                     {"min_piece_norm", r.min_piece_norm},
                     {"norm_tilde_hat_plus", r.norm_tilde_hat_plus},
                     {"R", r.R}};
  j["smallness"] = {{"ok", r.smallness_ok},
                    {"norm_hat_minus", r.norm_hat_minus},
                    {"norm_bar_low", r.norm_bar_low},
                    {"rho0", r.rho0}};
  j["all"] = r.all();
  return j;
}

ordered_json to_json(const Diagnostics& d) {
  ordered_json j;
  j["energy"] = d.energy;
  j["norm_hat_minus"] = d.norm_hat_minus;
  j["norm_bar_low"] = d.norm_bar_low;
  j["norm_remainder"] = d.norm_remainder;
  j["mu_over_p_int"] = d.mu_over_p_int;
  j["norm_tilde_hat_plus"] = d.norm_tilde_hat_plus;
  j["min_piece_norm"] = d.min_piece_norm;
  j["negative_integral"] = d.negative_integral;
  return j;
}

ordered_json to_json(const NehariParams& p) {
  ordered_json j;
  j["c"] = p.c;
  j["a_inf"] = p.a_inf;
  j["kappa"] = p.kappa;
  j["rho0"] = p.rho0;
  j["R"] = p.R;
  j["energy_cap"] = p.energy_cap;
  return j;
}

ordered_json to_json(const SweepVerdicts& v) {
  ordered_json j;
  j["penalty_monotone"] = v.penalty_monotone;
  j["floors_reached"] = v.floors_reached;
  j["kappa_bound"] = v.kappa_bound;
  j["norms_monotone"] = v.norms_monotone;
  j["penalty_ratio"] = v.penalty_ratio;
  j["all"] = v.all();
  return j;
}

std::string solution_csv(const Grid& g, const WeightField& w, const Field& u) {
  require_on_grid(g, u);
  std::string out = g.dim() == 1 ? "x,u,a_plus,a_minus\n" : "x,y,u,a_plus,a_minus\n";
  for (Index i = 0; i < g.size(); ++i) {
    const auto x = g.node(i);
    out += format_double(x[0]);
    if (g.dim() == 2) out += "," + format_double(x[1]);
    out += "," + format_double(u[i]) + "," + format_double(w.a_plus[i]) + "," +
           format_double(w.a_minus[i]) + "\n";
  }
  return out;
}

namespace {

struct Table {
  int dim = 0;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw GridMismatch(path + ": empty file");
  Table t;
  if (line == "x,u,a_plus,a_minus") t.dim = 1;
  else if (line == "x,y,u,a_plus,a_minus") t.dim = 2;
  else throw GridMismatch(path + ": unexpected header '" + line + "'");
  const std::size_t cols = t.dim + 3;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != cols) throw GridMismatch(path + ": malformed row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

int stored_nodes_per_axis(const std::string& path) {
  const Table t = read_table(path);
  const auto rows = static_cast<long>(t.rows.size());
  if (t.dim == 1) return static_cast<int>(rows);
  const long n = std::lround(std::sqrt(static_cast<double>(rows)));
  if (n * n != rows) throw GridMismatch(path + ": row count is not a square");
  return static_cast<int>(n);
}

Field read_solution_csv(const std::string& path, const Grid& g) {
  const Table t = read_table(path);
  if (t.dim != g.dim()) throw GridMismatch(path + ": dimension differs from the spec domain");
  if (static_cast<Index>(t.rows.size()) != g.size())
    throw GridMismatch(path + ": node count differs from the grid");
  Vector u(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    const auto x = g.node(i);
    for (int a = 0; a < g.dim(); ++a)
      if (std::abs(t.rows[i][a] - x[a]) > 1e-9 * g.h(a))
        throw GridMismatch(path + ": node coordinates differ from the grid");
    u[i] = t.rows[i][g.dim()];
  }
  return Field(std::move(u), g.id());
}

}  // namespace nehari::cli
