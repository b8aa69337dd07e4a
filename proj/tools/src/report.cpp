#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "dosp/cli/commands.hpp"
#include "dosp/metrics.hpp"

namespace dosp::cli {
namespace fs = std::filesystem;

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::size_t> index;

  std::size_t col(const std::string& name, const fs::path& src) const {
    auto it = index.find(name);
    if (it == index.end()) throw ArtifactError(src.string() + ": missing column " + name);
    return it->second;
  }
  bool has(const std::string& name) const { return index.count(name) > 0; }
};

double parse_cell(const std::string& s, const fs::path& src, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) {
    throw ArtifactError(src.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

Table read_table(const fs::path& src) {
  std::ifstream in(src);
  if (!in) throw ArtifactError("missing " + src.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ArtifactError(src.string() + ": empty file");
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      t.index[cell] = t.header.size();
      t.header.push_back(cell);
    }
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(t.header.size());
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      row.push_back(parse_cell(cell, src, lineno));
    }
    if (row.size() != t.header.size()) {
      throw ArtifactError(src.string() + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(t.header.size()) + " fields");
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw ArtifactError(src.string() + ": no data rows");
  return t;
}

std::string pair_name(std::size_t i, std::size_t j) {
  return std::to_string(i) + "_" + std::to_string(j);
}

const char* verdict(bool ok) { return ok ? "ok" : "VIOLATED"; }

}  // namespace

std::string render_report(const fs::path& dir) {
  OracleResult oracle;
  OracleContext ctx;
  read_oracle_file(dir / "oracle.out", oracle, ctx);
  const fs::path traj_path = dir / "trajectory.csv";
  const fs::path met_path = dir / "metrics.csv";
  const Table traj = read_table(traj_path);
  const Table met = read_table(met_path);

  const std::size_t N = ctx.agents;
  const auto n = oracle.xstar.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // Initial state from the first trajectory row.
  double gap_sq = 0.0;
  bool zero_start = true;
  for (std::size_t i = 0; i < N; ++i) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const double x0 = traj.rows.front()[traj.col(
          "x_" + std::to_string(i) + "_" + std::to_string(c), traj_path)];
      gap_sq += (oracle.xstar[c] - x0) * (oracle.xstar[c] - x0);
    }
  }
  for (std::size_t k = 0; k < traj.header.size(); ++k) {
    const auto& name = traj.header[k];
    if ((name.rfind("lambda_", 0) == 0 || name.rfind("mu_", 0) == 0) &&
        traj.rows.front()[k] != 0.0) {
      zero_start = false;
    }
  }

  const double D = static_cast<double>(ctx.diameter);
  auto dis_bound = [&](double T) {
    return zero_start
               ? disagreement_bound_value(D, ctx.K, ctx.gamma, ctx.epsilon, gap_sq, T)
               : nan;
  };
  auto reg_bound = [&](double T) {
    return zero_start ? regret_bound_value(N, ctx.L0, D, ctx.K, ctx.gamma, ctx.epsilon,
                                           gap_sq, T)
                      : nan;
  };

  const std::size_t tcol = met.col("t", met_path);
  const auto& last = met.rows.back();
  const double T = last[tcol];

  std::string r;
  r += "# bound report\n";
  r += fmt::format("scenario {}  agents {}  diameter {}  gamma {:.6g}  epsilon {:.6g}\n",
                   ctx.scenario, N, ctx.diameter, ctx.gamma, ctx.epsilon);
  r += fmt::format("K {:.6g}  L0 {:.6g}  Lf {:.6g}  T {:.6g}  h {:.6g}\n", ctx.K, ctx.L0,
                   ctx.Lf, T, ctx.step);
  r += fmt::format("oracle {}  objective_integral {:.6g}  worst_violation {:.6g}\n",
                   oracle.method, oracle.objective_integral, oracle.worst_violation);
  r += fmt::format("||x* - x(0)||^2 {:.6g}  zero initial multipliers {}\n", gap_sq,
                   zero_start ? "yes" : "no");

  // Disagreement against the closed-form bound at every recorded time.
  r += "\n[disagreement]  int ||x_i - x_j|| dt vs D sqrt((K+gamma)T + (1+||x*-x(0)||^2)/(2 eps))\n";
  std::size_t violations = 0, checks = 0;
  for (const auto& row : met.rows) {
    if (row[tcol] <= 0.0) continue;
    const double b = dis_bound(row[tcol]);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = i + 1; j < N; ++j) {
        ++checks;
        if (row[met.col("dis_" + pair_name(i, j), met_path)] > b) ++violations;
      }
    }
  }
  double dmax = 0.0;
  std::string dpair = "-";
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      const double d = last[met.col("dis_" + pair_name(i, j), met_path)];
      if (d >= dmax) {
        dmax = d;
        dpair = std::to_string(i) + "-" + std::to_string(j);
      }
    }
  }
  r += fmt::format("final max pair {}  measured {:.6g}  bound {:.6g}\n", dpair, dmax,
                   dis_bound(T));
  r += fmt::format("checks {}  violations {}\n", checks, violations);

  r += "\n[regret]  R_T^i vs printed bound (1+||x*-x(0)||^2)/eps + (N-1) L0 D sqrt(...)\n";
  r += "agent  regret  bound  status\n";
  for (std::size_t i = 0; i < N; ++i) {
    const double reg = last[met.col("regret_" + std::to_string(i), met_path)];
    const double b = reg_bound(T);
    r += fmt::format("{}  {:.6g}  {:.6g}  {}\n", i, reg, b,
                     std::isnan(b) ? "n/a" : verdict(reg <= b));
  }

  r += "\n[own fit]  ||[F_Ti^i]^+|| vs sqrt((||x(0)-x*||^2 + 2 eps K T)/(2 eps - 1))\n";
  r += "agent  fit  fit_pos_norm  saturated_fit  bound  status\n";
  const double fb = own_fit_bound_value(ctx.K, ctx.epsilon, gap_sq, T);
  for (std::size_t i = 0; i < N; ++i) {
    double pos = 0.0;
    std::string fits, sats;
    for (std::size_t k = 0;; ++k) {
      const std::string name = std::to_string(i) + "_" + std::to_string(k);
      if (!met.has("fit_" + name)) break;
      const double f = last[met.col("fit_" + name, met_path)];
      pos += std::max(f, 0.0) * std::max(f, 0.0);
      fits += fmt::format("{}{:.6g}", fits.empty() ? "" : " ", f);
      if (met.has("satfit_" + name)) {
        sats += fmt::format("{}{:.6g}", sats.empty() ? "" : " ",
                            last[met.col("satfit_" + name, met_path)]);
      }
    }
    pos = std::sqrt(pos);
    r += fmt::format("{}  [{}]  {:.6g}  [{}]  {:.6g}  {}\n", i, fits, pos, sats, fb,
                     std::isnan(fb) ? "n/a" : verdict(pos <= fb));
  }

  // Sublinearity ratios at up to ten evenly spaced recorded times.
  r += "\n[ratios]  metric(t) / sqrt(t)\n";
  r += "t  max_disagreement  max_regret  max_fit_pos\n";
  std::vector<std::size_t> picks;
  const std::size_t rows = met.rows.size();
  for (std::size_t q = 1; q <= 10; ++q) {
    const std::size_t k = (rows - 1) * q / 10;
    if (k > 0 && (picks.empty() || picks.back() != k)) picks.push_back(k);
  }
  for (std::size_t k : picks) {
    const auto& row = met.rows[k];
    const double t = row[tcol];
    if (t <= 0.0) continue;
    double md = 0.0, mr = -std::numeric_limits<double>::infinity(), mf = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = i + 1; j < N; ++j) {
        md = std::max(md, row[met.col("dis_" + pair_name(i, j), met_path)]);
      }
      mr = std::max(mr, row[met.col("regret_" + std::to_string(i), met_path)]);
      double pos = 0.0;
      for (std::size_t c = 0;; ++c) {
        const std::string name = "fit_" + std::to_string(i) + "_" + std::to_string(c);
        if (!met.has(name)) break;
        pos += std::pow(std::max(row[met.col(name, met_path)], 0.0), 2);
      }
      mf = std::max(mf, std::sqrt(pos));
    }
    const double root = std::sqrt(t);
    r += fmt::format("{:.6g}  {:.6g}  {:.6g}  {:.6g}\n", t, md / root, mr / root, mf / root);
  }

  if (N > 1) {
    r += "\n[consensus]  max pairwise ||x_i - x_j|| over recorded times\n";
    double peak = -1.0, peak_t = 0.0, final_gap = 0.0;
    for (const auto& row : met.rows) {
      double g = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
          g = std::max(g, row[met.col("gap_" + pair_name(i, j), met_path)]);
        }
      }
      if (g > peak) {
        peak = g;
        peak_t = row[tcol];
      }
      final_gap = g;
    }
    r += fmt::format("peak {:.6g} at t {:.6g}  final {:.6g}  final/peak {:.6g}\n", peak,
                     peak_t, final_gap, peak > 0.0 ? final_gap / peak : 0.0);
  }

  if (met.has("heldout_err_0")) {
    r += "\n[held-out error]  final classification error per agent\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = last[met.col("heldout_err_" + std::to_string(i), met_path)];
      worst = std::max(worst, e);
      r += fmt::format("{}  {:.4f}\n", i, e);
    }
    r += fmt::format("max {:.4f}\n", worst);
  }
  return r;
}

}  // namespace dosp::cli
