#include "blochfem/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace blochfem {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::pair<LayerIndex, LayerIndex> make_layers(const RunConfig& cfg) {
  LayerIndex l1, l2;
  if (cfg.index_group == "group1") {
    l1 = make_layer1_group1(0.1 * cfg.n1_scale,
                            cfg.lambda1 > 0.0 ? cfg.lambda1 : 2.0 * std::sqrt(2.0) * pi);
    l2 = make_layer2_group1(0.25 * cfg.n2_scale);
  } else if (cfg.index_group == "group2") {
    l1 = make_layer1_group2(-0.25 * cfg.n1_scale);
    if (cfg.lambda1 > 0.0 && cfg.lambda1 != 15.0)
      throw ConfigError("lambda1 override is only supported for group1");
    l2 = make_layer2_group2(0.25 * cfg.n2_scale);
  } else {
    throw ConfigError("unknown index_group: " + cfg.index_group);
  }
  if (cfg.n1_scale == 0.0) {
    l1.eval = [](double, double) { return 0.0; };
    l1.mode_coeffs.assign(l1.mode_coeffs.size(), cdouble(0.0));
  }
  if (cfg.n2_scale == 0.0) l2.eval = [](double, double) { return 0.0; };
  return {l1, l2};
}

SourceRoute resolve_route(const RunConfig& cfg, const LayerIndex& l1) {
  if (cfg.source_method == "spectral") return SourceRoute::spectral;
  if (cfg.source_method == "lattice") return SourceRoute::lattice;
  if (cfg.source_method != "auto") throw ConfigError("unknown source_method: " + cfg.source_method);
  if (cfg.source_kind == "incident") return SourceRoute::spectral;
  // volume: the spectral route is cheap only for small modulated-mode counts
  return l1.mode_coeffs.size() <= 16 ? SourceRoute::spectral : SourceRoute::lattice;
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig sc;
  if (cfg.solver_method == "direct") sc.method = SolverConfig::Method::direct;
  else if (cfg.solver_method == "gmres") sc.method = SolverConfig::Method::gmres;
  else if (cfg.solver_method == "auto") sc.method = SolverConfig::Method::automatic;
  else throw ConfigError("unknown solver_method: " + cfg.solver_method);
  if (cfg.solver_tol > 0.0) {
    sc.tol_direct = cfg.solver_tol;
    sc.tol_iter = cfg.solver_tol;
  }
  sc.max_iter = cfg.max_iter;
  sc.restart = cfg.restart;
  return sc;
}

}  // namespace

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  while (std::getline(in, line)) apply_config_line(cfg, line);
  return cfg;
}

void apply_config_line(RunConfig& cfg, const std::string& raw) {
  std::string line = raw;
  const auto hash = line.find('#');
  if (hash != std::string::npos) line = line.substr(0, hash);
  line = trim(line);
  if (line.empty()) return;
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw ConfigError("config line is not 'key = value': " + raw);
  const std::string key = trim(line.substr(0, eq));
  const std::string val = trim(line.substr(eq + 1));
  try {
    if (key == "k") cfg.k = std::stod(val);
    else if (key == "Lambda") cfg.Lambda = std::stod(val);
    else if (key == "h0") cfg.h0 = std::stod(val);
    else if (key == "H1") cfg.H1 = std::stod(val);
    else if (key == "H") cfg.H = std::stod(val);
    else if (key == "N") cfg.N = std::stoi(val);
    else if (key == "h") cfg.h = std::stod(val);
    else if (key == "index_group") cfg.index_group = val;
    else if (key == "n1_scale") cfg.n1_scale = std::stod(val);
    else if (key == "n2_scale") cfg.n2_scale = std::stod(val);
    else if (key == "lambda1") cfg.lambda1 = std::stod(val);
    else if (key == "source_kind") cfg.source_kind = val;
    else if (key == "source_y1") { cfg.source_y1 = std::stod(val); cfg.source_point_set = true; }
    else if (key == "source_y2") { cfg.source_y2 = std::stod(val); cfg.source_point_set = true; }
    else if (key == "band") cfg.band = std::stoi(val);
    else if (key == "samples_x1") cfg.samples_x1 = std::stoi(val);
    else if (key == "samples_x2") cfg.samples_x2 = std::stoi(val);
    else if (key == "dtn_truncation") cfg.dtn_truncation = (val == "nyquist") ? -1 : std::stoi(val);
    else if (key == "source_method") cfg.source_method = val;
    else if (key == "Jmax") cfg.Jmax = std::stoi(val);
    else if (key == "solver_method") cfg.solver_method = val;
    else if (key == "solver_tol") cfg.solver_tol = std::stod(val);
    else if (key == "max_iter") cfg.max_iter = std::stoi(val);
    else if (key == "restart") cfg.restart = std::stoi(val);
    else if (key == "N_ref") cfg.N_ref = std::stoi(val);
    else if (key == "h_ref") cfg.h_ref = std::stod(val);
    else if (key == "output") cfg.output_path = val;
    else if (key == "format") cfg.output_format = val;
    else throw ConfigError("unknown config key: " + key);
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad value for config key " + key + ": " + val);
  }
}

RunConfig example_config(int id, const RunConfig& base) {
  if (id < 1 || id > 8) throw ConfigError("example id must be 1..8");
  RunConfig cfg = base;
  cfg.k = (id % 2 == 1) ? 1.0 : 6.0;
  cfg.index_group = (id == 1 || id == 2 || id == 5 || id == 6) ? "group1" : "group2";
  if (id <= 4) {
    cfg.source_kind = "volume";
    if (!base.source_point_set) {
      cfg.source_y1 = 0.5;
      cfg.source_y2 = 0.4;
    }
  } else {
    cfg.source_kind = "incident";
    if (!base.source_point_set) {
      cfg.source_y1 = pi;
      cfg.source_y2 = 4.0;
    }
  }
  return cfg;
}

RunOutput solve_pipeline(const RunConfig& cfg, Diagnostics& diag,
                         const std::string& dump_system_path) {
  if (!(cfg.h0 < cfg.H1 && cfg.H1 < cfg.H)) throw ConfigError("need h0 < H1 < H");
  if (cfg.N < 1) throw ConfigError("need N >= 1");
  if (!(cfg.h > 0.0)) throw ConfigError("need h > 0");

  RunOutput out;
  out.mesh = build_cell_mesh(cfg.Lambda, cfg.h0, cfg.H, cfg.h);
  auto [l1, l2] = make_layers(cfg);

  MediumParams mp;
  mp.band = cfg.band;
  mp.samples_x1 = cfg.samples_x1;
  mp.samples_x2 = cfg.samples_x2;
  out.medium = build_medium(l1, l2, cfg.k, cfg.N, out.mesh, mp);

  out.grid = AlphaGrid{cfg.N, cfg.Lambda};
  const int L = cfg.dtn_truncation >= 0 ? cfg.dtn_truncation : out.mesh.nx / 2;
  std::vector<DtnSymbolTable> tables;
  tables.reserve(cfg.N);
  for (int j = 1; j <= cfg.N; ++j)
    tables.push_back(build_dtn_table(cfg.k, out.grid.alpha(j), L, out.grid.Lambda_star(), diag));

  const SourceRoute route = resolve_route(cfg, l1);
  BlockSystemInputs inputs;
  if (cfg.source_kind == "volume") {
    const HalfSpaceSource src = make_volume_source({cfg.source_y1, cfg.source_y2}, cfg.k, cfg.h0);
    BlochSource source(src, l1, l2, out.grid, route, cfg.Jmax);
    const auto qpts = quadrature_points(out.mesh);
    inputs.rhs = assemble_rhs_volume(out.mesh, out.grid, source.volume_table(qpts, diag));
    std::vector<Point> bottom_pts;
    for (int c = 1; c <= out.mesh.nx; ++c) bottom_pts.push_back(out.mesh.nodes[out.mesh.node_id(c, 0)]);
    inputs.dirichlet = source.dirichlet_data(bottom_pts, diag);
  } else if (cfg.source_kind == "incident") {
    const HalfSpaceSource src = make_incident_source({cfg.source_y1, cfg.source_y2}, cfg.k, cfg.H);
    BlochSource source(src, l1, l2, out.grid, route, cfg.Jmax);
    inputs.rhs = assemble_rhs_boundary(out.mesh, out.grid, source.boundary_modes(L, cfg.H, diag));
  } else {
    throw ConfigError("unknown source_kind: " + cfg.source_kind);
  }
  out.dirichlet = inputs.dirichlet;

  BlockSystem sys =
      build_block_system(out.mesh, out.medium, out.grid, cfg.k, tables, std::move(inputs), out.counters);
  if (!dump_system_path.empty()) {
    std::ofstream f(dump_system_path);
    dump_system(sys, f);
  }
  auto [field, report] = solve(sys, solver_config(cfg), diag);
  out.field = std::move(field);
  out.report = report;

  for (int n : out.mesh.top_nodes) out.trace_x1.push_back(out.mesh.nodes[n].x1);
  out.trace = reconstruct_on_trace(out.field, out.trace_x1);
  return out;
}

namespace {

// interpolate a reference trace (periodic, on its own uniform grid) at x1
std::vector<cdouble> resample_trace(const std::vector<double>& ref_x1,
                                    const std::vector<cdouble>& ref_vals, double Lambda,
                                    const std::vector<double>& x1) {
  const int n = static_cast<int>(ref_x1.size());
  const double dx = Lambda / n;
  std::vector<cdouble> out(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) {
    // ref grid is x1 = -Lambda/2 + (c+1) dx, c = 0..n-1
    double t = (x1[i] + 0.5 * Lambda) / dx - 1.0;
    t = t - std::floor(t / n) * n;
    const int c0 = static_cast<int>(std::floor(t)) % n;
    const int c1 = (c0 + 1) % n;
    const double w = t - std::floor(t);
    out[i] = (1.0 - w) * ref_vals[c0] + w * ref_vals[c1];
  }
  return out;
}

ErrorTableRow finish_row(int id, const RunConfig& cfg, const RunOutput& out,
                         const std::vector<cdouble>& u_ref, Diagnostics& diag,
                         double wall_time) {
  std::vector<double> weights(out.trace_x1.size(), out.mesh.dx());  // periodic trapezoid
  ErrorTableRow row;
  row.example = id;
  row.N = cfg.N;
  row.h = cfg.h;
  row.rel_error = relative_trace_error(out.trace, u_ref, weights);
  row.wall_time = wall_time;
  row.iterations = out.report.iterations;
  row.warnings = diag.warnings();
  return row;
}

}  // namespace

ErrorTableRow run_example(int id, int N, double h, const RunConfig& base) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = example_config(id, base);
  cfg.N = N;
  cfg.h = h;
  Diagnostics diag;
  RunOutput out = solve_pipeline(cfg, diag);

  std::vector<cdouble> u_ref;
  if (id <= 4) {
    const HalfSpaceSource src = make_volume_source({cfg.source_y1, cfg.source_y2}, cfg.k, cfg.h0);
    for (double x1 : out.trace_x1) u_ref.push_back(green_half_space({x1, cfg.H}, src));
  } else {
    RunConfig rc = cfg;
    rc.N = cfg.N_ref > 0 ? cfg.N_ref : 2 * N;
    rc.h = cfg.h_ref > 0.0 ? cfg.h_ref : 0.5 * h;
    Diagnostics ref_diag;
    RunOutput ref = solve_pipeline(rc, ref_diag);
    u_ref = resample_trace(ref.trace_x1, ref.trace, cfg.Lambda, out.trace_x1);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return finish_row(id, cfg, out, u_ref, diag, wall);
}

ConvergenceResult run_convergence(int id, std::vector<int> N_list, std::vector<double> h_list,
                                  const RunConfig& base) {
  if (N_list.size() < 3 || h_list.size() < 3)
    throw ConfigError("run_convergence: need at least 3 values per swept axis");
  std::sort(N_list.begin(), N_list.end());
  std::sort(h_list.begin(), h_list.end());

  RunConfig cfg = base;
  if (id >= 5) {
    // scaled reference rule: one shared fine solve
    cfg.N_ref = base.N_ref > 0 ? base.N_ref : 2 * N_list.back();
    cfg.h_ref = base.h_ref > 0.0 ? base.h_ref : 0.5 * h_list.front();
  }

  ConvergenceResult res;
  for (int N : N_list)
    for (double h : h_list) res.rows.push_back(run_example(id, N, h, cfg));

  const double h_min = h_list.front();
  const int N_max = N_list.back();
  std::vector<double> ns, errs_n, hs, errs_h;
  for (const auto& r : res.rows) {
    if (r.h == h_min) {
      ns.push_back(r.N);
      errs_n.push_back(r.rel_error);
    }
    if (r.N == N_max) {
      hs.push_back(r.h);
      errs_h.push_back(r.rel_error);
    }
  }
  res.rate_N = loglog_slope(ns, errs_n);
  res.rate_h = loglog_slope(hs, errs_h);
  return res;
}

OracleCheck run_oracle_check(int N, double h, int id, const RunConfig& base) {
  RunConfig cfg = example_config(id, base);
  cfg.N = N;
  cfg.h = h;
  cfg.solver_method = "direct";  // oracle comparisons want tight residuals
  Diagnostics diag;
  RunOutput out = solve_pipeline(cfg, diag);

  auto [l1, l2] = make_layers(cfg);
  const SourceRoute route = resolve_route(cfg, l1);
  const SupercellMesh sm = tile_mesh(out.mesh, N);
  const int L = cfg.dtn_truncation >= 0 ? cfg.dtn_truncation : out.mesh.nx / 2;

  HalfSpaceSource src = cfg.source_kind == "volume"
                            ? make_volume_source({cfg.source_y1, cfg.source_y2}, cfg.k, cfg.h0)
                            : make_incident_source({cfg.source_y1, cfg.source_y2}, cfg.k, cfg.H);
  BlochSource source(src, l1, l2, out.grid, route, cfg.Jmax);

  SupercellResult fs = solve_supercell(sm, out.medium, cfg.k, out.grid, source, L, out.dirichlet, diag);

  OracleCheck chk;
  chk.rel_diff = supercell_vs_bloch(fs, sm, out.field);
  chk.bloch_ops = out.counters.total();
  chk.supercell_ops = fs.counters.total();
  chk.quad_points = out.counters.cell_quad_points;
  chk.counts_match = (chk.bloch_ops == (2 + static_cast<long long>(N)) * chk.quad_points) &&
                     (chk.supercell_ops == 3LL * N * chk.quad_points);
  return chk;
}

double loglog_slope(const std::vector<double>& t, const std::vector<double>& err) {
  if (t.size() != err.size() || t.size() < 2)
    throw std::invalid_argument("loglog_slope: need at least 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = std::log(t[i]), y = std::log(std::max(err[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

void echo_config(std::ostream& os, const RunConfig& cfg) {
  os << "# blochfem results v1\n";
  os << "# k = " << cfg.k << "\n# Lambda = " << cfg.Lambda << "\n# h0 = " << cfg.h0
     << "\n# H1 = " << cfg.H1 << "\n# H = " << cfg.H << "\n";
  os << "# index_group = " << cfg.index_group << "\n";
  os << "# source_kind = " << cfg.source_kind << "\n# source_y1 = " << cfg.source_y1
     << "\n# source_y2 = " << cfg.source_y2 << "\n";
  os << "# band = " << (cfg.band > 0 ? cfg.band : -1) << "  # -1 means 8N\n";
  os << "# dtn_truncation = " << cfg.dtn_truncation << "  # -1 means nyquist\n";
  os << "# source_method = " << cfg.source_method << "\n# Jmax = " << cfg.Jmax << "\n";
  os << "# solver_method = " << cfg.solver_method << "\n";
  os << "# trace_error_quadrature = trapezoid-on-top-nodes\n";
}

}  // namespace

void write_rows_csv(std::ostream& os, const RunConfig& cfg, const std::vector<ErrorTableRow>& rows,
                    const std::optional<ConvergenceResult>& rates) {
  echo_config(os, cfg);
  if (rates) {
    os << "# rate_N = " << rates->rate_N << "\n";
    os << "# rate_h = " << rates->rate_h << "\n";
  }
  os << "example,N,h,rel_error,wall_time_s,iterations,warnings\n";
  char buf[512];
  for (const auto& r : rows) {
    std::string w;
    for (std::size_t i = 0; i < r.warnings.size(); ++i) {
      if (i) w += ';';
      for (char c : r.warnings[i]) w += (c == ',' || c == '\n') ? ' ' : c;
    }
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.3f,%d,", r.example, r.N, r.h, r.rel_error,
                  r.wall_time, r.iterations);
    os << buf << '"' << w << '"' << '\n';
  }
}

void write_rows_json(std::ostream& os, const RunConfig& cfg, const std::vector<ErrorTableRow>& rows,
                     const std::optional<ConvergenceResult>& rates) {
  nlohmann::json j;
  j["config"] = {{"k", cfg.k},
                 {"Lambda", cfg.Lambda},
                 {"h0", cfg.h0},
                 {"H1", cfg.H1},
                 {"H", cfg.H},
                 {"index_group", cfg.index_group},
                 {"source_kind", cfg.source_kind},
                 {"source_y1", cfg.source_y1},
                 {"source_y2", cfg.source_y2},
                 {"Jmax", cfg.Jmax},
                 {"source_method", cfg.source_method},
                 {"solver_method", cfg.solver_method}};
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"example", r.example},
                         {"N", r.N},
                         {"h", r.h},
                         {"rel_error", r.rel_error},
                         {"wall_time_s", r.wall_time},
                         {"iterations", r.iterations},
                         {"warnings", r.warnings}});
  if (rates) j["rates"] = {{"rate_N", rates->rate_N}, {"rate_h", rates->rate_h}};
  os << j.dump(2) << '\n';
}

std::vector<ErrorTableRow> parse_rows_csv(std::istream& is) {
  std::vector<ErrorTableRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::istringstream ss(line);
    std::string tok;
    ErrorTableRow r;
    std::getline(ss, tok, ',');
    r.example = std::stoi(tok);
    std::getline(ss, tok, ',');
    r.N = std::stoi(tok);
    std::getline(ss, tok, ',');
    r.h = std::stod(tok);
    std::getline(ss, tok, ',');
    r.rel_error = std::stod(tok);
    std::getline(ss, tok, ',');
    r.wall_time = std::stod(tok);
    std::getline(ss, tok, ',');
    r.iterations = std::stoi(tok);
    std::getline(ss, tok);
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') tok = tok.substr(1, tok.size() - 2);
    std::istringstream ws(tok);
    std::string wtok;
    while (std::getline(ws, wtok, ';'))
      if (!wtok.empty()) r.warnings.push_back(wtok);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace blochfem
