#pragma once

#include <iosfwd>
#include <optional>

#include "blochfem/oracle.hpp"

namespace blochfem {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double k = 1.0;
  double Lambda = 2.0 * pi;
  double h0 = 1.0;
  double H1 = 2.0;
  double H = 3.0;
  int N = 10;
  double h = 0.64;

  std::string index_group = "group1";  // group1 | group2
  double n1_scale = 1.0;
  double n2_scale = 1.0;
  double lambda1 = 0.0;  // 0 = group default period of layer 1

  std::string source_kind = "volume";  // volume | incident
  double source_y1 = 0.5, source_y2 = 0.4;  // defaults switch with the kind
  bool source_point_set = false;

  int band = 0;        // 0 = 8 N
  int samples_x1 = 0;  // 0 = 1000 N
  int samples_x2 = 1000;
  int dtn_truncation = -1;  // -1 = nyquist (floor(nx/2))
  std::string source_method = "auto";  // auto | spectral | lattice
  int Jmax = 200;

  std::string solver_method = "auto";  // auto | direct | gmres
  double solver_tol = 0.0;             // 0 = method default
  int max_iter = 600;
  int restart = 60;

  int N_ref = 0;      // reference for examples 5-8; 0 = 2 N
  double h_ref = 0.0; // 0 = h / 2

  std::string output_path;             // empty = stdout
  std::string output_format = "csv";   // csv | json
};

RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& line);

struct ErrorTableRow {
  int example = 0;
  int N = 0;
  double h = 0.0;
  double rel_error = 0.0;
  double wall_time = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

// One full pipeline execution (mesh, medium, sources, assembly, solve).
struct RunOutput {
  PeriodicCellMesh mesh;
  MediumModel medium;
  AlphaGrid grid;
  BlochField field;
  SolveReport report;
  AssemblyCounters counters;
  std::vector<std::vector<cdouble>> dirichlet;  // bottom data handed to the system
  std::vector<double> trace_x1;                 // top-node sample abscissae
  std::vector<cdouble> trace;                   // reconstructed trace values
};

// dump_system_path, when nonempty, receives the assembled block system in the
// documented sparse-triplet text format before solving.
RunOutput solve_pipeline(const RunConfig& cfg, Diagnostics& diag,
                         const std::string& dump_system_path = "");

// Applies the per-example wavenumber/index/source configuration (1..8).
RunConfig example_config(int id, const RunConfig& base);

ErrorTableRow run_example(int id, int N, double h, const RunConfig& base);

struct ConvergenceResult {
  std::vector<ErrorTableRow> rows;
  double rate_N = 0.0;  // log-log slope over N at the smallest h
  double rate_h = 0.0;  // log-log slope over h at the largest N
};

ConvergenceResult run_convergence(int id, std::vector<int> N_list, std::vector<double> h_list,
                                  const RunConfig& base);

struct OracleCheck {
  double rel_diff = 0.0;
  long long bloch_ops = 0;
  long long supercell_ops = 0;
  long long quad_points = 0;  // M in the complexity formulas
  bool counts_match = false;  // bloch == (2+N) M and supercell == 3 N M
};

OracleCheck run_oracle_check(int N, double h, int id, const RunConfig& base);

// Least-squares slope of log(err) against log(t).
double loglog_slope(const std::vector<double>& t, const std::vector<double>& err);

void write_rows_csv(std::ostream& os, const RunConfig& cfg, const std::vector<ErrorTableRow>& rows,
                    const std::optional<ConvergenceResult>& rates = {});
void write_rows_json(std::ostream& os, const RunConfig& cfg, const std::vector<ErrorTableRow>& rows,
                     const std::optional<ConvergenceResult>& rates = {});
std::vector<ErrorTableRow> parse_rows_csv(std::istream& is);

}  // namespace blochfem
