#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "blochfem/runner.hpp"

using namespace blochfem;

namespace {

int emit(const RunConfig& cfg, const std::vector<ErrorTableRow>& rows,
         const std::optional<ConvergenceResult>& rates, bool json) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!cfg.output_path.empty()) {
    file.open(cfg.output_path);
    if (!file) {
      std::cerr << "cannot open output file: " << cfg.output_path << "\n";
      return 2;
    }
    os = &file;
  }
  if (json || cfg.output_format == "json") write_rows_json(*os, cfg, rows, rates);
  else write_rows_csv(*os, cfg, rows, rates);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-layer periodic Helmholtz scattering via the Bloch-transform block solver"};
  app.require_subcommand(1);

  std::string config_path;
  bool json = false;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_flag("--json", json, "emit JSON instead of CSV");

  auto* cmd_example = app.add_subcommand("example", "run one of the paper-style examples 1..8");
  int ex_id = 1, ex_N = 10;
  double ex_h = 0.64, ex_max_err = 0.0;
  cmd_example->add_option("id", ex_id, "example id (1..8)")->required();
  cmd_example->add_option("--N", ex_N, "number of quasi-periodicity samples")->required();
  cmd_example->add_option("--h", ex_h, "target mesh size")->required();
  cmd_example->add_option("--max-err", ex_max_err, "exit 4 if the relative error exceeds this");

  auto* cmd_converge = app.add_subcommand("converge", "convergence sweep with fitted rates");
  int cv_id = 1;
  std::vector<int> cv_N;
  std::vector<double> cv_h;
  cmd_converge->add_option("--example", cv_id, "example id")->required();
  cmd_converge->add_option("--N-list", cv_N, "N values (>= 3)")->required()->expected(-1);
  cmd_converge->add_option("--h-list", cv_h, "h values (>= 3)")->required()->expected(-1);

  auto* cmd_oracle = app.add_subcommand("oracle", "finite-section equivalence check");
  int or_N = 2, or_id = 1;
  double or_h = 0.8, or_tol = 0.0;
  cmd_oracle->add_option("--N", or_N)->required();
  cmd_oracle->add_option("--h", or_h)->required();
  cmd_oracle->add_option("--example", or_id)->required();
  cmd_oracle->add_option("--tol", or_tol, "exit 4 if the relative difference exceeds this");

  auto* cmd_solve = app.add_subcommand("solve", "single solve described entirely by the config");
  std::string dump_mesh_path, dump_system_path;
  cmd_solve->add_option("--dump-mesh", dump_mesh_path, "write the mesh-listing dump here");
  cmd_solve->add_option("--dump-system", dump_system_path, "write the sparse-triplet dump here");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig base = config_path.empty() ? RunConfig{} : parse_config_file(config_path);

    if (cmd_example->parsed()) {
      ErrorTableRow row = run_example(ex_id, ex_N, ex_h, base);
      RunConfig echo = example_config(ex_id, base);
      echo.N = ex_N;
      echo.h = ex_h;
      const int rc = emit(echo, {row}, {}, json);
      if (rc) return rc;
      if (ex_max_err > 0.0 && row.rel_error > ex_max_err) {
        std::cerr << "relative error " << row.rel_error << " exceeds --max-err " << ex_max_err
                  << "\n";
        return 4;
      }
      return 0;
    }

    if (cmd_converge->parsed()) {
      ConvergenceResult res = run_convergence(cv_id, cv_N, cv_h, base);
      RunConfig echo = example_config(cv_id, base);
      return emit(echo, res.rows, res, json);
    }

    if (cmd_oracle->parsed()) {
      OracleCheck chk = run_oracle_check(or_N, or_h, or_id, base);
      std::cout << "oracle relative difference: " << chk.rel_diff << "\n";
      std::cout << "assembly counts: bloch " << chk.bloch_ops << " = (2+N)M, finite-section "
                << chk.supercell_ops << " = 3NM with M = " << chk.quad_points
                << (chk.counts_match ? " (match)" : " (MISMATCH)") << "\n";
      if (or_tol > 0.0 && chk.rel_diff > or_tol) {
        std::cerr << "difference exceeds --tol " << or_tol << "\n";
        return 4;
      }
      return chk.counts_match ? 0 : 4;
    }

    if (cmd_solve->parsed()) {
      Diagnostics diag;
      RunOutput out = solve_pipeline(base, diag, dump_system_path);
      if (!dump_mesh_path.empty()) {
        std::ofstream f(dump_mesh_path);
        dump_mesh(out.mesh, f);
      }
      std::cout << "solved: N=" << base.N << " h=" << base.h << " method=" << out.report.method
                << " iterations=" << out.report.iterations << " residual=" << out.report.residual
                << "\n";
      for (const auto& w : diag.warnings()) std::cout << "warning: " << w << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
