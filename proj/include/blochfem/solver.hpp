#pragma once

#include "blochfem/assembly.hpp"

namespace blochfem {

// Periodic nodal coefficients w~_j over the full periodic node set (bottom
// row carries the imposed Dirichlet values).
struct BlochField {
  const PeriodicCellMesh* mesh = nullptr;
  AlphaGrid grid;
  std::vector<Vec> blocks;

  // P1 interpolation of block j (1-based) at a cell point.
  cdouble eval_block(int j, Point x) const;
};

struct SolveReport {
  std::string method;
  int iterations = 0;
  double residual = 0.0;
  double wall_time = 0.0;
  std::vector<std::string> warnings;
};

struct SolverConfig {
  enum class Method { automatic, direct, gmres };
  Method method = Method::automatic;
  double tol_direct = 1e-10;
  double tol_iter = 1e-8;
  int max_iter = 600;
  int restart = 60;
  int direct_limit = 6000;  // auto mode switches to GMRES above this N*M
};

std::pair<BlochField, SolveReport> solve(const BlockSystem& sys, const SolverConfig& config = {},
                                         Diagnostics& diag = Diagnostics::ignore());

// u_{N,h}(x1 + Lambda m, x2) = (1/N) sqrt(2 pi/Lambda) sum_j e^{i alpha_j (x1 + Lambda m)} w~_j(x)
cdouble inverse_bloch(const BlochField& w, const AlphaGrid& grid, int copy_m, Point x);

// Trace values u_{N,h}(x1, H) on the cell, linear interpolation along the top.
std::vector<cdouble> reconstruct_on_trace(const BlochField& w, const std::vector<double>& x1_samples);

// ||u_num - u_ref|| / ||u_ref|| in the weighted (trapezoid) discrete L2 norm.
double relative_trace_error(const std::vector<cdouble>& u_num, const std::vector<cdouble>& u_ref,
                            const std::vector<double>& weights);

}  // namespace blochfem
