#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "blochfem/greens.hpp"
#include "blochfem/medium.hpp"
#include "blochfem/spectral.hpp"

namespace blochfem {

using SpMat = Eigen::SparseMatrix<cdouble>;
using Vec = Eigen::VectorXcd;

// Coefficient-evaluation tallies at quadrature points. One periodic cell has
// `cell_quad_points` of them (the M in the complexity formulas): the Bloch
// path costs (2 + N) M, the supercell path 3 N M.
struct AssemblyCounters {
  long long grad_evals = 0;
  long long mass_evals = 0;
  long long cell_quad_points = 0;
  long long total() const { return grad_evals + mass_evals; }
};

// Sparse cell matrix over periodic nodes (bottom row included; column 0 merged
// into column nx). Periodic node id = row * nx + (col - 1), rows 0..ny.
struct CellMatrix {
  enum class Label { A, Bplus, Bminus };
  SpMat mat;
  Label label = Label::A;
  int index = 0;              // alpha index j for A blocks, component m for B blocks
  bool hermitian_bulk = false;  // A minus its DtN part is Hermitian for real tilde_n
};

int periodic_node_count(const PeriodicCellMesh& mesh);
int periodic_node(const PeriodicCellMesh& mesh, int node);

// Quadrature points (3 per triangle, edge midpoints) in a fixed order.
std::vector<Point> quadrature_points(const PeriodicCellMesh& mesh);

// alpha-independent element integrals shared by all diagonal blocks.
struct CellForms {
  SpMat stiffness;     // grad phi . grad phi
  SpMat shift;         // d1 phi_trial phi_test - phi_trial d1 phi_test
  SpMat mass;          // phi phi
  SpMat mass_tilde;    // tilde_n phi phi
  std::vector<int> top_pnodes;
  std::vector<double> top_x1;
  double trace_dx = 0.0;
};

CellForms assemble_cell_forms(const PeriodicCellMesh& mesh, const std::vector<double>& tilde_n,
                              AssemblyCounters& counters);

// Trace Fourier coefficient of the periodic nodal hat at x_c against
// e^{-i Lambda* q x1}: (dx/Lambda) sinc^2(Lambda* q dx / 2) e^{-i Lambda* q x_c}.
cdouble trace_hat_coeff(double Lambda, double dx, double x_c, int q);

// Diagonal block A_j for quasi-periodicity alpha (pass truncation < 0 in the
// table to skip the DtN part).
CellMatrix assemble_A(const PeriodicCellMesh& mesh, const std::vector<double>& tilde_n, double k,
                      double alpha, const DtnSymbolTable& dtn);
CellMatrix combine_A(const CellForms& forms, const PeriodicCellMesh& mesh, double k, double alpha,
                     const DtnSymbolTable& dtn);

enum class CouplingSign { plus, minus };
CellMatrix assemble_B(const PeriodicCellMesh& mesh, const std::vector<cdouble>& component,
                      CouplingSign sign, AssemblyCounters& counters);

// G_j[l] = -int [Jg](alpha_j, x) e^{-i alpha_j x1} phi_l dx; the source table is
// indexed [j-1][quadrature point] in the order of quadrature_points().
std::vector<Vec> assemble_rhs_volume(const PeriodicCellMesh& mesh, const AlphaGrid& grid,
                                     const std::vector<std::vector<cdouble>>& source_table);

// G_j[l] = Lambda sum_q fhat[j-1][q+L] conj(hat_l(q)) on the top trace.
std::vector<Vec> assemble_rhs_boundary(const PeriodicCellMesh& mesh, const AlphaGrid& grid,
                                       const std::vector<std::vector<cdouble>>& fhat);

// Coupled block system [A - k^2 B] w = G over interior dofs, with Dirichlet
// bottom data folded into the right-hand side.
struct BlockSystem {
  int N = 1;
  int M = 0;  // interior dofs per block
  double k = 0.0;
  AlphaGrid grid;
  const PeriodicCellMesh* mesh = nullptr;

  std::vector<SpMat> A;        // interior x interior
  std::vector<SpMat> A_ib;     // interior x bottom
  std::vector<SpMat> Bplus, Bminus;
  std::vector<SpMat> Bplus_ib, Bminus_ib;
  std::vector<Vec> rhs;          // lifted
  std::vector<Vec> bottom_data;  // per block, size nx

  // B block acting on unknown j'' in row j (paper layout: B+_{j-j''} below the
  // diagonal, B-_{j-j''+N} on and above it).
  const SpMat& coupling(int j, int jpp) const {
    return j > jpp ? Bplus[j - jpp - 1] : Bminus[j - jpp + N - 1];
  }
  const SpMat& coupling_ib(int j, int jpp) const {
    return j > jpp ? Bplus_ib[j - jpp - 1] : Bminus_ib[j - jpp + N - 1];
  }
};

struct BlockSystemInputs {
  std::vector<std::vector<cdouble>> dirichlet;  // [j-1][bottom pnode 0..nx-1], may be empty
  std::vector<Vec> rhs;                         // over periodic nodes, from assemble_rhs_*
};

BlockSystem build_block_system(const PeriodicCellMesh& mesh, const MediumModel& medium,
                               const AlphaGrid& grid, double k,
                               const std::vector<DtnSymbolTable>& dtn_tables,
                               BlockSystemInputs inputs, AssemblyCounters& counters);

// Explicitly formed global sparse matrix (for tests and the direct solver).
SpMat global_matrix(const BlockSystem& sys);

// Block-structured matvec y = (A - k^2 B) x; reference serial version kept for
// testing the parallel kernel.
void block_matvec(const BlockSystem& sys, const std::vector<Vec>& x, std::vector<Vec>& y);
namespace serial_ref {
void block_matvec(const BlockSystem& sys, const std::vector<Vec>& x, std::vector<Vec>& y);
}

// Documented text dump: sparse triplets per block.
void dump_system(const BlockSystem& sys, std::ostream& os);

}  // namespace blochfem
