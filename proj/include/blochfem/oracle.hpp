#pragma once

#include "blochfem/solver.hpp"

namespace blochfem {

// Finite-section reference solve: the N Lambda-periodic problem with the
// periodized index, assembled directly over the tiled supercell with the
// N Lambda-periodic DtN (modes 2 pi p / (N Lambda) covering the per-alpha
// cell modes). Solved densely, independent of the block machinery.
struct SupercellResult {
  std::vector<cdouble> nodal;     // field at every supercell mesh node
  std::vector<Vec> coefficients;  // modulated-basis coefficients per alpha block
  AssemblyCounters counters;
};

// dirichlet carries the same per-block bottom data the cell path imposes
// (empty for homogeneous problems); L_cell is the per-alpha DtN truncation
// whose union mode set the supercell operator uses.
SupercellResult solve_supercell(const SupercellMesh& supermesh, const MediumModel& medium, double k,
                                const AlphaGrid& grid, const BlochSource& source, int L_cell,
                                const std::vector<std::vector<cdouble>>& dirichlet,
                                Diagnostics& diag = Diagnostics::ignore());

// Relative l2 difference over all supercell nodes between the finite-section
// field and the inverse-Bloch reconstruction of a cell solve.
double supercell_vs_bloch(const SupercellResult& fs, const SupercellMesh& supermesh,
                          const BlochField& w);

}  // namespace blochfem
