#pragma once

#include <array>
#include <iosfwd>

#include "blochfem/core.hpp"

namespace blochfem {

// Structured triangulation of the periodic cell (-Lambda/2, Lambda/2] x (h0, H).
//
// The node grid has (nx+1) columns and (ny+1) rows; column 0 (the left edge)
// is identified with column nx, bottom row nodes carry no degree of freedom.
// Every rectangle is split bottom-left to top-right so that a tiled supercell
// mesh is an exact translate of the cell mesh.
struct PeriodicCellMesh {
  double Lambda = 0.0;
  double h0 = 0.0;
  double H = 0.0;
  double h = 0.0;  // requested mesh size

  int nx = 0;  // columns of rectangles (= periodic nodes per row)
  int ny = 0;  // rows of rectangles

  std::vector<Point> nodes;                       // (nx+1)*(ny+1) grid points
  std::vector<std::array<int, 3>> triangles;      // CCW vertex indices
  std::vector<int> bottom_nodes;                  // nodes on x2 = h0
  std::vector<int> top_nodes;                     // dof-carrying nodes on x2 = H, by x1
  std::vector<std::pair<int, int>> periodic_pairs;  // left node -> right node
  std::vector<int> dof_map;                       // node -> dof, -1 on the bottom

  int num_dofs = 0;  // nx * ny

  int node_id(int col, int row) const { return row * (nx + 1) + col; }
  double dx() const { return Lambda / nx; }
  double dy() const { return (H - h0) / ny; }

  // Nodes representing distinct dofs plus the bottom row (columns 1..nx).
  bool is_left_column(int node) const { return node % (nx + 1) == 0; }

  double triangle_area(int t) const;
  double total_area() const;
};

// N-fold x1-tiling of a cell mesh covering one NLambda period.
// Copy m (m = 0..N-1) is the cell translated by (m - floor(N/2)) * Lambda,
// so copy shifts are always integer multiples of Lambda.
struct SupercellMesh {
  PeriodicCellMesh mesh;   // same layout, nx scaled by N
  int N = 1;
  double cell_Lambda = 0.0;

  // (copy m, cell node id) -> supercell node id
  int offset_node(int m, int cell_node) const;
  // supercell node id -> (copy, cell node id); left column maps onto copy 0
  std::pair<int, int> copy_of_node(int super_node) const;
  double copy_shift(int m) const { return (m - N / 2) * cell_Lambda; }

 private:
  friend SupercellMesh tile_mesh(const PeriodicCellMesh&, int);
  int cell_nx_ = 0;
};

PeriodicCellMesh build_cell_mesh(double Lambda, double h0, double H, double h);
SupercellMesh tile_mesh(const PeriodicCellMesh& cell, int N);

// Plain-text dump: one record per line (see README for the format).
void dump_mesh(const PeriodicCellMesh& mesh, std::ostream& os);

}  // namespace blochfem
