#include "blochfem/mesh.hpp"

#include <cmath>
#include <ostream>

namespace blochfem {

double PeriodicCellMesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  const Point& a = nodes[tri[0]];
  const Point& b = nodes[tri[1]];
  const Point& c = nodes[tri[2]];
  return 0.5 * ((b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2));
}

double PeriodicCellMesh::total_area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) s += triangle_area(static_cast<int>(t));
  return s;
}

PeriodicCellMesh build_cell_mesh(double Lambda, double h0, double H, double h) {
  if (!(Lambda > 0.0) || !(H > h0))
    throw std::invalid_argument("build_cell_mesh: invalid geometry (need Lambda > 0, H > h0)");
  if (!(h > 0.0) || h > 0.5 * (H - h0))
    throw std::invalid_argument("build_cell_mesh: invalid geometry (need 0 < h <= (H-h0)/2)");

  PeriodicCellMesh m;
  m.Lambda = Lambda;
  m.h0 = h0;
  m.H = H;
  m.h = h;
  m.nx = static_cast<int>(std::ceil(Lambda / h - 1e-12));
  m.ny = static_cast<int>(std::ceil((H - h0) / h - 1e-12));

  const double dx = Lambda / m.nx;
  const double dy = (H - h0) / m.ny;

  m.nodes.resize(static_cast<std::size_t>(m.nx + 1) * (m.ny + 1));
  for (int r = 0; r <= m.ny; ++r)
    for (int c = 0; c <= m.nx; ++c)
      m.nodes[m.node_id(c, r)] = Point{-0.5 * Lambda + c * dx, h0 + r * dy};

  m.triangles.reserve(2u * m.nx * m.ny);
  for (int r = 0; r < m.ny; ++r) {
    for (int c = 0; c < m.nx; ++c) {
      const int bl = m.node_id(c, r), br = m.node_id(c + 1, r);
      const int tl = m.node_id(c, r + 1), tr = m.node_id(c + 1, r + 1);
      m.triangles.push_back({bl, br, tr});
      m.triangles.push_back({bl, tr, tl});
    }
  }

  // dofs: bottom row eliminated, column 0 aliased to column nx
  m.dof_map.assign(m.nodes.size(), -1);
  int dof = 0;
  for (int r = 1; r <= m.ny; ++r)
    for (int c = 1; c <= m.nx; ++c) m.dof_map[m.node_id(c, r)] = dof++;
  m.num_dofs = dof;
  for (int r = 1; r <= m.ny; ++r) m.dof_map[m.node_id(0, r)] = m.dof_map[m.node_id(m.nx, r)];

  for (int c = 0; c <= m.nx; ++c) m.bottom_nodes.push_back(m.node_id(c, 0));
  for (int c = 1; c <= m.nx; ++c) m.top_nodes.push_back(m.node_id(c, m.ny));
  for (int r = 0; r <= m.ny; ++r) m.periodic_pairs.emplace_back(m.node_id(0, r), m.node_id(m.nx, r));
  return m;
}

int SupercellMesh::offset_node(int m, int cell_node) const {
  const int cols = cell_nx_ + 1;
  const int row = cell_node / cols;
  int col = cell_node % cols;
  if (col == 0) {  // left cell column lives on the previous copy's seam
    if (m == 0) return mesh.node_id(0, row);
    --m;
    col = cell_nx_;
  }
  return mesh.node_id(m * cell_nx_ + col, row);
}

std::pair<int, int> SupercellMesh::copy_of_node(int super_node) const {
  const int cols = mesh.nx + 1;
  const int row = super_node / cols;
  const int col = super_node % cols;
  if (col == 0) return {0, row * (cell_nx_ + 1)};
  const int m = (col - 1) / cell_nx_;
  const int cell_col = col - m * cell_nx_;
  return {m, row * (cell_nx_ + 1) + cell_col};
}

SupercellMesh tile_mesh(const PeriodicCellMesh& cell, int N) {
  if (N < 1) throw std::invalid_argument("tile_mesh: N must be >= 1");
  SupercellMesh s;
  s.N = N;
  s.cell_Lambda = cell.Lambda;
  s.cell_nx_ = cell.nx;

  PeriodicCellMesh& m = s.mesh;
  m.Lambda = N * cell.Lambda;
  m.h0 = cell.h0;
  m.H = cell.H;
  m.h = cell.h;
  m.nx = N * cell.nx;
  m.ny = cell.ny;

  const double dy = cell.dy();
  const double x_left = -0.5 * cell.Lambda + s.copy_shift(0);
  m.nodes.resize(static_cast<std::size_t>(m.nx + 1) * (m.ny + 1));
  for (int r = 0; r <= m.ny; ++r)
    for (int c = 0; c <= m.nx; ++c)
      m.nodes[m.node_id(c, r)] = Point{x_left + c * cell.dx(), cell.h0 + r * dy};

  m.triangles.reserve(2u * m.nx * m.ny);
  for (int r = 0; r < m.ny; ++r) {
    for (int c = 0; c < m.nx; ++c) {
      const int bl = m.node_id(c, r), br = m.node_id(c + 1, r);
      const int tl = m.node_id(c, r + 1), tr = m.node_id(c + 1, r + 1);
      m.triangles.push_back({bl, br, tr});
      m.triangles.push_back({bl, tr, tl});
    }
  }

  m.dof_map.assign(m.nodes.size(), -1);
  int dof = 0;
  for (int r = 1; r <= m.ny; ++r)
    for (int c = 1; c <= m.nx; ++c) m.dof_map[m.node_id(c, r)] = dof++;
  m.num_dofs = dof;
  for (int r = 1; r <= m.ny; ++r) m.dof_map[m.node_id(0, r)] = m.dof_map[m.node_id(m.nx, r)];

  for (int c = 0; c <= m.nx; ++c) m.bottom_nodes.push_back(m.node_id(c, 0));
  for (int c = 1; c <= m.nx; ++c) m.top_nodes.push_back(m.node_id(c, m.ny));
  for (int r = 0; r <= m.ny; ++r) m.periodic_pairs.emplace_back(m.node_id(0, r), m.node_id(m.nx, r));
  return s;
}

void dump_mesh(const PeriodicCellMesh& mesh, std::ostream& os) {
  os << "# blochfem mesh v1\n";
  os << "# Lambda h0 H h nx ny\n";
  os << "param " << mesh.Lambda << ' ' << mesh.h0 << ' ' << mesh.H << ' ' << mesh.h << ' '
     << mesh.nx << ' ' << mesh.ny << '\n';
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    os << "node " << i << ' ' << mesh.nodes[i].x1 << ' ' << mesh.nodes[i].x2 << '\n';
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    os << "tri " << t << ' ' << mesh.triangles[t][0] << ' ' << mesh.triangles[t][1] << ' '
       << mesh.triangles[t][2] << '\n';
  for (auto [l, r] : mesh.periodic_pairs) os << "pair " << l << ' ' << r << '\n';
  for (std::size_t i = 0; i < mesh.dof_map.size(); ++i) os << "dof " << i << ' ' << mesh.dof_map[i] << '\n';
}

}  // namespace blochfem
