#include "blochfem/assembly.hpp"

#include <cmath>
#include <ostream>

namespace blochfem {

namespace {

double sinc(double u) { return std::fabs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u; }

struct ElemGeom {
  int pn[3];      // periodic node ids
  Point mid[3];   // edge midpoints (quadrature points)
  double area;
  double gx[3], gy[3];  // P1 basis gradients
};

ElemGeom element_geometry(const PeriodicCellMesh& mesh, int t) {
  ElemGeom e;
  const auto& tri = mesh.triangles[t];
  Point p[3];
  for (int i = 0; i < 3; ++i) {
    p[i] = mesh.nodes[tri[i]];
    e.pn[i] = periodic_node(mesh, tri[i]);
  }
  const double d1x = p[1].x1 - p[0].x1, d1y = p[1].x2 - p[0].x2;
  const double d2x = p[2].x1 - p[0].x1, d2y = p[2].x2 - p[0].x2;
  const double det = d1x * d2y - d2x * d1y;
  e.area = 0.5 * det;
  // grad lambda_i from the inverse Jacobian
  e.gx[1] = d2y / det;
  e.gy[1] = -d2x / det;
  e.gx[2] = -d1y / det;
  e.gy[2] = d1x / det;
  e.gx[0] = -e.gx[1] - e.gx[2];
  e.gy[0] = -e.gy[1] - e.gy[2];
  // quadrature point q is the midpoint opposite vertex q: lambda_i(q) = (i != q)/2
  e.mid[0] = {0.5 * (p[1].x1 + p[2].x1), 0.5 * (p[1].x2 + p[2].x2)};
  e.mid[1] = {0.5 * (p[0].x1 + p[2].x1), 0.5 * (p[0].x2 + p[2].x2)};
  e.mid[2] = {0.5 * (p[0].x1 + p[1].x1), 0.5 * (p[0].x2 + p[1].x2)};
  return e;
}

constexpr double basis_at_mid(int i, int q) { return i == q ? 0.0 : 0.5; }

}  // namespace

int periodic_node_count(const PeriodicCellMesh& mesh) { return mesh.nx * (mesh.ny + 1); }

int periodic_node(const PeriodicCellMesh& mesh, int node) {
  const int cols = mesh.nx + 1;
  const int row = node / cols;
  int col = node % cols;
  if (col == 0) col = mesh.nx;
  return row * mesh.nx + (col - 1);
}

std::vector<Point> quadrature_points(const PeriodicCellMesh& mesh) {
  std::vector<Point> pts;
  pts.reserve(3 * mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const ElemGeom e = element_geometry(mesh, static_cast<int>(t));
    for (int q = 0; q < 3; ++q) pts.push_back(e.mid[q]);
  }
  return pts;
}

CellForms assemble_cell_forms(const PeriodicCellMesh& mesh, const std::vector<double>& tilde_n,
                              AssemblyCounters& counters) {
  const int np = periodic_node_count(mesh);
  std::vector<Eigen::Triplet<cdouble>> tk, ts, tm, tmn;
  tk.reserve(9 * mesh.triangles.size());
  ts.reserve(9 * mesh.triangles.size());
  tm.reserve(9 * mesh.triangles.size());
  tmn.reserve(9 * mesh.triangles.size());

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const ElemGeom e = element_geometry(mesh, static_cast<int>(t));
    const auto& tri = mesh.triangles[t];
    double tn[3];
    for (int i = 0; i < 3; ++i) tn[i] = tilde_n[tri[i]];
    counters.grad_evals += 2 * 3;  // two gradient factors per quadrature point
    counters.cell_quad_points += 3;
    const double w = e.area / 3.0;
    for (int i = 0; i < 3; ++i) {      // test
      for (int j = 0; j < 3; ++j) {    // trial
        const double kij = e.area * (e.gx[i] * e.gx[j] + e.gy[i] * e.gy[j]);
        // int (d1 phi_j phi_i - phi_j d1 phi_i) over the element
        const double sij = (e.area / 3.0) * (e.gx[j] - e.gx[i]);
        double mij = 0.0, mnij = 0.0;
        for (int q = 0; q < 3; ++q) {
          const double bq = basis_at_mid(i, q) * basis_at_mid(j, q);
          if (bq == 0.0) continue;
          double tq = 0.0;  // P1 interpolant of tilde_n at the midpoint
          for (int v = 0; v < 3; ++v) tq += basis_at_mid(v, q) * tn[v];
          mij += w * bq;
          mnij += w * bq * tq;
        }
        tk.emplace_back(e.pn[i], e.pn[j], kij);
        ts.emplace_back(e.pn[i], e.pn[j], sij);
        tm.emplace_back(e.pn[i], e.pn[j], mij);
        tmn.emplace_back(e.pn[i], e.pn[j], mnij);
      }
    }
  }

  CellForms f;
  f.stiffness.resize(np, np);
  f.stiffness.setFromTriplets(tk.begin(), tk.end());
  f.shift.resize(np, np);
  f.shift.setFromTriplets(ts.begin(), ts.end());
  f.mass.resize(np, np);
  f.mass.setFromTriplets(tm.begin(), tm.end());
  f.mass_tilde.resize(np, np);
  f.mass_tilde.setFromTriplets(tmn.begin(), tmn.end());

  for (int n : mesh.top_nodes) {
    f.top_pnodes.push_back(periodic_node(mesh, n));
    f.top_x1.push_back(mesh.nodes[n].x1);
  }
  f.trace_dx = mesh.dx();
  return f;
}

cdouble trace_hat_coeff(double Lambda, double dx, double x_c, int q) {
  const double Lstar = 2.0 * pi / Lambda;
  const double s = sinc(0.5 * Lstar * q * dx);
  return (dx / Lambda) * s * s * std::polar(1.0, -Lstar * q * x_c);
}

CellMatrix combine_A(const CellForms& forms, const PeriodicCellMesh& mesh, double k, double alpha,
                     const DtnSymbolTable& dtn) {
  CellMatrix out;
  out.label = CellMatrix::Label::A;
  out.hermitian_bulk = true;
  const cdouble ia(0.0, alpha);
  out.mat = forms.stiffness + ia * forms.shift + cdouble(alpha * alpha) * forms.mass -
            cdouble(k * k) * forms.mass_tilde;

  const int L = dtn.truncation;
  if (L >= 0) {
    // dense DtN coupling on the top trace:
    // D[test l][trial l'] = Lambda sum_p sigma_p hat_l(p) conj(hat_l'(p))
    const int nt = static_cast<int>(forms.top_pnodes.size());
    std::vector<Eigen::Triplet<cdouble>> td;
    td.reserve(static_cast<std::size_t>(nt) * nt);
    for (int a = 0; a < nt; ++a) {
      for (int b = 0; b < nt; ++b) {
        cdouble d = 0.0;
        for (int p = -L; p <= L; ++p) {
          const cdouble ha = trace_hat_coeff(mesh.Lambda, forms.trace_dx, forms.top_x1[a], p);
          const cdouble hb = trace_hat_coeff(mesh.Lambda, forms.trace_dx, forms.top_x1[b], p);
          d += dtn.symbol(p) * ha * std::conj(hb);
        }
        td.emplace_back(forms.top_pnodes[a], forms.top_pnodes[b], -mesh.Lambda * d);
      }
    }
    SpMat D(out.mat.rows(), out.mat.cols());
    D.setFromTriplets(td.begin(), td.end());
    out.mat += D;
  }
  return out;
}

CellMatrix assemble_A(const PeriodicCellMesh& mesh, const std::vector<double>& tilde_n, double k,
                      double alpha, const DtnSymbolTable& dtn) {
  AssemblyCounters scratch;
  const CellForms forms = assemble_cell_forms(mesh, tilde_n, scratch);
  return combine_A(forms, mesh, k, alpha, dtn);
}

CellMatrix assemble_B(const PeriodicCellMesh& mesh, const std::vector<cdouble>& component,
                      CouplingSign sign, AssemblyCounters& counters) {
  const int np = periodic_node_count(mesh);
  const double Lstar = 2.0 * pi / mesh.Lambda;
  std::vector<Eigen::Triplet<cdouble>> tb;
  tb.reserve(9 * mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const ElemGeom e = element_geometry(mesh, static_cast<int>(t));
    const auto& tri = mesh.triangles[t];
    cdouble cv[3];
    for (int i = 0; i < 3; ++i) cv[i] = component[tri[i]];
    counters.mass_evals += 3;
    const double w = e.area / 3.0;
    cdouble cq[3];
    for (int q = 0; q < 3; ++q) {
      cq[q] = 0.0;
      for (int v = 0; v < 3; ++v) cq[q] += basis_at_mid(v, q) * cv[v];
      if (sign == CouplingSign::minus) cq[q] *= std::polar(1.0, Lstar * e.mid[q].x1);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        cdouble v = 0.0;
        for (int q = 0; q < 3; ++q) v += w * cq[q] * basis_at_mid(i, q) * basis_at_mid(j, q);
        tb.emplace_back(e.pn[i], e.pn[j], v);
      }
  }
  CellMatrix out;
  out.label = sign == CouplingSign::plus ? CellMatrix::Label::Bplus : CellMatrix::Label::Bminus;
  out.mat.resize(np, np);
  out.mat.setFromTriplets(tb.begin(), tb.end());
  return out;
}

std::vector<Vec> assemble_rhs_volume(const PeriodicCellMesh& mesh, const AlphaGrid& grid,
                                     const std::vector<std::vector<cdouble>>& source_table) {
  const int np = periodic_node_count(mesh);
  std::vector<Vec> rhs(grid.N, Vec::Zero(np));
#pragma omp parallel for schedule(static)
  for (int j = 1; j <= grid.N; ++j) {
    const double alpha = grid.alpha(j);
    const auto& tab = source_table[j - 1];
    Vec& g = rhs[j - 1];
    std::size_t qp = 0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const ElemGeom e = element_geometry(mesh, static_cast<int>(t));
      const double w = e.area / 3.0;
      for (int q = 0; q < 3; ++q, ++qp) {
        const cdouble val = tab[qp];
        if (val == cdouble(0.0)) continue;
        const cdouble common = -w * val * std::polar(1.0, -alpha * e.mid[q].x1);
        for (int i = 0; i < 3; ++i) {
          const double b = basis_at_mid(i, q);
          if (b != 0.0) g[e.pn[i]] += common * b;
        }
      }
    }
  }
  return rhs;
}

std::vector<Vec> assemble_rhs_boundary(const PeriodicCellMesh& mesh, const AlphaGrid& grid,
                                       const std::vector<std::vector<cdouble>>& fhat) {
  const int np = periodic_node_count(mesh);
  const int L = (static_cast<int>(fhat.front().size()) - 1) / 2;
  std::vector<Vec> rhs(grid.N, Vec::Zero(np));
  for (int j = 1; j <= grid.N; ++j) {
    Vec& g = rhs[j - 1];
    for (int n : mesh.top_nodes) {
      const int pn = periodic_node(mesh, n);
      const double xc = mesh.nodes[n].x1;
      cdouble v = 0.0;
      for (int q = -L; q <= L; ++q)
        v += fhat[j - 1][q + L] * std::conj(trace_hat_coeff(mesh.Lambda, mesh.dx(), xc, q));
      g[pn] += mesh.Lambda * v;
    }
  }
  return rhs;
}

namespace {

// split a periodic-node matrix into interior and bottom column blocks
void split_columns(const SpMat& full, int nx, SpMat& ii, SpMat& ib) {
  const int np = static_cast<int>(full.rows());
  const int M = np - nx;  // interior dofs: pnode - nx
  std::vector<Eigen::Triplet<cdouble>> tii, tib;
  for (int k = 0; k < full.outerSize(); ++k) {
    for (SpMat::InnerIterator it(full, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      if (r < nx) continue;  // bottom test functions are not equations
      if (c < nx) tib.emplace_back(r - nx, c, it.value());
      else tii.emplace_back(r - nx, c - nx, it.value());
    }
  }
  ii.resize(M, M);
  ii.setFromTriplets(tii.begin(), tii.end());
  ib.resize(M, nx);
  ib.setFromTriplets(tib.begin(), tib.end());
}

}  // namespace

BlockSystem build_block_system(const PeriodicCellMesh& mesh, const MediumModel& medium,
                               const AlphaGrid& grid, double k,
                               const std::vector<DtnSymbolTable>& dtn_tables,
                               BlockSystemInputs inputs, AssemblyCounters& counters) {
  if (medium.N != grid.N)
    throw std::invalid_argument("build_block_system: medium and grid disagree on N");
  const int N = grid.N;
  const int nx = mesh.nx;
  const int np = periodic_node_count(mesh);

  BlockSystem sys;
  sys.N = N;
  sys.M = np - nx;
  sys.k = k;
  sys.grid = grid;
  sys.mesh = &mesh;

  const CellForms forms = assemble_cell_forms(mesh, medium.tilde_nN, counters);

  sys.A.resize(N);
  sys.A_ib.resize(N);
#pragma omp parallel for schedule(dynamic)
  for (int j = 1; j <= N; ++j) {
    CellMatrix aj = combine_A(forms, mesh, k, grid.alpha(j), dtn_tables[j - 1]);
    split_columns(aj.mat, nx, sys.A[j - 1], sys.A_ib[j - 1]);
  }

  sys.Bplus.resize(N);
  sys.Bminus.resize(N);
  sys.Bplus_ib.resize(N);
  sys.Bminus_ib.resize(N);
#pragma omp parallel for schedule(dynamic)
  for (int m = 1; m <= N; ++m) {
    AssemblyCounters local;
    CellMatrix bp = assemble_B(mesh, medium.components[m - 1], CouplingSign::plus, local);
    CellMatrix bm = assemble_B(mesh, medium.components[m - 1], CouplingSign::minus, local);
    split_columns(bp.mat, nx, sys.Bplus[m - 1], sys.Bplus_ib[m - 1]);
    split_columns(bm.mat, nx, sys.Bminus[m - 1], sys.Bminus_ib[m - 1]);
#pragma omp critical
    counters.mass_evals += local.mass_evals / 2;  // one coefficient evaluation per (m, point)
  }

  // right-hand side over interior dofs, Dirichlet data folded in
  sys.rhs.assign(N, Vec::Zero(sys.M));
  sys.bottom_data.assign(N, Vec::Zero(nx));
  const bool has_data = !inputs.dirichlet.empty();
  for (int j = 1; j <= N; ++j) {
    Vec g = inputs.rhs.empty() ? Vec::Zero(np) : inputs.rhs[j - 1];
    sys.rhs[j - 1] = g.segment(nx, sys.M);
    if (has_data)
      for (int b = 0; b < nx; ++b) sys.bottom_data[j - 1][b] = inputs.dirichlet[j - 1][b];
  }
  if (has_data) {
    for (int j = 1; j <= N; ++j) {
      sys.rhs[j - 1] -= sys.A_ib[j - 1] * sys.bottom_data[j - 1];
      for (int jpp = 1; jpp <= N; ++jpp)
        sys.rhs[j - 1] += cdouble(k * k) * (sys.coupling_ib(j, jpp) * sys.bottom_data[jpp - 1]);
    }
  }
  for (int j = 0; j < N; ++j) {
    if (!sys.rhs[j].allFinite())
      throw std::runtime_error("build_block_system: non-finite right-hand side entries");
  }
  return sys;
}

SpMat global_matrix(const BlockSystem& sys) {
  const int N = sys.N, M = sys.M;
  std::vector<Eigen::Triplet<cdouble>> trips;
  for (int j = 1; j <= N; ++j) {
    const SpMat& a = sys.A[j - 1];
    for (int k2 = 0; k2 < a.outerSize(); ++k2)
      for (SpMat::InnerIterator it(a, k2); it; ++it)
        trips.emplace_back((j - 1) * M + it.row(), (j - 1) * M + it.col(), it.value());
    for (int jpp = 1; jpp <= N; ++jpp) {
      const SpMat& b = sys.coupling(j, jpp);
      const cdouble f = -sys.k * sys.k;
      for (int k2 = 0; k2 < b.outerSize(); ++k2)
        for (SpMat::InnerIterator it(b, k2); it; ++it)
          trips.emplace_back((j - 1) * M + it.row(), (jpp - 1) * M + it.col(), f * it.value());
    }
  }
  SpMat g(N * M, N * M);
  g.setFromTriplets(trips.begin(), trips.end());
  return g;
}

namespace serial_ref {
void block_matvec(const BlockSystem& sys, const std::vector<Vec>& x, std::vector<Vec>& y) {
  const int N = sys.N;
  y.resize(N);
  for (int j = 1; j <= N; ++j) {
    y[j - 1] = sys.A[j - 1] * x[j - 1];
    Vec acc = Vec::Zero(sys.M);
    for (int jpp = 1; jpp <= N; ++jpp) acc += sys.coupling(j, jpp) * x[jpp - 1];
    y[j - 1] -= cdouble(sys.k * sys.k) * acc;
  }
}
}  // namespace serial_ref

void block_matvec(const BlockSystem& sys, const std::vector<Vec>& x, std::vector<Vec>& y) {
  const int N = sys.N;
  y.resize(N);
#pragma omp parallel for schedule(static)
  for (int j = 1; j <= N; ++j) {
    y[j - 1] = sys.A[j - 1] * x[j - 1];
    Vec acc = Vec::Zero(sys.M);
    for (int jpp = 1; jpp <= N; ++jpp) acc += sys.coupling(j, jpp) * x[jpp - 1];
    y[j - 1] -= cdouble(sys.k * sys.k) * acc;
  }
}

void dump_system(const BlockSystem& sys, std::ostream& os) {
  os << "# blochfem system v1\n";
  os << "# N M k\n";
  os << "param " << sys.N << ' ' << sys.M << ' ' << sys.k << '\n';
  auto dump_block = [&os](const char* tag, int idx, const SpMat& m) {
    os << "block " << tag << ' ' << idx << ' ' << m.nonZeros() << '\n';
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMat::InnerIterator it(m, k); it; ++it)
        os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag()
           << '\n';
  };
  for (int j = 1; j <= sys.N; ++j) dump_block("A", j, sys.A[j - 1]);
  for (int m = 1; m <= sys.N; ++m) dump_block("B+", m, sys.Bplus[m - 1]);
  for (int m = 1; m <= sys.N; ++m) dump_block("B-", m, sys.Bminus[m - 1]);
  for (int j = 1; j <= sys.N; ++j) {
    os << "rhs " << j << '\n';
    for (int i = 0; i < sys.M; ++i)
      os << i << ' ' << sys.rhs[j - 1][i].real() << ' ' << sys.rhs[j - 1][i].imag() << '\n';
  }
}

}  // namespace blochfem
