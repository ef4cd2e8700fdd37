#pragma once

#include "blochfem/medium.hpp"
#include "blochfem/spectral.hpp"

namespace blochfem {

// Half-space Green's function point source. Volume sources sit below the
// Dirichlet line Gamma_h0 (0 < y2 < h0); incident sources above Gamma_H.
struct HalfSpaceSource {
  enum class Kind { volume, incident };
  Point y;
  double k = 0.0;
  Kind kind = Kind::volume;
};

HalfSpaceSource make_volume_source(Point y, double k, double h0);
HalfSpaceSource make_incident_source(Point y, double k, double H);

// G(x,y) = (i/4) [H0(k|x-y|) - H0(k|x-y'|)], y' the image across x2 = 0.
cdouble green_half_space(Point x, const HalfSpaceSource& src);
cdouble green_half_space_dx2(Point x, const HalfSpaceSource& src);

// g(x) = k^2 n(x) G(x,y) with the true two-layer index n = n1 + n2.
cdouble manufactured_volume_source(const HalfSpaceSource& src, const LayerIndex& layer1,
                                   const LayerIndex& layer2, Point x);

// Phased periodization sum_m G(x + P m e1, y) e^{-i chi P m}, evaluated through
// its mode series (exponentially convergent away from the source height).
cdouble lattice_green(const HalfSpaceSource& src, double period, double chi, Point x);

enum class SourceRoute { spectral, lattice };

// Incident boundary data f = dG/dx2 - T+ G on Gamma_H, Bloch-transformed and
// expanded in periodic trace modes: returns f_hat[j][q + L] with
// e^{-i alpha_j x1} [Jf](alpha_j, x1) = sum_q f_hat e^{i Lambda* q x1}.
std::vector<std::vector<cdouble>> incident_boundary_data(const HalfSpaceSource& src,
                                                         const AlphaGrid& grid, int L, double H,
                                                         SourceRoute route, int Jmax,
                                                         Diagnostics& diag);

// Bloch-transformed manufactured data for one run: volume tables, bottom
// Dirichlet data and their matched supercell counterparts for the oracle.
class BlochSource {
 public:
  BlochSource(HalfSpaceSource src, LayerIndex layer1, LayerIndex layer2, AlphaGrid grid,
              SourceRoute route, int Jmax);

  // [Jg](alpha_j, x) at the given points, j = 1..N (volume kind).
  std::vector<std::vector<cdouble>> volume_table(const std::vector<Point>& pts,
                                                 Diagnostics& diag) const;
  // e^{-i alpha_j x1} [JG](alpha_j, x) at the given points (Gamma_h0 data).
  std::vector<std::vector<cdouble>> dirichlet_data(const std::vector<Point>& pts,
                                                   Diagnostics& diag) const;
  // Trace mode data for the incident kind.
  std::vector<std::vector<cdouble>> boundary_modes(int L, double H, Diagnostics& diag) const;

  // N Lambda-periodized g at supercell points; lattice_offset[i] is the integer
  // s with X = x_cell + Lambda s, so the lattice truncation set matches the
  // per-cell table exactly.
  std::vector<cdouble> supercell_volume(const std::vector<Point>& pts,
                                        const std::vector<int>& lattice_offset,
                                        Diagnostics& diag) const;
  // Supercell trace coefficients of the periodized incident data at the modes
  // mu_p = 2 pi p / (N Lambda).
  std::vector<cdouble> supercell_boundary_modes(const std::vector<int>& mode_ids, double H) const;

  const HalfSpaceSource& source() const { return src_; }
  SourceRoute route() const { return route_; }

 private:
  HalfSpaceSource src_;
  LayerIndex layer1_, layer2_;
  AlphaGrid grid_;
  SourceRoute route_;
  int Jmax_;
};

}  // namespace blochfem
