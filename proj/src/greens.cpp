#include "blochfem/greens.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "blochfem/special.hpp"

namespace blochfem {

HalfSpaceSource make_volume_source(Point y, double k, double h0) {
  if (!(y.x2 > 0.0 && y.x2 < h0))
    throw std::invalid_argument("make_volume_source: need 0 < y2 < h0");
  return {y, k, HalfSpaceSource::Kind::volume};
}

HalfSpaceSource make_incident_source(Point y, double k, double H) {
  if (!(y.x2 > H)) throw std::invalid_argument("make_incident_source: need y2 > H");
  return {y, k, HalfSpaceSource::Kind::incident};
}

cdouble green_half_space(Point x, const HalfSpaceSource& src) {
  const double dx = x.x1 - src.y.x1;
  const double r = std::hypot(dx, x.x2 - src.y.x2);
  const double rp = std::hypot(dx, x.x2 + src.y.x2);
  if (r < 1e-13 || rp < 1e-13)
    throw std::domain_error("green_half_space: singularity (x coincides with source or image)");
  return 0.25 * cdouble(0.0, 1.0) * (hankel_h0_1(src.k * r) - hankel_h0_1(src.k * rp));
}

cdouble green_half_space_dx2(Point x, const HalfSpaceSource& src) {
  const double dx = x.x1 - src.y.x1;
  const double r = std::hypot(dx, x.x2 - src.y.x2);
  const double rp = std::hypot(dx, x.x2 + src.y.x2);
  if (r < 1e-13 || rp < 1e-13)
    throw std::domain_error("green_half_space_dx2: singularity");
  const double k = src.k;
  const cdouble d_r = -k * hankel_h1_1(k * r) * ((x.x2 - src.y.x2) / r);
  const cdouble d_rp = -k * hankel_h1_1(k * rp) * ((x.x2 + src.y.x2) / rp);
  return 0.25 * cdouble(0.0, 1.0) * (d_r - d_rp);
}

cdouble manufactured_volume_source(const HalfSpaceSource& src, const LayerIndex& layer1,
                                   const LayerIndex& layer2, Point x) {
  const double n = layer1.eval(x.x1, x.x2) + layer2.eval(x.x1, x.x2);
  if (n == 0.0) return 0.0;
  return src.k * src.k * n * green_half_space(x, src);
}

namespace {

// (e^{i beta a} - e^{i beta b}) / (2 i beta), a = x2+y2, b = |x2-y2|.
cdouble mode_profile(cdouble beta, double a, double b) {
  const cdouble ib = cdouble(0.0, 1.0) * beta;
  if (std::abs(beta) * a < 1e-6) {
    return 0.5 * (a - b) + 0.25 * ib * (a * a - b * b) + ib * ib * (a * a * a - b * b * b) / 12.0;
  }
  return (std::exp(ib * a) - std::exp(ib * b)) / (2.0 * ib);
}

cdouble sqrt_up(double disc) { return std::sqrt(cdouble(disc, 0.0)); }  // Im >= 0 branch

}  // namespace

cdouble lattice_green(const HalfSpaceSource& src, double period, double chi, Point x) {
  const double k = src.k;
  const double a = x.x2 + src.y.x2;
  const double b = std::fabs(x.x2 - src.y.x2);
  if (b < 1e-9) throw std::domain_error("lattice_green: evaluation at the source height");
  const double dxi = 2.0 * pi / period;
  const double rel = x.x1 - src.y.x1;

  auto term = [&](long q) -> cdouble {
    const double xi = chi + dxi * q;
    const cdouble beta = sqrt_up(k * k - xi * xi);
    return mode_profile(beta, a, b) * std::polar(1.0, xi * rel);
  };

  const long q0 = std::lround(-chi / dxi);
  cdouble acc = term(q0);
  double scale = std::abs(acc);
  int below = 0;
  const long qcap = 4000000;
  for (long d = 1; d < qcap; ++d) {
    const cdouble tp = term(q0 + d);
    const cdouble tm = term(q0 - d);
    acc += tp + tm;
    scale = std::max(scale, std::abs(acc));
    if (std::abs(tp) + std::abs(tm) < 1e-16 * (scale + 1e-300)) {
      if (++below >= 4) break;
    } else {
      below = 0;
    }
  }
  return acc / period;
}

std::vector<std::vector<cdouble>> incident_boundary_data(const HalfSpaceSource& src,
                                                         const AlphaGrid& grid, int L, double H,
                                                         SourceRoute route, int Jmax,
                                                         Diagnostics& diag) {
  if (src.kind != HalfSpaceSource::Kind::incident)
    throw std::invalid_argument("incident_boundary_data: source must be of incident kind");
  const int N = grid.N;
  const double Lstar = grid.Lambda_star();
  const double C_Lambda = std::sqrt(grid.Lambda / (2.0 * pi));
  std::vector<std::vector<cdouble>> fhat(N, std::vector<cdouble>(2 * L + 1, cdouble(0.0)));

  if (route == SourceRoute::spectral) {
    for (int j = 1; j <= N; ++j) {
      const double alpha = grid.alpha(j);
      for (int q = -L; q <= L; ++q) {
        const double xi = alpha + Lstar * q;
        const cdouble beta = sqrt_up(src.k * src.k - xi * xi);
        fhat[j - 1][q + L] = (C_Lambda / grid.Lambda) *
                             std::exp(cdouble(0.0, 1.0) * beta * (src.y.x2 - H)) *
                             std::polar(1.0, -xi * src.y.x1);
      }
    }
    return fhat;
  }

  // Lattice route: Bloch-transform G and dG/dx2 on the trace, expand the
  // periodized samples, then apply the DtN symbols in mode space.
  const int T = std::max(8 * L + 8, 64);
  const double dx = grid.Lambda / T;
  auto Gfun = [&](double x1, double x2) { return green_half_space({x1, x2}, src); };
  auto dGfun = [&](double x1, double x2) { return green_half_space_dx2({x1, x2}, src); };
  for (int j = 1; j <= N; ++j) {
    const double alpha = grid.alpha(j);
    std::vector<cdouble> pu(T), pd(T);
    double tail = 0.0;
    for (int s = 0; s < T; ++s) {
      const double x1 = -0.5 * grid.Lambda + s * dx;
      double t1 = 0.0, t2 = 0.0;
      const cdouble u = bloch_transform_samples(Gfun, alpha, {x1, H}, Jmax, grid.Lambda, &t1);
      const cdouble du = bloch_transform_samples(dGfun, alpha, {x1, H}, Jmax, grid.Lambda, &t2);
      pu[s] = std::polar(1.0, -alpha * x1) * u;
      pd[s] = std::polar(1.0, -alpha * x1) * du;
      tail = std::max(tail, std::max(t1, t2));
    }
    if (tail > 1e-10) {
      std::ostringstream os;
      os << "incident_boundary_data: lattice tail estimate " << tail << " for alpha block " << j;
      diag.warn(os.str());
    }
    for (int q = -L; q <= L; ++q) {
      cdouble cu = 0.0, cd = 0.0;
      for (int s = 0; s < T; ++s) {
        const double x1 = -0.5 * grid.Lambda + s * dx;
        const cdouble e = std::polar(1.0, -Lstar * q * x1);
        cu += pu[s] * e;
        cd += pd[s] * e;
      }
      cu /= static_cast<double>(T);
      cd /= static_cast<double>(T);
      // mode e^{i Lstar q x1} of the periodized block carries frequency alpha + Lstar q
      const cdouble sigma = dtn_symbol(src.k, alpha, -q, Lstar, diag);
      fhat[j - 1][q + L] = cd - sigma * cu;
    }
  }
  return fhat;
}

BlochSource::BlochSource(HalfSpaceSource src, LayerIndex layer1, LayerIndex layer2, AlphaGrid grid,
                         SourceRoute route, int Jmax)
    : src_(src), layer1_(std::move(layer1)), layer2_(std::move(layer2)), grid_(grid),
      route_(route), Jmax_(Jmax) {
  if (route_ == SourceRoute::spectral && src_.kind == HalfSpaceSource::Kind::volume &&
      layer1_.mode_coeffs.empty())
    throw std::invalid_argument(
        "BlochSource: spectral route needs a modulated-exponential form of layer 1");
}

std::vector<std::vector<cdouble>> BlochSource::volume_table(const std::vector<Point>& pts,
                                                            Diagnostics& diag) const {
  if (src_.kind != HalfSpaceSource::Kind::volume)
    throw std::invalid_argument("BlochSource::volume_table: not a volume source");
  const int N = grid_.N;
  const double k2 = src_.k * src_.k;
  const double C_Lambda = std::sqrt(grid_.Lambda / (2.0 * pi));
  std::vector<std::vector<cdouble>> table(N, std::vector<cdouble>(pts.size(), cdouble(0.0)));

  if (route_ == SourceRoute::spectral) {
    // modes: layer-1 exponentials plus the Lambda-periodic layer-2 factor (freq 0)
    struct Mode {
      double kappa;
      int kind;  // 0: layer-1 term (coeff * profile), 1: layer-2 term (n2 at point)
      cdouble coeff;
    };
    std::vector<Mode> modes;
    for (std::size_t p = 0; p < layer1_.mode_freqs.size(); ++p)
      modes.push_back({layer1_.mode_freqs[p], 0, layer1_.mode_coeffs[p]});
    modes.push_back({0.0, 1, 1.0});

    // group points by x2 (structured meshes have few distinct heights)
    std::map<long long, int> x2_class;
    std::vector<double> x2_of_class;
    std::vector<int> cls(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const long long key = std::llround(pts[i].x2 * 1e12);
      auto [it, inserted] = x2_class.try_emplace(key, static_cast<int>(x2_of_class.size()));
      if (inserted) x2_of_class.push_back(pts[i].x2);
      cls[i] = it->second;
    }
    const int ncls = static_cast<int>(x2_of_class.size());

    const double dxi = grid_.Lambda_star();
    double margin = 1e300;
    for (double x2 : x2_of_class) margin = std::min(margin, std::fabs(x2 - src_.y.x2));
    const int half_window = static_cast<int>(std::ceil((src_.k + 45.0 / margin) / dxi)) + 2;

    for (int j = 1; j <= N; ++j) {
      for (const Mode& mode : modes) {
        const double chi = grid_.alpha(j) - mode.kappa;
        const long q0 = std::lround(-chi / dxi);
        const int W = 2 * half_window + 1;
        // T factors per (q, x2 class)
        std::vector<cdouble> tq(static_cast<std::size_t>(W) * ncls);
        std::vector<double> xiq(W);
        for (int w = 0; w < W; ++w) {
          const double xi = chi + dxi * (q0 - half_window + w);
          xiq[w] = xi;
          const cdouble beta = sqrt_up(k2 - xi * xi);
          for (int c = 0; c < ncls; ++c) {
            const double x2 = x2_of_class[c];
            tq[static_cast<std::size_t>(w) * ncls + c] =
                mode_profile(beta, x2 + src_.y.x2, std::fabs(x2 - src_.y.x2));
          }
        }
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pts.size()); ++i) {
          const Point& x = pts[i];
          double weight;
          if (mode.kind == 0) {
            weight = layer1_.profile ? layer1_.profile(x.x2) : 1.0;
          } else {
            weight = layer2_.eval(x.x1, x.x2);
          }
          if (weight == 0.0) continue;
          const double rel = x.x1 - src_.y.x1;
          const cdouble step = std::polar(1.0, dxi * rel);
          cdouble ph = std::polar(1.0, xiq[0] * rel);
          cdouble sum = 0.0;
          const cdouble* tcol = tq.data() + cls[i];
          for (int w = 0; w < W; ++w) {
            sum += tcol[static_cast<std::size_t>(w) * ncls] * ph;
            ph *= step;
          }
          sum /= grid_.Lambda;
          const cdouble mod = (mode.kind == 0) ? std::polar(1.0, mode.kappa * x.x1) : cdouble(1.0);
          table[j - 1][i] += C_Lambda * k2 * weight * mode.coeff * mod * sum;
        }
      }
    }
    return table;
  }

  // Lattice route: tabulate g over shifted copies once per point, then phase sums.
  double worst_tail = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : worst_tail)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pts.size()); ++i) {
    const Point& x = pts[i];
    const bool in1 = x.x2 > layer1_.band_lo && x.x2 < layer1_.band_hi;
    const bool in2 = x.x2 > layer2_.band_lo && x.x2 < layer2_.band_hi;
    if (!in1 && !in2) continue;
    std::vector<cdouble> g(2 * Jmax_ + 1);
    for (int m = -Jmax_; m <= Jmax_; ++m)
      g[m + Jmax_] =
          manufactured_volume_source(src_, layer1_, layer2_, {x.x1 + grid_.Lambda * m, x.x2});
    const double edge = std::max(std::abs(g.front()), std::abs(g.back()));
    // |g| ~ C (Lambda m)^{-3/2} tail model integrated past Jmax
    worst_tail = std::max(worst_tail, 4.0 * C_Lambda * edge * static_cast<double>(Jmax_));
    for (int j = 1; j <= N; ++j) {
      const cdouble wstep = std::polar(1.0, -grid_.alpha(j) * grid_.Lambda);
      cdouble ph = std::pow(wstep, -Jmax_);
      cdouble sum = 0.0;
      for (int m = -Jmax_; m <= Jmax_; ++m) {
        sum += g[m + Jmax_] * ph;
        ph *= wstep;
      }
      table[j - 1][i] = C_Lambda * sum;
    }
  }
  if (worst_tail > 0.0) {
    std::ostringstream os;
    os << "volume_table: lattice truncation tail estimate " << worst_tail << " (Jmax=" << Jmax_
       << ")";
    diag.warn(os.str());
  }
  return table;
}

std::vector<std::vector<cdouble>> BlochSource::dirichlet_data(const std::vector<Point>& pts,
                                                              Diagnostics& diag) const {
  const int N = grid_.N;
  const double C_Lambda = std::sqrt(grid_.Lambda / (2.0 * pi));
  std::vector<std::vector<cdouble>> data(N, std::vector<cdouble>(pts.size(), cdouble(0.0)));
  for (int j = 1; j <= N; ++j) {
    const double alpha = grid_.alpha(j);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cdouble v;
      if (route_ == SourceRoute::spectral) {
        v = C_Lambda * lattice_green(src_, grid_.Lambda, alpha, pts[i]);
      } else {
        auto Gfun = [&](double x1, double x2) { return green_half_space({x1, x2}, src_); };
        double tail = 0.0;
        v = bloch_transform_samples(Gfun, alpha, pts[i], Jmax_, grid_.Lambda, &tail, 1e-8, diag);
      }
      data[j - 1][i] = std::polar(1.0, -alpha * pts[i].x1) * v;
    }
  }
  return data;
}

std::vector<std::vector<cdouble>> BlochSource::boundary_modes(int L, double H,
                                                              Diagnostics& diag) const {
  return incident_boundary_data(src_, grid_, L, H, route_, Jmax_, diag);
}

std::vector<cdouble> BlochSource::supercell_volume(const std::vector<Point>& pts,
                                                   const std::vector<int>& lattice_offset,
                                                   Diagnostics& diag) const {
  if (src_.kind != HalfSpaceSource::Kind::volume)
    throw std::invalid_argument("supercell_volume: not a volume source");
  const int N = grid_.N;
  const double P = N * grid_.Lambda;
  std::vector<cdouble> out(pts.size(), cdouble(0.0));
  const double k2 = src_.k * src_.k;

  if (route_ == SourceRoute::spectral) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point& x = pts[i];
      cdouble val = 0.0;
      const double prof = layer1_.profile ? layer1_.profile(x.x2) : 0.0;
      if (prof != 0.0) {
        for (std::size_t p = 0; p < layer1_.mode_freqs.size(); ++p) {
          const double kappa = layer1_.mode_freqs[p];
          val += layer1_.mode_coeffs[p] * prof * std::polar(1.0, kappa * x.x1) *
                 lattice_green(src_, P, -kappa, x);
        }
      }
      const double n2 = layer2_.eval(x.x1, x.x2);
      if (n2 != 0.0) val += n2 * lattice_green(src_, P, 0.0, x);
      out[i] = k2 * val;
    }
    return out;
  }

  if (lattice_offset.size() != pts.size())
    throw std::invalid_argument("supercell_volume: lattice offsets required for the lattice route");
  (void)diag;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pts.size()); ++i) {
    const Point& x = pts[i];
    const bool in1 = x.x2 > layer1_.band_lo && x.x2 < layer1_.band_hi;
    const bool in2 = x.x2 > layer2_.band_lo && x.x2 < layer2_.band_hi;
    if (!in1 && !in2) continue;
    const int s = lattice_offset[i];
    // sum over shifts t = s + N m' with |t| <= Jmax, matching the cell table
    const int m_lo = static_cast<int>(std::ceil((-Jmax_ - s) / static_cast<double>(N)));
    const int m_hi = static_cast<int>(std::floor((Jmax_ - s) / static_cast<double>(N)));
    cdouble sum = 0.0;
    for (int m = m_lo; m <= m_hi; ++m)
      sum += manufactured_volume_source(src_, layer1_, layer2_, {x.x1 + P * m, x.x2});
    out[i] = sum;
  }
  return out;
}

std::vector<cdouble> BlochSource::supercell_boundary_modes(const std::vector<int>& mode_ids,
                                                           double H) const {
  if (src_.kind != HalfSpaceSource::Kind::incident)
    throw std::invalid_argument("supercell_boundary_modes: not an incident source");
  if (route_ != SourceRoute::spectral)
    throw std::invalid_argument("supercell_boundary_modes: only the spectral route is supported");
  const double P = grid_.N * grid_.Lambda;
  std::vector<cdouble> out(mode_ids.size());
  for (std::size_t i = 0; i < mode_ids.size(); ++i) {
    const double mu = 2.0 * pi * mode_ids[i] / P;
    const cdouble beta = sqrt_up(src_.k * src_.k - mu * mu);
    out[i] = (1.0 / P) * std::exp(cdouble(0.0, 1.0) * beta * (src_.y.x2 - H)) *
             std::polar(1.0, -mu * src_.y.x1);
  }
  return out;
}

}  // namespace blochfem
