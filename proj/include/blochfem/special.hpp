#pragma once

#include "blochfem/core.hpp"

namespace blochfem {

// Bessel functions of order zero, J0(z) and Y0(z), for z > 0.
// Relative accuracy is ~1e-13 on the Hankel modulus over the whole axis.
void bessel_j0y0(double z, double& j0, double& y0);
void bessel_j1y1(double z, double& j1, double& y1);

// Hankel functions of the first kind for z > 0.
cdouble hankel_h0_1(double z);
cdouble hankel_h1_1(double z);

}  // namespace blochfem
