#pragma once

#include <vector>

#include "bukhgeim/grid.hpp"

namespace bukhgeim {

/// Riemann-sum L^p norm over the field's support (whole grid, or X for
/// X-supported fields). p = infinity() gives max |values|.
double lp_norm(const Field& f, double p);

/// L^2 norm over an explicit node mask (1 = include).
double l2_norm_masked(const Field& f, const std::vector<std::uint8_t>& mask);

/// Overflow-safe L2 of raw complex data (factors out the max modulus).
double scaled_l2(const cplx* v, std::size_t n, double cell_area);

/// Discrete W^s_2 norm, (2 pi)^{-1} || (1+|xi|^2)^{s/2} F f ||_{L^2(dxi)}.
/// s = 0 equals lp_norm(f, 2) by Plancherel. X-supported inputs are
/// zero-extended first (this *defines* the discrete W^s_2(X) norm).
double sobolev_norm(const Field& f, double s);

/// Fourier-series norm of a trace on the ordered closed boundary curve,
/// weight (1+k^2)^{order/2} on mode k with order = +-1/2.
double boundary_sobolev_norm(const GridPtr& g, const std::vector<cplx>& trace, double order);

/// Arc-weighted boundary quadrature sum(trace) * w.
cplx boundary_integral(const GridPtr& g, const std::vector<cplx>& trace);

}  // namespace bukhgeim
