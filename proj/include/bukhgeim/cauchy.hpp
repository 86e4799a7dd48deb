#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bukhgeim/fft.hpp"
#include "bukhgeim/grid.hpp"

namespace bukhgeim {

/// Tabulated Cauchy kernels on the zero-padded (2N)^2 offset lattice.
/// kernel_dbar holds exact cell averages of 1/(pi v) (the convolution kernel
/// realizing dbar^{-1}); kernel_d is its complex conjugate. The origin cell
/// average is exactly zero (the kernel is odd and absolutely integrable).
class CauchyKernelTable {
public:
    explicit CauchyKernelTable(GridPtr grid);

    const GridPtr& grid() const { return grid_; }
    int padded() const { return m_; }
    const std::vector<cplx>& khat_dbar() const { return khat_dbar_; }
    /// kernel value at wrapped offset index
    cplx kernel_dbar_at(int oi, int oj) const { return kernel_dbar_[idx(oi, oj)]; }

    int idx(int oi, int oj) const { return oi * m_ + oj; }

private:
    GridPtr grid_;
    int m_;
    std::vector<cplx> kernel_dbar_;
    std::vector<cplx> khat_dbar_;  // forward FFT of kernel_dbar
};

/// Shared workspace for repeated convolutions (per-thread in parallel scans).
class CauchyWorkspace {
public:
    explicit CauchyWorkspace(std::shared_ptr<const CauchyKernelTable> table);

    const std::shared_ptr<const CauchyKernelTable>& table() const { return table_; }

    /// dbar^{-1} g = -(1/pi) int_X g(zeta)/(zeta - z): zero-padded discrete
    /// convolution with the tabulated kernel.
    Field dbar_inv(const Field& g);
    /// d^{-1} g = conj(dbar_inv(conj g)).
    Field d_inv(const Field& g);

private:
    std::shared_ptr<const CauchyKernelTable> table_;
    Fft2D fft_;
    std::vector<cplx> buf_a_, buf_b_;
    Field conv(const Field& g, bool conjugate_kernel);
};

/// Convenience one-shot forms (construct a workspace internally).
Field dbar_inv(const CauchyKernelTable& table, const Field& g);
Field d_inv(const CauchyKernelTable& table, const Field& g);

/// Wirtinger derivatives by centered second-order differences
/// (one-sided at the pad edge).
Field dbar(const Field& f);
Field d(const Field& f);

enum class OperatorTag { DbarInv, DInv };
enum class ProbeFamily { Smooth, NearSingular };

struct ProbeResult {
    double estimate = 0.0;  // sup over trials of ||op g||_q / ||g||_p
    int trials = 0;
};

/// Randomized lower estimate of the L^p -> L^gamma operator norm.
/// Admissible pairs follow Proposition A (1<=p<=2, 1<gamma<2p/(2-p));
/// the near-singular family probes growth outside the admissible range.
/// w1_out measures (||u||_gamma^2 + ||grad u||_gamma^2)^{1/2} instead
/// (part-B surrogate). Deterministic given the seed.
ProbeResult operator_norm_probe(const CauchyKernelTable& table, OperatorTag op, double p_in,
                                double q_out, int trials, std::uint64_t seed,
                                ProbeFamily family = ProbeFamily::Smooth, bool w1_out = false);

}  // namespace bukhgeim
