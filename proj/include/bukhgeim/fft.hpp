#pragma once

#include <complex>
#include <vector>

#include "bukhgeim/grid.hpp"

namespace bukhgeim {

/// Out-of-place 2D FFT plan pair for one transform size. Planner calls are
/// serialized internally (FFTW planner is not thread-safe); executing on
/// distinct buffers is safe, so each worker owns its own Fft2D.
class Fft2D {
public:
    explicit Fft2D(int n);
    ~Fft2D();
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    int size() const { return n_; }
    /// unnormalized forward DFT
    void forward(const cplx* in, cplx* out) const;
    /// unnormalized inverse DFT; caller divides by n*n
    void backward(const cplx* in, cplx* out) const;

private:
    int n_;
    void* plan_fwd_;
    void* plan_bwd_;
    std::vector<cplx> scratch_in_, scratch_out_;
};

/// Discrete realization of the paper-convention Fourier pair on the grid:
/// dft(f)(xi) ~ h^2 sum f(x) e^{-i x.xi}, sampled on the FFT frequency
/// lattice in FFT index order (positional phase included, so a centered
/// Gaussian transforms to real positive samples). idft inverts exactly.
Field dft(const Field& f);
Field idft(const Field& f);

}  // namespace bukhgeim
