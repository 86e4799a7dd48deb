#include "bukhgeim/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace bukhgeim {

namespace {
std::mutex planner_mutex;
}

Fft2D::Fft2D(int n) : n_(n), scratch_in_(static_cast<std::size_t>(n) * n),
                      scratch_out_(static_cast<std::size_t>(n) * n) {
    std::lock_guard<std::mutex> lock(planner_mutex);
    auto* in = reinterpret_cast<fftw_complex*>(scratch_in_.data());
    auto* out = reinterpret_cast<fftw_complex*>(scratch_out_.data());
    plan_fwd_ = fftw_plan_dft_2d(n, n, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_bwd_ = fftw_plan_dft_2d(n, n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Fft2D::~Fft2D() {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void Fft2D::forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_),
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void Fft2D::backward(const cplx* in, cplx* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_),
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

Field dft(const Field& f) {
    const auto& g = f.grid;
    const int N = g->N;
    Fft2D fft(N);
    Field out(g, SupportTag::WholeGrid);
    fft.forward(f.values.data(), out.values.data());
    const double h2 = g->h * g->h;
    // positional phase e^{-i x_min xi} per axis (x_min = -L)
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            double ph = g->L * (g->xi(i) + g->xi(j));
            out.at(i, j) *= h2 * cplx(std::cos(ph), std::sin(ph));
        }
    }
    return out;
}

Field idft(const Field& f) {
    const auto& g = f.grid;
    const int N = g->N;
    Field tmp(g, SupportTag::WholeGrid);
    const double h2 = g->h * g->h;
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            double ph = g->L * (g->xi(i) + g->xi(j));
            tmp.at(i, j) = f.at(i, j) * cplx(std::cos(ph), -std::sin(ph)) / h2;
        }
    }
    Fft2D fft(N);
    Field out(g, SupportTag::WholeGrid);
    fft.backward(tmp.values.data(), out.values.data());
    const double scale = 1.0 / (static_cast<double>(N) * N);
    for (auto& v : out.values) v *= scale;
    return out;
}

}  // namespace bukhgeim
