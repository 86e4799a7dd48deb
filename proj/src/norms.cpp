#include "bukhgeim/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bukhgeim/fft.hpp"

namespace bukhgeim {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}

double lp_norm(const Field& f, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    const auto& g = f.grid;
    const bool on_x = f.support == SupportTag::XSupported;
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t k = 0; k < f.values.size(); ++k) {
            if (on_x && !g->interior_mask[k]) continue;
            m = std::max(m, std::abs(f.values[k]));
        }
        return m;
    }
    // factor out the max modulus so huge CGO amplitudes cannot overflow
    double m = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        if (on_x && !g->interior_mask[k]) continue;
        m = std::max(m, std::abs(f.values[k]));
    }
    if (m == 0.0 || !std::isfinite(m)) return m == 0.0 ? 0.0 : m;
    double acc = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        if (on_x && !g->interior_mask[k]) continue;
        double a = std::abs(f.values[k]) / m;
        if (a > 0.0) acc += std::pow(a, p);
    }
    return m * std::pow(g->h * g->h * acc, 1.0 / p);
}

double l2_norm_masked(const Field& f, const std::vector<std::uint8_t>& mask) {
    const auto& g = f.grid;
    double m = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if (mask[k]) m = std::max(m, std::abs(f.values[k]));
    if (m == 0.0 || !std::isfinite(m)) return m == 0.0 ? 0.0 : m;
    double acc = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        if (!mask[k]) continue;
        double re = f.values[k].real() / m, im = f.values[k].imag() / m;
        acc += re * re + im * im;
    }
    return m * std::sqrt(g->h * g->h * acc);
}

double scaled_l2(const cplx* v, std::size_t n, double cell_area) {
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(v[k]));
    if (m == 0.0 || !std::isfinite(m)) return m == 0.0 ? 0.0 : m;
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double re = v[k].real() / m, im = v[k].imag() / m;
        acc += re * re + im * im;
    }
    return m * std::sqrt(cell_area * acc);
}

double sobolev_norm(const Field& f, double s) {
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("sobolev_norm: s must be in [0,1]");
    Field whole = (f.support == SupportTag::XSupported) ? extend_zero(f) : f;
    Field F = dft(whole);
    const auto& g = f.grid;
    const double dxi = kTwoPi / (g->N * g->h);
    double acc = 0.0;
    for (int i = 0; i < g->N; ++i) {
        for (int j = 0; j < g->N; ++j) {
            double w = 1.0 + g->xi(i) * g->xi(i) + g->xi(j) * g->xi(j);
            acc += std::pow(w, s) * std::norm(F.at(i, j));
        }
    }
    return std::sqrt(acc) * dxi / kTwoPi;
}

double boundary_sobolev_norm(const GridPtr& g, const std::vector<cplx>& trace, double order) {
    const int M = g->boundary_count();
    if (static_cast<int>(trace.size()) != M)
        throw std::invalid_argument("boundary_sobolev_norm: trace size mismatch");
    if (M < 4) throw std::invalid_argument("boundary_sobolev_norm: boundary not closed");
    // Fourier coefficients on the uniform arclength parametrization
    std::vector<cplx> c(M, cplx{0, 0});
    for (int k = 0; k < M; ++k) {
        cplx acc{0, 0};
        for (int m = 0; m < M; ++m) {
            double ph = -kTwoPi * k * m / static_cast<double>(M);
            acc += trace[m] * cplx(std::cos(ph), std::sin(ph));
        }
        c[k] = acc / static_cast<double>(M);
    }
    double acc = 0.0;
    for (int k = 0; k < M; ++k) {
        int kk = (k < M / 2) ? k : k - M;
        acc += std::pow(1.0 + static_cast<double>(kk) * kk, order) * std::norm(c[k]);
    }
    return std::sqrt(g->curve_length * acc);
}

cplx boundary_integral(const GridPtr& g, const std::vector<cplx>& trace) {
    cplx acc{0, 0};
    for (const auto& v : trace) acc += v;
    return acc * g->arc_weight;
}

}  // namespace bukhgeim
