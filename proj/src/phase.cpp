#include "bukhgeim/phase.hpp"

#include <cmath>
#include <stdexcept>

#include "bukhgeim/fft.hpp"
#include "bukhgeim/norms.hpp"

namespace bukhgeim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void PhaseParams::validate(const GridPtr& g) const {
    if (tau <= 0.0) throw std::invalid_argument("PhaseParams: tau must be positive");
    if (sign != 1 && sign != -1) throw std::invalid_argument("PhaseParams: sign must be +-1");
    double r = std::abs(z0);
    double lim = g->domain.kind == DomainKind::Disk ? g->domain.size : g->domain.size;
    if (r >= lim) throw std::invalid_argument("PhaseParams: z0 must lie strictly inside X");
}

Field phi(const GridPtr& g, cplx z0) {
    Field out(g, SupportTag::WholeGrid);
    for (int i = 0; i < g->N; ++i)
        for (int j = 0; j < g->N; ++j) {
            cplx d = g->z(i, j) - z0;
            out.at(i, j) = d * d;
        }
    return out;
}

Field weight(const GridPtr& g, const PhaseParams& p) {
    Field out(g, SupportTag::WholeGrid);
    for (int i = 0; i < g->N; ++i)
        for (int j = 0; j < g->N; ++j) {
            cplx dz = g->z(i, j) - p.z0;
            double re2 = 2.0 * (dz * dz).real();  // Phi + conj Phi
            double ph = p.sign * p.tau * re2;
            out.at(i, j) = cplx(std::cos(ph), std::sin(ph));
        }
    return out;
}

namespace {

Field conjugated_transform(CauchyWorkspace& ws, const Field& g, const PhaseParams& p,
                           bool use_dbar_inv) {
    const auto& gr = g.grid;
    Field w = weight(gr, p);
    Field tmp(gr, SupportTag::WholeGrid);
    for (std::size_t k = 0; k < tmp.values.size(); ++k)
        tmp.values[k] = g.values[k] * w.values[k];
    Field conv = use_dbar_inv ? ws.dbar_inv(tmp) : ws.d_inv(tmp);
    Field out(gr, SupportTag::WholeGrid);
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = 0.5 * std::conj(w.values[k]) * conv.values[k];
    return out;
}

}  // namespace

Field r_tilde(CauchyWorkspace& ws, const Field& g, const PhaseParams& p) {
    return conjugated_transform(ws, g, p, false);
}

Field r_tilde_bar(CauchyWorkspace& ws, const Field& g, const PhaseParams& p) {
    return conjugated_transform(ws, g, p, true);
}

double tau_lattice(const GridPtr& g, int k) {
    return kPi * k * g->N / (8.0 * g->L * g->L);
}

Field stat_phase_apply(const Field& Q, double tau, int sign, StatPhaseMode mode) {
    if (tau <= 0.0) throw std::invalid_argument("stat_phase_apply: tau must be positive");
    const auto& g = Q.grid;
    const int N = g->N;
    if (mode == StatPhaseMode::Multiplier) {
        Fft2D fft(N);
        std::vector<cplx> hat(g->nodes());
        fft.forward(Q.values.data(), hat.data());
        for (int i = 0; i < N; ++i) {
            double xi1 = g->xi(i);
            for (int j = 0; j < N; ++j) {
                double xi2 = g->xi(j);
                double ph = -sign * (xi1 * xi1 - xi2 * xi2) / (8.0 * tau);
                hat[g->idx(i, j)] *= cplx(std::cos(ph), std::sin(ph));
            }
        }
        Field out(g, SupportTag::WholeGrid);
        fft.backward(hat.data(), out.values.data());
        double scale = 1.0 / (static_cast<double>(N) * N);
        for (auto& v : out.values) v *= scale;
        return out;
    }
    // direct quadrature, separable chirp tables: O(N^3)
    // e^{i s tau((z-z0)^2+conj)} = e^{2 i s tau (x-a)^2} e^{-2 i s tau (y-b)^2}
    std::vector<cplx> c1(static_cast<std::size_t>(N) * N), c2(c1.size());
    for (int a = 0; a < N; ++a) {
        for (int x = 0; x < N; ++x) {
            double dd = g->x(x) - g->x(a);
            double ph = 2.0 * sign * tau * dd * dd;
            c1[a * N + x] = cplx(std::cos(ph), std::sin(ph));
            c2[a * N + x] = std::conj(c1[a * N + x]);
        }
    }
    // T[a,b] = sum_y c2[b,y] (sum_x c1[a,x] Q[x,y])
    std::vector<cplx> inner(static_cast<std::size_t>(N) * N, cplx{0, 0});
    for (int a = 0; a < N; ++a) {
        for (int x = 0; x < N; ++x) {
            cplx w = c1[a * N + x];
            const cplx* row = &Q.values[g->idx(x, 0)];
            cplx* dst = &inner[static_cast<std::size_t>(a) * N];
            for (int y = 0; y < N; ++y) dst[y] += w * row[y];
        }
    }
    Field out(g, SupportTag::WholeGrid);
    const double scale = (2.0 * tau / kPi) * g->h * g->h;
    for (int a = 0; a < N; ++a) {
        for (int b = 0; b < N; ++b) {
            cplx acc{0, 0};
            const cplx* src = &inner[static_cast<std::size_t>(a) * N];
            const cplx* wrow = &c2[static_cast<std::size_t>(b) * N];
            for (int y = 0; y < N; ++y) acc += wrow[y] * src[y];
            out.at(a, b) = scale * acc;
        }
    }
    return out;
}

StatPhaseError stat_phase_error(const Field& Q, double tau, double s) {
    Field whole = (Q.support == SupportTag::XSupported) ? extend_zero(Q) : Q;
    Field T = stat_phase_apply(whole, tau, +1, StatPhaseMode::Multiplier);
    StatPhaseError out;
    Field diff = whole - T;
    out.measured = lp_norm(diff, 2.0);
    out.bound = 2.0 * std::pow(tau, -s / 2.0) * sobolev_norm(whole, s);
    return out;
}

MultiplierBound multiplier_bound_check(double xi1, double xi2, double s) {
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("multiplier_bound_check: s in [0,1]");
    MultiplierBound out;
    double arg = xi1 * xi1 - xi2 * xi2;
    out.lhs = 2.0 * std::abs(std::sin(arg));  // sqrt(4 sin^2(xi1^2 - xi2^2))
    double absxi = std::hypot(xi1, xi2);
    out.rhs = std::pow(2.0, 1.0 + s / 2.0) * std::pow(absxi, s);
    return out;
}

}  // namespace bukhgeim
