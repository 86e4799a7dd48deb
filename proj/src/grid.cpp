#include "bukhgeim/grid.hpp"

#include <cmath>

namespace bukhgeim {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

constexpr double kPi = 3.14159265358979323846;

double cinf_step(double t) {
    // C^inf transition 0 -> 1 on [0,1]
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double a = std::exp(-1.0 / t);
    double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

}  // namespace

GridPtr make_grid(double L, int N, DomainDescriptor domain, double R) {
    if (L <= 0.0) throw std::invalid_argument("make_grid: L must be positive");
    if (N < 16 || !is_pow2(N))
        throw std::invalid_argument("make_grid: N must be a power of two >= 16");
    const double h = 2.0 * L / N;
    if (domain.size <= 0.0) throw std::invalid_argument("make_grid: domain size must be positive");
    const double xbar_radius =
        domain.kind == DomainKind::Disk ? domain.size : domain.size * std::sqrt(2.0);
    if (xbar_radius > R)
        throw std::invalid_argument("make_grid: X does not fit in B(0,R)");
    if (L - R < 4.0 * h)
        throw std::invalid_argument("make_grid: margin between B(0,R) and [-L,L]^2 is below 4h");

    auto g = std::make_shared<Grid2D>();
    g->L = L;
    g->N = N;
    g->h = h;
    g->domain = domain;
    g->R = R;
    g->interior_mask.assign(g->nodes(), 0);

    if (domain.kind == DomainKind::Disk) {
        const double rho = domain.size;
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                double xx = g->x(i), yy = g->x(j);
                if (xx * xx + yy * yy < rho * rho) g->interior_mask[g->idx(i, j)] = 1;
            }
        }
        // uniform nodes on the circle, positively oriented
        int M = 1;
        while (M < static_cast<int>(std::lround(8.0 * rho / h))) M <<= 1;
        g->bx.resize(M);
        g->by.resize(M);
        for (int m = 0; m < M; ++m) {
            double th = 2.0 * kPi * m / M;
            g->bx[m] = rho * std::cos(th);
            g->by[m] = rho * std::sin(th);
        }
        g->curve_length = 2.0 * kPi * rho;
        g->arc_weight = g->curve_length / M;
    } else {
        // square [-a,a]^2, side snapped to the grid
        const double a = domain.size;
        int ia = static_cast<int>(std::lround(a / h));
        if (std::abs(ia * h - a) > 1e-12 * L)
            throw std::invalid_argument("make_grid: square half-side must be a multiple of h");
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                if (std::abs(g->x(i)) < a && std::abs(g->x(j)) < a)
                    g->interior_mask[g->idx(i, j)] = 1;
            }
        }
        // perimeter walk, positively oriented, spacing h
        int side = 2 * ia;
        for (int m = 0; m < side; ++m) { g->bx.push_back(-a + m * h); g->by.push_back(-a); }
        for (int m = 0; m < side; ++m) { g->bx.push_back(a); g->by.push_back(-a + m * h); }
        for (int m = 0; m < side; ++m) { g->bx.push_back(a - m * h); g->by.push_back(a); }
        for (int m = 0; m < side; ++m) { g->bx.push_back(-a); g->by.push_back(a - m * h); }
        g->curve_length = 8.0 * a;
        g->arc_weight = h;
    }
    return g;
}

Field extend_zero(const Field& f) {
    if (f.support != SupportTag::XSupported)
        throw std::invalid_argument("extend_zero: field is not X-supported");
    Field out(f.grid, SupportTag::WholeGrid);
    const auto& mask = f.grid->interior_mask;
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = mask[k] ? f.values[k] : cplx{0.0, 0.0};
    return out;
}

Field restrict_to_x(const Field& f) {
    Field out(f.grid, SupportTag::XSupported);
    const auto& mask = f.grid->interior_mask;
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = mask[k] ? f.values[k] : cplx{0.0, 0.0};
    return out;
}

Field bump_field(const GridPtr& g, cplx center, double width, double amplitude) {
    Field out(g, SupportTag::XSupported);
    for (int i = 0; i < g->N; ++i) {
        for (int j = 0; j < g->N; ++j) {
            if (!g->inside(i, j)) continue;
            cplx d = g->z(i, j) - center;
            double r2 = std::norm(d) / (width * width);
            if (r2 < 1.0)
                out.at(i, j) = amplitude * std::exp(1.0 - 1.0 / (1.0 - r2));
        }
    }
    return out;
}

Field flattop_window(const GridPtr& g, double r0, double r1) {
    Field out(g, SupportTag::XSupported);
    for (int i = 0; i < g->N; ++i) {
        for (int j = 0; j < g->N; ++j) {
            double r = std::abs(g->z(i, j));
            double w = 1.0 - cinf_step((r - r0) / (r1 - r0));
            if (g->inside(i, j) && w > 0.0) out.at(i, j) = w;
        }
    }
    return out;
}

namespace {
SupportTag combine(SupportTag a, SupportTag b) {
    return (a == SupportTag::XSupported && b == SupportTag::XSupported)
               ? SupportTag::XSupported
               : SupportTag::WholeGrid;
}
}  // namespace

Field operator+(const Field& a, const Field& b) {
    Field out(a.grid, combine(a.support, b.support));
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = a.values[k] + b.values[k];
    return out;
}

Field operator-(const Field& a, const Field& b) {
    Field out(a.grid, combine(a.support, b.support));
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = a.values[k] - b.values[k];
    return out;
}

Field operator*(cplx c, const Field& a) {
    Field out(a.grid, a.support);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = c * a.values[k];
    return out;
}

Field pointwise_mul(const Field& a, const Field& b) {
    Field out(a.grid, combine(a.support, b.support));
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = a.values[k] * b.values[k];
    return out;
}

}  // namespace bukhgeim
