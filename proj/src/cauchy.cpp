#include "bukhgeim/cauchy.hpp"

#include <cmath>

#include "bukhgeim/norms.hpp"
#include "bukhgeim/rng.hpp"

namespace bukhgeim {

namespace {

constexpr double kPi = 3.14159265358979323846;

// antiderivative of 1/w with d2H/dxdy = 1/(x+iy): H = -i w (Log w - 1);
// valid for rectangles avoiding the cut (-inf, 0]
cplx antider(double x, double y) {
    cplx w(x, y);
    if (std::abs(w) == 0.0) return {0.0, 0.0};
    return cplx(0.0, -1.0) * w * (std::log(w) - 1.0);
}

// integral of 1/w over the h-cell centered at (cx,cy); cell must not straddle the cut
cplx cell_integral(double cx, double cy, double h) {
    double x1 = cx - h / 2, x2 = cx + h / 2, y1 = cy - h / 2, y2 = cy + h / 2;
    return antider(x2, y2) - antider(x2, y1) - antider(x1, y2) + antider(x1, y1);
}

}  // namespace

CauchyKernelTable::CauchyKernelTable(GridPtr grid) : grid_(std::move(grid)), m_(2 * grid_->N) {
    const double h = grid_->h;
    kernel_dbar_.assign(static_cast<std::size_t>(m_) * m_, cplx{0, 0});
    for (int oi = 0; oi < m_; ++oi) {
        int di = (oi < m_ / 2) ? oi : oi - m_;
        for (int oj = 0; oj < m_; ++oj) {
            int dj = (oj < m_ / 2) ? oj : oj - m_;
            if (di == 0 && dj == 0) continue;  // odd kernel: exact cell mean is zero
            double cx = di * h, cy = dj * h;
            double sgn = 1.0;
            if (dj == 0 && di < 0) { cx = -cx; cy = -cy; sgn = -1.0; }
            kernel_dbar_[idx(oi, oj)] = sgn * cell_integral(cx, cy, h) / (kPi * h * h);
        }
    }
    khat_dbar_.resize(kernel_dbar_.size());
    Fft2D fft(m_);
    fft.forward(kernel_dbar_.data(), khat_dbar_.data());
}

CauchyWorkspace::CauchyWorkspace(std::shared_ptr<const CauchyKernelTable> table)
    : table_(std::move(table)), fft_(table_->padded()),
      buf_a_(static_cast<std::size_t>(table_->padded()) * table_->padded()),
      buf_b_(buf_a_.size()) {}

Field CauchyWorkspace::conv(const Field& g, bool conjugate_kernel) {
    const auto& gr = table_->grid();
    const int N = gr->N, M = table_->padded();
    std::fill(buf_a_.begin(), buf_a_.end(), cplx{0, 0});
    if (conjugate_kernel) {
        // d_inv(g) = conj(dbar_inv(conj g))
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) buf_a_[i * M + j] = std::conj(g.at(i, j));
    } else {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) buf_a_[i * M + j] = g.at(i, j);
    }
    fft_.forward(buf_a_.data(), buf_b_.data());
    const auto& khat = table_->khat_dbar();
    const double scale = gr->h * gr->h / (static_cast<double>(M) * M);
    for (std::size_t k = 0; k < buf_b_.size(); ++k) buf_b_[k] *= khat[k] * scale;
    fft_.backward(buf_b_.data(), buf_a_.data());
    Field out(gr, SupportTag::WholeGrid);
    if (conjugate_kernel) {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) out.at(i, j) = std::conj(buf_a_[i * M + j]);
    } else {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) out.at(i, j) = buf_a_[i * M + j];
    }
    return out;
}

Field CauchyWorkspace::dbar_inv(const Field& g) { return conv(g, false); }
Field CauchyWorkspace::d_inv(const Field& g) { return conv(g, true); }

Field dbar_inv(const CauchyKernelTable& table, const Field& g) {
    CauchyWorkspace ws(std::shared_ptr<const CauchyKernelTable>(&table, [](const CauchyKernelTable*) {}));
    return ws.dbar_inv(g);
}

Field d_inv(const CauchyKernelTable& table, const Field& g) {
    CauchyWorkspace ws(std::shared_ptr<const CauchyKernelTable>(&table, [](const CauchyKernelTable*) {}));
    return ws.d_inv(g);
}

namespace {

// centered differences inside, one-sided at the pad edge
void fd_gradient(const Field& f, Field& fx, Field& fy) {
    const auto& g = f.grid;
    const int N = g->N;
    const double h = g->h;
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            cplx dx, dy;
            if (i == 0) dx = (f.at(1, j) - f.at(0, j)) / h;
            else if (i == N - 1) dx = (f.at(N - 1, j) - f.at(N - 2, j)) / h;
            else dx = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * h);
            if (j == 0) dy = (f.at(i, 1) - f.at(i, 0)) / h;
            else if (j == N - 1) dy = (f.at(i, N - 1) - f.at(i, N - 2)) / h;
            else dy = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * h);
            fx.at(i, j) = dx;
            fy.at(i, j) = dy;
        }
    }
}

}  // namespace

Field dbar(const Field& f) {
    Field fx(f.grid), fy(f.grid);
    fd_gradient(f, fx, fy);
    Field out(f.grid, SupportTag::WholeGrid);
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = 0.5 * (fx.values[k] + cplx(0, 1) * fy.values[k]);
    return out;
}

Field d(const Field& f) {
    Field fx(f.grid), fy(f.grid);
    fd_gradient(f, fx, fy);
    Field out(f.grid, SupportTag::WholeGrid);
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = 0.5 * (fx.values[k] - cplx(0, 1) * fy.values[k]);
    return out;
}

ProbeResult operator_norm_probe(const CauchyKernelTable& table, OperatorTag op, double p_in,
                                double q_out, int trials, std::uint64_t seed,
                                ProbeFamily family, bool w1_out) {
    if (trials <= 0) throw std::invalid_argument("operator_norm_probe: trials must be positive");
    if (family == ProbeFamily::Smooth && !w1_out) {
        // part A admissibility: 1 <= p <= 2, 1 < gamma < 2p/(2-p)
        if (p_in < 1.0 || p_in > 2.0)
            throw std::invalid_argument("operator_norm_probe: p outside [1,2] (part A)");
        double gmax = (p_in >= 2.0) ? std::numeric_limits<double>::infinity()
                                    : 2.0 * p_in / (2.0 - p_in);
        if (q_out <= 1.0 || q_out >= gmax)
            throw std::invalid_argument("operator_norm_probe: gamma outside (1, 2p/(2-p))");
    }
    const auto& g = table.grid();
    CauchyWorkspace ws(std::shared_ptr<const CauchyKernelTable>(&table, [](const CauchyKernelTable*) {}));
    Rng rng(seed);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        Field probe(g, SupportTag::XSupported);
        if (family == ProbeFamily::Smooth) {
            cplx c(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
            double wd = rng.uniform(0.2, 0.6);
            double amp = rng.uniform(0.5, 2.0);
            probe = bump_field(g, c, wd, amp);
        } else {
            // unit-L1-mass node delta at a random interior node
            int i0, j0;
            do {
                i0 = static_cast<int>(rng.uniform(0.0, g->N));
                j0 = static_cast<int>(rng.uniform(0.0, g->N));
            } while (!g->inside(i0, j0));
            probe.at(i0, j0) = 1.0 / (g->h * g->h);
        }
        Field u = (op == OperatorTag::DbarInv) ? ws.dbar_inv(probe) : ws.d_inv(probe);
        Field ux = restrict_to_x(u);
        double num;
        if (w1_out) {
            Field gx = d(u), gy = dbar(u);  // any first-order combination; use both Wirtinger parts
            double a = lp_norm(ux, q_out);
            double b = lp_norm(restrict_to_x(gx), q_out);
            double c2 = lp_norm(restrict_to_x(gy), q_out);
            num = std::sqrt(a * a + b * b + c2 * c2);
        } else {
            num = lp_norm(ux, q_out);
        }
        double den = lp_norm(probe, p_in);
        if (den > 0.0) best = std::max(best, num / den);
    }
    return {best, trials};
}

}  // namespace bukhgeim
