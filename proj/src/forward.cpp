#include "bukhgeim/forward.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "bukhgeim/norms.hpp"
#include "bukhgeim/rng.hpp"

namespace bukhgeim {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

using SpMat = Eigen::SparseMatrix<cplx>;
using Vec = Eigen::VectorXcd;
}  // namespace

std::vector<cplx> DNMap::apply(const std::vector<cplx>& f) const {
    const int M = size();
    if (static_cast<int>(f.size()) != M)
        throw std::invalid_argument("DNMap::apply: trace size mismatch");
    std::vector<cplx> out(M, cplx{0, 0});
    for (int r = 0; r < M; ++r) {
        cplx acc{0, 0};
        const cplx* row = &matrix[static_cast<std::size_t>(r) * M];
        for (int c = 0; c < M; ++c) acc += row[c] * f[c];
        out[r] = acc;
    }
    return out;
}

struct ForwardSolver::Impl {
    GridPtr g;
    int n = 0;                       // interior unknowns
    std::vector<int> node_of;        // unknown -> node index
    std::vector<int> unk_of;         // node index -> unknown or -1
    // off-diagonal stencil entries and boundary couplings
    struct Entry { int row, col; double val; };
    struct BEntry { int row; double val; double theta; };
    std::vector<Entry> entries;
    std::vector<double> diag;        // q-independent diagonal
    std::vector<BEntry> bentries;

    explicit Impl(GridPtr grid) : g(std::move(grid)) {
        if (g->domain.kind != DomainKind::Disk)
            throw std::invalid_argument("ForwardSolver: only the disk domain is supported");
        const int N = g->N;
        unk_of.assign(g->nodes(), -1);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (g->inside(i, j)) {
                    unk_of[g->idx(i, j)] = n++;
                    node_of.push_back(g->idx(i, j));
                }
        diag.assign(n, 0.0);
        const double h = g->h, rho = g->domain.size;
        for (int k = 0; k < n; ++k) {
            int node = node_of[k];
            int i = node / N, j = node % N;
            double xi = g->x(i), yj = g->x(j);
            // arms: E, W, N, S; length h to an interior neighbor or the
            // exact circle crossing distance otherwise
            struct Arm { double len; int neighbor; double theta; };
            Arm arms[4];
            const int di[4] = {1, -1, 0, 0};
            const int dj[4] = {0, 0, 1, -1};
            for (int a = 0; a < 4; ++a) {
                int ni = i + di[a], nj = j + dj[a];
                bool inside = ni >= 0 && ni < N && nj >= 0 && nj < N && g->inside(ni, nj);
                if (inside) {
                    arms[a] = {h, unk_of[g->idx(ni, nj)], 0.0};
                } else {
                    double delta, th;
                    if (di[a] != 0) {
                        double w = std::sqrt(std::max(rho * rho - yj * yj, 0.0));
                        double xc = di[a] > 0 ? w : -w;
                        delta = std::abs(xc - xi);
                        th = std::atan2(yj, xc);
                    } else {
                        double w = std::sqrt(std::max(rho * rho - xi * xi, 0.0));
                        double yc = dj[a] > 0 ? w : -w;
                        delta = std::abs(yc - yj);
                        th = std::atan2(yc, xi);
                    }
                    delta = std::max(delta, 1e-9 * h);
                    arms[a] = {delta, -1, th};
                }
            }
            for (int axis = 0; axis < 2; ++axis) {
                const Arm& p = arms[2 * axis];
                const Arm& m = arms[2 * axis + 1];
                double cp = 2.0 / (p.len * (p.len + m.len));
                double cm = 2.0 / (m.len * (p.len + m.len));
                diag[k] -= 2.0 / (p.len * m.len);
                if (p.neighbor >= 0) entries.push_back({k, p.neighbor, cp});
                else bentries.push_back({k, cp, p.theta});
                if (m.neighbor >= 0) entries.push_back({k, m.neighbor, cm});
                else bentries.push_back({k, cm, m.theta});
            }
        }
    }

    SpMat matrix(const Potential& q) const {
        std::vector<Eigen::Triplet<cplx>> trip;
        trip.reserve(entries.size() + n);
        for (const auto& e : entries) trip.emplace_back(e.row, e.col, cplx(e.val, 0.0));
        for (int k = 0; k < n; ++k)
            trip.emplace_back(k, k, diag[k] + q.field.values[node_of[k]]);
        SpMat A(n, n);
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        return A;
    }

    Vec rhs(const TraceFn& f) const {
        Vec b = Vec::Zero(n);
        for (const auto& be : bentries) b[be.row] -= be.val * f(be.theta);
        return b;
    }

    Field to_field(const Vec& u) const {
        Field out(g, SupportTag::XSupported);
        for (int k = 0; k < n; ++k) out.values[node_of[k]] = u[k];
        return out;
    }

    cplx bilinear(const Field& u, double px, double py) const {
        double fx = (px + g->L) / g->h, fy = (py + g->L) / g->h;
        int i0 = static_cast<int>(std::floor(fx));
        int j0 = static_cast<int>(std::floor(fy));
        double tx = fx - i0, ty = fy - j0;
        return (1 - tx) * (1 - ty) * u.at(i0, j0) + tx * (1 - ty) * u.at(i0 + 1, j0) +
               (1 - tx) * ty * u.at(i0, j0 + 1) + tx * ty * u.at(i0 + 1, j0 + 1);
    }
};

ForwardSolver::ForwardSolver(GridPtr grid) : grid_(grid), impl_(std::make_unique<Impl>(grid)) {}
ForwardSolver::~ForwardSolver() = default;

int ForwardSolver::interior_count() const { return impl_->n; }

Field ForwardSolver::solve_dirichlet(const Potential& q, const TraceFn& f) const {
    SpMat A = impl_->matrix(q);
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_dirichlet: factorization failed (near-singular system)");
    Vec b = impl_->rhs(f);
    Vec u = lu.solve(b);
    // one refinement step; reject if the relative residual stays above 1e-10
    Vec r = b - A * u;
    u += lu.solve(r);
    r = b - A * u;
    double rel = b.norm() > 0 ? r.norm() / b.norm() : r.norm();
    if (rel > 1e-10)
        throw std::runtime_error("solve_dirichlet: relative residual above 1e-10 (near-singular)");
    // condition estimate along the solution direction (rich in any near-null
    // eigenvector); the operator norm is ~8/h^2
    if (u.norm() > 0) {
        Vec w = lu.solve(Vec(u / u.norm()));
        double cond = w.norm() * 8.0 / (grid_->h * grid_->h);
        if (cond > 1e10)
            throw std::runtime_error(
                "solve_dirichlet: system is near-singular (guard bypassed), condition ~" +
                std::to_string(cond));
    }
    return impl_->to_field(u);
}

Field ForwardSolver::solve_dirichlet(const Potential& q, const std::vector<cplx>& f) const {
    const int M = grid_->boundary_count();
    if (static_cast<int>(f.size()) != M)
        throw std::invalid_argument("solve_dirichlet: trace size mismatch");
    auto fn = [&](double theta) -> cplx {
        double t = theta / kTwoPi * M;
        t -= M * std::floor(t / M);
        int m0 = static_cast<int>(std::floor(t)) % M;
        int m1 = (m0 + 1) % M;
        double a = t - std::floor(t);
        return (1.0 - a) * f[m0] + a * f[m1];
    };
    return solve_dirichlet(q, fn);
}

std::vector<cplx> ForwardSolver::normal_derivative(const Field& u, const TraceFn& f) const {
    const auto& g = grid_;
    const int M = g->boundary_count();
    const double rho = g->domain.size, d = 2.0 * g->h;
    std::vector<cplx> out(M);
    for (int m = 0; m < M; ++m) {
        double th = kTwoPi * m / M;
        cplx f0 = f(th);
        cplx us[3];
        for (int s = 1; s <= 3; ++s)
            us[s - 1] = impl_->bilinear(u, (rho - s * d) * std::cos(th),
                                        (rho - s * d) * std::sin(th));
        out[m] = (11.0 * f0 - 18.0 * us[0] + 9.0 * us[1] - 2.0 * us[2]) / (6.0 * d);
    }
    return out;
}

DNMap ForwardSolver::assemble_dn(const Potential& q, int kmax) const {
    const auto& g = grid_;
    const int M = g->boundary_count();
    if (kmax < 0)
        kmax = std::max(8, static_cast<int>(std::lround(0.5 * g->domain.size / g->h)));
    kmax = std::min(kmax, M / 2 - 1);

    SpMat A = impl_->matrix(q);
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("assemble_dn: factorization failed (near-singular system)");

    // responses to Fourier modes e^{ik theta}, |k| <= kmax
    std::vector<std::vector<cplx>> resp(2 * kmax + 1);
    for (int k = -kmax; k <= kmax; ++k) {
        TraceFn f = [k](double th) {
            return cplx(std::cos(k * th), std::sin(k * th));
        };
        Vec b = impl_->rhs(f);
        Vec u = lu.solve(b);
        Vec r = b - A * u;
        u += lu.solve(r);
        resp[k + kmax] = normal_derivative(impl_->to_field(u), f);
    }
    // band-limit rows too: project each response onto modes |k| <= kmax
    for (auto& col : resp) {
        std::vector<cplx> c(M, cplx{0, 0});
        for (int k = -kmax; k <= kmax; ++k) {
            cplx acc{0, 0};
            for (int m = 0; m < M; ++m) {
                double ph = -kTwoPi * k * m / static_cast<double>(M);
                acc += col[m] * cplx(std::cos(ph), std::sin(ph));
            }
            int ck = (k + M) % M;
            c[ck] = acc / static_cast<double>(M);
        }
        for (int m = 0; m < M; ++m) {
            cplx acc{0, 0};
            for (int k = -kmax; k <= kmax; ++k) {
                int ck = (k + M) % M;
                double ph = kTwoPi * k * m / static_cast<double>(M);
                acc += c[ck] * cplx(std::cos(ph), std::sin(ph));
            }
            col[m] = acc;
        }
    }

    DNMap dn;
    dn.grid = g;
    dn.matrix.assign(static_cast<std::size_t>(M) * M, cplx{0, 0});
    // node-space column c: response to the coefficient map of a node impulse:
    // L = sum_k resp_k * (F row k), F = fft/M
    for (int r = 0; r < M; ++r) {
        for (int c = 0; c < M; ++c) {
            cplx acc{0, 0};
            for (int k = -kmax; k <= kmax; ++k) {
                double ph = -kTwoPi * k * c / static_cast<double>(M);
                acc += resp[k + kmax][r] * cplx(std::cos(ph), std::sin(ph));
            }
            dn.at(r, c) = acc / static_cast<double>(M);
        }
    }
    // symmetrize (uniform arc weights: plain transpose mean)
    for (int r = 0; r < M; ++r)
        for (int c = r + 1; c < M; ++c) {
            cplx s = 0.5 * (dn.at(r, c) + dn.at(c, r));
            dn.at(r, c) = s;
            dn.at(c, r) = s;
        }
    // fingerprint of the potential samples
    std::string bytes(reinterpret_cast<const char*>(q.field.values.data()),
                      q.field.values.size() * sizeof(cplx));
    dn.q_fingerprint = fnv1a_hex(bytes);
    return dn;
}

std::pair<double, double> ForwardSolver::singular_range(const Potential& q) const {
    SpMat A = impl_->matrix(q);
    const int n = impl_->n;
    // ||A|| by power iteration on A^H A
    Vec v = Vec::Constant(n, cplx(1.0, 0.0));
    v.normalize();
    double norm_a = 0.0;
    for (int it = 0; it < 30; ++it) {
        Vec w = A * v;
        Vec u = A.adjoint() * w;
        norm_a = std::sqrt(u.norm());
        v = u / u.norm();
    }
    // sigma_min by inverse iteration on (A^H A)^{-1}
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success) return {0.0, norm_a};
    Vec x = Vec::Constant(n, cplx(1.0, 0.0));
    x.normalize();
    double inv_gain = 0.0;
    for (int it = 0; it < 60; ++it) {
        Vec w = lu.solve(x);
        Vec y = lu.adjoint().solve(w);
        inv_gain = y.norm();
        x = y / inv_gain;
    }
    return {1.0 / std::sqrt(inv_gain), norm_a};
}

bool ForwardSolver::eigenvalue_guard(const Potential& q, double threshold_rel) const {
    auto [smin, anorm] = singular_range(q);
    return smin >= threshold_rel * anorm;
}

double ForwardSolver::first_dirichlet_eigenvalue() const {
    // smallest eigenvalue of -Delta with zero Dirichlet data
    Potential zero;
    zero.field = Field(grid_, SupportTag::XSupported);
    SpMat A = impl_->matrix(zero);  // A = discrete Laplacian (negative definite)
    Eigen::SparseLU<SpMat> lu(A);
    const int n = impl_->n;
    Vec v = Vec::Constant(n, cplx(1.0, 0.0));
    v.normalize();
    double mu = 0.0;
    for (int it = 0; it < 200; ++it) {
        Vec w = lu.solve(v);
        mu = w.norm();
        v = w / mu;
    }
    return 1.0 / mu;  // = min |eig(Delta_h)| = first Dirichlet eigenvalue of -Delta_h
}

cplx pairing(const Potential& q1, const Potential& q2, const Field& u1, const Field& u2) {
    const auto& g = u1.grid;
    cplx acc{0, 0};
    for (std::size_t k = 0; k < g->nodes(); ++k) {
        if (!g->interior_mask[k]) continue;
        acc += u1.values[k] * (q1.field.values[k] - q2.field.values[k]) * u2.values[k];
    }
    return acc * (g->h * g->h);
}

cplx boundary_pairing(const DNMap& dn1, const DNMap& dn2, const std::vector<cplx>& f1,
                      const std::vector<cplx>& f2) {
    if (dn1.grid.get() != dn2.grid.get() || dn1.size() != dn2.size())
        throw std::invalid_argument("boundary_pairing: grid mismatch");
    const int M = dn1.size();
    cplx acc{0, 0};
    for (int r = 0; r < M; ++r) {
        cplx row{0, 0};
        const cplx* r2 = &dn2.matrix[static_cast<std::size_t>(r) * M];
        const cplx* r1 = &dn1.matrix[static_cast<std::size_t>(r) * M];
        for (int c = 0; c < M; ++c) row += (r2[c] - r1[c]) * f2[c];
        acc += row * f1[r];
    }
    return acc * dn1.grid->arc_weight;
}

double dn_operator_norm(const DNMap& dn1, const DNMap& dn2) {
    if (dn1.grid.get() != dn2.grid.get())
        throw std::invalid_argument("dn_operator_norm: grid mismatch");
    const int M = dn1.size();
    // dense weighted matrix B = D_- (U/M) Ld U^H D_+^{-1}, U_{km} = e^{-2pi i km/M}
    std::vector<double> wplus(M), wminus(M);
    for (int k = 0; k < M; ++k) {
        int kk = (k < M / 2) ? k : k - M;
        double w = 1.0 + static_cast<double>(kk) * kk;
        wplus[k] = std::pow(w, 0.25);
        wminus[k] = std::pow(w, -0.25);
    }
    Eigen::MatrixXcd U(M, M), Ld(M, M);
    for (int k = 0; k < M; ++k)
        for (int m = 0; m < M; ++m) {
            double ph = -kTwoPi * k * m / static_cast<double>(M);
            U(k, m) = cplx(std::cos(ph), std::sin(ph));
        }
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < M; ++c) Ld(r, c) = dn2.at(r, c) - dn1.at(r, c);
    Eigen::MatrixXcd B = (U * Ld * U.adjoint()) / static_cast<double>(M);
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < M; ++c) B(r, c) *= wminus[r] / wplus[c];
    // power iteration on B^H B with a deterministic start
    Eigen::VectorXcd v(M);
    for (int k = 0; k < M; ++k) v[k] = cplx(1.0 + 0.1 * std::sin(k + 1.0), 0.05 * std::cos(2.0 * k));
    v.normalize();
    double sigma = 0.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXcd u = B.adjoint() * (B * v);
        double nu = u.norm();
        if (nu == 0.0) return 0.0;
        sigma = std::sqrt(nu);
        v = u / nu;
    }
    return sigma;
}

namespace {
std::mutex trace_cache_mutex;
std::map<const Grid2D*, double> trace_cache;
}

std::vector<cplx> extract_trace(const Field& u) {
    const auto& g = u.grid;
    const int M = g->boundary_count();
    const double rho = g->domain.size;
    std::vector<cplx> out(M);
    auto bilin = [&](double px, double py) {
        double fx = (px + g->L) / g->h, fy = (py + g->L) / g->h;
        int i0 = static_cast<int>(std::floor(fx));
        int j0 = static_cast<int>(std::floor(fy));
        double tx = fx - i0, ty = fy - j0;
        return (1 - tx) * (1 - ty) * u.at(i0, j0) + tx * (1 - ty) * u.at(i0 + 1, j0) +
               (1 - tx) * ty * u.at(i0, j0 + 1) + tx * ty * u.at(i0 + 1, j0 + 1);
    };
    for (int m = 0; m < M; ++m) {
        double th = kTwoPi * m / M;
        cplx u1 = bilin((rho - 2 * g->h) * std::cos(th), (rho - 2 * g->h) * std::sin(th));
        cplx u2 = bilin((rho - 4 * g->h) * std::cos(th), (rho - 4 * g->h) * std::sin(th));
        out[m] = 2.0 * u1 - u2;
    }
    return out;
}

double trace_constant(const GridPtr& g) {
    {
        std::lock_guard<std::mutex> lock(trace_cache_mutex);
        auto it = trace_cache.find(g.get());
        if (it != trace_cache.end()) return it->second;
    }
    // maximize ||Tr u||_{1/2} / ||u||_{W12} over interior fields
    const int N = g->N, M = g->boundary_count();
    std::vector<int> node_of, unk_of(g->nodes(), -1);
    int n = 0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (g->inside(i, j)) { unk_of[g->idx(i, j)] = n++; node_of.push_back(g->idx(i, j)); }
    // W12 gram
    std::vector<Eigen::Triplet<cplx>> trip;
    const double h2 = g->h * g->h;
    for (int k = 0; k < n; ++k) trip.emplace_back(k, k, cplx(h2, 0));
    for (int k = 0; k < n; ++k) {
        int node = node_of[k];
        int i = node / N, j = node % N;
        for (int a = 0; a < 2; ++a) {
            int ni = i + (a == 0), nj = j + (a == 1);
            if (ni < N && nj < N && unk_of[g->idx(ni, nj)] >= 0) {
                int kk = unk_of[g->idx(ni, nj)];
                trip.emplace_back(k, k, cplx(1, 0));
                trip.emplace_back(kk, kk, cplx(1, 0));
                trip.emplace_back(k, kk, cplx(-1, 0));
                trip.emplace_back(kk, k, cplx(-1, 0));
            }
        }
    }
    SpMat G(n, n);
    G.setFromTriplets(trip.begin(), trip.end());
    G.makeCompressed();
    Eigen::SparseLU<SpMat> lu(G);

    // sparse trace rows: extrapolated bilinear samples
    const double rho = g->domain.size;
    std::vector<Eigen::Triplet<cplx>> ttrip;
    auto add_bilin = [&](int m, double px, double py, double cfac) {
        double fx = (px + g->L) / g->h, fy = (py + g->L) / g->h;
        int i0 = static_cast<int>(std::floor(fx));
        int j0 = static_cast<int>(std::floor(fy));
        double tx = fx - i0, ty = fy - j0;
        const int is[4] = {i0, i0 + 1, i0, i0 + 1};
        const int js[4] = {j0, j0, j0 + 1, j0 + 1};
        const double ws[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
        for (int t = 0; t < 4; ++t) {
            int u = unk_of[g->idx(is[t], js[t])];
            if (u >= 0) ttrip.emplace_back(m, u, cplx(cfac * ws[t], 0));
        }
    };
    for (int m = 0; m < M; ++m) {
        double th = kTwoPi * m / M;
        add_bilin(m, (rho - 2 * g->h) * std::cos(th), (rho - 2 * g->h) * std::sin(th), 2.0);
        add_bilin(m, (rho - 4 * g->h) * std::cos(th), (rho - 4 * g->h) * std::sin(th), -1.0);
    }
    SpMat T(M, n);
    T.setFromTriplets(ttrip.begin(), ttrip.end());
    T.makeCompressed();

    std::vector<double> whalf2(M);
    for (int k = 0; k < M; ++k) {
        int kk = (k < M / 2) ? k : k - M;
        whalf2[k] = std::sqrt(1.0 + static_cast<double>(kk) * kk);
    }
    auto apply_A = [&](const Vec& v) {
        Vec tv = T * v;  // nodal trace
        // coefficients
        std::vector<cplx> c(M, cplx{0, 0});
        for (int k = 0; k < M; ++k) {
            cplx acc{0, 0};
            for (int m = 0; m < M; ++m) {
                double ph = -kTwoPi * k * m / static_cast<double>(M);
                acc += tv[m] * cplx(std::cos(ph), std::sin(ph));
            }
            c[k] = acc / static_cast<double>(M);
        }
        // weighted: ||Tr v||^2 = len * sum whalf2 |c|^2 = v^H A v
        // A = len * T^H F^H D F T with F^H F = I/M scaling handled below
        std::vector<cplx> wc(M);
        for (int k = 0; k < M; ++k) wc[k] = whalf2[k] * c[k];
        Vec back = Vec::Zero(M);
        for (int m = 0; m < M; ++m) {
            cplx acc{0, 0};
            for (int k = 0; k < M; ++k) {
                double ph = kTwoPi * k * m / static_cast<double>(M);
                acc += wc[k] * cplx(std::cos(ph), std::sin(ph));
            }
            back[m] = acc / static_cast<double>(M);
        }
        return Vec(g->curve_length * (T.adjoint() * back));
    };
    Vec v = Vec::Constant(n, cplx(1.0, 0.0));
    v.normalize();
    double lam = 0.0;
    for (int it = 0; it < 60; ++it) {
        Vec av = apply_A(v);
        Vec w = lu.solve(av);
        lam = w.norm();
        v = w / lam;
    }
    // Rayleigh quotient for the generalized problem
    Vec av = apply_A(v);
    cplx num = v.dot(av);
    cplx den = v.dot(G * v);
    double tc = std::sqrt(std::abs(num) / std::abs(den));
    {
        std::lock_guard<std::mutex> lock(trace_cache_mutex);
        trace_cache[g.get()] = tc;
    }
    return tc;
}

double cauchy_distance_data(const DNMap& dn1, const DNMap& dn2) {
    if (dn1.grid.get() != dn2.grid.get())
        throw std::invalid_argument("cauchy_distance_data: grid mismatch");
    double tc = trace_constant(dn1.grid);
    return tc * tc * dn_operator_norm(dn1, dn2);
}

void add_dn_noise(DNMap& dn, double rel_level, std::uint64_t seed) {
    if (rel_level <= 0.0) return;
    const int M = dn.size();
    double fro = 0.0;
    for (const auto& v : dn.matrix) fro += std::norm(v);
    fro = std::sqrt(fro);
    Rng rng(seed);
    std::vector<cplx> noise(dn.matrix.size());
    double nf = 0.0;
    for (auto& v : noise) {
        v = cplx(rng.normal(), rng.normal());
        nf += std::norm(v);
    }
    nf = std::sqrt(nf);
    double scale = rel_level * fro / (nf > 0 ? nf : 1.0);
    for (std::size_t k = 0; k < dn.matrix.size(); ++k) dn.matrix[k] += scale * noise[k];
    (void)M;
}

}  // namespace bukhgeim
