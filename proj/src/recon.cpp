#include "bukhgeim/recon.hpp"

#include <atomic>
#include <cmath>
#include <memory>

#include "bukhgeim/norms.hpp"
#include "bukhgeim/util.hpp"

namespace bukhgeim {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// chunked parallel loop where each worker thread owns one CauchyWorkspace
template <typename Fn>
void run_with_workspaces(std::size_t n, int workers,
                         const std::shared_ptr<const CauchyKernelTable>& table, Fn&& fn) {
    int nw = workers <= 0 ? static_cast<int>(std::thread::hardware_concurrency()) : workers;
    if (nw < 1) nw = 1;
    if (nw == 1 || n < 2) {
        CauchyWorkspace ws(table);
        for (std::size_t s = 0; s < n; ++s) fn(ws, s);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + nw - 1) / nw;
    for (int w = 0; w < nw; ++w) {
        std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &table, &fn] {
            CauchyWorkspace ws(table);
            for (std::size_t s = lo; s < hi; ++s) fn(ws, s);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

std::vector<int> recon_scan_nodes(const GridPtr& g, int stride) {
    std::vector<int> out;
    const double collar = 4.0 * g->h;
    const double rho = g->domain.size;
    for (int i = 0; i < g->N; i += stride) {
        for (int j = 0; j < g->N; j += stride) {
            if (!g->inside(i, j)) continue;
            double r = std::abs(g->z(i, j));
            bool ok = g->domain.kind == DomainKind::Disk
                          ? (r < rho - collar)
                          : (std::abs(g->x(i)) < rho - collar &&
                             std::abs(g->x(j)) < rho - collar);
            if (ok) out.push_back(g->idx(i, j));
        }
    }
    return out;
}

double scan_l2(const GridPtr& g, const std::vector<int>& nodes, const std::vector<cplx>& vals,
               int stride) {
    const double cell = g->h * stride;
    return scaled_l2(vals.data(), vals.size(), cell * cell);
}

ReconReport identity_check(const Potential& q1, const Potential& q2, double tau, int stride,
                           int workers) {
    const auto& g = q1.field.grid;
    if (g.get() != q2.field.grid.get()) throw GridMismatch("identity_check: grid mismatch");
    ReconReport rep;
    rep.tau = tau;
    rep.stride = stride;
    rep.scan_nodes = recon_scan_nodes(g, stride);
    const std::size_t n = rep.scan_nodes.size();

    Field w(g, SupportTag::XSupported);
    for (std::size_t k = 0; k < w.values.size(); ++k)
        w.values[k] = g->interior_mask[k] ? q1.field.values[k] - q2.field.values[k] : cplx{0, 0};
    Field w0 = extend_zero(w);
    Field t_mult = stat_phase_apply(w0, tau, +1, StatPhaseMode::Multiplier);

    std::vector<cplx> v_lhs(n), v_td(n), v_central(n), v_corr1(n), v_corr2(n), v_tail(n),
        v_defect(n), v_tmult(n), v_recon(n), v_statdef_mult(n);

    auto table = std::make_shared<CauchyKernelTable>(g);
    const int N = g->N;
    const double h2 = g->h * g->h;
    const double coef = 2.0 * tau / kPi;

    auto work = [&](CauchyWorkspace& ws, std::size_t s) {
        int node = rep.scan_nodes[s];
        int i0 = node / N, j0 = node % N;
        cplx z0 = g->z(i0, j0);
        PhaseParams params{tau, z0, +1};
        CGOSolution s1 = build_cgo(ws, q1, params, CgoSide::Phase);
        CGOSolution s2 = build_cgo(ws, q2, params, CgoSide::ConjugatePhase);
        const Field& A1 = s1.terms.size() > 1 ? s1.terms[1] : s1.series_sum;
        const Field& A2 = s2.terms.size() > 1 ? s2.terms[1] : s2.series_sum;
        bool a1_zero = s1.terms.size() <= 1;
        bool a2_zero = s2.terms.size() <= 1;

        cplx td{0, 0}, central{0, 0}, corr1{0, 0}, corr2{0, 0}, tail{0, 0};
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                int k = g->idx(i, j);
                if (!g->interior_mask[k]) continue;
                cplx wv = w.values[k];
                if (wv == cplx{0, 0}) continue;
                cplx dz = g->z(i, j) - z0;
                double ph = 2.0 * tau * (dz * dz).real();
                cplx W(std::cos(ph), std::sin(ph));
                cplx a1 = a1_zero ? cplx{0, 0} : A1.values[k];
                cplx a2 = a2_zero ? cplx{0, 0} : A2.values[k];
                cplx r1 = s1.remainder.values[k];
                cplx r2 = s2.remainder.values[k];
                cplx p1 = r1 - a1, p2 = r2 - a2;
                td += W * wv;
                central += W * s1.series_sum.values[k] * s2.series_sum.values[k] * wv;
                corr1 += wv * W * a1;
                corr2 += wv * W * a2;
                tail += wv * W * (p1 * p2 + r1 + r2);
            }
        }
        td *= coef * h2;
        central *= coef * h2;
        corr1 *= coef * h2;
        corr2 *= coef * h2;
        tail *= coef * h2;
        cplx lhs = w.values[node];
        cplx rhs = (lhs - td) + central + corr1 + corr2 - tail;
        v_lhs[s] = lhs;
        v_td[s] = td;
        v_central[s] = central;
        v_corr1[s] = corr1;
        v_corr2[s] = corr2;
        v_tail[s] = tail;
        v_defect[s] = lhs - rhs;
        v_recon[s] = rhs;
        v_tmult[s] = t_mult.values[node] - td;          // multiplier vs quadrature
        v_statdef_mult[s] = lhs - t_mult.values[node];  // lemma-mode defect
    };
    run_with_workspaces(n, workers, table, work);

    rep.terms.statphase_defect = scan_l2(g, rep.scan_nodes, v_statdef_mult, stride);
    rep.terms.central_pairing = scan_l2(g, rep.scan_nodes, v_central, stride);
    rep.terms.corr_d = scan_l2(g, rep.scan_nodes, v_corr1, stride);
    rep.terms.corr_dbar = scan_l2(g, rep.scan_nodes, v_corr2, stride);
    rep.terms.tail = scan_l2(g, rep.scan_nodes, v_tail, stride);
    rep.terms.identity_defect = scan_l2(g, rep.scan_nodes, v_defect, stride);
    rep.terms.mult_vs_quad = scan_l2(g, rep.scan_nodes, v_tmult, stride);

    rep.recon_field = Field(g, SupportTag::WholeGrid);
    for (std::size_t s = 0; s < n; ++s) rep.recon_field.values[rep.scan_nodes[s]] = v_recon[s];
    std::vector<cplx> truth(n), diff(n);
    for (std::size_t s = 0; s < n; ++s) {
        truth[s] = w.values[rep.scan_nodes[s]];
        diff[s] = v_recon[s] - truth[s];
    }
    rep.truth_norm = scan_l2(g, rep.scan_nodes, truth, stride);
    if (rep.truth_norm > 0)
        rep.l2_error_vs_truth = scan_l2(g, rep.scan_nodes, diff, stride) / rep.truth_norm;
    return rep;
}

ReconReport reconstruct_from_dn(const DNMap& dn_q, const DNMap& dn_ref, const Potential& q_ref,
                                double tau, int stride, int workers) {
    if (!dn_q.grid || !dn_ref.grid || dn_q.size() != dn_ref.size())
        throw GridMismatch("reconstruct_from_dn: grid mismatch");
    if (dn_q.grid->N != dn_ref.grid->N ||
        std::abs(dn_q.grid->L - dn_ref.grid->L) > 1e-12)
        throw GridMismatch("reconstruct_from_dn: grid mismatch");
    const auto& g = q_ref.field.grid;
    if (g->boundary_count() != dn_q.size())
        throw GridMismatch("reconstruct_from_dn: boundary count mismatch");
    if (tau <= 0.0) throw std::invalid_argument("reconstruct_from_dn: tau must be positive");

    ReconReport rep;
    rep.tau = tau;
    rep.stride = stride;
    rep.scan_nodes = recon_scan_nodes(g, stride);
    const std::size_t n = rep.scan_nodes.size();
    const int M = dn_q.size();
    const int N = g->N;
    const double rho = g->domain.size;

    bool qref_zero = true;
    for (const auto& v : q_ref.field.values)
        if (v != cplx{0, 0}) { qref_zero = false; break; }

    std::vector<cplx> recon_raw(n);

    // DN difference, reused by every scan point
    std::vector<cplx> diff(dn_q.matrix.size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = dn_q.matrix[k] - dn_ref.matrix[k];

    // int u1 (q_ref - q) v2 dx = int ((Lambda_q - Lambda_ref) f2) f1 dsigma,
    // so -(2 tau/pi) * boundary pairing estimates (q - q_ref)(x0)
    auto pair_with_traces = [&](std::size_t s, const std::vector<cplx>& f1,
                                const std::vector<cplx>& f2) {
        cplx acc{0, 0};
        for (int r = 0; r < M; ++r) {
            cplx row{0, 0};
            const cplx* d = &diff[static_cast<std::size_t>(r) * M];
            for (int c = 0; c < M; ++c) row += d[c] * f2[c];
            acc += row * f1[r];
        }
        acc *= g->arc_weight;
        recon_raw[s] = -(2.0 * tau / kPi) * acc;
    };

    if (qref_zero) {
        parallel_for(n, workers, [&](std::size_t s) {
            int node = rep.scan_nodes[s];
            cplx z0 = g->z(node / N, node % N);
            std::vector<cplx> f1(M), f2(M);
            for (int m = 0; m < M; ++m) {
                double th = kTwoPi * m / M;
                cplx zb(rho * std::cos(th), rho * std::sin(th));
                cplx phv = (zb - z0) * (zb - z0);
                f1[m] = std::exp(cplx(0, 1) * tau * phv);
                f2[m] = std::exp(cplx(0, 1) * tau * std::conj(phv));
            }
            pair_with_traces(s, f1, f2);
        });
    } else {
        auto table = std::make_shared<CauchyKernelTable>(g);
        run_with_workspaces(n, workers, table, [&](CauchyWorkspace& ws, std::size_t s) {
            int node = rep.scan_nodes[s];
            cplx z0 = g->z(node / N, node % N);
            PhaseParams params{tau, z0, +1};
            CGOSolution s1 = build_cgo(ws, q_ref, params, CgoSide::Phase);
            CGOSolution s2 = build_cgo(ws, q_ref, params, CgoSide::ConjugatePhase);
            auto t1 = extract_trace(s1.series_sum);
            auto t2 = extract_trace(s2.series_sum);
            std::vector<cplx> f1(M), f2(M);
            for (int m = 0; m < M; ++m) {
                double th = kTwoPi * m / M;
                cplx zb(rho * std::cos(th), rho * std::sin(th));
                cplx phv = (zb - z0) * (zb - z0);
                f1[m] = std::exp(cplx(0, 1) * tau * phv) * t1[m];
                f2[m] = std::exp(cplx(0, 1) * tau * std::conj(phv)) * t2[m];
            }
            pair_with_traces(s, f1, f2);
        });
    }

    // correction terms involve q_ref only; zero when q_ref == 0. For nonzero
    // q_ref the unknown difference is stood in by the raw estimate (one pass).
    std::vector<cplx> recon(recon_raw);
    if (!qref_zero) {
        auto table = std::make_shared<CauchyKernelTable>(g);
        CauchyWorkspace ws(table);
        Field west(g, SupportTag::XSupported);
        for (std::size_t s = 0; s < n; ++s) west.values[rep.scan_nodes[s]] = recon_raw[s];
        Field aref_dbar = ws.dbar_inv(extend_zero(q_ref.field));
        Field aref_d = ws.d_inv(extend_zero(q_ref.field));
        Field w_dbar = ws.dbar_inv(extend_zero(west));
        Field w_d = ws.d_inv(extend_zero(west));
        const double h2 = g->h * g->h;
        for (std::size_t s = 0; s < n; ++s) {
            int node = rep.scan_nodes[s];
            int i0 = node / N, j0 = node % N;
            cplx z0 = g->z(i0, j0);
            cplx cd = aref_d.values[node], cdb = aref_dbar.values[node];
            cplx corr{0, 0};
            for (int i = 0; i < N; ++i) {
                for (int j = 0; j < N; ++j) {
                    int k = g->idx(i, j);
                    if (!g->interior_mask[k]) continue;
                    cplx dz = g->z(i, j) - z0;
                    double ph = 2.0 * tau * (dz * dz).real();
                    cplx W(std::cos(ph), std::sin(ph));
                    corr += w_dbar.values[k] * (aref_d.values[k] - cd) * W;
                    corr += w_d.values[k] * (aref_dbar.values[k] - cdb) * W;
                }
            }
            recon[s] = recon_raw[s] - (tau / (2.0 * kPi)) * h2 * corr;
        }
    }

    rep.recon_field = Field(g, SupportTag::WholeGrid);
    for (std::size_t s = 0; s < n; ++s) rep.recon_field.values[rep.scan_nodes[s]] = recon[s];
    rep.terms.central_pairing = scan_l2(g, rep.scan_nodes, recon_raw, stride);
    return rep;
}

TauSchedule tau_schedule(double d, double R, double alpha) {
    if (d < 0.0) throw std::invalid_argument("tau_schedule: d must be nonnegative");
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("tau_schedule: alpha must lie in (0,1)");
    TauSchedule out;
    if (d >= 1.0) {
        out.which = ScheduleCase::TrivialBound;
        return out;
    }
    const double r0 = 8.0 * R * R + 1.0;
    out.which = ScheduleCase::LogFormula;
    out.tau = alpha / r0 * (1.0 + std::log(1.0 / d));
    return out;
}

double stability_bound(double d, double s, double M, double C) {
    if (s <= 0.0 || s > 1.0 || std::abs(s - 0.5) < 1e-12)
        throw std::invalid_argument("stability_bound: s must lie in (0,1] minus {1/2}");
    (void)M;
    if (d >= 1.0) return C * d;
    return C * std::pow(1.0 + std::log(1.0 / d), -s / 2.0);
}

}  // namespace bukhgeim
