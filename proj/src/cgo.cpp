#include "bukhgeim/cgo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bukhgeim/norms.hpp"

namespace bukhgeim {

namespace {

std::pair<int, int> nearest_node(const GridPtr& g, cplx z0) {
    int i = static_cast<int>(std::lround((z0.real() + g->L) / g->h));
    int j = static_cast<int>(std::lround((z0.imag() + g->L) / g->h));
    i = std::clamp(i, 0, g->N - 1);
    j = std::clamp(j, 0, g->N - 1);
    return {i, j};
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    // least squares on (log x, log y)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = static_cast<int>(xs.size());
    for (int i = 0; i < n; ++i) {
        double lx = std::log(xs[i]), ly = std::log(std::max(ys[i], 1e-300));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

cplx CGOSolution::phase_factor(int i, int j) const {
    cplx dz = terms.front().grid->z(i, j) - params.z0;
    cplx ph = dz * dz;
    if (side == CgoSide::ConjugatePhase) ph = std::conj(ph);
    cplx e = cplx(0, 1) * (params.sign * params.tau) * ph;
    return std::exp(e);
}

Field CGOSolution::assembled() const {
    const auto& g = series_sum.grid;
    Field out(g, SupportTag::WholeGrid);
    for (int i = 0; i < g->N; ++i)
        for (int j = 0; j < g->N; ++j)
            out.at(i, j) = phase_factor(i, j) * series_sum.at(i, j);
    return out;
}

CGOSolution build_cgo(CauchyWorkspace& ws, const Potential& q, const PhaseParams& params,
                      CgoSide side, const CgoOptions& opt) {
    const auto& g = q.field.grid;
    params.validate(g);
    CGOSolution sol;
    sol.params = params;
    sol.side = side;

    Field one(g, SupportTag::WholeGrid);
    for (auto& v : one.values) v = 1.0;
    sol.terms.push_back(one);
    sol.term_norms.push_back(l2_norm_masked(one, g->interior_mask));

    const bool phase_side = side == CgoSide::Phase;
    auto inv_a = [&](const Field& f) { return phase_side ? ws.dbar_inv(f) : ws.d_inv(f); };
    auto rt = [&](const Field& f) {
        return phase_side ? r_tilde(ws, f, params) : r_tilde_bar(ws, f, params);
    };

    // U_1 = R~(1/2 (inv_a q - inv_a q (x0)))
    Field aq = inv_a(extend_zero(q.field));
    auto [i0, j0] = nearest_node(g, params.z0);
    cplx c0 = aq.at(i0, j0);
    Field arg(g, SupportTag::WholeGrid);
    for (std::size_t k = 0; k < arg.values.size(); ++k)
        arg.values[k] = 0.5 * (aq.values[k] - c0);
    Field u1 = rt(arg);
    double n1 = l2_norm_masked(u1, g->interior_mask);
    sol.terms.push_back(u1);
    sol.term_norms.push_back(n1);

    Field rem(g, SupportTag::WholeGrid);
    Field sum = one - u1;
    int strikes = 0;
    bool all_half = true;
    double sign_j = +1.0;  // (-1)^j for j=2,4,... handled explicitly
    for (int j = 2; j <= opt.j_max; ++j) {
        const Field& prev = sol.terms.back();
        Field qu(g, SupportTag::XSupported);
        for (std::size_t k = 0; k < qu.values.size(); ++k)
            qu.values[k] = g->interior_mask[k] ? q.field.values[k] * prev.values[k] : cplx{0, 0};
        Field uj = rt(cplx(0.5, 0.0) * inv_a(qu));
        double nj = l2_norm_masked(uj, g->interior_mask);
        double ratio = sol.term_norms.back() > 0 ? nj / sol.term_norms.back() : 0.0;
        sol.terms.push_back(uj);
        sol.term_norms.push_back(nj);
        sol.term_ratios.push_back(ratio);
        if (ratio > 0.5) all_half = false;
        if (ratio >= 1.0) {
            if (++strikes >= opt.divergence_strikes) {
                double worst = *std::max_element(sol.term_ratios.begin(), sol.term_ratios.end());
                throw CgoNonConvergence(params.tau, worst);
            }
        } else {
            strikes = 0;
        }
        sign_j = (j % 2 == 0) ? +1.0 : -1.0;
        for (std::size_t k = 0; k < rem.values.size(); ++k) {
            rem.values[k] += sign_j * uj.values[k];
            sum.values[k] += sign_j * uj.values[k];
        }
        if (n1 == 0.0 || nj <= opt.tail_tol * n1) break;
    }
    sol.remainder = rem;
    sol.series_sum = sum;
    sol.geometric_half_decay = all_half && !sol.term_ratios.empty();
    return sol;
}

double residual(const CGOSolution& sol, const Potential& q) {
    const auto& g = sol.series_sum.grid;
    Field u = sol.assembled();
    const double h2 = g->h * g->h;
    const double margin = 2.0 * g->h;
    std::vector<std::uint8_t> mask(g->nodes(), 0);
    const double rho = g->domain.size;
    for (int i = 1; i < g->N - 1; ++i) {
        for (int j = 1; j < g->N - 1; ++j) {
            if (!g->inside(i, j)) continue;
            double r = std::abs(g->z(i, j));
            bool interior_ok = g->domain.kind == DomainKind::Disk
                                   ? (r < rho - margin)
                                   : (std::abs(g->x(i)) < rho - margin &&
                                      std::abs(g->x(j)) < rho - margin);
            if (interior_ok) mask[g->idx(i, j)] = 1;
        }
    }
    Field res(g, SupportTag::WholeGrid);
    for (int i = 1; i < g->N - 1; ++i) {
        for (int j = 1; j < g->N - 1; ++j) {
            if (!mask[g->idx(i, j)]) continue;
            cplx lap = (u.at(i + 1, j) + u.at(i - 1, j) + u.at(i, j + 1) + u.at(i, j - 1) -
                        4.0 * u.at(i, j)) / h2;
            res.at(i, j) = lap + q.field.at(i, j) * u.at(i, j);
        }
    }
    double nr = l2_norm_masked(res, mask);
    double nu = l2_norm_masked(u, mask);
    return nu > 0 ? nr / nu : 0.0;
}

RemainderReport remainder_report(CauchyWorkspace& ws, const Potential& q,
                                 const std::vector<double>& taus,
                                 const std::vector<cplx>& z0_samples, int sign) {
    if (taus.size() < 4)
        throw std::invalid_argument("remainder_report: need at least 4 tau points");
    RemainderReport rep;
    rep.taus = taus;
    const auto& g = q.field.grid;
    bool any_nonzero = false;
    for (double tau : taus) {
        double sup2 = 0.0, sup4 = 0.0;
        for (cplx z0 : z0_samples) {
            PhaseParams p{tau, z0, sign};
            CGOSolution sol = build_cgo(ws, q, p, CgoSide::Phase);
            Field r = restrict_to_x(sol.remainder);
            sup2 = std::max(sup2, lp_norm(r, 2.0));
            sup4 = std::max(sup4, lp_norm(r, 4.0));
        }
        rep.l2.push_back(sup2);
        rep.l4.push_back(sup4);
        if (sup2 > 0) any_nonzero = true;
    }
    if (!any_nonzero) {
        rep.defined = false;  // q == 0: remainder identically zero, exponents flagged zero
        return rep;
    }
    rep.exponent_l2 = fit_slope(rep.taus, rep.l2);
    rep.exponent_l4 = fit_slope(rep.taus, rep.l4);
    return rep;
}

double log_w12_norm(const CGOSolution& sol) {
    // log ||u||_{W12(X)} with the max modulus factored out:
    // ||u||^2 = h^2 sum |u|^2 + sum |u_E - u_P|^2 + sum |u_N - u_P|^2
    const auto& g = sol.series_sum.grid;
    Field u = sol.assembled();
    double m = 0.0;
    for (std::size_t k = 0; k < u.values.size(); ++k)
        if (g->interior_mask[k]) m = std::max(m, std::abs(u.values[k]));
    if (m == 0.0) return -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    const double h = g->h;
    for (int i = 0; i < g->N; ++i) {
        for (int j = 0; j < g->N; ++j) {
            if (!g->inside(i, j)) continue;
            cplx v = u.at(i, j) / m;
            acc += h * h * std::norm(v);
            if (i + 1 < g->N && g->inside(i + 1, j))
                acc += std::norm((u.at(i + 1, j) - u.at(i, j)) / m);
            if (j + 1 < g->N && g->inside(i, j + 1))
                acc += std::norm((u.at(i, j + 1) - u.at(i, j)) / m);
        }
    }
    return std::log(m) + 0.5 * std::log(acc);
}

bool growth_check(CauchyWorkspace& ws, const Potential& q, const std::vector<double>& taus,
                  cplx z0, double R) {
    if (taus.empty()) return true;
    std::vector<double> logs;
    for (double tau : taus) {
        PhaseParams p{tau, z0, +1};
        CGOSolution sol = build_cgo(ws, q, p, CgoSide::Phase);
        logs.push_back(log_w12_norm(sol));
    }
    double logC = logs.front() - 4.0 * R * R * taus.front();
    for (std::size_t i = 1; i < taus.size(); ++i) {
        if (logs[i] - 4.0 * R * R * taus[i] > logC + 1e-9) return false;
    }
    return true;
}

std::string cgo_diagnostics_json(const CGOSolution& sol, double residual_value) {
    std::ostringstream os;
    os.precision(12);
    os << "{\"tau\":" << sol.params.tau << ",\"z0\":[" << sol.params.z0.real() << ","
       << sol.params.z0.imag() << "],\"side\":\""
       << (sol.side == CgoSide::Phase ? "phase" : "conjugate") << "\",\"J\":" << sol.truncation_j()
       << ",\"norms\":[";
    for (std::size_t i = 0; i < sol.term_norms.size(); ++i)
        os << (i ? "," : "") << sol.term_norms[i];
    os << "],\"ratios\":[";
    for (std::size_t i = 0; i < sol.term_ratios.size(); ++i)
        os << (i ? "," : "") << sol.term_ratios[i];
    os << "],\"residual\":" << residual_value << ",\"remainder\":{\"l2\":"
       << lp_norm(restrict_to_x(sol.remainder), 2.0)
       << ",\"l4\":" << lp_norm(restrict_to_x(sol.remainder), 4.0) << "}}";
    return os.str();
}

}  // namespace bukhgeim
