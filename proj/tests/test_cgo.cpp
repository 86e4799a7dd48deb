#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bukhgeim/cgo.hpp"
#include "bukhgeim/norms.hpp"
#include "bukhgeim/rng.hpp"

using namespace bukhgeim;

namespace {

GridPtr disk_grid(int N) { return make_grid(2.0, N, DomainDescriptor{DomainKind::Disk, 1.0}, 1.25); }

Potential bump_potential(const GridPtr& g, double amp) {
    Potential q;
    q.field = bump_field(g, cplx(0.15, 0.1), 0.55, amp);
    q.p = 4.0;
    return q;
}

}  // namespace

TEST_CASE("q = 0 gives u = e^{i tau Phi} exactly with zero remainder") {
    auto g = disk_grid(64);
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    Potential q;
    q.field = Field(g, SupportTag::XSupported);
    PhaseParams p{12.0, cplx(0.1, -0.05), +1};
    CGOSolution sol = build_cgo(ws, q, p, CgoSide::Phase);
    CHECK(lp_norm(sol.remainder, 2.0) == 0.0);
    for (std::size_t j = 1; j < sol.terms.size(); ++j)
        CHECK(lp_norm(sol.terms[j], 2.0) == 0.0);
    // series sum is identically one, so u is the bare phase factor
    for (const auto& v : sol.series_sum.values) CHECK(v == cplx(1.0, 0.0));
    Field u = sol.assembled();
    double worst = 0.0;
    for (int i = 0; i < g->N; ++i)
        for (int j = 0; j < g->N; ++j) {
            cplx dz = g->z(i, j) - p.z0;
            cplx expect = std::exp(cplx(0, 1) * (p.tau * (dz * dz)));
            worst = std::max(worst, std::abs(u.at(i, j) - expect) / std::abs(expect));
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("constant-potential U1 matches the direct-quadrature oracle") {
    auto g = disk_grid(64);
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    Potential q;
    q.field = Field(g, SupportTag::XSupported);
    for (std::size_t k = 0; k < q.field.values.size(); ++k)
        if (g->interior_mask[k]) q.field.values[k] = 0.05;
    PhaseParams p{6.0, cplx(0.0, 0.0), +1};
    CGOSolution sol = build_cgo(ws, q, p, CgoSide::Phase);

    // oracle: R~(arg) with the convolution done by direct summation
    Field aq = ws.dbar_inv(extend_zero(q.field));
    int i0 = static_cast<int>(std::lround((p.z0.real() + g->L) / g->h));
    int j0 = static_cast<int>(std::lround((p.z0.imag() + g->L) / g->h));
    cplx c0 = aq.at(i0, j0);
    Field arg(g);
    Field w = weight(g, p);
    for (std::size_t k = 0; k < arg.values.size(); ++k)
        arg.values[k] = 0.5 * (aq.values[k] - c0) * w.values[k];
    // direct d_inv: u(z) = sum conj(K(z - zeta)) arg... via conj(dbar_inv(conj arg))
    const int N = g->N, M = table->padded();
    Field conv(g);
    const double h2 = g->h * g->h;
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            cplx acc{0, 0};
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b) {
                    cplx v = std::conj(arg.at(a, b));
                    if (v == cplx{0, 0}) continue;
                    int oi = ((i - a) % M + M) % M;
                    int oj = ((j - b) % M + M) % M;
                    acc += table->kernel_dbar_at(oi, oj) * v;
                }
            conv.at(i, j) = std::conj(acc * h2);
        }
    }
    Field u1_oracle(g);
    for (std::size_t k = 0; k < u1_oracle.values.size(); ++k)
        u1_oracle.values[k] = 0.5 * std::conj(w.values[k]) * conv.values[k];
    Field diff = sol.terms[1] - u1_oracle;
    CHECK(lp_norm(diff, 2.0) / lp_norm(u1_oracle, 2.0) <= 1e-6);
}

TEST_CASE("series ratios shrink as tau doubles") {
    auto g = disk_grid(128);
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    Potential q = bump_potential(g, 4.0);
    double prev = 1.0;
    for (double tau : {8.0, 16.0, 32.0, 64.0}) {
        PhaseParams p{tau, cplx(-0.1, 0.05), +1};
        CGOSolution sol = build_cgo(ws, q, p, CgoSide::Phase);
        REQUIRE(!sol.term_ratios.empty());
        double worst = 0.0;
        for (double r : sol.term_ratios) worst = std::max(worst, r);
        CHECK(worst < prev);
        CHECK(sol.geometric_half_decay);
        prev = worst;
    }
}

TEST_CASE("residual: finite-difference error halves twice per refinement at q=0") {
    double prev = -1.0;
    for (int N : {128, 256}) {
        auto g = disk_grid(N);
        auto table = std::make_shared<CauchyKernelTable>(g);
        CauchyWorkspace ws(table);
        Potential q;
        q.field = Field(g, SupportTag::XSupported);
        PhaseParams p{8.0, cplx(0.1, -0.07), +1};
        CGOSolution sol = build_cgo(ws, q, p, CgoSide::Phase);
        double r = residual(sol, q);
        if (prev > 0) {
            double ratio = prev / r;
            CHECK(ratio >= 3.0);
            CHECK(ratio <= 4.8);
        }
        prev = r;
    }
}

TEST_CASE("residual decreases with truncation order until the floor") {
    auto g = disk_grid(128);
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    Potential q = bump_potential(g, 4.0);
    PhaseParams p{16.0, cplx(-0.1, 0.05), +1};
    CgoOptions opt;
    opt.tail_tol = 0.0;
    std::vector<double> resids;
    for (int jmax : {1, 2, 4}) {
        opt.j_max = jmax;
        CGOSolution sol = build_cgo(ws, q, p, CgoSide::Phase, opt);
        resids.push_back(residual(sol, q));
    }
    CHECK(resids[1] < resids[0]);
    CHECK(resids[2] <= resids[1] * 1.02);  // floor reached
}

TEST_CASE("remainder decay exponents over the tau sweep") {
    auto g = disk_grid(128);
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    Potential q = bump_potential(g, 4.0);
    std::vector<cplx> z0s{cplx(-0.1, 0.05)};
    CHECK_THROWS_AS(remainder_report(ws, q, {8, 16, 32}, z0s), std::invalid_argument);

    auto rep = remainder_report(ws, q, {8, 16, 32, 64}, z0s);
    CHECK(rep.defined);
    CHECK(rep.exponent_l2 <= -1.4);
    CHECK(rep.exponent_l4 <= -(0.5 + 0.5 / q.p) + 0.1);  // p = 4: threshold -0.525
    CHECK(rep.pass(q.p));

    Potential zero;
    zero.field = Field(g, SupportTag::XSupported);
    auto rep0 = remainder_report(ws, zero, {8, 16, 32, 64}, z0s);
    CHECK(!rep0.defined);
    CHECK(rep0.pass(4.0));
}

TEST_CASE("growth bound with one-point calibration") {
    auto g = disk_grid(128);
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    Potential zero;
    zero.field = Field(g, SupportTag::XSupported);
    std::vector<double> taus{2, 4, 8, 16, 32, 64};
    CHECK(growth_check(ws, zero, taus, cplx(0.3, -0.2), g->R));
    Potential q = bump_potential(g, 4.0);
    CHECK(growth_check(ws, q, taus, cplx(0.3, -0.2), g->R));
}

TEST_CASE("side symmetry: conjugating the phase side of conj(q) gives the conjugate side") {
    auto g = disk_grid(64);
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    Potential q;
    q.field = bump_field(g, cplx(0.15, 0.1), 0.5, 2.0) +
              cplx(0, 1) * bump_field(g, cplx(-0.2, -0.1), 0.4, 1.0);
    q.field.support = SupportTag::XSupported;
    Potential qc;
    qc.field = Field(g, SupportTag::XSupported);
    for (std::size_t k = 0; k < q.field.values.size(); ++k)
        qc.field.values[k] = std::conj(q.field.values[k]);

    PhaseParams pp{9.0, cplx(0.05, -0.1), +1};
    PhaseParams pm{9.0, cplx(0.05, -0.1), -1};
    CGOSolution a = build_cgo(ws, qc, pp, CgoSide::Phase);
    CGOSolution b = build_cgo(ws, q, pm, CgoSide::ConjugatePhase);
    Field ua = a.assembled(), ub = b.assembled();
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < ua.values.size(); ++k) {
        num += std::norm(std::conj(ua.values[k]) - ub.values[k]);
        den += std::norm(ub.values[k]);
    }
    CHECK(std::sqrt(num / den) <= 1e-12);
}

TEST_CASE("non-convergence raises with a tau hint") {
    auto g = disk_grid(64);
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    Potential q = bump_potential(g, 400.0);
    PhaseParams p{0.5, cplx(0.0, 0.0), +1};
    CHECK_THROWS_AS(build_cgo(ws, q, p, CgoSide::Phase), CgoNonConvergence);
    try {
        build_cgo(ws, q, p, CgoSide::Phase);
    } catch (const CgoNonConvergence& e) {
        CHECK(e.tau_hint > 0.5);
        CHECK(e.worst_ratio >= 1.0);
    }
}

TEST_CASE("diagnostics json carries the record") {
    auto g = disk_grid(64);
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    Potential q = bump_potential(g, 4.0);
    PhaseParams p{8.0, cplx(0.0, 0.0), +1};
    CGOSolution sol = build_cgo(ws, q, p, CgoSide::Phase);
    std::string js = cgo_diagnostics_json(sol, residual(sol, q));
    for (const char* key : {"\"tau\"", "\"z0\"", "\"side\"", "\"J\"", "\"norms\"", "\"ratios\"",
                            "\"residual\"", "\"remainder\""})
        CHECK(js.find(key) != std::string::npos);
}
