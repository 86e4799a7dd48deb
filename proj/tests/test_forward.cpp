#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bukhgeim/cgo.hpp"
#include "bukhgeim/forward.hpp"
#include "bukhgeim/norms.hpp"
#include "bukhgeim/rng.hpp"

using namespace bukhgeim;

namespace {
constexpr double kPi = 3.14159265358979323846;

GridPtr disk_grid(int N) { return make_grid(2.0, N, DomainDescriptor{DomainKind::Disk, 1.0}, 1.25); }

Potential zero_potential(const GridPtr& g) {
    Potential q;
    q.field = Field(g, SupportTag::XSupported);
    return q;
}

double rel_err_mask(const Field& a, const Field& b, const GridPtr& g) {
    Field d = a - b;
    return l2_norm_masked(d, g->interior_mask) / l2_norm_masked(b, g->interior_mask);
}

}  // namespace

TEST_CASE("harmonic polynomials solve exactly; constants stay constant") {
    auto g = disk_grid(128);
    ForwardSolver solver(g);
    Potential q0 = zero_potential(g);
    Field u = solver.solve_dirichlet(q0, [](double th) { return cplx(std::cos(th), 0); });
    double worst = 0.0;
    for (int i = 0; i < g->N; ++i)
        for (int j = 0; j < g->N; ++j)
            if (g->inside(i, j)) worst = std::max(worst, std::abs(u.at(i, j) - g->x(i)));
    CHECK(worst <= 1e-9);

    Field uc = solver.solve_dirichlet(q0, [](double) { return cplx(1.0, 0); });
    worst = 0.0;
    for (int i = 0; i < g->N; ++i)
        for (int j = 0; j < g->N; ++j)
            if (g->inside(i, j)) worst = std::max(worst, std::abs(uc.at(i, j) - 1.0));
    CHECK(worst <= 1e-10);
}

TEST_CASE("manufactured solution converges at second order") {
    std::vector<double> errs;
    for (int N : {64, 128, 256}) {
        auto g = disk_grid(N);
        ForwardSolver solver(g);
        Potential qm;
        qm.field = Field(g, SupportTag::XSupported);
        for (std::size_t k = 0; k < qm.field.values.size(); ++k)
            if (g->interior_mask[k]) qm.field.values[k] = -1.0;
        Field u = solver.solve_dirichlet(qm, [](double th) {
            return cplx(std::exp(std::cos(th)), 0);
        });
        Field exact(g);
        for (int i = 0; i < g->N; ++i)
            for (int j = 0; j < g->N; ++j) exact.at(i, j) = std::exp(g->x(i));
        errs.push_back(rel_err_mask(u, exact, g));
    }
    CHECK(errs[0] / errs[1] >= 3.5);
    CHECK(errs[0] / errs[1] <= 4.5);
    CHECK(errs[1] / errs[2] >= 3.5);
    CHECK(errs[1] / errs[2] <= 4.5);
}

TEST_CASE("DN map: constants annihilated, circle modes near k/rho, exact symmetry") {
    auto g = disk_grid(128);
    ForwardSolver solver(g);
    DNMap dn = solver.assemble_dn(zero_potential(g));
    const int M = dn.size();
    CHECK(M == g->boundary_count());

    std::vector<cplx> ones(M, cplx{1, 0});
    auto r0 = dn.apply(ones);
    std::vector<cplx> mode1(M);
    for (int m = 0; m < M; ++m) mode1[m] = std::cos(2 * kPi * m / M);
    auto r1 = dn.apply(mode1);
    double n0 = 0, n1 = 0;
    for (int m = 0; m < M; ++m) {
        n0 += std::norm(r0[m]);
        n1 += std::norm(r1[m]);
    }
    CHECK(std::sqrt(n0 / n1) <= 0.05);

    for (int k = 1; k <= 4; ++k) {
        std::vector<cplx> f(M), target(M);
        for (int m = 0; m < M; ++m) {
            double th = 2 * kPi * m / M;
            f[m] = std::cos(k * th);
            target[m] = (k / 1.0) * std::cos(k * th);
        }
        auto lf = dn.apply(f);
        double num = 0, den = 0;
        for (int m = 0; m < M; ++m) {
            num += std::norm(lf[m] - target[m]);
            den += std::norm(target[m]);
        }
        CHECK(std::sqrt(num / den) <= 0.03);
    }

    double snum = 0, sden = 0;
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < M; ++c) {
            snum += std::norm(dn.at(r, c) - dn.at(c, r));
            sden += std::norm(dn.at(r, c));
        }
    CHECK(std::sqrt(snum / sden) <= 1e-6);
    CHECK(!dn.q_fingerprint.empty());
}

TEST_CASE("eigenvalue guard flips near the first Dirichlet eigenvalue") {
    auto g = disk_grid(64);
    ForwardSolver solver(g);
    CHECK(solver.eigenvalue_guard(zero_potential(g)));

    Potential qm;
    qm.field = Field(g, SupportTag::XSupported);
    for (std::size_t k = 0; k < qm.field.values.size(); ++k)
        if (g->interior_mask[k]) qm.field.values[k] = -1.0;
    CHECK(solver.eigenvalue_guard(qm));

    double lam1 = solver.first_dirichlet_eigenvalue();
    CHECK(lam1 == doctest::Approx(5.7832).epsilon(0.01));  // j_{0,1}^2 on the unit disk

    auto make_const = [&](double c) {
        Potential q;
        q.field = Field(g, SupportTag::XSupported);
        for (std::size_t k = 0; k < q.field.values.size(); ++k)
            if (g->interior_mask[k]) q.field.values[k] = c;
        return q;
    };
    CHECK(!solver.eigenvalue_guard(make_const(lam1)));
    CHECK(solver.eigenvalue_guard(make_const(lam1 + 0.5)));
    CHECK(solver.eigenvalue_guard(make_const(lam1 - 0.5)));
}

TEST_CASE("volume pairing against the boundary identity (Lemma-style)") {
    auto g = disk_grid(128);
    ForwardSolver solver(g);
    Potential q1 = zero_potential(g);
    Potential q2;
    q2.field = cplx(0.4, 0.0) * bump_field(g, cplx(0.1, -0.05), 0.55, 1.0);
    q2.field.support = SupportTag::XSupported;

    // q1 == q2 -> exactly zero
    Field dummy(g);
    for (auto& v : dummy.values) v = cplx(0.3, 0.1);
    CHECK(pairing(q1, q1, dummy, dummy) == cplx{0, 0});

    // matched Cauchy data: int u1 (q1-q2) u2 = int dnu(u2 - U) u1 dsigma
    TraceFn f1 = [](double th) { return cplx(std::cos(th) + 0.4 * std::sin(2 * th), 0.2); };
    TraceFn f2 = [](double th) { return cplx(0.7 * std::cos(2 * th), 0.3 * std::sin(th)); };
    Field u1 = solver.solve_dirichlet(q1, f1);
    Field u2 = solver.solve_dirichlet(q2, f2);
    Field U = solver.solve_dirichlet(q1, f2);  // same trace as u2, potential q1
    cplx vol = pairing(q1, q2, u1, u2);
    Field w = u2 - U;
    auto dnu = solver.normal_derivative(w, [](double) { return cplx(0, 0); });
    const int M = g->boundary_count();
    cplx bnd{0, 0};
    for (int m = 0; m < M; ++m) {
        double th = 2 * kPi * m / M;
        bnd += dnu[m] * f1(th);
    }
    bnd *= g->arc_weight;  // int dnu(u2 - U) u1 dsigma
    // compare |vol| to |bnd| up to quadrature error
    CHECK(std::abs(vol - bnd) / std::abs(vol) <= 0.02);
}

TEST_CASE("boundary pairing matches the volume pairing within 1%") {
    auto g = disk_grid(128);
    ForwardSolver solver(g);
    Potential q1 = zero_potential(g);
    Potential q2;
    q2.field = cplx(0.4, 0.0) * bump_field(g, cplx(0.1, -0.05), 0.55, 1.0);
    q2.field.support = SupportTag::XSupported;
    DNMap dn1 = solver.assemble_dn(q1);
    DNMap dn2 = solver.assemble_dn(q2);

    const int M = g->boundary_count();
    std::vector<cplx> f1(M), f2(M);
    for (int m = 0; m < M; ++m) {
        double th = 2 * kPi * m / M;
        f1[m] = cplx(0.3, 0) + std::exp(cplx(0, th)) + 0.2 * std::exp(cplx(0, -th)) +
                cplx(0, 0.4) * std::exp(cplx(0, 2 * th));
        f2[m] = cplx(-0.1, 0) + cplx(0, 0.5) * std::exp(cplx(0, th)) +
                0.6 * std::exp(cplx(0, -2 * th));
    }
    Field u1 = solver.solve_dirichlet(q1, f1);
    Field u2 = solver.solve_dirichlet(q2, f2);
    cplx vol = pairing(q1, q2, u1, u2);
    cplx bnd = boundary_pairing(dn1, dn2, f1, f2);
    CHECK(std::abs(vol - bnd) / std::abs(vol) <= 0.01);

    // identical maps pair to zero; bilinearity is exact
    CHECK(std::abs(boundary_pairing(dn1, dn1, f1, f2)) == 0.0);
    cplx a(2.0, -1.0);
    std::vector<cplx> af2(M);
    for (int m = 0; m < M; ++m) af2[m] = a * f2[m];
    CHECK(std::abs(boundary_pairing(dn1, dn2, f1, af2) - a * bnd) <= 1e-12 * std::abs(bnd));
}

TEST_CASE("cauchy_distance_data: homogeneity, first-order scaling in eps") {
    auto g = disk_grid(64);
    ForwardSolver solver(g);
    Potential q1 = zero_potential(g);
    Field bmp = bump_field(g, cplx(0.1, -0.05), 0.55, 1.0);

    auto dn_for = [&](double eps) {
        Potential q;
        q.field = cplx(eps, 0.0) * bmp;
        q.field.support = SupportTag::XSupported;
        return solver.assemble_dn(q);
    };
    DNMap dn0 = solver.assemble_dn(q1);
    DNMap dnA = dn_for(0.1);
    CHECK(cauchy_distance_data(dn0, dn0) == 0.0);

    // homogeneity: dn0 + c (dnA - dn0) scales exactly
    double base = cauchy_distance_data(dn0, dnA);
    for (double c : {0.5, 2.0}) {
        DNMap dnC = dnA;
        for (std::size_t k = 0; k < dnC.matrix.size(); ++k)
            dnC.matrix[k] = dn0.matrix[k] + c * (dnA.matrix[k] - dn0.matrix[k]);
        CHECK(cauchy_distance_data(dn0, dnC) == doctest::Approx(c * base).epsilon(1e-10));
    }

    // eps halved -> distance ratio in [0.4, 0.6]
    DNMap dnB = dn_for(0.05);
    double dA = cauchy_distance_data(dn0, dnA);
    double dB = cauchy_distance_data(dn0, dnB);
    CHECK(dB / dA >= 0.4);
    CHECK(dB / dA <= 0.6);

    auto g2 = disk_grid(128);
    ForwardSolver solver2(g2);
    DNMap other = solver2.assemble_dn(zero_potential(g2));
    CHECK_THROWS_AS(cauchy_distance_data(dn0, other), std::invalid_argument);
}

TEST_CASE("discrete Lemma 3.2 inequality over the probe family") {
    auto g = disk_grid(64);
    ForwardSolver solver(g);
    Potential q1 = zero_potential(g);
    Potential q2;
    q2.field = cplx(0.4, 0.0) * bump_field(g, cplx(0.1, -0.05), 0.55, 1.0);
    q2.field.support = SupportTag::XSupported;
    DNMap dn1 = solver.assemble_dn(q1);
    DNMap dn2 = solver.assemble_dn(q2);
    double dhat = cauchy_distance_data(dn1, dn2);

    auto w12 = [&](const Field& u) {
        double acc = 0.0;
        const double h = g->h;
        for (int i = 0; i < g->N; ++i)
            for (int j = 0; j < g->N; ++j) {
                if (!g->inside(i, j)) continue;
                acc += h * h * std::norm(u.at(i, j));
                if (i + 1 < g->N && g->inside(i + 1, j))
                    acc += std::norm(u.at(i + 1, j) - u.at(i, j));
                if (j + 1 < g->N && g->inside(i, j + 1))
                    acc += std::norm(u.at(i, j + 1) - u.at(i, j));
            }
        return std::sqrt(acc);
    };

    double worst = 0.0;
    // harmonic-type probes: discrete solves with low-mode traces
    std::vector<std::pair<TraceFn, TraceFn>> pairs = {
        {[](double th) { return cplx(std::cos(th), 0); },
         [](double th) { return cplx(std::cos(th), 0); }},
        {[](double) { return cplx(1, 0); }, [](double th) { return cplx(std::cos(2 * th), 0); }},
        {[](double th) { return cplx(std::sin(2 * th), 0.3 * std::cos(th)); },
         [](double th) { return cplx(std::cos(3 * th), 0.1); }},
    };
    for (const auto& [f1, f2] : pairs) {
        Field u1 = solver.solve_dirichlet(q1, f1);
        Field u2 = solver.solve_dirichlet(q2, f2);
        double v = std::abs(pairing(q1, q2, u1, u2)) / (w12(u1) * w12(u2));
        worst = std::max(worst, v);
    }
    // CGO probes at small tau
    auto table = std::make_shared<CauchyKernelTable>(g);
    CauchyWorkspace ws(table);
    for (double tau : {2.0, 3.0}) {
        for (cplx z0 : {cplx(0.0, 0.0), cplx(0.3, -0.2)}) {
            PhaseParams p{tau, z0, +1};
            Field u1 = build_cgo(ws, q1, p, CgoSide::Phase).assembled();
            Field u2 = build_cgo(ws, q2, p, CgoSide::ConjugatePhase).assembled();
            double v = std::abs(pairing(q1, q2, u1, u2)) / (w12(u1) * w12(u2));
            worst = std::max(worst, v);
        }
    }
    CHECK(worst <= 1.05 * dhat);
}

TEST_CASE("trace constant is cached and stable") {
    auto g = disk_grid(64);
    double t1 = trace_constant(g);
    double t2 = trace_constant(g);
    CHECK(t1 == t2);
    CHECK(t1 > 0.5);
    CHECK(t1 < 5.0);
}

TEST_CASE("dn noise injection is deterministic and scaled") {
    auto g = disk_grid(64);
    ForwardSolver solver(g);
    DNMap dn = solver.assemble_dn(zero_potential(g));
    DNMap noisy1 = dn, noisy2 = dn;
    add_dn_noise(noisy1, 0.01, 42);
    add_dn_noise(noisy2, 0.01, 42);
    CHECK(noisy1.matrix == noisy2.matrix);
    double fro = 0, dfro = 0;
    for (std::size_t k = 0; k < dn.matrix.size(); ++k) {
        fro += std::norm(dn.matrix[k]);
        dfro += std::norm(noisy1.matrix[k] - dn.matrix[k]);
    }
    CHECK(std::sqrt(dfro / fro) == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("near-singular solve is rejected") {
    auto g = disk_grid(64);
    ForwardSolver solver(g);
    double lam1 = solver.first_dirichlet_eigenvalue();
    Potential q;
    q.field = Field(g, SupportTag::XSupported);
    for (std::size_t k = 0; k < q.field.values.size(); ++k)
        if (g->interior_mask[k]) q.field.values[k] = lam1;
    CHECK_THROWS_AS(solver.solve_dirichlet(q, [](double th) { return cplx(std::cos(th), 0); }),
                    std::runtime_error);
}
