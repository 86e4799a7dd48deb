#pragma once

#include "bukhgeim/cauchy.hpp"
#include "bukhgeim/grid.hpp"

namespace bukhgeim {

/// Parameters of the quadratic phase Phi(z; z0) = (z - z0)^2.
struct PhaseParams {
    double tau = 1.0;
    cplx z0{0.0, 0.0};
    int sign = +1;

    void validate(const GridPtr& g) const;
};

/// Phi(z; z0) = (z - z0)^2 sampled on the grid.
Field phi(const GridPtr& g, cplx z0);

/// Unit-modulus weight e^{i sign tau (Phi + conj Phi)}.
Field weight(const GridPtr& g, const PhaseParams& p);

/// R~_tau g = 1/2 e^{-i tau(Phi+conj Phi)} d^{-1}(g e^{i tau(Phi+conj Phi)}).
Field r_tilde(CauchyWorkspace& ws, const Field& g, const PhaseParams& p);
/// Mirrored variant with dbar^{-1} (the u_2 side).
Field r_tilde_bar(CauchyWorkspace& ws, const Field& g, const PhaseParams& p);

enum class StatPhaseMode { Multiplier, DirectQuadrature };

/// x0 |-> (2 tau/pi) int e^{+- i tau((z-z0)^2 + conj)} Q dx. Multiplier mode
/// applies the closed-form symbol exp(-+ i(xi1^2-xi2^2)/(8 tau)) on the
/// frequency lattice; direct quadrature sums the sampled chirp kernel
/// (O(N^3) via separability) and serves as the oracle.
Field stat_phase_apply(const Field& Q, double tau, int sign,
                       StatPhaseMode mode = StatPhaseMode::Multiplier);

/// The self-dual tau lattice pi k N / (8 L^2): at k = 1 the sampled chirp is
/// grid-periodic and its DFT is exactly the sampled closed-form multiplier,
/// so the two stat_phase modes coincide to round-off.
double tau_lattice(const GridPtr& g, int k);

struct StatPhaseError {
    double measured = 0.0;  // || Q - T_tau Q ||_{L^2(dx0)}
    double bound = 0.0;     // 2 tau^{-s/2} ||Q||_{W^s_2}
};

StatPhaseError stat_phase_error(const Field& Q, double tau, double s);

struct MultiplierBound {
    double lhs = 0.0;  // |1 - e^{-2i(xi1^2 - xi2^2)}|
    double rhs = 0.0;  // 2^{1+s/2} |xi|^s
};

/// Pointwise bound from the stationary-phase lemma proof, via the
/// 4 sin^2(xi1^2 - xi2^2) identity. Asserts lhs <= rhs.
MultiplierBound multiplier_bound_check(double xi1, double xi2, double s);

}  // namespace bukhgeim
