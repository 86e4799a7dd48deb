#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bukhgeim/phase.hpp"

namespace bukhgeim {

enum class CgoSide { Phase, ConjugatePhase };

/// Thrown when the Neumann series fails to contract (tau below threshold).
class CgoNonConvergence : public std::runtime_error {
public:
    CgoNonConvergence(double tau, double worst_ratio)
        : std::runtime_error("cgo: series non-convergent at tau=" + std::to_string(tau) +
                             " (worst ratio " + std::to_string(worst_ratio) +
                             "); raise tau above the threshold"),
          tau_hint(tau * 2.0), worst_ratio(worst_ratio) {}
    double tau_hint;
    double worst_ratio;
};

/// Bukhgeim-phase CGO solution record. The solution is kept factored:
/// u = e^{i tau Phi} * series_sum (phase side) so that the internal fields
/// stay O(1) at any tau; assembled() materializes the product.
struct CGOSolution {
    PhaseParams params;
    CgoSide side = CgoSide::Phase;
    std::vector<Field> terms;   // U_0 = 1, U_1, ..., U_J
    Field remainder;            // r = sum_{j>=2} (-1)^j U_j
    Field series_sum;           // sum_{j=0..J} (-1)^j U_j
    std::vector<double> term_norms;   // L2(X) of U_j
    std::vector<double> term_ratios;  // ||U_j|| / ||U_{j-1}||, j >= 2
    bool geometric_half_decay = false;  // all recorded ratios <= 1/2

    int truncation_j() const { return static_cast<int>(terms.size()) - 1; }
    /// e^{i tau Phi} (phase side) or e^{i tau conj(Phi)} at a node
    cplx phase_factor(int i, int j) const;
    /// assembled u
    Field assembled() const;
};

struct CgoOptions {
    int j_max = 40;
    double tail_tol = 1e-10;   // stop when ||U_J|| <= tail_tol ||U_1||
    int divergence_strikes = 3;  // ratio >= 1 this many consecutive times -> error
};

/// Build the CGO by the Neumann recursion:
/// U_1 = R~_tau(1/2 (dbar^{-1} q - dbar^{-1} q(x0))),
/// U_j = R~_tau(1/2 dbar^{-1}(q U_{j-1})), j >= 2 (phase side;
/// conjugate side swaps dbar^{-1} <-> d^{-1} and uses R~ with dbar^{-1}).
/// The x0 value is sampled at the nearest grid node.
CGOSolution build_cgo(CauchyWorkspace& ws, const Potential& q, const PhaseParams& params,
                      CgoSide side, const CgoOptions& opt = {});

/// || Delta u + q u ||_{L2} / ||u||_{L2} on interior nodes (2-cell margin),
/// with the 5-point discrete Laplacian on the assembled solution.
double residual(const CGOSolution& sol, const Potential& q);

struct RemainderReport {
    std::vector<double> taus;
    std::vector<double> l2;   // sup over sampled x0 of ||r||_{L2(X)}
    std::vector<double> l4;
    double exponent_l2 = 0.0;  // fitted decay exponents over the sweep
    double exponent_l4 = 0.0;
    bool defined = true;       // false when remainder is identically zero
    bool pass(double p) const {
        return !defined || (exponent_l2 <= -1.4 && exponent_l4 <= -(0.5 + 0.5 / p) + 0.1);
    }
};

/// Remainder decay over a tau sweep at common z0 (sweep must have >= 4 points).
RemainderReport remainder_report(CauchyWorkspace& ws, const Potential& q,
                                 const std::vector<double>& taus,
                                 const std::vector<cplx>& z0_samples, int sign = +1);

/// Discrete W^1_2 growth bound ||u|| <= C e^{4 R^2 tau}, with C calibrated
/// at the smallest tau of the sweep and checked at all larger tau (log scale).
bool growth_check(CauchyWorkspace& ws, const Potential& q, const std::vector<double>& taus,
                  cplx z0, double R);

/// Diagnostics JSON: {tau, z0, side, J, norms, ratios, residual, remainder:{l2,l4}}
std::string cgo_diagnostics_json(const CGOSolution& sol, double residual_value);

/// log of the discrete W^1_2(X) norm of the assembled solution (overflow-safe).
double log_w12_norm(const CGOSolution& sol);

}  // namespace bukhgeim
