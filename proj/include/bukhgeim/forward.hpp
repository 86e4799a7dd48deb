#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bukhgeim/grid.hpp"

namespace bukhgeim {

/// Dense boundary-node matrix representing the Dirichlet-to-Neumann map.
struct DNMap {
    GridPtr grid;
    std::vector<cplx> matrix;  // M x M row-major; column = response to basis trace
    std::string q_fingerprint;

    int size() const { return grid ? grid->boundary_count() : 0; }
    cplx& at(int r, int c) { return matrix[static_cast<std::size_t>(r) * size() + c]; }
    const cplx& at(int r, int c) const { return matrix[static_cast<std::size_t>(r) * size() + c]; }
    std::vector<cplx> apply(const std::vector<cplx>& f) const;
};

using TraceFn = std::function<cplx(double theta)>;

/// Shortley-Weller 5-point forward solver on the disk domain. Boundary
/// data lives on the grid's uniform boundary nodes; the cut-cell stencil
/// evaluates traces at the exact circle crossings.
class ForwardSolver {
public:
    explicit ForwardSolver(GridPtr grid);
    ~ForwardSolver();
    ForwardSolver(const ForwardSolver&) = delete;
    ForwardSolver& operator=(const ForwardSolver&) = delete;

    const GridPtr& grid() const { return grid_; }
    int interior_count() const;

    /// Solve Delta u + q u = 0 in X, u = f on dX (f as a function of theta).
    /// Returns a whole-grid field, zero outside the interior nodes.
    Field solve_dirichlet(const Potential& q, const TraceFn& f) const;
    /// Trace given as values on the uniform boundary nodes (periodic linear
    /// interpolation to the stencil crossings).
    Field solve_dirichlet(const Potential& q, const std::vector<cplx>& f) const;

    /// Normal derivative of a solved field at the boundary nodes: one-sided
    /// third-order differences along the radius at depths 2h, 4h, 6h.
    std::vector<cplx> normal_derivative(const Field& u, const TraceFn& f) const;

    /// Assemble the DN map in the Fourier basis (band |k| <= kmax, which
    /// defaults to max(8, rho/2h)), transform to node space, and symmetrize
    /// in the (uniform) arc-weighted inner product.
    DNMap assemble_dn(const Potential& q, int kmax = -1) const;

    /// True when the smallest singular value of the interior operator is
    /// >= threshold_rel times the operator norm (default 1e-8).
    bool eigenvalue_guard(const Potential& q, double threshold_rel = 1e-8) const;
    /// Smallest singular value and operator-norm estimate of Delta + q.
    std::pair<double, double> singular_range(const Potential& q) const;
    /// First Dirichlet eigenvalue of -Delta on the discrete domain
    /// (inverse power iteration); test oracle for the guard.
    double first_dirichlet_eigenvalue() const;

private:
    GridPtr grid_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Riemann sum of u1 (q1 - q2) u2 over X.
cplx pairing(const Potential& q1, const Potential& q2, const Field& u1, const Field& u2);

/// Arc-weighted boundary quadrature of ((Lambda_2 - Lambda_1) f2) f1 --
/// the data-side surrogate for the volume pairing.
cplx boundary_pairing(const DNMap& dn1, const DNMap& dn2, const std::vector<cplx>& f1,
                      const std::vector<cplx>& f2);

/// Discrete operator norm of Lambda1 - Lambda2 from boundary-W^{1/2} to
/// boundary-W^{-1/2} (power iteration in the weighted Fourier coordinates).
double dn_operator_norm(const DNMap& dn1, const DNMap& dn2);

/// Discrete trace constant ||Tr||: max of ||Tr u||_{W^{1/2}(dX)} over
/// discrete W^1_2(X)-normalized fields (generalized power iteration).
/// Computed once per grid and cached.
double trace_constant(const GridPtr& g);

/// d-hat = ||Tr||^2 ||Lambda1 - Lambda2||_{1/2,-1/2} (Lemma-style upper
/// surrogate for the Cauchy-data distance).
double cauchy_distance_data(const DNMap& dn1, const DNMap& dn2);

/// Entrywise complex Gaussian noise at a relative Frobenius level.
void add_dn_noise(DNMap& dn, double rel_level, std::uint64_t seed);

/// Second-order extrapolated trace of a whole-grid field at the boundary
/// nodes (samples at depths 2h and 4h along the radius).
std::vector<cplx> extract_trace(const Field& u);

}  // namespace bukhgeim
