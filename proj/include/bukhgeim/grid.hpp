#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bukhgeim {

using cplx = std::complex<double>;

enum class DomainKind { Disk, Square };

/// Domain descriptor for X: a disk of given radius or an axis-aligned square
/// of given half-side, both centered at the origin.
struct DomainDescriptor {
    DomainKind kind = DomainKind::Disk;
    double size = 1.0;  // disk radius or square half-side
};

enum class SupportTag : std::uint8_t { WholeGrid = 0, XSupported = 1 };

/// Uniform N x N discretization of [-L,L)^2 with node x_i = -L + i h,
/// h = 2L/N, plus the interior mask of X and an ordered closed-curve
/// parametrization of its boundary.
class Grid2D {
public:
    double L = 2.0;
    int N = 128;
    double h = 0.0;
    DomainDescriptor domain;
    double R = 1.25;  // enclosing radius, Xbar subset B(0,R)

    std::vector<std::uint8_t> interior_mask;  // N*N, row-major (i*N+j)
    std::vector<double> bx, by;               // boundary nodes, positively oriented
    double arc_weight = 0.0;                  // uniform arclength weight per node
    double curve_length = 0.0;

    int idx(int i, int j) const { return i * N + j; }
    double x(int i) const { return -L + h * i; }
    cplx z(int i, int j) const { return {x(i), x(j)}; }
    /// frequency lattice value along one axis, FFT index order
    double xi(int i) const {
        int k = (i < N / 2) ? i : i - N;
        return 2.0 * 3.14159265358979323846 * k / (N * h);
    }
    bool inside(int i, int j) const { return interior_mask[idx(i, j)] != 0; }
    int boundary_count() const { return static_cast<int>(bx.size()); }
    std::size_t nodes() const { return static_cast<std::size_t>(N) * N; }
};

using GridPtr = std::shared_ptr<const Grid2D>;

/// Complex-valued function sampled on a Grid2D.
struct Field {
    GridPtr grid;
    std::vector<cplx> values;
    SupportTag support = SupportTag::WholeGrid;

    Field() = default;
    Field(GridPtr g, SupportTag tag = SupportTag::WholeGrid)
        : grid(std::move(g)), values(grid->nodes(), cplx{0.0, 0.0}), support(tag) {}

    cplx& at(int i, int j) { return values[grid->idx(i, j)]; }
    const cplx& at(int i, int j) const { return values[grid->idx(i, j)]; }
};

/// X-supported potential with smoothness/integrability metadata.
struct Potential {
    Field field;          // X-supported
    double s = 1.0;       // smoothness index in [0,1]
    double p = 4.0;       // integrability exponent > 2
    double M = 0.0;       // a-priori W^s_2 bound; 0 means undeclared
};

/// Validated grid construction. N must be a power of two >= 16 and
/// B(0,R) must fit inside [-L,L]^2 with margin >= 4h.
GridPtr make_grid(double L, int N, DomainDescriptor domain, double R);

/// Zero extension E_0: X-supported field -> whole-grid field.
Field extend_zero(const Field& f);

/// Restrict a whole-grid field to X (values kept on the interior mask).
Field restrict_to_x(const Field& f);

// Standard test fields.
Field bump_field(const GridPtr& g, cplx center, double width, double amplitude);
/// C^inf flat-top window: 1 for r <= r0, smooth rolloff, 0 for r >= r1.
Field flattop_window(const GridPtr& g, double r0, double r1);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(cplx c, const Field& a);
Field pointwise_mul(const Field& a, const Field& b);

}  // namespace bukhgeim
