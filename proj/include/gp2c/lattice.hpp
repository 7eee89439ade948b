#pragma once

// Uniform cell-centered grids on rectangles and disks, finite-difference
// gradients and deterministic quadrature. Everything downstream (energy
// evaluation, the obstacle solver, the minimizers) works on these grids.

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gp2c {

using cplx = std::complex<double>;

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DomainKind { Rectangle, Disk };

// Nodes sit at cell centers: x_i = -Lx/2 + (i+1/2)h. With uniform h^2 weights
// the quadrature of a constant over a rectangle is exact, which the mass
// projection relies on.
struct DomainSpec {
    DomainKind kind = DomainKind::Rectangle;
    double Lx = 1.0, Ly = 1.0;   // bounding box (disk: Lx = Ly = 2R)
    double R = 0.0;              // disk radius (Disk kind only)
    double h = 0.0;
    int nx = 0, ny = 0;
    std::vector<std::uint8_t> mask;   // row-major, index i*ny + j

    static DomainSpec rectangle(double Lx, double Ly, double h);
    static DomainSpec disk(double R, double h);
};

// Maximal runs of consecutive masked nodes along one grid direction.
struct Run {
    int fixed;    // the orthogonal index (row or column)
    int begin;    // first in-run index along the direction
    int end;      // one past last
};

struct Grid2D {
    DomainSpec dom;
    std::vector<Run> runsX;   // runs along i at fixed j
    std::vector<Run> runsY;   // runs along j at fixed i

    int nx() const { return dom.nx; }
    int ny() const { return dom.ny; }
    double h() const { return dom.h; }
    std::size_t size() const { return static_cast<std::size_t>(dom.nx) * dom.ny; }
    bool masked(int i, int j) const { return dom.mask[idx(i, j)] != 0; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * dom.ny + j; }

    double x(int i) const { return -0.5 * dom.Lx + (i + 0.5) * dom.h; }
    double y(int j) const { return -0.5 * dom.Ly + (j + 0.5) * dom.h; }

    std::size_t maskedCount() const {
        std::size_t c = 0;
        for (auto m : dom.mask) c += m;
        return c;
    }
    double area() const { return static_cast<double>(maskedCount()) * dom.h * dom.h; }

    static Grid2D make(DomainSpec spec);
    static Grid2D rectangle(double Lx, double Ly, double h) { return make(DomainSpec::rectangle(Lx, Ly, h)); }
    static Grid2D disk(double R, double h) { return make(DomainSpec::disk(R, h)); }
};

inline DomainSpec DomainSpec::rectangle(double Lx, double Ly, double h) {
    if (h <= 0.0) throw ConfigError("grid spacing must be positive");
    DomainSpec s;
    s.kind = DomainKind::Rectangle;
    s.nx = static_cast<int>(std::lround(Lx / h));
    s.ny = static_cast<int>(std::lround(Ly / h));
    if (s.nx < 8 || s.ny < 8) throw ConfigError("node counts must be >= 8");
    if (std::abs(s.nx * h - Lx) > 1e-9 * Lx || std::abs(s.ny * h - Ly) > 1e-9 * Ly)
        throw ConfigError("h must divide the rectangle side lengths");
    s.Lx = Lx; s.Ly = Ly; s.h = h;
    s.mask.assign(static_cast<std::size_t>(s.nx) * s.ny, 1);
    return s;
}

inline DomainSpec DomainSpec::disk(double R, double h) {
    if (h <= 0.0) throw ConfigError("grid spacing must be positive");
    DomainSpec s;
    s.kind = DomainKind::Disk;
    s.R = R;
    s.nx = s.ny = static_cast<int>(std::lround(2.0 * R / h));
    if (s.nx < 8) throw ConfigError("node counts must be >= 8");
    s.Lx = s.Ly = s.nx * h;
    s.h = h;
    s.mask.assign(static_cast<std::size_t>(s.nx) * s.ny, 0);
    for (int i = 0; i < s.nx; ++i) {
        double x = -0.5 * s.Lx + (i + 0.5) * h;
        for (int j = 0; j < s.ny; ++j) {
            double y = -0.5 * s.Ly + (j + 0.5) * h;
            if (x * x + y * y < R * R) s.mask[static_cast<std::size_t>(i) * s.ny + j] = 1;
        }
    }
    return s;
}

inline Grid2D Grid2D::make(DomainSpec spec) {
    Grid2D g;
    g.dom = std::move(spec);
    const int nx = g.dom.nx, ny = g.dom.ny;
    bool any = false;
    for (int j = 0; j < ny; ++j) {
        int i = 0;
        while (i < nx) {
            while (i < nx && !g.masked(i, j)) ++i;
            if (i == nx) break;
            int b = i;
            while (i < nx && g.masked(i, j)) ++i;
            g.runsX.push_back({j, b, i});
            any = true;
        }
    }
    for (int i = 0; i < nx; ++i) {
        int j = 0;
        while (j < ny) {
            while (j < ny && !g.masked(i, j)) ++j;
            if (j == ny) break;
            int b = j;
            while (j < ny && g.masked(i, j)) ++j;
            g.runsY.push_back({i, b, j});
        }
    }
    if (!any) throw ConfigError("domain mask is empty");
    return g;
}

// ---- fields ----------------------------------------------------------------

template <class T>
struct FieldT {
    int nx = 0, ny = 0;
    std::vector<T> v;

    FieldT() = default;
    explicit FieldT(const Grid2D& g, T fill = T{}) : nx(g.nx()), ny(g.ny()), v(g.size(), fill) {}
    T& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * ny + j]; }
    const T& operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * ny + j]; }
    std::size_t size() const { return v.size(); }
};

using Field = FieldT<double>;
using CField = FieldT<cplx>;

template <class T>
void checkShape(const FieldT<T>& f, const Grid2D& g, const char* what) {
    if (f.nx != g.nx() || f.ny != g.ny())
        throw ShapeError(std::string(what) + ": field shape does not match grid");
}

// ---- deterministic reduction ------------------------------------------------

// Pairwise (tree) summation: reproducible independent of call site and better
// conditioned than a running sum.
inline double pairwiseSum(std::span<const double> a) {
    const std::size_t n = a.size();
    if (n <= 32) {
        double s = 0.0;
        for (double x : a) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwiseSum(a.subspan(0, half)) + pairwiseSum(a.subspan(half));
}

namespace detail {
// Sum f(i,j,id) over masked nodes via a scratch buffer, pairwise-reduced.
template <class F>
double maskedSum(const Grid2D& g, F&& f) {
    std::vector<double> buf;
    buf.reserve(g.size());
    const int nx = g.nx(), ny = g.ny();
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            std::size_t id = g.idx(i, j);
            if (g.dom.mask[id]) buf.push_back(f(i, j, id));
        }
    return pairwiseSum(buf);
}
}  // namespace detail

// ---- gradient ---------------------------------------------------------------

// Central differences inside a run, second-order one-sided at run ends
// (first-order for runs of two nodes, zero for singletons).
namespace detail {
template <class T>
void diffAlongX(const Grid2D& g, const FieldT<T>& f, FieldT<T>& out, double inv2h) {
    for (const Run& r : g.runsX) {
        const int j = r.fixed, b = r.begin, e = r.end, len = e - b;
        if (len == 1) { out(b, j) = T{}; continue; }
        if (len == 2) {
            T d = (f(b + 1, j) - f(b, j)) * (2.0 * inv2h);
            out(b, j) = d; out(b + 1, j) = d;
            continue;
        }
        out(b, j) = (f(b, j) * -3.0 + f(b + 1, j) * 4.0 - f(b + 2, j)) * inv2h;
        for (int i = b + 1; i < e - 1; ++i) out(i, j) = (f(i + 1, j) - f(i - 1, j)) * inv2h;
        out(e - 1, j) = (f(e - 1, j) * 3.0 - f(e - 2, j) * 4.0 + f(e - 3, j)) * inv2h;
    }
}
template <class T>
void diffAlongY(const Grid2D& g, const FieldT<T>& f, FieldT<T>& out, double inv2h) {
    for (const Run& r : g.runsY) {
        const int i = r.fixed, b = r.begin, e = r.end, len = e - b;
        if (len == 1) { out(i, b) = T{}; continue; }
        if (len == 2) {
            T d = (f(i, b + 1) - f(i, b)) * (2.0 * inv2h);
            out(i, b) = d; out(i, b + 1) = d;
            continue;
        }
        out(i, b) = (f(i, b) * -3.0 + f(i, b + 1) * 4.0 - f(i, b + 2)) * inv2h;
        for (int j = b + 1; j < e - 1; ++j) out(i, j) = (f(i, j + 1) - f(i, j - 1)) * inv2h;
        out(i, e - 1) = (f(i, e - 1) * 3.0 - f(i, e - 2) * 4.0 + f(i, e - 3)) * inv2h;
    }
}

// Adjoint of the difference operators with respect to the plain (unweighted)
// nodewise dot product; needed for exact discrete energy gradients.
template <class T>
void diffAlongXAdjoint(const Grid2D& g, const FieldT<T>& w, FieldT<T>& acc, double inv2h) {
    for (const Run& r : g.runsX) {
        const int j = r.fixed, b = r.begin, e = r.end, len = e - b;
        if (len == 1) continue;
        if (len == 2) {
            T d = (w(b, j) + w(b + 1, j)) * (2.0 * inv2h);
            acc(b + 1, j) += d; acc(b, j) -= d;
            continue;
        }
        acc(b, j)     += w(b, j) * (-3.0 * inv2h);
        acc(b + 1, j) += w(b, j) * (4.0 * inv2h);
        acc(b + 2, j) += w(b, j) * (-inv2h);
        for (int i = b + 1; i < e - 1; ++i) {
            acc(i + 1, j) += w(i, j) * inv2h;
            acc(i - 1, j) -= w(i, j) * inv2h;
        }
        acc(e - 1, j) += w(e - 1, j) * (3.0 * inv2h);
        acc(e - 2, j) += w(e - 1, j) * (-4.0 * inv2h);
        acc(e - 3, j) += w(e - 1, j) * inv2h;
    }
}
template <class T>
void diffAlongYAdjoint(const Grid2D& g, const FieldT<T>& w, FieldT<T>& acc, double inv2h) {
    for (const Run& r : g.runsY) {
        const int i = r.fixed, b = r.begin, e = r.end, len = e - b;
        if (len == 1) continue;
        if (len == 2) {
            T d = (w(i, b) + w(i, b + 1)) * (2.0 * inv2h);
            acc(i, b + 1) += d; acc(i, b) -= d;
            continue;
        }
        acc(i, b)     += w(i, b) * (-3.0 * inv2h);
        acc(i, b + 1) += w(i, b) * (4.0 * inv2h);
        acc(i, b + 2) += w(i, b) * (-inv2h);
        for (int j = b + 1; j < e - 1; ++j) {
            acc(i, j + 1) += w(i, j) * inv2h;
            acc(i, j - 1) -= w(i, j) * inv2h;
        }
        acc(i, e - 1) += w(i, e - 1) * (3.0 * inv2h);
        acc(i, e - 2) += w(i, e - 1) * (-4.0 * inv2h);
        acc(i, e - 3) += w(i, e - 1) * inv2h;
    }
}
}  // namespace detail

template <class T>
struct VectorFieldT {
    FieldT<T> x, y;
    VectorFieldT() = default;
    explicit VectorFieldT(const Grid2D& g) : x(g), y(g) {}
};
using VectorField = VectorFieldT<double>;
using CVectorField = VectorFieldT<cplx>;

template <class T>
VectorFieldT<T> gradient(const FieldT<T>& f, const Grid2D& g) {
    checkShape(f, g, "gradient");
    VectorFieldT<T> out(g);
    const double inv2h = 1.0 / (2.0 * g.h());
    detail::diffAlongX(g, f, out.x, inv2h);
    detail::diffAlongY(g, f, out.y, inv2h);
    return out;
}

// accumulate G_x^T wx + G_y^T wy into acc
template <class T>
void gradientAdjointAccum(const VectorFieldT<T>& w, const Grid2D& g, FieldT<T>& acc) {
    const double inv2h = 1.0 / (2.0 * g.h());
    detail::diffAlongXAdjoint(g, w.x, acc, inv2h);
    detail::diffAlongYAdjoint(g, w.y, acc, inv2h);
}

// ---- quadrature -------------------------------------------------------------

inline double integrate(const Field& f, const Grid2D& g) {
    checkShape(f, g, "integrate");
    double s = detail::maskedSum(g, [&](int, int, std::size_t id) {
        double x = f.v[id];
        if (!std::isfinite(x)) throw NumericInputError("integrate: non-finite value");
        return x;
    });
    return s * g.h() * g.h();
}

inline double integrateMean(const Field& f, const Grid2D& g) {
    return integrate(f, g) / g.area();
}

}  // namespace gp2c
