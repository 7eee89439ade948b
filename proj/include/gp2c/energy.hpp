#pragma once

// The rotating two-component energy
//   E(u1,u2) = sum_k 1/2 int |grad u_k - i Omega x^perp u_k|^2 + int W(|u1|^2,|u2|^2)
//   W(a,b)   = (1/4eps^2)(1 - a - b)^2 + ((delta-1)/2eps^2) a b
// together with its exact discrete gradient, the supercurrents, the
// scalar/phase splitting and the a-priori diagnostic bounds.

#include <algorithm>
#include <limits>
#include <sstream>

#include "gp2c/lattice.hpp"

namespace gp2c {

struct Params {
    double eps = 0.0;
    double delta = 0.0;       // > 1 (segregation)
    double omega = 0.0;       // >= 0
    double alpha = 0.5;       // mass fraction of component 1
    double epsTilde = 0.0;    // derived: eps / sqrt(delta - 1)

    static Params make(double eps, double delta, double omega, double alpha) {
        if (eps <= 0.0) throw ConfigError("eps must be positive");
        if (delta <= 1.0) throw ConfigError("delta must exceed 1 (segregation regime)");
        if (omega < 0.0) throw ConfigError("omega must be nonnegative");
        if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("alpha must lie in (0,1)");
        Params p;
        p.eps = eps; p.delta = delta; p.omega = omega; p.alpha = alpha;
        p.epsTilde = eps / std::sqrt(delta - 1.0);
        return p;
    }
    // coupling eps = epsTilde^2, i.e. delta = 1 + epsTilde^2
    static Params fromEpsTilde(double epsTilde, double omega, double alpha) {
        return make(epsTilde * epsTilde, 1.0 + epsTilde * epsTilde, omega, alpha);
    }
    static Params fromEpsAndTilde(double eps, double epsTilde, double omega, double alpha) {
        return make(eps, 1.0 + (eps * eps) / (epsTilde * epsTilde), omega, alpha);
    }
    bool epsTildeConsistent() const {
        return std::abs(epsTilde - eps / std::sqrt(delta - 1.0)) <=
               1e-14 * std::max(1.0, std::abs(epsTilde));
    }
};

struct ComplexField2 {
    CField u1, u2;
    ComplexField2() = default;
    explicit ComplexField2(const Grid2D& g) : u1(g), u2(g) {}
};

struct EnergyBreakdown {
    double kinetic1 = 0.0;
    double kinetic2 = 0.0;
    double potential = 0.0;
    double total = 0.0;
    double scalarPart = 0.0;   // F_eps(|u1|,|u2|)
    double phasePart = 0.0;    // G_eps = total - scalarPart (current energy)
    double mass1 = 0.0;        // mean |u1|^2
    double mass2 = 0.0;
    double maxDensity = 0.0;   // max(|u1|^2 + |u2|^2)
};

struct CurrentField {
    VectorField j1, j2;
    CurrentField() = default;
    explicit CurrentField(const Grid2D& g) : j1(g), j2(g) {}
};

// Nodes with modulus below this floor contribute their whole kinetic term to
// the scalar part; Eq-split style division by rho^2 is undefined at cores.
inline constexpr double kDensityFloor = 1e-8;

inline double potentialW(double u1sq, double u2sq, const Params& p) {
    const double inv4e2 = 1.0 / (4.0 * p.eps * p.eps);
    const double s = 1.0 - u1sq - u2sq;
    return inv4e2 * s * s + (p.delta - 1.0) / (2.0 * p.eps * p.eps) * u1sq * u2sq;
}

namespace detail {

inline void checkFinite(const CField& u, const Grid2D& g, const char* name) {
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            const cplx& z = u(i, j);
            if (g.dom.mask[g.idx(i, j)] &&
                (!std::isfinite(z.real()) || !std::isfinite(z.imag()))) {
                std::ostringstream os;
                os << name << " is not finite at node (" << i << "," << j << ")";
                throw NumericInputError(os.str());
            }
        }
}

// covariant derivative a = grad u - i Omega x^perp u, x^perp = (-y, x)
inline CVectorField covariantGrad(const CField& u, const Params& p, const Grid2D& g) {
    CVectorField a = gradient(u, g);
    const cplx iOm(0.0, p.omega);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            std::size_t id = g.idx(i, j);
            if (!g.dom.mask[id]) continue;
            a.x.v[id] -= iOm * (-g.y(j)) * u.v[id];
            a.y.v[id] -= iOm * (g.x(i)) * u.v[id];
        }
    return a;
}

}  // namespace detail

inline EnergyBreakdown evaluate(const ComplexField2& f, const Params& p, const Grid2D& g) {
    checkShape(f.u1, g, "evaluate");
    checkShape(f.u2, g, "evaluate");
    detail::checkFinite(f.u1, g, "u1");
    detail::checkFinite(f.u2, g, "u2");

    EnergyBreakdown b;
    const double h2 = g.h() * g.h();

    CVectorField a1 = detail::covariantGrad(f.u1, p, g);
    CVectorField a2 = detail::covariantGrad(f.u2, p, g);

    b.kinetic1 = 0.5 * h2 * detail::maskedSum(g, [&](int, int, std::size_t id) {
        return std::norm(a1.x.v[id]) + std::norm(a1.y.v[id]);
    });
    b.kinetic2 = 0.5 * h2 * detail::maskedSum(g, [&](int, int, std::size_t id) {
        return std::norm(a2.x.v[id]) + std::norm(a2.y.v[id]);
    });
    b.potential = h2 * detail::maskedSum(g, [&](int, int, std::size_t id) {
        return potentialW(std::norm(f.u1.v[id]), std::norm(f.u2.v[id]), p);
    });
    b.total = b.kinetic1 + b.kinetic2 + b.potential;

    b.mass1 = h2 * detail::maskedSum(g, [&](int, int, std::size_t id) {
                  return std::norm(f.u1.v[id]);
              }) / g.area();
    b.mass2 = h2 * detail::maskedSum(g, [&](int, int, std::size_t id) {
                  return std::norm(f.u2.v[id]);
              }) / g.area();

    b.maxDensity = 0.0;
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            std::size_t id = g.idx(i, j);
            if (!g.dom.mask[id]) continue;
            b.maxDensity = std::max(b.maxDensity, std::norm(f.u1.v[id]) + std::norm(f.u2.v[id]));
        }

    // scalar part: kinetic energy of the moduli plus the potential; nodes at
    // the density floor keep their full kinetic term on the scalar side
    Field r1(g), r2(g);
    for (std::size_t id = 0; id < r1.size(); ++id) {
        r1.v[id] = std::abs(f.u1.v[id]);
        r2.v[id] = std::abs(f.u2.v[id]);
    }
    VectorField g1 = gradient(r1, g);
    VectorField g2 = gradient(r2, g);
    auto scalarKin = [&](const CField& u, const Field& rho, const VectorField& gr,
                         const CVectorField& a) {
        return 0.5 * h2 * detail::maskedSum(g, [&](int, int, std::size_t id) {
            if (rho.v[id] > kDensityFloor)
                return gr.x.v[id] * gr.x.v[id] + gr.y.v[id] * gr.y.v[id];
            return std::norm(a.x.v[id]) + std::norm(a.y.v[id]);
        });
    };
    b.scalarPart = scalarKin(f.u1, r1, g1, a1) + scalarKin(f.u2, r2, g2, a2) + b.potential;
    b.phasePart = b.total - b.scalarPart;
    return b;
}

inline CurrentField currents(const ComplexField2& f, const Params& p, const Grid2D& g) {
    checkShape(f.u1, g, "currents");
    detail::checkFinite(f.u1, g, "u1");
    detail::checkFinite(f.u2, g, "u2");
    CurrentField out(g);
    CVectorField d1 = gradient(f.u1, g);
    CVectorField d2 = gradient(f.u2, g);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            std::size_t id = g.idx(i, j);
            if (!g.dom.mask[id]) continue;
            const double px = -g.y(j), py = g.x(i);
            out.j1.x.v[id] = std::imag(std::conj(f.u1.v[id]) * d1.x.v[id]) - p.omega * px * std::norm(f.u1.v[id]);
            out.j1.y.v[id] = std::imag(std::conj(f.u1.v[id]) * d1.y.v[id]) - p.omega * py * std::norm(f.u1.v[id]);
            out.j2.x.v[id] = std::imag(std::conj(f.u2.v[id]) * d2.x.v[id]) - p.omega * px * std::norm(f.u2.v[id]);
            out.j2.y.v[id] = std::imag(std::conj(f.u2.v[id]) * d2.y.v[id]) - p.omega * py * std::norm(f.u2.v[id]);
        }
    return out;
}

// Exact gradient of the discrete energy: evaluate(u + t v) = E + t h^2 sum Re(conj(G) v) + O(t^2).
inline void energyGradient(const ComplexField2& f, const Params& p, const Grid2D& g,
                           CField& G1, CField& G2) {
    checkShape(f.u1, g, "energyGradient");
    const cplx iOm(0.0, p.omega);
    auto one = [&](const CField& u, const CField& uo, CField& G) {
        CVectorField a = detail::covariantGrad(u, p, g);
        G = CField(g);
        gradientAdjointAccum(a, g, G);
        for (int i = 0; i < g.nx(); ++i)
            for (int j = 0; j < g.ny(); ++j) {
                std::size_t id = g.idx(i, j);
                if (!g.dom.mask[id]) continue;
                // adjoint of the -i Omega x^perp multiplication
                G.v[id] += iOm * (-g.y(j)) * a.x.v[id] + iOm * (g.x(i)) * a.y.v[id];
                const double w = std::norm(u.v[id]) + std::norm(uo.v[id]);
                const double dW = -(1.0 - w) / (p.eps * p.eps) +
                                  (p.delta - 1.0) / (p.eps * p.eps) * std::norm(uo.v[id]);
                G.v[id] += dW * u.v[id];
            }
    };
    one(f.u1, f.u2, G1);
    one(f.u2, f.u1, G2);
}

struct DiagnosticRecord {
    double maxDensity = 0.0;
    double densityBound = 0.0;   // 1 + 4 eps^2 E / min(alpha, 1-alpha)
    bool densityOk = false;
    double lambda1 = 0.0;        // discrete Lagrange multiplier estimates
    double lambda2 = 0.0;
    double lambdaBound1 = 0.0;   // 4 E / alpha_k
    double lambdaBound2 = 0.0;
    bool lambdaNonnegOk = false;
    bool lambdaUpperOk = false;
};

// Multipliers from the energy identity obtained by pairing the Euler-Lagrange
// system with u_k:  lambda_k alpha_k |D| = int |grad u_k - i Om x^perp u_k|^2
//   + (1/eps^2) int |u_k|^2 (|u1|^2+|u2|^2-1) + ((delta-1)/eps^2) int |u1|^2 |u2|^2.
inline DiagnosticRecord diagnosticBounds(const ComplexField2& f, const Params& p,
                                         const Grid2D& g, const EnergyBreakdown& b) {
    DiagnosticRecord d;
    const double h2 = g.h() * g.h();
    const double ie2 = 1.0 / (p.eps * p.eps);

    auto lam = [&](const CField& u, const CField& uo, double kinetic, double mass) {
        double volume = h2 * detail::maskedSum(g, [&](int, int, std::size_t id) {
            const double uk = std::norm(u.v[id]), vo = std::norm(uo.v[id]);
            return uk * (uk + vo - 1.0) * ie2 + (p.delta - 1.0) * ie2 * uk * vo;
        });
        return (2.0 * kinetic + volume) / (mass * g.area());
    };
    d.lambda1 = lam(f.u1, f.u2, b.kinetic1, b.mass1);
    d.lambda2 = lam(f.u2, f.u1, b.kinetic2, b.mass2);
    d.lambdaBound1 = 4.0 * b.total / b.mass1;
    d.lambdaBound2 = 4.0 * b.total / b.mass2;

    d.maxDensity = b.maxDensity;
    d.densityBound = 1.0 + 4.0 * p.eps * p.eps * b.total / std::min(p.alpha, 1.0 - p.alpha);
    d.densityOk = d.maxDensity <= d.densityBound + 1e-6;

    // negative part bounded relative to the multiplier scale
    const double scale = std::max(std::abs(d.lambda1), std::abs(d.lambda2));
    d.lambdaNonnegOk = d.lambda1 >= -1e-6 * scale && d.lambda2 >= -1e-6 * scale;
    d.lambdaUpperOk = d.lambda1 <= d.lambdaBound1 + 1e-9 * std::abs(d.lambdaBound1) &&
                      d.lambda2 <= d.lambdaBound2 + 1e-9 * std::abs(d.lambdaBound2);
    return d;
}

}  // namespace gp2c
