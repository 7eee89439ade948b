#pragma once

// The 1D heteroclinic interface problem: minimize
//   int 1/2|v1'|^2 + 1/2|v2'|^2 + (1/4eps^2)(1-v1^2-v2^2)^2 + ((delta-1)/2eps^2) v1^2 v2^2
// with (v1,v2) -> (0,1) at -inf and (1,0) at +inf. Solved as the Euler-Lagrange
// two-point BVP in coordinates rescaled by epsTilde, with a damped Newton
// iteration (block-tridiagonal Jacobian) and recentering to pin the
// translation mode. The converged energy is the interface cost mEps.

#include <fstream>

#include "gp2c/energy.hpp"

namespace gp2c {

struct Profile1D {
    double T = 0.0;        // truncation half-length, in epsTilde units
    double h1 = 0.0;       // physical grid spacing
    double hr = 0.0;       // rescaled spacing h1/epsTilde
    std::vector<double> t;   // rescaled coordinates on [-T, T]
    std::vector<double> v1, v2;
    double mEps = 0.0;       // converged interface cost (physical units)
    double residual = 0.0;   // final EL residual, max-norm, rescaled variables
    int newtonIterations = 0;
    int clampWarnings = 0;   // negative-value clamps during the iteration
    std::vector<double> energyHistory;   // energy at accepted steps
};

struct IdentityReport {
    double pohozaevResidual = 0.0;      // |int kin - int pot| / int pot
    double subtractionResidual = 0.0;   // Eq. pairing-identity residual, relative
    double depletionIntegral = 0.0;     // int (1 - v1^2 - v2^2) dx, physical
    double depletionRatio = 0.0;        // depletion / (eps^2/epsTilde)
};

struct DecayReport {
    double rateV1Left = 0.0;        // log-slope of v1 on the left tail (expect 1)
    double rateOneMinusV2Left = 0.0;  // log-slope of 1-v2 on the left tail (expect 2)
    double supThetaDistance = 0.0;  // sup |theta(t) - arctan e^t|
    double supThetaOverSqrtDelta = 0.0;
    bool insufficientTruncation = false;
};

namespace relax1d {

namespace detail1d {

struct Work {
    std::vector<double> r1, r2;          // EL residuals
    std::vector<double> c00, c01, c10, c11, y0, y1, d0, d1;
};

// EL residual of the rescaled system on interior nodes.
inline double residual(const std::vector<double>& v1, const std::vector<double>& v2,
                       double hr, double dm1, std::vector<double>& r1, std::vector<double>& r2) {
    const std::size_t n = v1.size();
    const double ih2 = 1.0 / (hr * hr);
    double worst = 0.0;
    r1.assign(n, 0.0);
    r2.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double w = v1[i] * v1[i] + v2[i] * v2[i];
        const double lap1 = (v1[i + 1] - 2.0 * v1[i] + v1[i - 1]) * ih2;
        const double lap2 = (v2[i + 1] - 2.0 * v2[i] + v2[i - 1]) * ih2;
        r1[i] = -lap1 + v1[i] * (w - 1.0) / dm1 + v2[i] * v2[i] * v1[i];
        r2[i] = -lap2 + v2[i] * (w - 1.0) / dm1 + v1[i] * v1[i] * v2[i];
        worst = std::max(worst, std::max(std::abs(r1[i]), std::abs(r2[i])));
    }
    return worst;
}

// One Newton direction via block-tridiagonal elimination (2x2 blocks).
inline void newtonDirection(const std::vector<double>& v1, const std::vector<double>& v2,
                            double hr, double dm1, Work& wk) {
    const std::size_t n = v1.size(), m = n - 2;
    const double off = -1.0 / (hr * hr);
    wk.c00.assign(m, 0.0); wk.c01.assign(m, 0.0); wk.c10.assign(m, 0.0); wk.c11.assign(m, 0.0);
    wk.y0.assign(m, 0.0); wk.y1.assign(m, 0.0);
    wk.d0.assign(m, 0.0); wk.d1.assign(m, 0.0);

    double pc00 = 0, pc01 = 0, pc10 = 0, pc11 = 0, py0 = 0, py1 = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = k + 1;
        const double w = v1[i] * v1[i] + v2[i] * v2[i];
        double a = -2.0 * off + (w - 1.0 + 2.0 * v1[i] * v1[i]) / dm1 + v2[i] * v2[i];
        double bq = (2.0 / dm1 + 2.0) * v1[i] * v2[i];
        double d = -2.0 * off + (w - 1.0 + 2.0 * v2[i] * v2[i]) / dm1 + v1[i] * v1[i];
        double c = bq;
        double rhs0 = -wk.r1[i], rhs1 = -wk.r2[i];
        if (k > 0) {
            a -= off * pc00; bq -= off * pc01;
            c -= off * pc10; d -= off * pc11;
            rhs0 -= off * py0; rhs1 -= off * py1;
        }
        const double det = a * d - bq * c;
        const double ia = d / det, ib = -bq / det, ic = -c / det, idd = a / det;
        pc00 = ia * off; pc01 = ib * off;
        pc10 = ic * off; pc11 = idd * off;
        py0 = ia * rhs0 + ib * rhs1;
        py1 = ic * rhs0 + idd * rhs1;
        wk.c00[k] = pc00; wk.c01[k] = pc01; wk.c10[k] = pc10; wk.c11[k] = pc11;
        wk.y0[k] = py0; wk.y1[k] = py1;
    }
    wk.d0[m - 1] = wk.y0[m - 1];
    wk.d1[m - 1] = wk.y1[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) {
        wk.d0[k] = wk.y0[k] - (wk.c00[k] * wk.d0[k + 1] + wk.c01[k] * wk.d1[k + 1]);
        wk.d1[k] = wk.y1[k] - (wk.c10[k] * wk.d0[k + 1] + wk.c11[k] * wk.d1[k + 1]);
    }
}

inline int clampRange(std::vector<double>& v, int& warn) {
    int c = 0;
    for (double& x : v) {
        if (x < 0.0) { ++warn; }
        if (x < -0.05) { x = -0.05; ++c; }
        if (x > 1.05) { x = 1.05; ++c; }
    }
    return c;
}

// Catmull-Rom interpolation on the uniform grid, well-clamped outside.
inline double interp(const std::vector<double>& t, const std::vector<double>& v,
                     double q, double left, double right) {
    const double h = t[1] - t[0];
    if (q <= t.front()) return left;
    if (q >= t.back()) return right;
    double s = (q - t.front()) / h;
    std::size_t i = static_cast<std::size_t>(s);
    i = std::min(std::max<std::size_t>(i, 1), t.size() - 3);
    s -= static_cast<double>(i);
    const double vm = v[i - 1], v0 = v[i], v1 = v[i + 1], v2 = v[i + 2];
    const double a = 0.5 * (-vm + 3 * v0 - 3 * v1 + v2);
    const double b = 0.5 * (2 * vm - 5 * v0 + 4 * v1 - v2);
    const double c = 0.5 * (v1 - vm);
    return ((a * s + b) * s + c) * s + v0;
}

// trapezoid quadrature with buffered pairwise reduction
inline double trapz(const std::vector<double>& f, double h) {
    std::vector<double> buf(f.begin() + 1, f.end() - 1);
    return (pairwiseSum(buf) + 0.5 * (f.front() + f.back())) * h;
}

inline std::vector<double> centralDiff(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d(n);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return d;
}

// rescaled energy integrand; mEps = (1/epsTilde) * trapz(...)
inline double energyRescaled(const std::vector<double>& v1, const std::vector<double>& v2,
                             double hr, double dm1) {
    auto d1 = centralDiff(v1, hr);
    auto d2 = centralDiff(v2, hr);
    std::vector<double> dens(v1.size());
    for (std::size_t i = 0; i < v1.size(); ++i) {
        const double w = v1[i] * v1[i] + v2[i] * v2[i];
        dens[i] = 0.5 * (d1[i] * d1[i] + d2[i] * d2[i]) +
                  (1.0 - w) * (1.0 - w) / (4.0 * dm1) +
                  0.5 * v1[i] * v1[i] * v2[i] * v2[i];
    }
    return trapz(dens, hr);
}

// shift the profile so that v1^2 - v2^2 crosses zero at t = 0 (the
// symmetric point; v1(0)^2 = 1/2 - (delta-1)/8 + h.o.t.)
inline double recenter(const std::vector<double>& t, std::vector<double>& v1,
                       std::vector<double>& v2) {
    const std::size_t n = t.size();
    std::size_t i0 = 1;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (v1[i] * v1[i] - v2[i] * v2[i] >= 0.0) { i0 = i; break; }
    }
    auto sval = [&](double q) {
        const double a = interp(t, v1, q, 0.0, 1.0);
        const double b = interp(t, v2, q, 1.0, 0.0);
        return a * a - b * b;
    };
    double lo = t[i0 - 1], hi = t[i0];
    double xc = 0.5 * (lo + hi);
    for (int k = 0; k < 80; ++k) {
        xc = 0.5 * (lo + hi);
        if (sval(xc) < 0.0) lo = xc; else hi = xc;
        if (hi - lo < 1e-15) break;
    }
    if (std::abs(xc) < 1e-15) return xc;
    std::vector<double> n1(n), n2(n);
    for (std::size_t i = 0; i < n; ++i) {
        n1[i] = interp(t, v1, t[i] + xc, 0.0, 1.0);
        n2[i] = interp(t, v2, t[i] + xc, 1.0, 0.0);
    }
    n1.front() = 0.0; n2.front() = 1.0;
    n1.back() = 1.0; n2.back() = 0.0;
    v1 = std::move(n1);
    v2 = std::move(n2);
    return xc;
}

}  // namespace detail1d

struct SolveOptions {
    double tolEL = 1e-8;     // EL residual max-norm, rescaled variables
    int maxIter = 200;       // Newton iterations (each solves the full band)
    double initializerShift = 0.0;   // in epsTilde units, for uniqueness probes
};

inline Profile1D solveProfile(const Params& p, double T = 24.0, double h1 = 0.0,
                              SolveOptions opt = {}) {
    if (T < 20.0) throw ConfigError("solveProfile: truncation T must be >= 20 epsTilde units");
    if (h1 <= 0.0) h1 = p.eps / 8.0;
    if (h1 > p.eps / 4.0 * (1.0 + 1e-12))
        throw ConfigError("solveProfile: spacing h1 must resolve eps (h1 <= eps/4)");

    Profile1D pr;
    pr.T = T;
    const double hr0 = h1 / p.epsTilde;
    const std::size_t n = static_cast<std::size_t>(std::lround(2.0 * T / hr0)) + 1;
    pr.t.resize(n);
    const double hr = 2.0 * T / static_cast<double>(n - 1);
    pr.hr = hr;
    pr.h1 = hr * p.epsTilde;
    for (std::size_t i = 0; i < n; ++i) pr.t[i] = -T + hr * static_cast<double>(i);

    const double dm1 = p.delta - 1.0;
    pr.v1.resize(n); pr.v2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = std::atan(std::exp(pr.t[i] - opt.initializerShift));
        pr.v1[i] = std::sin(th);
        pr.v2[i] = std::cos(th);
    }
    pr.v1.front() = 0.0; pr.v2.front() = 1.0;
    pr.v1.back() = 1.0; pr.v2.back() = 0.0;

    detail1d::Work wk;
    double res = detail1d::residual(pr.v1, pr.v2, hr, dm1, wk.r1, wk.r2);
    double energy = detail1d::energyRescaled(pr.v1, pr.v2, hr, dm1);
    pr.energyHistory.push_back(energy);

    std::vector<double> t1, t2, s1, s2;
    int it = 0;
    for (; it < opt.maxIter && res >= opt.tolEL; ++it) {
        detail1d::newtonDirection(pr.v1, pr.v2, hr, dm1, wk);
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 20; ++ls) {
            t1 = pr.v1; t2 = pr.v2;
            for (std::size_t k = 0; k < n - 2; ++k) {
                t1[k + 1] += step * wk.d0[k];
                t2[k + 1] += step * wk.d1[k];
            }
            detail1d::clampRange(t1, pr.clampWarnings);
            detail1d::clampRange(t2, pr.clampWarnings);
            const double resNew = detail1d::residual(t1, t2, hr, dm1, s1, s2);
            if (resNew < res) {
                pr.v1.swap(t1); pr.v2.swap(t2);
                wk.r1.swap(s1); wk.r2.swap(s2);
                res = resNew;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        energy = detail1d::energyRescaled(pr.v1, pr.v2, hr, dm1);
        pr.energyHistory.push_back(energy);
    }

    // pin the translation mode, then polish; the Jacobian is nearly singular
    // along translations so Newton alone may drift.
    for (int k = 0; k < 12; ++k) {
        const double xc = detail1d::recenter(pr.t, pr.v1, pr.v2);
        res = detail1d::residual(pr.v1, pr.v2, hr, dm1, wk.r1, wk.r2);
        if (res < opt.tolEL && std::abs(xc) < 1e-10) break;
        detail1d::newtonDirection(pr.v1, pr.v2, hr, dm1, wk);
        for (std::size_t q = 0; q < n - 2; ++q) {
            pr.v1[q + 1] += wk.d0[q];
            pr.v2[q + 1] += wk.d1[q];
        }
        detail1d::clampRange(pr.v1, pr.clampWarnings);
        detail1d::clampRange(pr.v2, pr.clampWarnings);
        ++it;
    }
    res = detail1d::residual(pr.v1, pr.v2, hr, dm1, wk.r1, wk.r2);
    pr.residual = res;
    pr.newtonIterations = it;
    if (res >= opt.tolEL) {
        throw ConvergenceError("solveProfile: Newton stalled, EL residual " + std::to_string(res));
    }
    pr.mEps = detail1d::energyRescaled(pr.v1, pr.v2, hr, dm1) / p.epsTilde;
    pr.energyHistory.push_back(detail1d::energyRescaled(pr.v1, pr.v2, hr, dm1));
    return pr;
}

inline IdentityReport verifyIdentities(const Profile1D& pr, const Params& p) {
    IdentityReport rep;
    const double dm1 = p.delta - 1.0;
    auto d1 = detail1d::centralDiff(pr.v1, pr.hr);
    auto d2 = detail1d::centralDiff(pr.v2, pr.hr);
    const std::size_t n = pr.t.size();
    std::vector<double> kin(n), pot(n), dep(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = pr.v1[i] * pr.v1[i] + pr.v2[i] * pr.v2[i];
        kin[i] = 0.5 * (d1[i] * d1[i] + d2[i] * d2[i]);
        pot[i] = (1.0 - w) * (1.0 - w) / (4.0 * dm1) + 0.5 * pr.v1[i] * pr.v1[i] * pr.v2[i] * pr.v2[i];
        dep[i] = 1.0 - w;
    }
    const double Ikin = detail1d::trapz(kin, pr.hr);
    const double Ipot = detail1d::trapz(pot, pr.hr);
    const double Idep = detail1d::trapz(dep, pr.hr);
    rep.pohozaevResidual = std::abs(Ikin - Ipot) / Ipot;
    // pairing the system with v and with x v' and subtracting:
    //   int 3 kin dx' (physical: 3/2 |v'|^2) = (epsTilde^2 / (2 eps^2)) int (1-w) dx'
    const double lhs = 3.0 * Ikin;
    const double rhs = p.epsTilde * p.epsTilde / (2.0 * p.eps * p.eps) * Idep;
    rep.subtractionResidual = std::abs(lhs - rhs) / std::abs(rhs);
    rep.depletionIntegral = p.epsTilde * Idep;   // back to physical length
    rep.depletionRatio = rep.depletionIntegral / (p.eps * p.eps / p.epsTilde);
    return rep;
}

inline DecayReport decayRates(const Profile1D& pr, const Params& p) {
    DecayReport rep;
    auto fitLogSlope = [&](auto value, double lo, double hi) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (std::size_t i = 0; i < pr.t.size(); ++i) {
            if (pr.t[i] < lo || pr.t[i] > hi) continue;
            const double v = value(i);
            if (v <= 1e-300) continue;
            const double lx = pr.t[i], ly = std::log(v);
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
            ++m;
        }
        if (m < 8) return std::numeric_limits<double>::quiet_NaN();
        return (m * sxy - sx * sy) / (m * sxx - sx * sx);
    };
    rep.rateV1Left = fitLogSlope([&](std::size_t i) { return pr.v1[i]; }, -15.0, -5.0);
    rep.rateOneMinusV2Left = fitLogSlope([&](std::size_t i) { return 1.0 - pr.v2[i]; }, -9.0, -4.0);

    double sup = 0.0;
    for (std::size_t i = 0; i < pr.t.size(); ++i) {
        const double th = std::atan2(pr.v1[i], pr.v2[i]);
        sup = std::max(sup, std::abs(th - std::atan(std::exp(pr.t[i]))));
    }
    rep.supThetaDistance = sup;
    rep.supThetaOverSqrtDelta = sup / std::sqrt(p.delta - 1.0);

    // the left tail should span at least 5 decades above the floor
    double vEdge = 0.0;
    for (std::size_t i = 0; i < pr.t.size(); ++i)
        if (pr.t[i] >= -5.0) { vEdge = pr.v1[i]; break; }
    const double vFar = std::max(pr.v1[1], 1e-300);
    rep.insufficientTruncation = std::log10(vEdge / vFar) < 5.0;
    return rep;
}

inline void exportCsv(const Profile1D& pr, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os << "t,v1,v2\n";
    os.precision(17);
    for (std::size_t i = 0; i < pr.t.size(); ++i)
        os << pr.t[i] << ',' << pr.v1[i] << ',' << pr.v2[i] << '\n';
}

}  // namespace relax1d
}  // namespace gp2c
