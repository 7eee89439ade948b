#pragma once

// Dual obstacle problem (the current J_beta and its free boundary):
//   minimize 1/2 int |grad h|^2 - 2 int h  over  h in H^1_0,  0 <= h <= 1/(2 beta)
// by projected SOR on the masked grid. The coincidence set is the upper
// constraint's active set, Jbeta = 1/2 int |grad h|^2 + |coincidence|/beta,
// and beta1 = 1/(2 max h) of the unconstrained (beta = 0) solution.

#include "gp2c/lattice.hpp"

namespace gp2c {

struct ObstacleSolution {
    double beta = 0.0;
    Field h;                     // zero on unmasked nodes
    std::vector<std::uint8_t> coincidence;   // row-major like the mask
    double Jbeta = 0.0;
    double beta1 = 0.0;
    double coincidenceArea = 0.0;
    double maxH = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::vector<double> residualHistory;
};

namespace obstacle {

struct SolveOptions {
    double tolR = 1e-9;       // PDE-unit projected residual, max-norm
    int maxIter = 400000;
    double overRelax = 1.8;   // fixed; sweeps are lexicographic
    bool cascade = true;      // coarse-to-fine initial guess
    bool computeBeta1 = true;
};

namespace detail_ob {

inline double sweep(Field& u, const Grid2D& g, double cap, double omega) {
    // one lexicographic SOR sweep; returns nothing useful (residual measured separately)
    const int nx = g.nx(), ny = g.ny();
    const double h2 = g.h() * g.h();
    for (int i = 0; i < nx; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * ny;
        for (int j = 0; j < ny; ++j) {
            const std::size_t id = row + j;
            if (!g.dom.mask[id]) continue;
            const double up = (i + 1 < nx) ? u.v[id + ny] : 0.0;
            const double dn = (i > 0) ? u.v[id - ny] : 0.0;
            const double rt = (j + 1 < ny) ? u.v[id + 1] : 0.0;
            const double lf = (j > 0) ? u.v[id - 1] : 0.0;
            const double gs = 0.25 * (up + dn + rt + lf + 2.0 * h2);
            double nu = u.v[id] + omega * (gs - u.v[id]);
            if (nu < 0.0) nu = 0.0;
            if (nu > cap) nu = cap;
            u.v[id] = nu;
        }
    }
    return 0.0;
}

inline double projectedResidual(const Field& u, const Grid2D& g, double cap) {
    const int nx = g.nx(), ny = g.ny();
    const double ih2 = 1.0 / (g.h() * g.h());
    double worst = 0.0;
    for (int i = 0; i < nx; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * ny;
        for (int j = 0; j < ny; ++j) {
            const std::size_t id = row + j;
            if (!g.dom.mask[id]) continue;
            const double up = (i + 1 < nx) ? u.v[id + ny] : 0.0;
            const double dn = (i > 0) ? u.v[id - ny] : 0.0;
            const double rt = (j + 1 < ny) ? u.v[id + 1] : 0.0;
            const double lf = (j > 0) ? u.v[id - 1] : 0.0;
            const double r = (up + dn + rt + lf - 4.0 * u.v[id]) * ih2 + 2.0;
            // residual measured through the box constraints, PDE units
            double target = u.v[id] + 0.25 * r * g.h() * g.h();
            if (target < 0.0) target = 0.0;
            if (target > cap) target = cap;
            worst = std::max(worst, std::abs((target - u.v[id]) * (4.0 * ih2)));
        }
    }
    return worst;
}

inline DomainSpec coarsen(const DomainSpec& d) {
    if (d.kind == DomainKind::Disk) return DomainSpec::disk(d.R, 2.0 * d.h);
    return DomainSpec::rectangle(d.Lx, d.Ly, 2.0 * d.h);
}

inline bool canCoarsen(const DomainSpec& d) {
    if (d.nx % 2 || d.ny % 2) return false;
    return d.nx / 2 >= 24 && d.ny / 2 >= 24;
}

inline void prolong(const Field& coarse, const Grid2D& gc, Field& fine, const Grid2D& gf,
                    double cap) {
    // bilinear from coarse cell centers; unmasked coarse reads as zero
    const double H = gc.h();
    auto cval = [&](int I, int J) -> double {
        if (I < 0 || J < 0 || I >= gc.nx() || J >= gc.ny()) return 0.0;
        const std::size_t id = gc.idx(I, J);
        return gc.dom.mask[id] ? coarse.v[id] : 0.0;
    };
    for (int i = 0; i < gf.nx(); ++i)
        for (int j = 0; j < gf.ny(); ++j) {
            const std::size_t id = gf.idx(i, j);
            if (!gf.dom.mask[id]) { fine.v[id] = 0.0; continue; }
            const double fx = (gf.x(i) + 0.5 * gc.dom.Lx) / H - 0.5;
            const double fy = (gf.y(j) + 0.5 * gc.dom.Ly) / H - 0.5;
            const int I = static_cast<int>(std::floor(fx));
            const int J = static_cast<int>(std::floor(fy));
            const double sx = fx - I, sy = fy - J;
            double v = (1 - sx) * (1 - sy) * cval(I, J) + sx * (1 - sy) * cval(I + 1, J) +
                       (1 - sx) * sy * cval(I, J + 1) + sx * sy * cval(I + 1, J + 1);
            if (v < 0.0) v = 0.0;
            if (v > cap) v = cap;
            fine.v[id] = v;
        }
}

inline Field solveCore(const Grid2D& g, double cap, const SolveOptions& opt,
                       int& itersOut, double& resOut, std::vector<double>& hist) {
    Field u(g);
    if (opt.cascade && canCoarsen(g.dom)) {
        SolveOptions copt = opt;
        copt.tolR = std::max(opt.tolR, 1e-7);
        copt.computeBeta1 = false;
        int subIters = 0; double subRes = 0; std::vector<double> subHist;
        Grid2D gc = Grid2D::make(coarsen(g.dom));
        Field uc = solveCore(gc, cap, copt, subIters, subRes, subHist);
        prolong(uc, gc, u, g, cap);
    }
    double res = 0.0;
    int it = 0;
    for (; it < opt.maxIter; ++it) {
        sweep(u, g, cap, opt.overRelax);
        if (it % 32 == 0) {
            res = projectedResidual(u, g, cap);
            if (it % 1024 == 0) hist.push_back(res);
            if (res < opt.tolR) break;
        }
    }
    res = projectedResidual(u, g, cap);
    itersOut = it;
    resOut = res;
    if (res >= opt.tolR) {
        throw ConvergenceError("solveObstacle: SOR did not reach tolR, residual " +
                               std::to_string(res));
    }
    return u;
}

}  // namespace detail_ob

inline double criticalVelocity(const Grid2D& g, SolveOptions opt = {}) {
    opt.computeBeta1 = false;
    int iters = 0; double res = 0; std::vector<double> hist;
    Field u = detail_ob::solveCore(g, std::numeric_limits<double>::infinity(), opt, iters, res, hist);
    double mx = 0.0;
    for (std::size_t id = 0; id < u.v.size(); ++id)
        if (g.dom.mask[id]) mx = std::max(mx, u.v[id]);
    return 1.0 / (2.0 * mx);
}

inline ObstacleSolution solveObstacle(const Grid2D& g, double beta, SolveOptions opt = {}) {
    if (beta < 0.0) throw ConfigError("solveObstacle: beta must be nonnegative");
    ObstacleSolution s;
    s.beta = beta;
    const double cap = beta > 0.0 ? 1.0 / (2.0 * beta) : std::numeric_limits<double>::infinity();
    s.h = detail_ob::solveCore(g, cap, opt, s.iterations, s.residual, s.residualHistory);

    for (std::size_t id = 0; id < s.h.v.size(); ++id)
        if (g.dom.mask[id]) s.maxH = std::max(s.maxH, s.h.v[id]);

    // coincidence set by constraint activity
    s.coincidence.assign(g.size(), 0);
    if (beta > 0.0) {
        const double tolC = 10.0 * opt.tolR * (2.0 * beta);
        for (std::size_t id = 0; id < s.h.v.size(); ++id)
            if (g.dom.mask[id] && s.h.v[id] >= cap - tolC) s.coincidence[id] = 1;
    }
    std::size_t nc = 0;
    for (auto c : s.coincidence) nc += c;
    s.coincidenceArea = static_cast<double>(nc) * g.h() * g.h();

    VectorField gr = gradient(s.h, g);
    const double h2 = g.h() * g.h();
    const double gradSq = h2 * detail::maskedSum(g, [&](int, int, std::size_t id) {
        return gr.x.v[id] * gr.x.v[id] + gr.y.v[id] * gr.y.v[id];
    });
    s.Jbeta = 0.5 * gradSq + (beta > 0.0 ? s.coincidenceArea / beta : 0.0);

    if (opt.computeBeta1)
        s.beta1 = (beta == 0.0) ? 1.0 / (2.0 * s.maxH) : criticalVelocity(g, opt);
    return s;
}

// j = grad^perp h = (-dh/dy, dh/dx); divergence-free up to discretization.
inline VectorField limitingCurrent(const ObstacleSolution& s, const Grid2D& g) {
    VectorField gr = gradient(s.h, g);
    VectorField j(g);
    for (std::size_t id = 0; id < j.x.v.size(); ++id) {
        j.x.v[id] = -gr.y.v[id];
        j.y.v[id] = gr.x.v[id];
    }
    return j;
}

inline void exportCsv(const ObstacleSolution& s, const Grid2D& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os << "x,y,h,inCoincidenceSet\n";
    os.precision(17);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            const std::size_t id = g.idx(i, j);
            if (!g.dom.mask[id]) continue;
            os << g.x(i) << ',' << g.y(j) << ',' << s.h.v[id] << ','
               << int(s.coincidence[id]) << '\n';
        }
}

}  // namespace obstacle
}  // namespace gp2c
