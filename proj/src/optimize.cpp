#include "netcause/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace netcause {

namespace {
const double kFdStep = std::cbrt(std::numeric_limits<double>::epsilon());

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * (1.0 + std::min(std::abs(a), std::abs(b)));
}
}  // namespace

Eigen::VectorXd numeric_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g(n), xp = x;
    for (int k = 0; k < n; ++k) {
        double h = kFdStep * (1.0 + std::abs(x(k)));
        xp(k) = x(k) + h;
        double fp = f(xp);
        xp(k) = x(k) - h;
        double fm = f(xp);
        xp(k) = x(k);
        g(k) = (fp - fm) / (2.0 * h);
    }
    return g;
}

OptimResult nelder_mead(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                        const OptimOptions& opts) {
    const int n = static_cast<int>(x0.size());
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<Eigen::VectorXd> pts(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (int k = 0; k < n; ++k)
        pts[k + 1](k) += opts.initial_step * (1.0 + std::abs(x0(k)));
    for (int k = 0; k <= n; ++k) fv[k] = f(pts[k]);

    std::vector<int> ord(n + 1);
    OptimResult res;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        int best = ord[0], worst = ord[n], second = ord[n - 1];
        if (rel_close(fv[best], fv[worst], opts.rel_tol)) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int k = 0; k <= n; ++k)
            if (k != worst) centroid += pts[k];
        centroid /= n;

        Eigen::VectorXd xr = centroid + alpha * (centroid - pts[worst]);
        double fr = f(xr);
        if (fr < fv[ord[0]]) {
            Eigen::VectorXd xe = centroid + gamma * (centroid - pts[worst]);
            double fe = f(xe);
            if (fe < fr) { pts[worst] = xe; fv[worst] = fe; }
            else         { pts[worst] = xr; fv[worst] = fr; }
        } else if (fr < fv[second]) {
            pts[worst] = xr; fv[worst] = fr;
        } else {
            Eigen::VectorXd xc = centroid + rho * (pts[worst] - centroid);
            double fc = f(xc);
            if (fc < fv[worst]) { pts[worst] = xc; fv[worst] = fc; }
            else {
                for (int k = 0; k <= n; ++k) {
                    if (k == best) continue;
                    pts[k] = pts[best] + sigma * (pts[k] - pts[best]);
                    fv[k] = f(pts[k]);
                }
            }
        }
    }
    int best = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = pts[best];
    res.fval = fv[best];
    res.iterations = it;
    return res;
}

OptimResult bfgs(const ObjectiveFn& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
    const int n = static_cast<int>(x0.size());
    Eigen::VectorXd x = x0;
    double fx = f(x);
    Eigen::VectorXd g = numeric_gradient(f, x);
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);

    // Declare convergence only when the objective has stalled AND the gradient
    // is small on the objective's scale; the scale keeps the criterion usable
    // for log-likelihoods in the hundreds.
    auto grad_small = [&](const Eigen::VectorXd& grad, double fval) {
        return grad.lpNorm<Eigen::Infinity>() < 1e-5 * (1.0 + std::abs(fval));
    };

    OptimResult res;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        if (grad_small(g, fx)) { res.converged = true; break; }
        Eigen::VectorXd dir = -hinv * g;
        if (dir.dot(g) >= 0.0) {  // reset on loss of descent
            hinv.setIdentity();
            dir = -g;
        }

        // Armijo backtracking
        double step = 1.0;
        const double c1 = 1e-4;
        double slope = g.dot(dir);
        Eigen::VectorXd xn;
        double fn = fx;
        bool moved = false;
        for (int ls = 0; ls < 50; ++ls) {
            xn = x + step * dir;
            fn = f(xn);
            if (std::isfinite(fn) && fn <= fx + c1 * step * slope) { moved = true; break; }
            step *= 0.5;
        }
        if (!moved) {
            // retry once along steepest descent before giving up
            dir = -g;
            slope = g.dot(dir);
            step = 1.0 / std::max(1.0, g.norm());
            for (int ls = 0; ls < 50; ++ls) {
                xn = x + step * dir;
                fn = f(xn);
                if (std::isfinite(fn) && fn <= fx + c1 * step * slope) { moved = true; break; }
                step *= 0.5;
            }
            if (!moved) {
                res.converged = grad_small(g, fx);
                break;
            }
            hinv.setIdentity();
        }

        Eigen::VectorXd gn = numeric_gradient(f, xn);
        Eigen::VectorXd s = xn - x, y = gn - g;
        double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            Eigen::VectorXd hy = hinv * y;
            double yhy = y.dot(hy);
            hinv += ((sy + yhy) / (sy * sy)) * (s * s.transpose())
                    - (hy * s.transpose() + s * hy.transpose()) / sy;
        }
        bool stalled = rel_close(fn, fx, opts.rel_tol);
        x = xn; fx = fn; g = gn;
        if (stalled && grad_small(g, fx)) { res.converged = true; ++it; break; }
    }
    res.x = x;
    res.fval = fx;
    res.iterations = it;
    return res;
}

OptimResult minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
    OptimOptions nm_opts = opts;
    nm_opts.max_iter = std::min(200, opts.max_iter / 2);
    nm_opts.rel_tol = std::max(opts.rel_tol, 1e-9);
    OptimResult stage1 = nelder_mead(f, x0, nm_opts);

    OptimOptions qb_opts = opts;
    OptimResult stage2 = bfgs(f, stage1.x, qb_opts);
    stage2.iterations += stage1.iterations;
    if (stage2.fval > stage1.fval) {  // polish must not regress
        stage1.iterations = stage2.iterations;
        stage1.converged = stage1.converged || stage2.converged;
        return stage1;
    }
    stage2.converged = stage2.converged || stage1.converged;
    return stage2;
}

}  // namespace netcause
