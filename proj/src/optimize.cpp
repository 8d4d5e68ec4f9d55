#include "pnc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace pnc {

MinimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, double step, int max_iters,
                           double ftol_abs) {
    const int dim = static_cast<int>(x0.size());
    const double n = static_cast<double>(dim);
    const double refl = 1.0;
    const double expa = 1.0 + 2.0 / n;
    const double contr = 0.75 - 1.0 / (2.0 * n);
    const double shrink = 1.0 - 1.0 / n;

    std::vector<Eigen::VectorXd> verts(static_cast<std::size_t>(dim) + 1, x0);
    std::vector<double> fv(static_cast<std::size_t>(dim) + 1);
    for (int j = 0; j < dim; ++j) {
        verts[static_cast<std::size_t>(j) + 1](j) += step;
    }
    for (std::size_t j = 0; j < verts.size(); ++j) fv[j] = f(verts[j]);

    std::vector<std::size_t> order(verts.size());
    MinimizeResult res;
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];

        const double spread = fv[worst] - fv[best];
        if (spread <= ftol_abs || spread <= 4e-16 * std::max(1.0, std::abs(fv[best]))) {
            res.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (std::size_t j = 0; j < order.size(); ++j) {
            if (order[j] != worst) centroid += verts[order[j]];
        }
        centroid /= n;

        Eigen::VectorXd xr = centroid + refl * (centroid - verts[worst]);
        const double fr = f(xr);
        if (fr < fv[best]) {
            Eigen::VectorXd xe = centroid + expa * (xr - centroid);
            const double fe = f(xe);
            if (fe < fr) {
                verts[worst] = std::move(xe);
                fv[worst] = fe;
            } else {
                verts[worst] = std::move(xr);
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            verts[worst] = std::move(xr);
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            Eigen::VectorXd xc = outside
                ? Eigen::VectorXd(centroid + contr * (xr - centroid))
                : Eigen::VectorXd(centroid - contr * (centroid - verts[worst]));
            const double fc = f(xc);
            if (fc < std::min(fr, fv[worst])) {
                verts[worst] = std::move(xc);
                fv[worst] = fc;
            } else {
                for (std::size_t j = 0; j < verts.size(); ++j) {
                    if (j == best) continue;
                    verts[j] = verts[best] + shrink * (verts[j] - verts[best]);
                    fv[j] = f(verts[j]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t j = 1; j < verts.size(); ++j) {
        if (fv[j] < fv[best]) best = j;
    }
    res.x = verts[best];
    res.fx = fv[best];
    res.iterations = iter;
    return res;
}

double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      double xtol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > xtol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

} // namespace pnc
