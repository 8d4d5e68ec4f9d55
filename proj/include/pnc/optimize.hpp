#pragma once

#include <Eigen/Core>
#include <functional>

namespace pnc {

struct MinimizeResult {
    Eigen::VectorXd x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free Nelder-Mead simplex with the adaptive coefficients of
/// Gao & Han. Stops when the simplex objective spread falls below ftol_abs
/// (or machine-level relative spread), or after max_iters iterations.
MinimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, double step, int max_iters,
                           double ftol_abs);

/// Golden-section minimization on [lo, hi] down to an interval of width xtol.
double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      double xtol);

} // namespace pnc
