#include "mcurve/ou.hpp"

#include "mcurve/quadrature.hpp"

#include <cmath>

namespace mcurve {

VasicekAB vasicek_transform(const OUParams& p, double tau, double u) {
    const double k = p.kappa, th = p.theta, s2 = p.sigma * p.sigma;
    const double e = std::exp(-k * tau);
    const double h = hfun(k, tau);
    const double h2 = hfun(2.0 * k, tau);
    double B = h - u * e;
    double var = s2 * (int_hh(k, k, tau) - u * h * h + u * u * h2);
    double A = th * (tau - h) - u * th * (1.0 - e) - 0.5 * var;
    return {A, B};
}

double vasicek_forward_shift(const OUParams& p, double tau) {
    double h = hfun(p.kappa, tau);
    return p.kappa * p.theta * h - 0.5 * p.sigma * p.sigma * h * h;
}

double vasicek_forward(const OUParams& p, double tau, double x) {
    return x * std::exp(-p.kappa * tau) + vasicek_forward_shift(p, tau);
}

double vasicek_bond(const OUParams& p, double tau, double x) {
    auto ab = vasicek_transform(p, tau, 0.0);
    return std::exp(-ab.A - ab.B * x);
}

double ou_mean_level(const OUParams& p, double x, double dt) {
    return p.theta + (x - p.theta) * std::exp(-p.kappa * dt);
}

double ou_mean_integral(const OUParams& p, double x, double dt) {
    return p.theta * dt + (x - p.theta) * hfun(p.kappa, dt);
}

Eigen::MatrixXd ou_step_covariance(const std::vector<OUParams>& f, const Eigen::MatrixXd& corr, double dt) {
    const int m = static_cast<int>(f.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            double c = corr(i, j) * f[i].sigma * f[j].sigma;
            const double ki = f[i].kappa, kj = f[j].kappa;
            cov(2 * i, 2 * j) = c * hfun(ki + kj, dt);
            cov(2 * i + 1, 2 * j + 1) = c * int_hh(ki, kj, dt);
            cov(2 * i, 2 * j + 1) = c * int_eh(ki, kj, dt);
        }
    }
    // Cov(I_i, xi_j) from the symmetric entry
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) cov(2 * i + 1, 2 * j) = cov(2 * j, 2 * i + 1);
    return cov;
}

} // namespace mcurve
