#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mcurve {

// d xi = kappa (theta - xi) dt + sigma dW
struct OUParams {
    double kappa = 0.5;
    double theta = 0.0;
    double sigma = 0.0;
};

// E[exp(-int_0^tau xi ds + u xi_tau)] = exp(-A - B xi_0), analytic (kappa > 0).
struct VasicekAB {
    double A;
    double B;
};
VasicekAB vasicek_transform(const OUParams& p, double tau, double u);

// f(t, t + tau) in the one-factor Vasicek model with xi_t = x
double vasicek_forward(const OUParams& p, double tau, double x);
// kappa theta h - sigma^2 h^2 / 2 with h = h(kappa, tau): deterministic part of vasicek_forward
double vasicek_forward_shift(const OUParams& p, double tau);
double vasicek_bond(const OUParams& p, double tau, double x);

double ou_mean_level(const OUParams& p, double x, double dt);
double ou_mean_integral(const OUParams& p, double x, double dt);

// Covariance of (xi_1, I_1, xi_2, I_2, ...) after dt, I_j = int_0^dt xi_j,
// for factors driven by Brownian motions with correlation matrix corr.
Eigen::MatrixXd ou_step_covariance(const std::vector<OUParams>& f, const Eigen::MatrixXd& corr, double dt);

} // namespace mcurve
