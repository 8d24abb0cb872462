#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace mcurve {

// E[f(Z)] ~ sum w_i f(z_i) for Z ~ N(0,1)
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Probabilists' Gauss-Hermite rule via Golub-Welsch. Cached per n.
const GaussRule& gauss_hermite(int n);

// C with C C^T = cov, one column per strictly positive eigenvalue.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov, double rel_tol = 1e-14);

bool is_psd(const Eigen::MatrixXd& m, double tol = 1e-12);

// E[f(Y)] for Y ~ N(mean, cov) by a tensor Gauss-Hermite rule on the
// non-degenerate directions. Intended for at most 3 effective dimensions.
double gaussian_expectation(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                            const std::function<double(const Eigen::VectorXd&)>& f, int n = 64);

// Adaptive Gauss-Kronrod (7/15) for vector-valued integrands on [a, b].
Eigen::VectorXd integrate_vec(const std::function<Eigen::VectorXd(double)>& f, double a, double b, int dim,
                              double tol = 1e-13);

// int_0^v h(k1,s) h(k2,s) ds and int_0^v exp(-k1 s) h(k2,s) ds, stable for small k v.
double int_hh(double k1, double k2, double v);
double int_eh(double k1, double k2, double v);

// (1 - exp(-k v)) / k, equal to v at k = 0
double hfun(double k, double v);

} // namespace mcurve
