#include "mcurve/quadrature.hpp"

#include "mcurve/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace mcurve {

const GaussRule& gauss_hermite(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (slot) return *slot;
    if (n < 1) throw DomainError("gauss_hermite: n must be >= 1");
    // Jacobi matrix of the monic probabilists' Hermite recurrence
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    auto rule = std::make_unique<GaussRule>();
    rule->nodes.resize(n);
    rule->weights.resize(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        rule->nodes[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        rule->weights[i] = v0 * v0;
        total += rule->weights[i];
    }
    for (double& w : rule->weights) w /= total;
    // symmetrize to kill eigen-solver asymmetry in the odd moments
    for (int i = 0; i < n / 2; ++i) {
        int j = n - 1 - i;
        double x = 0.5 * (rule->nodes[j] - rule->nodes[i]);
        double w = 0.5 * (rule->weights[i] + rule->weights[j]);
        rule->nodes[i] = -x;
        rule->nodes[j] = x;
        rule->weights[i] = rule->weights[j] = w;
    }
    if (n % 2 == 1) rule->nodes[n / 2] = 0.0;
    slot = std::move(rule);
    return *slot;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov, double rel_tol) {
    const auto n = cov.rows();
    if (n == 0) return Eigen::MatrixXd(0, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
    double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
    std::vector<int> keep;
    for (int i = 0; i < n; ++i) {
        double lam = es.eigenvalues()(i);
        if (lam < -1e-10 * std::max(scale, 1e-300) && lam < -1e-18)
            throw DomainError("psd_sqrt: matrix is not positive semi-definite");
        if (lam > rel_tol * scale && lam > 0.0) keep.push_back(i);
    }
    Eigen::MatrixXd C(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k)
        C.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]) * std::sqrt(es.eigenvalues()(keep[k]));
    return C;
}

bool is_psd(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() != m.cols()) return false;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
    if (m.rows() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    return es.eigenvalues().minCoeff() >= -tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

double gaussian_expectation(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                            const std::function<double(const Eigen::VectorXd&)>& f, int n) {
    Eigen::MatrixXd C = psd_sqrt(cov);
    const int k = static_cast<int>(C.cols());
    if (k == 0) return f(mean);
    if (k > 3) throw UnsupportedLawError("gaussian_expectation: more than 3 random directions");
    const auto& rule = gauss_hermite(n);
    std::vector<int> idx(k, 0);
    Eigen::VectorXd z(k);
    double sum = 0.0;
    while (true) {
        double w = 1.0;
        for (int j = 0; j < k; ++j) {
            z(j) = rule.nodes[idx[j]];
            w *= rule.weights[idx[j]];
        }
        sum += w * f(mean + C * z);
        int j = 0;
        while (j < k && ++idx[j] == n) idx[j++] = 0;
        if (j == k) break;
    }
    return sum;
}

namespace {

Eigen::VectorXd gk15(const std::function<Eigen::VectorXd(double)>& f, double a, double b, int dim, double tol,
                     int depth) {
    using boost::math::quadrature::gauss_kronrod;
    const auto& x = gauss_kronrod<double, 15>::abscissa();
    const auto& wk = gauss_kronrod<double, 15>::weights();
    const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Eigen::VectorXd k = Eigen::VectorXd::Zero(dim), g = Eigen::VectorXd::Zero(dim);
    // abscissa()[0] is the centre; even indices are also Gauss nodes
    Eigen::VectorXd fc = f(c);
    k += wk[0] * fc;
    g += wg[0] * fc;
    for (std::size_t i = 1; i < x.size(); ++i) {
        Eigen::VectorXd fl = f(c - h * x[i]), fr = f(c + h * x[i]);
        k += wk[i] * (fl + fr);
        if (i % 2 == 0) g += wg[i / 2] * (fl + fr);
    }
    k *= h;
    g *= h;
    for (int j = 0; j < dim; ++j)
        if (!std::isfinite(k(j))) throw DomainError("integrand not finite on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    double err = (k - g).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
    if (err <= tol * scale || depth >= 14) return k;
    return gk15(f, a, c, dim, tol, depth + 1) + gk15(f, c, b, dim, tol, depth + 1);
}

} // namespace

Eigen::VectorXd integrate_vec(const std::function<Eigen::VectorXd(double)>& f, double a, double b, int dim,
                              double tol) {
    if (a == b) return Eigen::VectorXd::Zero(dim);
    return gk15(f, a, b, dim, tol, 0);
}

double hfun(double k, double v) {
    if (k == 0.0) return v;
    return -std::expm1(-k * v) / k;
}

namespace {

template <class F>
double panel_gauss(F f, double v, double rate) {
    using boost::math::quadrature::gauss;
    int panels = std::max(1, static_cast<int>(std::ceil(rate * v)));
    double w = v / panels, sum = 0.0;
    for (int p = 0; p < panels; ++p) sum += gauss<double, 20>::integrate(f, p * w, (p + 1) * w);
    return sum;
}

} // namespace

double int_hh(double k1, double k2, double v) {
    if (v == 0.0) return 0.0;
    if (k1 * v > 0.5 && k2 * v > 0.5)
        return (v - hfun(k1, v) - hfun(k2, v) + hfun(k1 + k2, v)) / (k1 * k2);
    return panel_gauss([&](double s) { return hfun(k1, s) * hfun(k2, s); }, v, k1 + k2);
}

double int_eh(double k1, double k2, double v) {
    if (v == 0.0) return 0.0;
    if (k2 * v > 0.5) return (hfun(k1, v) - hfun(k1 + k2, v)) / k2;
    return panel_gauss([&](double s) { return std::exp(-k1 * s) * hfun(k2, s); }, v, k1 + k2);
}

} // namespace mcurve
