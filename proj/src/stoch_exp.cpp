#include "mcurve/stoch_exp.hpp"

#include "mcurve/errors.hpp"

#include <cmath>

namespace mcurve {

namespace {

Eigen::VectorXd vol_or_zero(const SemimartingaleIncrement& s, Eigen::Index n) {
    return s.vol.size() == 0 ? Eigen::VectorXd::Zero(n) : s.vol;
}

} // namespace

SemimartingaleIncrement ratio_increment(const SemimartingaleIncrement& x, const SemimartingaleIncrement& y,
                                        const SemimartingaleIncrement& z) {
    if (!(1.0 + z.jump > 0.0)) throw DomainError("ratio of stochastic exponentials needs 1 + jump of Z > 0");
    const Eigen::Index n = std::max({x.vol.size(), y.vol.size(), z.vol.size()});
    const Eigen::VectorXd cx = vol_or_zero(x, n), cy = vol_or_zero(y, n), cz = vol_or_zero(z, n);
    if (cx.size() != n || cy.size() != n || cz.size() != n) throw DomainError("volatility vectors differ in size");
    SemimartingaleIncrement w;
    w.drift = x.drift + y.drift - z.drift + cx.dot(cy) - cy.dot(cz) - cx.dot(cz) + cz.dot(cz);
    w.vol = cx + cy - cz;
    w.jump = x.jump + y.jump - z.jump + (z.jump * (-x.jump - y.jump + z.jump) + x.jump * y.jump) / (1.0 + z.jump);
    return w;
}

double stochastic_exponential_step(const SemimartingaleIncrement& x, double dt, const Eigen::VectorXd& dW) {
    double e = x.drift * dt;
    if (x.vol.size() > 0) {
        if (x.vol.size() != dW.size()) throw DomainError("Brownian increment has the wrong dimension");
        e += x.vol.dot(dW) - 0.5 * x.vol.squaredNorm() * dt;
    }
    return std::exp(e) * (1.0 + x.jump);
}

} // namespace mcurve
