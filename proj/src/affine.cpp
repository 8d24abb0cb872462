#include "mcurve/affine.hpp"

#include "mcurve/errors.hpp"
#include "mcurve/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace mcurve {

double JumpMeasure::integrate(const Mat& P, const std::function<double(const Vec&)>& F) const {
    if (intensity == 0.0) return 0.0;
    if (!(intensity > 0.0)) throw DomainError("jump intensity must be >= 0");
    double value = 0.0;
    switch (law) {
    case Law::Gaussian:
        value = gaussian_expectation(P * mean, P * cov * P.transpose(), F, 64);
        break;
    case Law::Discrete:
        for (std::size_t k = 0; k < points.size(); ++k) value += probs[k] * F(P * points[k]);
        break;
    case Law::Sampled: {
        if (!sampler) throw ConfigError("sampled jump law without sampler");
        std::mt19937_64 rng(mc_seed);
        for (int k = 0; k < mc_samples; ++k) value += F(P * sampler(rng));
        value /= mc_samples;
        break;
    }
    }
    return intensity * value;
}

Vec AffineCharacteristics::drift(const Vec& x) const {
    Vec b = beta[0];
    for (int i = 1; i <= d; ++i)
        if (x(i - 1) != 0.0) b += x(i - 1) * beta[i];
    return b;
}

Mat AffineCharacteristics::diffusion(const Vec& x) const {
    Mat a = alpha[0];
    for (int i = 1; i <= d; ++i)
        if (x(i - 1) != 0.0) a += x(i - 1) * alpha[i];
    return a;
}

void AffineCharacteristics::validate() const {
    const auto n = static_cast<std::size_t>(d + 1);
    if (d < 1) throw ConfigError("affine dimension must be >= 1");
    if (beta.size() != n || alpha.size() != n || mu.size() != n)
        throw ConfigError("affine characteristics need d+1 entries of beta, alpha, mu");
    for (std::size_t i = 0; i < n; ++i) {
        if (beta[i].size() != d) throw ConfigError("beta has wrong dimension");
        if (alpha[i].rows() != d || alpha[i].cols() != d) throw ConfigError("alpha has wrong dimension");
        if (!is_psd(alpha[i])) throw ConfigError("alpha_" + std::to_string(i) + " is not symmetric PSD");
        if (mu[i]) {
            const auto& m = *mu[i];
            if (m.law == JumpMeasure::Law::Gaussian && (m.mean.size() != d || m.cov.rows() != d))
                throw ConfigError("Gaussian jump law has wrong dimension");
        }
    }
    Vec zero = Vec::Zero(d);
    for (const auto& [n_date, sj] : scheduled) {
        if (!sj.gamma0) throw ConfigError("scheduled jump without gamma0");
        if (std::abs(sj.gamma0(zero)) > 1e-14) throw ConfigError("gamma0(T_n, 0) != 0");
        for (const auto& [i, g] : sj.gamma)
            if (std::abs(g(zero)) > 1e-14) throw ConfigError("gamma_i(T_n, 0) != 0");
    }
}

Vec CurveLoadings::psi(double delta, int d) const {
    if (delta == 0.0) return Vec::Zero(d);
    auto it = psi_tenor.find(delta);
    if (it == psi_tenor.end()) throw DomainError("no spread loading for tenor " + std::to_string(delta));
    return it->second;
}

void AffineModel::validate() const {
    ch.validate();
    if (x0.size() != ch.d) throw ConfigError("initial state has wrong dimension");
    if (!load.phi.count(0.0)) throw ConfigError("missing OIS loadings");
    for (double delta : tenors.tenors()) {
        if (!load.phi.count(delta)) throw ConfigError("missing loadings for tenor " + std::to_string(delta));
        if (!load.psi_tenor.count(delta)) throw ConfigError("missing spread loading for tenor " + std::to_string(delta));
    }
    for (std::size_t n = 0; n < cal.size(); ++n)
        if (!ch.scheduled.count(static_cast<int>(n)))
            throw ConfigError("missing scheduled-jump transform at date " + std::to_string(cal[n]));
    if (!load.short_rate) throw ConfigError("missing short rate");
    if (!forward) throw ConfigError("missing forward-curve map");
}

Vec phi_integral(const AffineModel& m, double t, double a, double b, double delta) {
    if (a > b) throw DomainError("phi_integral: a > b");
    const auto& phi = m.load.phi.at(delta);
    const int d = m.dim();
    Vec out = Vec::Zero(d);
    if (a == b) return out;
    auto f = [&](double u) { return phi(t, std::max(u, t)); };
    if (m.cal.has_lebesgue()) {
        double lo = a;
        for (double T : m.cal.dates_in(a, b)) {
            if (T >= b) break;
            out += integrate_vec(f, lo, T, d);
            lo = T;
        }
        out += integrate_vec(f, lo, b, d);
    }
    for (double T : m.cal.dates_in(a, b)) out += phi(t, T);
    return out;
}

Vec phi_bar(const AffineModel& m, double t, double T, double delta) {
    Vec out = phi_integral(m, t, t, T, delta);
    if (m.cal.contains(t)) out += m.load.phi.at(delta)(t, t);
    return out;
}

namespace {

double jump_term(const std::optional<JumpMeasure>& mu, const Mat& P, const std::function<double(const Vec&)>& F) {
    if (!mu) return 0.0;
    double v = mu->integrate(P, F);
    if (!std::isfinite(v)) throw IntegrabilityError("jump integral not finite");
    return v;
}

} // namespace

std::map<double, double> check_short_rate_condition(const AffineModel& m, const Vec& x, double t) {
    if (m.cal.contains(t)) throw DomainError("short-rate condition is checked off calendar dates");
    const int d = m.dim();
    std::map<double, double> out;
    const Vec drift = m.ch.drift(x);
    const Mat diff = m.ch.diffusion(x);
    const double r = m.load.short_rate(t, x);
    for (double delta : m.tenors.with_ois()) {
        Vec psi = m.load.psi(delta, d);
        double lhs = r - m.forward(t, t, delta, x, false);
        double rhs = psi.dot(drift) + 0.5 * psi.dot(diff * psi);
        Mat P = psi.transpose();
        auto F = [](const Vec& y) { return std::expm1(y(0)) - y(0); };
        for (int i = 0; i <= d; ++i) {
            double w = i == 0 ? 1.0 : x(i - 1);
            if (w != 0.0) rhs += w * jump_term(m.ch.mu[i], P, F);
        }
        out[delta] = lhs - rhs;
    }
    return out;
}

ConditionReport check_drift_condition(const AffineModel& m, const std::vector<double>& t_grid,
                                      const std::vector<double>& T_grid) {
    ConditionReport rep("drift(ii)");
    const int d = m.dim();
    for (double delta : m.tenors.with_ois()) {
        Vec psi = m.load.psi(delta, d);
        for (double t : t_grid) {
            if (m.cal.contains(t)) throw DomainError("drift condition is checked off calendar dates");
            for (double T : T_grid) {
                if (T < t) continue;
                Vec pb = phi_bar(m, t, T, delta);
                Mat P(2, d);
                P.row(0) = psi.transpose();
                P.row(1) = pb.transpose();
                auto F = [](const Vec& y) { return std::exp(y(0)) * std::expm1(-y(1)) + y(1); };
                for (int i = 0; i <= d; ++i) {
                    double res = pb.dot(m.ch.beta[i]) - pb.dot(m.ch.alpha[i] * (0.5 * pb - psi)) -
                                 jump_term(m.ch.mu[i], P, F);
                    rep.add({t, T, delta, i, -1, res});
                }
            }
        }
    }
    return rep;
}

double check_scheduled_jump_condition(const AffineModel& m, int n, double T, double delta, const Vec& x_left) {
    auto it = m.ch.scheduled.find(n);
    if (it == m.ch.scheduled.end() || !it->second.gamma0)
        throw ConfigError("no scheduled-jump transform at calendar index " + std::to_string(n));
    if (n < 0 || static_cast<std::size_t>(n) >= m.cal.size()) throw DomainError("calendar index out of range");
    const double Tn = m.cal[static_cast<std::size_t>(n)];
    if (T < Tn) throw DomainError("scheduled-jump condition needs T >= T_n");
    const int d = m.dim();
    Vec w = m.load.psi(delta, d);
    if (auto pj = m.load.psi_jump.find(n); pj != m.load.psi_jump.end()) w -= pj->second;
    w -= phi_integral(m, Tn, Tn, T, delta);
    const auto& sj = it->second;
    double res = m.forward(Tn, Tn, delta, x_left, true) + sj.gamma0(w);
    for (const auto& [i, g] : sj.gamma) res += x_left(i) * g(w);
    return res;
}

std::vector<double> condition_grid(double horizon, int n, const DiscontinuityCalendar& cal, double eps) {
    std::vector<double> g;
    for (int k = 0; k < n; ++k) {
        double t = n == 1 ? 0.0 : horizon * k / (n - 1);
        if (cal.contains(t)) t = (t + eps <= horizon) ? t + eps : t - eps;
        g.push_back(t);
    }
    return g;
}

std::vector<Vec> random_states(const AffineModel& m, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<Vec> out;
    for (int k = 0; k < count; ++k) {
        Vec x = m.x0;
        for (int j = 0; j < x.size(); ++j) x(j) += 0.05 * z(rng);
        out.push_back(x);
    }
    return out;
}

CheckSuite run_affine_checks(const AffineModel& m, const AffineCheckOptions& opt) {
    m.validate();
    CheckSuite suite;
    const auto grid = condition_grid(m.cal.horizon(), opt.grid, m.cal);
    const auto states = random_states(m, opt.states, opt.seed);

    ConditionReport sr("short_rate(i)");
    for (std::size_t s = 0; s < states.size(); ++s)
        for (double t : grid)
            for (const auto& [delta, res] : check_short_rate_condition(m, states[s], t))
                sr.add({t, t, delta, -1, static_cast<int>(s), res});
    suite.conditions.push_back(sr);

    suite.conditions.push_back(check_drift_condition(m, grid, grid));

    ConditionReport sj("scheduled_jump(iii)");
    for (std::size_t n = 0; n < m.cal.size(); ++n) {
        const double Tn = m.cal[n];
        std::vector<double> Ts{Tn};
        for (double T : grid)
            if (T > Tn) Ts.push_back(T);
        for (double delta : m.tenors.with_ois())
            for (double T : Ts)
                for (std::size_t s = 0; s < states.size(); ++s)
                    sj.add({Tn, T, delta, static_cast<int>(n), static_cast<int>(s),
                            check_scheduled_jump_condition(m, static_cast<int>(n), T, delta, states[s])});
    }
    suite.conditions.push_back(sj);
    return suite;
}

double affine_bond_price(const AffineModel& m, double t, double T, double delta, const Vec& x, bool left) {
    if (T < t) throw DomainError("affine_bond_price: T < t");
    if (delta != 0.0 && !m.tenors.contains(delta)) throw DomainError("unknown tenor " + std::to_string(delta));
    if (T == t) {
        // just before a scheduled date the bond still carries the atom at T
        if (left && m.cal.contains(T)) return std::exp(-m.forward(t, T, delta, x, true));
        return 1.0;
    }
    if (!m.bond) throw NotImplementedError("no closed-form bond price for family '" + m.family + "'");
    return m.bond(t, T, delta, x, left);
}

double bond_price_from_forwards(const AffineModel& m, double t, double T, double delta, const Vec& x) {
    if (T < t) throw DomainError("bond_price_from_forwards: T < t");
    double I = eta_integrate([&](double u) { return m.forward(t, u, delta, x, false); }, t, T, m.cal);
    return std::exp(-I);
}

ForwardCurveField implied_curve(const AffineModel& m, double t, const Vec& x, const std::vector<double>& maturities) {
    ForwardCurveField c(t, m.cal);
    for (double delta : m.tenors.with_ois()) {
        std::vector<double> mats, vals;
        for (double T : maturities) {
            if (T < t) continue;
            mats.push_back(T);
            // density value: at calendar dates use the one-sided limit from the right
            double u = m.cal.contains(T) ? std::nextafter(T, HUGE_VAL) : T;
            vals.push_back(m.forward(t, u, delta, x, false));
        }
        c.set_density(delta, mats, vals);
        for (double d : m.cal.dates())
            if (d > t) c.set_atom(delta, d, m.forward(t, d, delta, x, false));
    }
    return c;
}

} // namespace mcurve
