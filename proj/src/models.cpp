#include "mcurve/models.hpp"

#include "mcurve/errors.hpp"
#include "mcurve/quadrature.hpp"

#include <cmath>

namespace mcurve {

namespace {

Vec unit(int d, int i, double v = 1.0) {
    Vec e = Vec::Zero(d);
    e(i) = v;
    return e;
}

// OIS density loading on the time coordinate in the one-factor Vasicek curve
double vasicek_phi1(const OUParams& p, double tau) {
    double e = std::exp(-p.kappa * tau);
    return p.sigma * p.sigma / p.kappa * (e - e * e) - p.kappa * p.theta * e;
}

void base_characteristics(AffineCharacteristics& ch, int d) {
    ch.d = d;
    ch.beta.assign(d + 1, Vec::Zero(d));
    ch.alpha.assign(d + 1, Mat::Zero(d, d));
    ch.mu.assign(d + 1, std::nullopt);
}

std::map<std::string, double> param_map(const VasicekParams& p) {
    return {{"kappa1", p.kappa1}, {"theta1", p.theta1}, {"sigma1", p.sigma1}, {"xi1_0", p.xi1_0},
            {"kappa2", p.kappa2}, {"theta2", p.theta2}, {"sigma2", p.sigma2}, {"xi2_0", p.xi2_0},
            {"rho", p.rho},       {"a", p.a},           {"b", p.b},           {"c", p.c},
            {"kappa3", p.kappa3}, {"spread0", p.spread0}, {"horizon", p.horizon}};
}

void check_t_T(double t, double T) {
    if (T < t) throw DomainError("loading requested for T < t");
}

} // namespace

void VasicekParams::validate(bool two_factor) const {
    auto finite = [](double v) { return std::isfinite(v); };
    for (double v : {kappa1, theta1, sigma1, xi1_0, kappa2, theta2, sigma2, xi2_0, rho, a, b, c, kappa3, spread0, horizon})
        if (!finite(v)) throw ConfigError("model parameters must be finite");
    if (!(kappa1 > 0.0)) throw ConfigError("kappa1 must be > 0");
    if (sigma1 < 0.0) throw ConfigError("sigma1 must be >= 0");
    if (two_factor) {
        if (!(kappa2 > 0.0)) throw ConfigError("kappa2 must be > 0");
        if (sigma2 < 0.0) throw ConfigError("sigma2 must be >= 0");
        if (std::abs(rho) > 1.0) throw ConfigError("rho must lie in [-1, 1]");
    }
    if (kappa3 < 0.0) throw ConfigError("kappa3 must be >= 0");
    if (b < 0.0) throw ConfigError("b must be >= 0");
    if (!(spread0 > 0.0)) throw ConfigError("spread0 must be > 0");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
}

const std::vector<std::string>& model_families() {
    static const std::vector<std::string> f{"vasicek", "vasicek_jump", "multicurve_vasicek", "multicurve_jump"};
    return f;
}

AffineModel build_vasicek_single(const VasicekParams& p) {
    p.validate(false);
    const int d = 3;
    const OUParams f1 = p.factor1();
    AffineModel m;
    m.family = "vasicek";
    m.params = param_map(p);
    m.cal = DiscontinuityCalendar({}, p.horizon);
    base_characteristics(m.ch, d);
    m.ch.beta[0] << 1.0, 0.0, p.kappa1 * p.theta1;
    m.ch.beta[3] << 0.0, 1.0, -p.kappa1;
    m.ch.alpha[0](2, 2) = p.sigma1 * p.sigma1;

    m.load.phi[0.0] = [f1](double t, double T) {
        check_t_T(t, T);
        double e = std::exp(-f1.kappa * (T - t));
        Vec v(3);
        v << vasicek_phi1(f1, T - t), f1.kappa * e, e;
        return v;
    };
    m.load.short_rate = [](double, const Vec& x) { return x(2); };
    m.load.rate_integral_weights = unit(d, 1);

    m.forward = [f1](double t, double T, double, const Vec& x, bool) { return vasicek_forward(f1, T - t, x(2)); };
    m.bond = [f1](double t, double T, double, const Vec& x, bool) { return vasicek_bond(f1, T - t, x(2)); };

    m.x0 = Vec::Zero(d);
    m.x0(2) = p.xi1_0;
    m.dynamics.clock = 0;
    m.dynamics.factors = {{2, 1, p.kappa1, p.theta1, p.sigma1}};
    m.dynamics.corr = Mat::Identity(1, 1);
    m.driving_factor = 2;
    m.validate();
    return m;
}

AffineModel build_vasicek_jump(const VasicekParams& p, double T1) {
    if (!(T1 > 0.0) || T1 > p.horizon) throw ConfigError("jump date must lie in (0, horizon]");
    return build_vasicek_jump(p, DiscontinuityCalendar({T1}, p.horizon));
}

AffineModel build_vasicek_jump(const VasicekParams& p, const DiscontinuityCalendar& cal) {
    p.validate(false);
    if (cal.size() != 1)
        throw ConfigError("vasicek_jump needs a calendar with exactly one date (default {1})");
    if (!cal.has_lebesgue()) throw ConfigError("vasicek_jump needs eta with a Lebesgue part");
    const int d = 5;
    const double s = cal[0];
    const OUParams f1 = p.factor1();
    const double a = p.a, b = p.b, k = p.kappa1, th = p.theta1, s2 = p.sigma1 * p.sigma1;

    AffineModel m;
    m.family = "vasicek_jump";
    m.params = param_map(p);
    m.params["T1"] = s;
    m.cal = cal;
    base_characteristics(m.ch, d);
    m.ch.beta[0] << 1.0, 0.0, k * th, 0.0, 0.0;
    m.ch.beta[3] << 0.0, 1.0, -k, 0.0, 0.0;
    m.ch.alpha[0](2, 2) = s2;

    ScheduledJump sj;
    sj.gamma0 = [b](const Vec& u) { return u(0) + 0.5 * u(4) * u(4) * b * b; };
    sj.gamma = {{2, [](const Vec& u) { return u(3); }}};
    sj.noise_dim = 1;
    sj.delta_x = [b](const Vec& z, const Vec& x) {
        Vec dx = Vec::Zero(5);
        dx(0) = 1.0;
        dx(3) = x(2);
        dx(4) = b * z(0);
        return dx;
    };
    m.ch.scheduled[0] = sj;
    m.load.psi_jump[0] = (Vec(d) << 0.0, 0.0, 0.0, a, 1.0).finished();

    m.load.phi[0.0] = [=](double t, double T) {
        check_t_T(t, T);
        const double tau = T - t;
        const double e = std::exp(-k * tau);
        Vec v = Vec::Zero(5);
        if (t == s && T == s) {
            v(0) = 0.5 * b * b;
            v(3) = 1.0 - a;
            return v;
        }
        if (t == s) return v; // t = T1 < T
        if (t < s && T == s) {
            const double A = a * e;
            const double h1 = hfun(k, tau);
            v(0) = s2 * h1 * A + 0.5 * s2 * A * A - k * th * A;
            v(2) = A;
            v(1) = k * A;
            return v;
        }
        if (t < s && T > s) {
            const double A = a * std::exp(-k * (s - t));
            v(0) = (s2 * (hfun(k, tau) + A) - k * th) * e;
        } else {
            v(0) = vasicek_phi1(f1, tau);
        }
        v(2) = e;
        v(1) = k * e;
        return v;
    };
    m.load.short_rate = [](double, const Vec& x) { return x(2); };
    m.load.rate_integral_weights = unit(d, 1);

    // int_t^s phi_1(u, s) du for t < s
    auto atom_drift = [=](double W) {
        const double h = hfun(k, W);
        return 0.5 * s2 * a * h * h + 0.5 * s2 * a * a * hfun(2.0 * k, W) - th * a * k * h;
    };
    m.forward = [=](double t, double T, double, const Vec& x, bool left) {
        const double xi = x(2);
        const bool pre = t < s || (t == s && left);
        if (T == s) {
            if (pre) return a * xi * std::exp(-k * (s - t)) - 0.5 * b * b - atom_drift(s - t);
            return xi;
        }
        double f = vasicek_forward(f1, T - t, xi);
        if (pre && T > s) f -= s2 * a * std::exp(-k * (T - s)) * hfun(2.0 * k, s - t);
        return f;
    };
    m.bond = [=](double t, double T, double, const Vec& x, bool left) {
        const double xi = x(2);
        const bool pre = t < s || (t == s && left);
        if (pre && T >= s) {
            auto tail = vasicek_transform(f1, T - s, 0.0);
            const double u = -tail.B - a;
            auto head = vasicek_transform(f1, s - t, u);
            return std::exp(-tail.A - head.A - head.B * xi + 0.5 * b * b);
        }
        return vasicek_bond(f1, T - t, xi);
    };

    m.x0 = Vec::Zero(d);
    m.x0(2) = p.xi1_0;
    m.dynamics.clock = 0;
    m.dynamics.factors = {{2, 1, k, th, p.sigma1}};
    m.dynamics.corr = Mat::Identity(1, 1);
    m.driving_factor = 2;
    m.validate();
    return m;
}

AffineModel build_multicurve_vasicek(const VasicekParams& p, double delta) {
    p.validate(true);
    if (!(delta > 0.0)) throw ConfigError("tenor must be > 0");
    const int d = 5;
    const OUParams f1 = p.factor1(), f2 = p.factor2();

    AffineModel m;
    m.family = "multicurve_vasicek";
    m.params = param_map(p);
    m.params["delta"] = delta;
    m.cal = DiscontinuityCalendar({}, p.horizon);
    m.tenors = TenorSet({delta});
    base_characteristics(m.ch, d);
    m.ch.beta[0] << 1.0, 0.0, p.kappa1 * p.theta1, 0.0, p.kappa2 * p.theta2;
    m.ch.beta[3] << 0.0, 1.0, -p.kappa1, 0.0, 0.0;
    m.ch.beta[5] << 0.0, 0.0, 0.0, 1.0, -p.kappa2;
    m.ch.alpha[0](2, 2) = p.sigma1 * p.sigma1;
    m.ch.alpha[0](4, 4) = p.sigma2 * p.sigma2;
    m.ch.alpha[0](2, 4) = m.ch.alpha[0](4, 2) = p.rho * p.sigma1 * p.sigma2;

    m.load.phi[0.0] = [f1](double t, double T) {
        check_t_T(t, T);
        double e = std::exp(-f1.kappa * (T - t));
        Vec v = Vec::Zero(5);
        v(0) = vasicek_phi1(f1, T - t);
        v(1) = f1.kappa * e;
        v(2) = e;
        return v;
    };
    m.load.phi[delta] = [f2](double t, double T) {
        check_t_T(t, T);
        double e = std::exp(-f2.kappa * (T - t));
        Vec v = Vec::Zero(5);
        v(0) = vasicek_phi1(f2, T - t);
        v(3) = f2.kappa * e;
        v(4) = e;
        return v;
    };
    m.load.psi_tenor[delta] = (Vec(d) << 0.0, 1.0, 0.0, -1.0, 0.0).finished();
    m.load.short_rate = [](double, const Vec& x) { return x(2); };
    m.load.rate_integral_weights = unit(d, 1);

    m.forward = [f1, f2](double t, double T, double dl, const Vec& x, bool) {
        return dl == 0.0 ? vasicek_forward(f1, T - t, x(2)) : vasicek_forward(f2, T - t, x(4));
    };
    m.bond = [f1, f2](double t, double T, double dl, const Vec& x, bool) {
        return dl == 0.0 ? vasicek_bond(f1, T - t, x(2)) : vasicek_bond(f2, T - t, x(4));
    };

    m.x0 = Vec::Zero(d);
    m.x0(2) = p.xi1_0;
    m.x0(4) = p.xi2_0;
    m.spread0[delta] = p.spread0;
    m.dynamics.clock = 0;
    m.dynamics.factors = {{2, 1, p.kappa1, p.theta1, p.sigma1}, {4, 3, p.kappa2, p.theta2, p.sigma2}};
    m.dynamics.corr = (Mat(2, 2) << 1.0, p.rho, p.rho, 1.0).finished();
    m.driving_factor = 2;
    m.validate();
    return m;
}

AffineModel build_multicurve_jump(const VasicekParams& p, double delta, const DiscontinuityCalendar& cal) {
    p.validate(true);
    if (!(delta > 0.0)) throw ConfigError("tenor must be > 0");
    if (!cal.has_lebesgue()) throw ConfigError("multicurve_jump needs eta with a Lebesgue part");
    const int d = 7;
    const OUParams f1 = p.factor1(), f2 = p.factor2();
    const double a = p.a, c = p.c, k3 = p.kappa3;
    const double k1 = p.kappa1, k2 = p.kappa2;
    const double s1 = p.sigma1, s2 = p.sigma2, rho = p.rho;
    const double kk = 1.0 + a * k3;

    AffineModel m;
    m.family = "multicurve_jump";
    m.params = param_map(p);
    m.params["delta"] = delta;
    m.cal = cal;
    m.tenors = TenorSet({delta});
    base_characteristics(m.ch, d);
    m.ch.beta[0] << 1.0, 0.0, k1 * p.theta1, 0.0, k2 * p.theta2, 0.0, 0.0;
    m.ch.beta[3] << 0.0, 1.0, -k1, 0.0, 0.0, 0.0, 0.0;
    m.ch.beta[5] << 0.0, 0.0, 0.0, 1.0, -k2, 0.0, 0.0;
    m.ch.beta[7] << 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, -k3;
    m.ch.alpha[0](2, 2) = s1 * s1;
    m.ch.alpha[0](4, 4) = s2 * s2;
    m.ch.alpha[0](2, 4) = m.ch.alpha[0](4, 2) = rho * s1 * s2;

    for (std::size_t n = 0; n < cal.size(); ++n) {
        ScheduledJump sj;
        sj.gamma0 = [](const Vec& u) { return u(0) + 0.5 * u(6) * u(6); };
        sj.noise_dim = 1;
        sj.delta_x = [](const Vec& z, const Vec&) {
            Vec dx = Vec::Zero(7);
            dx(0) = 1.0;
            dx(6) = z(0);
            return dx;
        };
        m.ch.scheduled[static_cast<int>(n)] = sj;
        m.load.psi_jump[static_cast<int>(n)] = unit(d, 6, c);
    }
    m.load.psi_tenor[delta] = (Vec(d) << 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, a).finished();

    m.load.phi[0.0] = [=](double t, double T) {
        check_t_T(t, T);
        const double tau = T - t;
        const bool tin = cal.contains(t), Tin = cal.contains(T);
        const double e1 = std::exp(-k1 * tau), e3 = std::exp(-k3 * tau);
        Vec v = Vec::Zero(7);
        if (!tin && !Tin) {
            v(0) = vasicek_phi1(f1, tau);
            v(2) = e1;
            v(1) = k1 * e1;
            v(5) = k3 * e3;
        } else if (tin && !Tin) {
            v(0) = e3 * (c + hfun(k3, tau));
        } else if (tin && t == T) {
            v(0) = 0.5 * c * c;
        }
        if (!Tin) v(6) = e3;
        return v;
    };
    m.load.phi[delta] = [=](double t, double T) {
        check_t_T(t, T);
        const double tau = T - t;
        const bool tin = cal.contains(t), Tin = cal.contains(T);
        const double e1 = std::exp(-k1 * tau), e2 = std::exp(-k2 * tau), e3 = std::exp(-k3 * tau);
        Vec v = Vec::Zero(7);
        if (!tin && !Tin) {
            v(0) = vasicek_phi1(f1, tau) + p.theta2 * k2 * e2 - s2 * s2 / k2 * (e2 * e2 - e2) +
                   rho * s1 * s2 / (k1 * k2) * (-k1 * e1 - k2 * e2 + (k1 + k2) * e1 * e2);
            v(2) = e1;
            v(1) = k1 * e1;
            v(4) = -e2;
            v(3) = -k2 * e2;
            v(5) = k3 * kk * e3;
        } else if (tin && !Tin) {
            v(0) = kk * e3 * (hfun(k3, tau) + c - a * e3);
        } else if (tin && t == T) {
            v(0) = 0.5 * (a - c) * (a - c);
        }
        if (!Tin) v(6) = kk * e3;
        return v;
    };
    m.load.short_rate = [](double, const Vec& x) { return x(2) + x(6); };
    m.load.rate_integral_weights = (Vec(d) << 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0).finished();

    // scheduled-jump contributions of dates in (t, T), plus t itself before its jump
    auto pending = [cal](double t, double T, bool left) {
        std::vector<double> out;
        if (left && cal.contains(t) && t < T) out.push_back(t);
        for (double Tm : cal.dates_in(t, T))
            if (Tm < T) out.push_back(Tm);
        return out;
    };

    m.forward = [=](double t, double T, double dl, const Vec& x, bool left) {
        const double tau = T - t;
        const bool ois = dl == 0.0;
        if (cal.contains(T)) {
            const double pre = ois ? -0.5 * c * c : -0.5 * (a - c) * (a - c);
            return (t < T || left) ? pre : 0.0;
        }
        const double e3 = std::exp(-k3 * tau);
        const double J = x(6);
        double f;
        if (ois) {
            f = vasicek_forward(f1, tau, x(2)) + e3 * J;
            for (double Tm : pending(t, T, left)) {
                double v = T - Tm, em = std::exp(-k3 * v);
                f -= em * (c + hfun(k3, v));
            }
        } else {
            const double h1 = hfun(k1, tau), h2 = hfun(k2, tau);
            f = x(2) * std::exp(-k1 * tau) - x(4) * std::exp(-k2 * tau) + kk * e3 * J + p.theta1 * k1 * h1 -
                p.theta2 * k2 * h2 - 0.5 * s1 * s1 * h1 * h1 + rho * s1 * s2 * h1 * h2 - 0.5 * s2 * s2 * h2 * h2;
            for (double Tm : pending(t, T, left)) {
                double v = T - Tm, em = std::exp(-k3 * v);
                f -= kk * em * (hfun(k3, v) + c - a * em);
            }
        }
        return f;
    };

    const Mat corr = (Mat(2, 2) << 1.0, rho, rho, 1.0).finished();
    m.bond = [=](double t, double T, double dl, const Vec& x, bool left) {
        const double tau = T - t;
        const double J = x(6);
        // dates whose jump is still ahead, including T itself
        std::vector<double> ahead;
        if (left && cal.contains(t)) ahead.push_back(t);
        for (double Tm : cal.dates_in(t, T)) ahead.push_back(Tm);
        double logp = 0.0;
        if (dl == 0.0) {
            auto ab = vasicek_transform(f1, tau, 0.0);
            logp = -ab.A - ab.B * x(2) - J * hfun(k3, tau);
            for (double Tm : ahead) {
                double g = c + hfun(k3, T - Tm);
                logp += 0.5 * g * g;
            }
        } else {
            Mat cov = ou_step_covariance({f1, f2}, corr, tau);
            double mean = -ou_mean_integral(f1, x(2), tau) + ou_mean_integral(f2, x(4), tau);
            double var = cov(1, 1) + cov(3, 3) - 2.0 * cov(1, 3);
            logp = mean + 0.5 * var - kk * hfun(k3, tau) * J;
            for (double Tm : ahead) {
                double v = T - Tm;
                double g = a * std::exp(-k3 * v) - c - hfun(k3, v);
                logp += 0.5 * g * g;
            }
        }
        return std::exp(logp);
    };

    m.x0 = Vec::Zero(d);
    m.x0(2) = p.xi1_0;
    m.x0(4) = p.xi2_0;
    m.spread0[delta] = p.spread0;
    m.dynamics.clock = 0;
    m.dynamics.factors = {{2, 1, k1, p.theta1, s1}, {4, 3, k2, p.theta2, s2}};
    m.dynamics.corr = corr;
    m.dynamics.decays = {{6, 5, k3}};
    m.driving_factor = 2;
    m.validate();
    return m;
}

} // namespace mcurve
