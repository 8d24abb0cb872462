#include "mcurve/hjm.hpp"

#include "mcurve/errors.hpp"
#include "mcurve/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace mcurve {

MarkLaw MarkLaw::deterministic() { return {}; }

MarkLaw MarkLaw::gaussian(int dim) {
    MarkLaw l;
    l.kind = dim == 0 ? Kind::Deterministic : Kind::Gaussian;
    l.dim = dim;
    return l;
}

MarkLaw MarkLaw::discrete(std::vector<Vec> nodes, std::vector<double> probs) {
    MarkLaw l;
    l.kind = Kind::Discrete;
    l.dim = nodes.empty() ? 0 : static_cast<int>(nodes.front().size());
    l.nodes = std::move(nodes);
    l.probs = std::move(probs);
    l.validate();
    return l;
}

void MarkLaw::validate() const {
    if (kind == Kind::Gaussian && (dim < 1 || dim > 3))
        throw UnsupportedLawError("Gaussian marks are supported in dimension 1 to 3");
    if (kind == Kind::Discrete) {
        if (nodes.empty() || nodes.size() != probs.size())
            throw ConfigError("discrete mark law needs matching nodes and probabilities");
        double s = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (!(probs[i] >= 0.0)) throw ConfigError("discrete mark probabilities must be >= 0");
            if (nodes[i].size() != dim) throw ConfigError("discrete mark nodes must share one dimension");
            s += probs[i];
        }
        if (std::abs(s - 1.0) > 1e-12) throw ConfigError("discrete mark probabilities must sum to 1");
    }
}

std::vector<std::pair<Vec, double>> MarkLaw::support() const {
    validate();
    std::vector<std::pair<Vec, double>> out;
    switch (kind) {
    case Kind::Deterministic:
        out.emplace_back(Vec::Zero(dim), 1.0);
        break;
    case Kind::Discrete:
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (probs[i] > 0.0) out.emplace_back(nodes[i], probs[i]);
        break;
    case Kind::Gaussian: {
        const auto& rule = gauss_hermite(64);
        const int n = static_cast<int>(rule.nodes.size());
        std::vector<int> idx(dim, 0);
        while (true) {
            Vec z(dim);
            double w = 1.0;
            for (int j = 0; j < dim; ++j) {
                z(j) = rule.nodes[idx[j]];
                w *= rule.weights[idx[j]];
            }
            out.emplace_back(z, w);
            int j = 0;
            while (j < dim && ++idx[j] == n) idx[j++] = 0;
            if (j == dim) break;
        }
        break;
    }
    }
    return out;
}

double MarkLaw::expect(const std::function<double(const Vec&)>& f) const {
    double s = 0.0;
    for (const auto& [z, w] : support()) s += w * f(z);
    return s;
}

const MarkLaw& HJMModelSpec::scheduled_law(int n) const {
    auto it = scheduled.find(n);
    return it == scheduled.end() ? default_scheduled : it->second;
}

std::vector<double> HJMModelSpec::tenors_with_ois() const {
    std::vector<double> out{0.0};
    out.insert(out.end(), tenors.begin(), tenors.end());
    return out;
}

void HJMModelSpec::validate() const {
    if (d < 0) throw ConfigError("Brownian dimension must be >= 0");
    for (std::size_t i = 0; i < tenors.size(); ++i)
        if (!(tenors[i] > 0.0) || (i > 0 && !(tenors[i - 1] < tenors[i])))
            throw ConfigError("tenors must be positive and strictly increasing");
    for (double delta : tenors_with_ois()) {
        auto c = curve.find(delta);
        if (c == curve.end() || !c->second.f)
            throw ConfigError("no forward curve for tenor " + std::to_string(delta));
    }
    for (const auto& [delta, blk] : tenor) {
        (void)blk;
        if (!std::binary_search(tenors.begin(), tenors.end(), delta))
            throw ConfigError("spread block for an undeclared tenor");
    }
    if (intensity) jump_law.validate();
    default_scheduled.validate();
    for (const auto& [n, law] : scheduled) {
        if (n < 0 || static_cast<std::size_t>(n) >= cal.size()) throw ConfigError("scheduled law for unknown date");
        law.validate();
    }
}

double HJMModelSpec::eval_r(double t, const Vec& x) const { return r ? r(t, x) : 0.0; }
Vec HJMModelSpec::eval_H(double t, const Vec& x) const { return H ? H(t, x) : Vec::Zero(d); }
double HJMModelSpec::eval_L(double t, const Vec& x, const Vec& m) const { return L ? L(t, x, m) : 0.0; }
double HJMModelSpec::eval_dB(int n, const Vec& x, const Vec& z) const { return dB ? dB(n, x, z) : 0.0; }
double HJMModelSpec::eval_intensity(double t, const Vec& x) const { return intensity ? intensity(t, x) : 0.0; }

namespace {

const CurveBlock& block(const HJMModelSpec& s, double delta) {
    auto it = s.curve.find(delta);
    if (it == s.curve.end()) throw ConfigError("no curve block for tenor " + std::to_string(delta));
    return it->second;
}

const TenorBlock* tblock(const HJMModelSpec& s, double delta) {
    auto it = s.tenor.find(delta);
    return it == s.tenor.end() ? nullptr : &it->second;
}

} // namespace

double HJMModelSpec::forward(double t, double T, double delta, const Vec& x, bool left) const {
    const auto& b = block(*this, delta);
    if (!b.f) throw ConfigError("no forward curve for tenor " + std::to_string(delta));
    return b.f(t, T, delta, x, left);
}

double HJMModelSpec::eval_a(double delta, double t, double T, const Vec& x) const {
    const auto& b = block(*this, delta);
    return (b.a && T >= t) ? b.a(t, T, x) : 0.0;
}

Vec HJMModelSpec::eval_b(double delta, double t, double T, const Vec& x) const {
    const auto& b = block(*this, delta);
    return (b.b && T >= t) ? b.b(t, T, x) : Vec::Zero(d);
}

double HJMModelSpec::eval_g(double delta, double t, const Vec& m, double T, const Vec& x) const {
    const auto& b = block(*this, delta);
    return (b.g && T >= t) ? b.g(t, m, T, x) : 0.0;
}

double HJMModelSpec::eval_dV(double delta, int n, double T, const Vec& x, const Vec& z) const {
    const auto& b = block(*this, delta);
    if (!b.dV || T <= cal[static_cast<std::size_t>(n)]) return 0.0;
    return b.dV(n, T, x, z);
}

double HJMModelSpec::eval_alpha(double delta, double t, const Vec& x) const {
    const auto* b = tblock(*this, delta);
    return (b && b->alpha) ? b->alpha(t, x) : 0.0;
}

Vec HJMModelSpec::eval_Hd(double delta, double t, const Vec& x) const {
    const auto* b = tblock(*this, delta);
    return (b && b->H) ? b->H(t, x) : Vec::Zero(d);
}

double HJMModelSpec::eval_Ld(double delta, double t, const Vec& x, const Vec& m) const {
    const auto* b = tblock(*this, delta);
    return (b && b->L) ? b->L(t, x, m) : 0.0;
}

double HJMModelSpec::eval_dA(double delta, int n, const Vec& x, const Vec& z) const {
    const auto* b = tblock(*this, delta);
    return (b && b->dA) ? b->dA(n, x, z) : 0.0;
}

namespace {

// int_[t,T] f deta for vector-valued f
Vec eta_closed(const std::function<Vec(double)>& f, double t, double T, const DiscontinuityCalendar& cal, int dim) {
    if (T < t) throw DomainError("integration interval with T < t");
    Vec s = Vec::Zero(dim);
    if (cal.contains(t)) s += f(t);
    if (T == t) return s;
    if (cal.has_lebesgue()) {
        double lo = t;
        for (double dd : cal.dates_in(t, T)) {
            if (dd >= T) break;
            s += integrate_vec(f, lo, dd, dim);
            lo = dd;
        }
        s += integrate_vec(f, lo, T, dim);
    }
    for (double dd : cal.dates_in(t, T)) s += f(dd);
    return s;
}

} // namespace

double HJMModelSpec::abar(double delta, double t, double T, const Vec& x) const {
    auto f = [&](double u) { return Vec::Constant(1, eval_a(delta, t, u, x)); };
    return eta_closed(f, t, T, cal, 1)(0);
}

Vec HJMModelSpec::bbar(double delta, double t, double T, const Vec& x) const {
    auto f = [&](double u) { return eval_b(delta, t, u, x); };
    return eta_closed(f, t, T, cal, d);
}

double HJMModelSpec::gbar(double delta, double t, const Vec& m, double T, const Vec& x) const {
    auto f = [&](double u) { return Vec::Constant(1, eval_g(delta, t, m, u, x)); };
    return eta_closed(f, t, T, cal, 1)(0);
}

double HJMModelSpec::dV_integral(double delta, int n, double T, const Vec& x, const Vec& z) const {
    const double Tn = cal[static_cast<std::size_t>(n)];
    if (T <= Tn) return 0.0;
    return eta_integrate([&](double u) { return eval_dV(delta, n, u, x, z); }, Tn, T, cal);
}

double HJMModelSpec::bond(double t, double T, double delta, const Vec& x, bool left) const {
    if (T < t) throw DomainError("bond: T < t");
    if (T == t) return 1.0;
    return std::exp(-eta_integrate([&](double u) { return forward(t, u, delta, x, left); }, t, T, cal));
}

HJMCheckGrid make_check_grid(const DiscontinuityCalendar& cal, double horizon, int n, std::vector<Vec> states,
                             double eps) {
    HJMCheckGrid g;
    g.t = condition_grid(horizon, n, cal, eps);
    g.T = g.t;
    g.states = std::move(states);
    return g;
}

namespace {

bool has_jumps(const HJMModelSpec& s) { return static_cast<bool>(s.intensity); }

// int h(mark) lambda_t(dx)
double lambda_integral(const HJMModelSpec& s, double t, const Vec& x, const std::function<double(const Vec&)>& h) {
    if (!has_jumps(s)) return 0.0;
    const double lam = s.eval_intensity(t, x);
    if (lam == 0.0) return 0.0;
    if (!(lam > 0.0)) throw DomainError("jump intensity must be >= 0");
    return lam * s.jump_law.expect(h);
}

std::vector<double> maturities_for_date(const HJMCheckGrid& grid, const DiscontinuityCalendar& cal, double Tn) {
    std::vector<double> Ts;
    for (double T : grid.T)
        if (T >= Tn) Ts.push_back(T);
    for (double T : cal.dates())
        if (T >= Tn) Ts.push_back(T);
    std::sort(Ts.begin(), Ts.end());
    Ts.erase(std::unique(Ts.begin(), Ts.end()), Ts.end());
    return Ts;
}

void check_t_grid(const HJMCheckGrid& grid, const DiscontinuityCalendar& cal) {
    for (double t : grid.t)
        if (cal.contains(t)) throw DomainError("conditions (i)/(ii) are checked off calendar dates");
}

double mark_residual_flag(double v) { return v > -1.0 && std::isfinite(v) ? 0.0 : HUGE_VAL; }

} // namespace

CheckSuite check_hjm_conditions(const HJMModelSpec& spec, const HJMCheckGrid& grid) {
    spec.validate();
    check_t_grid(grid, spec.cal);
    CheckSuite suite;
    ConditionReport ci("hjm(i)"), cr("hjm_r"), cs("hjm_s"), c2("hjm(ii)"), c3("hjm(iii)"), c4("hjm(iv)"),
        cint("integrability"), cass("assumptions");
    const bool leb = spec.cal.has_lebesgue();
    if (!leb) suite.notes.push_back("eta is purely atomic: f(t,t,.) terms drop out of condition (i)");
    const auto deltas = spec.tenors_with_ois();

    for (std::size_t s = 0; s < grid.states.size(); ++s) {
        const Vec& x = grid.states[s];
        const int si = static_cast<int>(s);
        for (double t : grid.t) {
            const Vec H = spec.eval_H(t, x);
            const double r = spec.eval_r(t, x);
            const double f0 = leb ? spec.forward(t, t, 0.0, x) : 0.0;
            // L > -1 and L^delta > -1 on the support
            if (has_jumps(spec)) {
                for (const auto& [m, w] : spec.jump_law.support()) {
                    (void)w;
                    cass.add({t, t, 0.0, -1, si, mark_residual_flag(spec.eval_L(t, x, m))});
                    for (double delta : spec.tenors)
                        cass.add({t, t, delta, -1, si, mark_residual_flag(spec.eval_Ld(delta, t, x, m))});
                }
            }
            const double jr = lambda_integral(spec, t, x, [&](const Vec& m) {
                const double L = spec.eval_L(t, x, m);
                return L * L / (1.0 + L);
            });
            cr.add({t, t, 0.0, -1, si, r - (f0 + H.squaredNorm() + jr)});
            for (double delta : deltas) {
                const double fd = leb ? spec.forward(t, t, delta, x) : 0.0;
                const double alpha = spec.eval_alpha(delta, t, x);
                const Vec Hd = spec.eval_Hd(delta, t, x);
                const double j1 = lambda_integral(spec, t, x, [&](const Vec& m) {
                    const double L = spec.eval_L(t, x, m), Ld = spec.eval_Ld(delta, t, x, m);
                    return L / (1.0 + L) * (L - Ld);
                });
                ci.add({t, t, delta, -1, si, (r - alpha) - (fd - H.dot(Hd) + H.squaredNorm() + j1)});
                if (delta > 0.0) {
                    const double js = lambda_integral(spec, t, x, [&](const Vec& m) {
                        const double L = spec.eval_L(t, x, m), Ld = spec.eval_Ld(delta, t, x, m);
                        return Ld * L / (1.0 + L);
                    });
                    cs.add({t, t, delta, -1, si, alpha - (f0 - fd + H.dot(Hd) + js)});
                }
                for (double T : grid.T) {
                    if (T < t) continue;
                    const double ab = spec.abar(delta, t, T, x);
                    const Vec bb = spec.bbar(delta, t, T, x);
                    double jump = 0.0, jabs = 0.0;
                    if (has_jumps(spec)) {
                        jump = lambda_integral(spec, t, x, [&](const Vec& m) {
                            const double L = spec.eval_L(t, x, m), Ld = spec.eval_Ld(delta, t, x, m);
                            const double gb = spec.gbar(delta, t, m, T, x);
                            return (1.0 + Ld) / (1.0 + L) * std::expm1(-gb) + gb;
                        });
                        jabs = lambda_integral(spec, t, x, [&](const Vec& m) {
                            const double L = spec.eval_L(t, x, m), Ld = spec.eval_Ld(delta, t, x, m);
                            const double gb = spec.gbar(delta, t, m, T, x);
                            return std::abs((1.0 + Ld) / (1.0 + L) * std::exp(-gb) + L - Ld + gb - 1.0);
                        });
                    }
                    c2.add({t, T, delta, -1, si, ab - (0.5 * bb.squaredNorm() + bb.dot(H - Hd) + jump)});
                    cint.add({t, T, delta, -1, si, std::isfinite(jabs) ? 0.0 : HUGE_VAL});
                }
            }
        }
    }

    for (std::size_t n = 0; n < spec.cal.size(); ++n) {
        const int ni = static_cast<int>(n);
        const double Tn = spec.cal[n];
        const auto support = spec.scheduled_law(ni).support();
        const auto Ts = maturities_for_date(grid, spec.cal, Tn);
        for (std::size_t s = 0; s < grid.states.size(); ++s) {
            const Vec& x = grid.states[s];
            const int si = static_cast<int>(s);
            for (const auto& [z, w] : support) {
                (void)w;
                cass.add({Tn, Tn, 0.0, ni, si, mark_residual_flag(spec.eval_dB(ni, x, z))});
                for (double delta : spec.tenors)
                    cass.add({Tn, Tn, delta, ni, si, mark_residual_flag(spec.eval_dA(delta, ni, x, z))});
            }
            for (double delta : deltas) {
                auto ratio = [&](const Vec& z) {
                    return (1.0 + spec.eval_dA(delta, ni, x, z)) / (1.0 + spec.eval_dB(ni, x, z));
                };
                double e3 = 0.0;
                for (const auto& [z, w] : support) e3 += w * ratio(z);
                c3.add({Tn, Tn, delta, ni, si, e3 - std::exp(-spec.forward(Tn, Tn, delta, x, true))});
                for (double T : Ts) {
                    double e4 = 0.0;
                    for (const auto& [z, w] : support)
                        e4 += w * ratio(z) * std::expm1(-spec.dV_integral(delta, ni, T, x, z));
                    c4.add({Tn, T, delta, ni, si, e4});
                }
            }
        }
    }
    for (auto* c : {&ci, &cr, &cs, &c2, &c3, &c4, &cint, &cass}) suite.conditions.push_back(*c);
    return suite;
}

namespace {

void check_trivial_numeraire(const HJMModelSpec& s) {
    if (s.H || s.L || s.dB)
        throw ConfigError("measure-change check needs the bank-account numeraire (H, L, Delta B unset)");
}

} // namespace

CheckSuite check_elmm_conditions(const HJMModelSpec& spec, const MeasureChangeSpec& change, const HJMCheckGrid& grid) {
    spec.validate();
    check_trivial_numeraire(spec);
    check_t_grid(grid, spec.cal);
    auto theta = [&](double t, const Vec& x) { return change.theta ? change.theta(t, x) : Vec(Vec::Zero(spec.d)); };
    auto psi = [&](double t, const Vec& x, const Vec& m) { return change.psi ? change.psi(t, x, m) : 0.0; };
    auto Y = [&](int n, const Vec& x, const Vec& z) { return change.Y ? change.Y(n, x, z) : 0.0; };

    CheckSuite suite;
    ConditionReport cr("elmm_r"), cs("elmm_s"), c2("elmm(ii)"), c3("elmm(iii)"), c4("elmm(iv)"), cy("elmm_mean_Y"),
        cint("integrability");
    const bool leb = spec.cal.has_lebesgue();
    const auto deltas = spec.tenors_with_ois();

    for (std::size_t s = 0; s < grid.states.size(); ++s) {
        const Vec& x = grid.states[s];
        const int si = static_cast<int>(s);
        for (double t : grid.t) {
            if (has_jumps(spec)) {
                double psi2 = 0.0;
                for (const auto& [m, w] : spec.jump_law.support()) {
                    const double p = psi(t, x, m);
                    if (!(p < 1.0)) throw ConfigError("measure change has psi >= 1 on the mark support");
                    if (p >= 0.0) psi2 += w * p * p / (1.0 - p);
                }
                cint.add({t, t, 0.0, -1, si, std::isfinite(psi2) ? 0.0 : HUGE_VAL});
            }
            const Vec th = theta(t, x);
            const double f0 = leb ? spec.forward(t, t, 0.0, x) : 0.0;
            cr.add({t, t, 0.0, -1, si, spec.eval_r(t, x) - f0});
            for (double delta : deltas) {
                const double fd = leb ? spec.forward(t, t, delta, x) : 0.0;
                const Vec Hd = spec.eval_Hd(delta, t, x);
                if (delta > 0.0) {
                    const double js = lambda_integral(
                        spec, t, x, [&](const Vec& m) { return psi(t, x, m) * spec.eval_Ld(delta, t, x, m); });
                    cs.add({t, t, delta, -1, si, spec.eval_alpha(delta, t, x) - (f0 - fd + th.dot(Hd) + js)});
                }
                for (double T : grid.T) {
                    if (T < t) continue;
                    const double ab = spec.abar(delta, t, T, x);
                    const Vec bb = spec.bbar(delta, t, T, x);
                    double jump = 0.0, jabs = 0.0;
                    if (has_jumps(spec)) {
                        jump = lambda_integral(spec, t, x, [&](const Vec& m) {
                            const double p = psi(t, x, m), Ld = spec.eval_Ld(delta, t, x, m);
                            const double gb = spec.gbar(delta, t, m, T, x);
                            return (1.0 - p) * (1.0 + Ld) * std::expm1(-gb) + gb;
                        });
                        jabs = lambda_integral(spec, t, x, [&](const Vec& m) {
                            const double p = psi(t, x, m), Ld = spec.eval_Ld(delta, t, x, m);
                            const double gb = spec.gbar(delta, t, m, T, x);
                            return std::abs((1.0 - p) * ((1.0 + Ld) * std::exp(-gb) - 1.0) - Ld + gb);
                        });
                    }
                    c2.add({t, T, delta, -1, si, ab - (0.5 * bb.squaredNorm() + bb.dot(th - Hd) + jump)});
                    cint.add({t, T, delta, -1, si, std::isfinite(jabs) ? 0.0 : HUGE_VAL});
                }
            }
        }
    }

    for (std::size_t n = 0; n < spec.cal.size(); ++n) {
        const int ni = static_cast<int>(n);
        const double Tn = spec.cal[n];
        const auto support = spec.scheduled_law(ni).support();
        const auto Ts = maturities_for_date(grid, spec.cal, Tn);
        for (std::size_t s = 0; s < grid.states.size(); ++s) {
            const Vec& x = grid.states[s];
            const int si = static_cast<int>(s);
            double ey = 0.0;
            for (const auto& [z, w] : support) {
                const double y = Y(ni, x, z);
                if (!(y < 1.0)) throw ConfigError("measure change has Y_n >= 1 on the mark support");
                ey += w * y;
            }
            cy.add({Tn, Tn, 0.0, ni, si, ey});
            for (double delta : deltas) {
                double e3 = 0.0;
                for (const auto& [z, w] : support) e3 += w * (1.0 - Y(ni, x, z)) * spec.eval_dA(delta, ni, x, z);
                c3.add({Tn, Tn, delta, ni, si, e3 - std::expm1(-spec.forward(Tn, Tn, delta, x, true))});
                for (double T : Ts) {
                    double e4 = 0.0;
                    for (const auto& [z, w] : support)
                        e4 += w * (1.0 - Y(ni, x, z)) * (1.0 + spec.eval_dA(delta, ni, x, z)) *
                              std::expm1(-spec.dV_integral(delta, ni, T, x, z));
                    c4.add({Tn, T, delta, ni, si, e4});
                }
            }
        }
    }
    for (auto* c : {&cr, &cs, &c2, &c3, &c4, &cy, &cint}) suite.conditions.push_back(*c);
    return suite;
}

HJMModelSpec elmm_equivalent_numeraire(const HJMModelSpec& spec, const MeasureChangeSpec& change) {
    check_trivial_numeraire(spec);
    HJMModelSpec out = spec;
    const int d = spec.d;
    auto theta = [change, d](double t, const Vec& x) { return change.theta ? change.theta(t, x) : Vec(Vec::Zero(d)); };
    auto psi = [change](double t, const Vec& x, const Vec& m) { return change.psi ? change.psi(t, x, m) : 0.0; };
    auto base_r = spec.r;
    auto intensity = spec.intensity;
    auto law = spec.jump_law;
    out.r = [=](double t, const Vec& x) {
        double r = base_r ? base_r(t, x) : 0.0;
        r += theta(t, x).squaredNorm();
        if (intensity) {
            const double lam = intensity(t, x);
            if (lam != 0.0)
                r += lam * law.expect([&](const Vec& m) {
                    const double p = psi(t, x, m);
                    return p * p / (1.0 - p);
                });
        }
        return r;
    };
    out.H = theta;
    out.L = [=](double t, const Vec& x, const Vec& m) {
        const double p = psi(t, x, m);
        return p / (1.0 - p);
    };
    out.dB = [change](int n, const Vec& x, const Vec& z) {
        const double y = change.Y ? change.Y(n, x, z) : 0.0;
        return y / (1.0 - y);
    };
    out.label = spec.label + "+measure_change";
    return out;
}

HJMModelSpec terminal_bond_numeraire(const HJMModelSpec& spec, double T_star) {
    spec.validate();
    if (!(T_star > 0.0)) throw ConfigError("terminal maturity must be > 0");
    auto s = std::make_shared<HJMModelSpec>(spec);
    HJMModelSpec out = spec;
    out.H = [s, T_star](double t, const Vec& x) -> Vec { return -s->bbar(0.0, t, T_star, x); };
    out.L = [s, T_star](double t, const Vec& x, const Vec& m) { return std::expm1(-s->gbar(0.0, t, m, T_star, x)); };
    out.dB = [s, T_star](int n, const Vec& x, const Vec& z) {
        const double Tn = s->cal[static_cast<std::size_t>(n)];
        return std::expm1(-s->dV_integral(0.0, n, T_star, x, z) + s->forward(Tn, Tn, 0.0, x, true));
    };
    out.r = [s, T_star](double t, const Vec& x) {
        const double f0 = s->cal.has_lebesgue() ? s->forward(t, t, 0.0, x) : 0.0;
        const Vec bb = s->bbar(0.0, t, T_star, x);
        double r = f0 - s->abar(0.0, t, T_star, x) + 0.5 * bb.squaredNorm();
        if (s->intensity) {
            const double lam = s->intensity(t, x);
            if (lam != 0.0)
                r += lam * s->jump_law.expect([&](const Vec& m) {
                    const double gb = s->gbar(0.0, t, m, T_star, x);
                    return std::expm1(-gb) + gb;
                });
        }
        return r;
    };
    out.label = spec.label + "+terminal_bond";
    return out;
}

} // namespace mcurve
