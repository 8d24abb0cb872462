#include "mcurve/market_model.hpp"

#include "mcurve/errors.hpp"
#include "mcurve/sim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace mcurve {

double MarketModelSpec::eval_aL(double t, int i, const Vec& x) const { return aL ? aL(t, i, x) : 0.0; }
Vec MarketModelSpec::eval_bL(double t, int i, const Vec& x) const { return bL ? bL(t, i, x) : Vec::Zero(ois.d); }
double MarketModelSpec::eval_gL(double t, const Vec& m, int i, const Vec& x) const {
    return gL ? gL(t, m, i, x) : 0.0;
}
double MarketModelSpec::eval_dL(int n, int i, const Vec& x, const Vec& z) const {
    return dL ? dL(n, i, x, z) : 0.0;
}

namespace {

constexpr double kGridTol = 1e-10;

void check_equidistant(const std::vector<double>& dates, double delta) {
    if (!(delta > 0.0)) throw ConfigError("market model: tenor must be > 0");
    if (dates.empty()) throw ConfigError("market model: no settlement dates");
    if (!(dates.front() > 0.0)) throw ConfigError("market model: first settlement date must be > 0");
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (std::abs(dates[i] - dates[i - 1] - delta) > kGridTol)
            throw ConfigError("market model: settlement dates must be equidistant with spacing delta");
}

} // namespace

void MarketModelSpec::validate() const {
    check_equidistant(dates, delta);
    if (L0.size() != dates.size()) throw ConfigError("market model: need one initial Ibor rate per settlement date");
    if (!L) throw ConfigError("market model: Ibor rate function missing");
    if (x0.size() == 0) throw ConfigError("market model: empty initial state");
    const auto& od = ois.cal.dates();
    if (od.size() != dates.size() + 1) throw ConfigError("market model: OIS calendar must be T_1..T_N, T_N + delta");
    for (std::size_t i = 0; i < dates.size(); ++i)
        if (std::abs(od[i] - dates[i]) > kGridTol) throw ConfigError("market model: OIS calendar differs from settlement dates");
    if (std::abs(od.back() - dates.back() - delta) > kGridTol)
        throw ConfigError("market model: last OIS date must be T_N + delta");
    ois.validate();
}

namespace {

double lam_int(const HJMModelSpec& s, double t, const Vec& x, const std::function<double(const Vec&)>& h) {
    if (!s.intensity) return 0.0;
    const double lam = s.eval_intensity(t, x);
    if (lam == 0.0) return 0.0;
    if (!(lam > 0.0)) throw DomainError("jump intensity must be >= 0");
    return lam * s.jump_law.expect(h);
}

// drift of L(., T_i) under the T_i + delta forward measure
double forward_drift(const MarketModelSpec& mm, double t, int i, const Vec& x) {
    const HJMModelSpec& o = mm.ois;
    const double Tp = mm.dates[static_cast<std::size_t>(i)] + mm.delta;
    const Vec H = o.eval_H(t, x);
    const Vec bb = o.bbar(0.0, t, Tp, x);
    const double j = lam_int(o, t, x, [&](const Vec& m) {
        const double gb = o.gbar(0.0, t, m, Tp, x);
        return mm.eval_gL(t, m, i, x) * (std::exp(-gb) / (1.0 + o.eval_L(t, x, m)) - 1.0);
    });
    return mm.eval_aL(t, i, x) - mm.eval_bL(t, i, x).dot(H + bb) + j;
}

double ois_integral(const MarketModelSpec& mm, int n, int i, const Vec& x, const Vec& z) {
    const double Tp = mm.dates[static_cast<std::size_t>(i)] + mm.delta;
    return mm.ois.dV_integral(0.0, n, Tp, x, z);
}

} // namespace

CheckSuite check_market_model_conditions(const MarketModelSpec& spec, const HJMCheckGrid& grid) {
    spec.validate();
    for (double t : grid.t)
        if (spec.ois.cal.contains(t)) throw DomainError("market-model drift condition is checked off settlement dates");

    CheckSuite suite = check_hjm_conditions(spec.ois, grid);
    for (auto& c : suite.conditions) c.name = "ois:" + c.name;
    for (auto& n : suite.notes) n = "ois: " + n;

    ConditionReport c1("market(i)"), c2("market(ii)"), cint("market_integrability");
    const int N = spec.N();
    for (std::size_t s = 0; s < grid.states.size(); ++s) {
        const Vec& x = grid.states[s];
        const int si = static_cast<int>(s);
        for (double t : grid.t) {
            for (int i = 0; i < N; ++i) {
                const double Ti = spec.dates[static_cast<std::size_t>(i)];
                if (t >= Ti) continue;
                c1.add({t, Ti, spec.delta, i, si, forward_drift(spec, t, i, x)});
                const double jabs = lam_int(spec.ois, t, x, [&](const Vec& m) {
                    const double gb = spec.ois.gbar(0.0, t, m, Ti + spec.delta, x);
                    return std::abs(spec.eval_gL(t, m, i, x) *
                                    (std::exp(-gb) / (1.0 + spec.ois.eval_L(t, x, m)) - 1.0));
                });
                cint.add({t, Ti, spec.delta, i, si, std::isfinite(jabs) ? 0.0 : HUGE_VAL});
            }
        }
        for (int n = 0; n < static_cast<int>(spec.ois.cal.size()); ++n) {
            const auto support = spec.ois.scheduled_law(n).support();
            const double Tn = spec.ois.cal[static_cast<std::size_t>(n)];
            for (int i = 0; i < N; ++i) {
                const double Ti = spec.dates[static_cast<std::size_t>(i)];
                if (Ti < Tn) continue;
                double e = 0.0;
                for (const auto& [z, w] : support)
                    e += w * spec.eval_dL(n, i, x, z) / (1.0 + spec.ois.eval_dB(n, x, z)) *
                         std::exp(-ois_integral(spec, n, i, x, z));
                c2.add({Tn, Ti, spec.delta, n, si, e});
            }
        }
    }
    for (auto* c : {&c1, &c2, &cint}) suite.conditions.push_back(*c);
    return suite;
}

CheckSuite check_forward_measure_criterion(const MarketModelSpec& spec, double T, double delta,
                                           const HJMCheckGrid& grid) {
    if (!spec.bond_ratio_true_martingale)
        throw ConfigError("forward-measure criterion needs P(., T) / X^0 to be a true martingale; "
                          "assert it explicitly (bond_ratio_true_martingale) to proceed");
    spec.validate();
    if (std::abs(delta - spec.delta) > kGridTol) throw ConfigError("forward-measure criterion: tenor differs from the model tenor");
    int i = -1;
    for (int k = 0; k < spec.N(); ++k)
        if (std::abs(spec.dates[static_cast<std::size_t>(k)] - T) <= kGridTol) i = k;
    if (i < 0) throw ConfigError("forward-measure criterion: T is not a settlement date");

    CheckSuite suite;
    suite.notes.push_back("valid only because the bond-ratio martingale property was asserted");
    ConditionReport cd("forward_drift"), cj("forward_jump_mean");
    const double Ti = spec.dates[static_cast<std::size_t>(i)];
    for (std::size_t s = 0; s < grid.states.size(); ++s) {
        const Vec& x = grid.states[s];
        const int si = static_cast<int>(s);
        for (double t : grid.t)
            if (t < Ti && !spec.ois.cal.contains(t)) cd.add({t, Ti, delta, i, si, forward_drift(spec, t, i, x)});
        for (int n = 0; n < static_cast<int>(spec.ois.cal.size()); ++n) {
            const double Tn = spec.ois.cal[static_cast<std::size_t>(n)];
            if (Tn > Ti) continue;
            const double f0 = spec.ois.forward(Tn, Tn, 0.0, x, true);
            double num = 0.0, den = 0.0;
            for (const auto& [z, w] : spec.ois.scheduled_law(n).support()) {
                const double wt = std::exp(-ois_integral(spec, n, i, x, z) + f0) / (1.0 + spec.ois.eval_dB(n, x, z));
                num += w * spec.eval_dL(n, i, x, z) * wt;
                den += w * wt;
            }
            cj.add({Tn, Ti, delta, n, si, num / den});
        }
    }
    suite.conditions.push_back(cd);
    suite.conditions.push_back(cj);
    return suite;
}

// ---------------------------------------------------------------- embedding

double embedded_spread0(const MarketModelSpec& spec) {
    const double g = 1.0 + spec.delta * spec.L0_prev;
    if (!(g > 0.0)) throw DomainError("embedding: 1 + delta L(0, T_0, delta) <= 0");
    return g * spec.ois.bond(0.0, spec.dates.front(), 0.0, spec.x0);
}

Vec embedded_state(const Vec& x, double S) {
    Vec y(x.size() + 1);
    y.head(x.size()) = x;
    y(x.size()) = S;
    return y;
}

namespace {

struct Embedding {
    MarketModelSpec mm;
    int nx = 0;
    int N = 0;

    Vec head(const Vec& y) const { return y.head(nx); }
    double S(const Vec& y) const { return y(nx); }
    double T(int k) const { return mm.ois.cal[static_cast<std::size_t>(k)]; }

    // index of maturity T among T_1..T_{N+1}, -1 if none
    int index(double Tm) const { return mm.ois.cal.index_of(Tm); }

    // first k with T_k >= t (N when t > T_N)
    int current(double t) const {
        int k = 0;
        while (k < N && T(k) < t) ++k;
        return k;
    }

    double growth(double t, int i, const Vec& x, bool left) const {
        const double g = 1.0 + mm.delta * mm.L(t, i, x, left);
        if (!(g > 0.0)) throw DomainError("embedding: 1 + delta L(t, T_i, delta) <= 0");
        return g;
    }

    double f0(double t, int k, const Vec& x, bool left) const { return mm.ois.forward(t, T(k), 0.0, x, left); }

    double forward(double t, double Tm, const Vec& y, bool left) const {
        const int k = index(Tm);
        if (k < 0) return 0.0;
        const Vec x = head(y);
        const int ki = current(t);
        if (k < ki) return 0.0;
        // T_N + delta carries no Ibor rate; the tenor curve follows OIS there
        if (k == N) return f0(t, N, x, left);
        if (k == ki) {
            if (!(S(y) > 0.0)) throw DomainError("embedding: spread must be > 0");
            return std::log(S(y)) + f0(t, k, x, left) + f0(t, k + 1, x, left) - std::log(growth(t, k, x, left));
        }
        return f0(t, k + 1, x, left) - std::log(growth(t, k, x, left) / growth(t, k - 1, x, left));
    }

    Vec b(double t, double Tm, const Vec& y) const {
        const int k = index(Tm);
        const int d = mm.ois.d;
        if (k < 0) return Vec::Zero(d);
        const int ki = current(t);
        if (k < ki) return Vec::Zero(d);
        const Vec x = head(y);
        if (k == N) return mm.ois.eval_b(0.0, t, T(N), x);
        auto q = [&](int i) { return Vec(mm.delta * mm.eval_bL(t, i, x) / growth(t, i, x, false)); };
        if (k == ki) return mm.ois.eval_b(0.0, t, T(k), x) + mm.ois.eval_b(0.0, t, T(k + 1), x) - q(k);
        return mm.ois.eval_b(0.0, t, T(k + 1), x) - (q(k) - q(k - 1));
    }

    double g(double t, const Vec& m, double Tm, const Vec& y) const {
        const int k = index(Tm);
        if (k < 0) return 0.0;
        const int ki = current(t);
        if (k < ki) return 0.0;
        const Vec x = head(y);
        if (k == N) return mm.ois.eval_g(0.0, t, m, T(N), x);
        auto q = [&](int i) {
            const double v = 1.0 + mm.delta * mm.eval_gL(t, m, i, x) / growth(t, i, x, false);
            if (!(v > 0.0)) throw DomainError("embedding: Ibor jump leaves 1 + delta L <= 0");
            return std::log(v);
        };
        if (k == ki) return mm.ois.eval_g(0.0, t, m, T(k), x) + mm.ois.eval_g(0.0, t, m, T(k + 1), x) - q(k);
        return mm.ois.eval_g(0.0, t, m, T(k + 1), x) - (q(k) - q(k - 1));
    }

    // (1 + delta L post) / (1 + delta L left) at date n
    double jump_ratio(int n, int i, const Vec& x, const Vec& z) const {
        const double gl = growth(T(n), i, x, true);
        const double post = gl + mm.delta * mm.eval_dL(n, i, x, z);
        if (!(post > 0.0)) throw DomainError("embedding: scheduled jump leaves 1 + delta L <= 0");
        return post / gl;
    }

    double dV(int n, double Tm, const Vec& y, const Vec& z) const {
        const int k = index(Tm);
        if (k < 0 || k >= N || k < n + 1) return 0.0;
        const Vec x = head(y);
        return mm.ois.eval_dV(0.0, n, T(k + 1), x, z) - std::log(jump_ratio(n, k, x, z) / jump_ratio(n, k - 1, x, z));
    }

    double dA(int n, const Vec& y, const Vec& z) const {
        if (n >= N) return 0.0;
        const Vec x = head(y);
        const double Tn = T(n);
        const double fd = forward(Tn, Tn, y, true);
        return jump_ratio(n, n, x, z) *
                   std::exp(f0(Tn, n, x, true) - fd - mm.ois.eval_dV(0.0, n, T(n + 1), x, z)) -
               1.0;
    }

    // drift condition with H^delta = L^delta = 0, over [t, T_k]
    double Abar(double t, int k, const Vec& y) const {
        const int ki = current(t);
        const int d = mm.ois.d;
        const Vec x = head(y);
        Vec bb = Vec::Zero(d);
        for (int j = ki; j <= k; ++j) bb += b(t, T(j), y);
        double A = 0.5 * bb.squaredNorm() + bb.dot(mm.ois.eval_H(t, x));
        A += lam_int(mm.ois, t, x, [&](const Vec& m) {
            double gb = 0.0;
            for (int j = ki; j <= k; ++j) gb += g(t, m, T(j), y);
            return std::expm1(-gb) / (1.0 + mm.ois.eval_L(t, x, m)) + gb;
        });
        return A;
    }

    double a(double t, double Tm, const Vec& y) const {
        const int k = index(Tm);
        if (k < 0) return 0.0;
        const int ki = current(t);
        if (k < ki) return 0.0;
        if (k == ki) return Abar(t, k, y);
        return Abar(t, k, y) - Abar(t, k - 1, y);
    }
};

} // namespace

HJMModelSpec embed_market_model(const MarketModelSpec& spec) {
    spec.validate();
    if (spec.ois.cal.has_lebesgue()) throw ConfigError("embedding needs a purely atomic eta (OIS calendar without Lebesgue part)");
    for (double L : spec.L0)
        if (!(1.0 + spec.delta * L > 0.0)) throw DomainError("embedding: 1 + delta L(0, T_i, delta) <= 0");
    const double S0 = embedded_spread0(spec);

    auto e = std::make_shared<Embedding>();
    e->mm = spec;
    e->nx = static_cast<int>(spec.x0.size());
    e->N = spec.N();

    const HJMModelSpec& o = spec.ois;
    HJMModelSpec h;
    h.label = spec.label.empty() ? "embedded market model" : spec.label + " (embedded)";
    h.d = o.d;
    h.cal = o.cal;
    h.tenors = {spec.delta};
    h.x0 = embedded_state(spec.x0, S0);
    h.spread0[spec.delta] = S0;
    h.intensity = o.intensity ? RateFn([e](double t, const Vec& y) { return e->mm.ois.intensity(t, e->head(y)); })
                              : RateFn{};
    h.jump_law = o.jump_law;
    h.scheduled = o.scheduled;
    h.default_scheduled = o.default_scheduled;
    if (o.r) h.r = [e](double t, const Vec& y) { return e->mm.ois.r(t, e->head(y)); };
    if (o.H) h.H = [e](double t, const Vec& y) { return e->mm.ois.H(t, e->head(y)); };
    if (o.L) h.L = [e](double t, const Vec& y, const Vec& m) { return e->mm.ois.L(t, e->head(y), m); };
    if (o.dB) h.dB = [e](int n, const Vec& y, const Vec& z) { return e->mm.ois.dB(n, e->head(y), z); };

    CurveBlock c0;
    c0.f = [e](double t, double T, double, const Vec& y, bool left) {
        return e->mm.ois.forward(t, T, 0.0, e->head(y), left);
    };
    c0.a = [e](double t, double T, const Vec& y) { return e->mm.ois.eval_a(0.0, t, T, e->head(y)); };
    c0.b = [e](double t, double T, const Vec& y) { return e->mm.ois.eval_b(0.0, t, T, e->head(y)); };
    c0.g = [e](double t, const Vec& m, double T, const Vec& y) { return e->mm.ois.eval_g(0.0, t, m, T, e->head(y)); };
    c0.dV = [e](int n, double T, const Vec& y, const Vec& z) { return e->mm.ois.eval_dV(0.0, n, T, e->head(y), z); };
    h.curve[0.0] = c0;

    CurveBlock cd;
    cd.f = [e](double t, double T, double, const Vec& y, bool left) { return e->forward(t, T, y, left); };
    cd.a = [e](double t, double T, const Vec& y) { return e->a(t, T, y); };
    cd.b = [e](double t, double T, const Vec& y) { return e->b(t, T, y); };
    cd.g = [e](double t, const Vec& m, double T, const Vec& y) { return e->g(t, m, T, y); };
    cd.dV = [e](int n, double T, const Vec& y, const Vec& z) { return e->dV(n, T, y, z); };
    h.curve[spec.delta] = cd;

    TenorBlock tb;
    tb.dA = [e](int n, const Vec& y, const Vec& z) { return e->dA(n, y, z); };
    h.tenor[spec.delta] = tb;
    return h;
}

double embedded_ibor_rate(const HJMModelSpec& emb, double t, int i, const Vec& y, bool left) {
    if (emb.tenors.size() != 1) throw ConfigError("embedded_ibor_rate: expected a single-tenor embedded model");
    const double delta = emb.tenors.front();
    const double Ti = emb.cal[static_cast<std::size_t>(i)];
    if (Ti < t) throw DomainError("embedded_ibor_rate: rate already fixed");
    const double S = y(y.size() - 1);
    return forward_ibor_rate(S, emb.bond(t, Ti, delta, y, left), emb.bond(t, Ti + delta, 0.0, y, left), delta);
}

std::vector<Vec> market_states(const MarketModelSpec& spec, int count, std::uint64_t seed) {
    if (count < 1) throw ConfigError("need at least one check state");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    std::vector<Vec> out{spec.x0};
    for (int k = 1; k < count; ++k) {
        Vec x = spec.x0;
        for (int i = 0; i < spec.N() && i < x.size(); ++i) x(i) += 0.005 * nd(gen);
        out.push_back(x);
    }
    return out;
}

std::vector<Vec> embedded_check_states(const MarketModelSpec& spec, int count, std::uint64_t seed) {
    const double S0 = embedded_spread0(spec);
    std::mt19937_64 gen(seed ^ 0x9E3779B97F4A7C15ull);
    std::normal_distribution<double> nd;
    std::vector<Vec> out;
    bool first = true;
    for (const Vec& x : market_states(spec, count, seed)) {
        out.push_back(embedded_state(x, first ? S0 : S0 * std::exp(0.05 * nd(gen))));
        first = false;
    }
    return out;
}

// ---------------------------------------------------------------- Gaussian market model

std::vector<double> market_time_grid(const GaussianMarketParams& p, int steps_per_period) {
    p.validate();
    if (steps_per_period < 1) throw ConfigError("steps_per_period must be >= 1");
    std::vector<double> od = p.dates;
    od.push_back(p.dates.back() + p.delta);
    std::vector<double> t{0.0};
    double prev = 0.0;
    for (double d : od) {
        const int m = std::max(1, static_cast<int>(std::ceil((d - prev) / p.delta * steps_per_period - 1e-9)));
        for (int k = 1; k < m; ++k) t.push_back(prev + (d - prev) * k / m);
        t.push_back(d);
        prev = d;
    }
    return t;
}

void GaussianMarketParams::validate() const {
    check_equidistant(dates, delta);
    const std::size_t N = dates.size();
    if (L0.size() != N) throw ConfigError("market model: L0 needs one entry per settlement date");
    if (ois_forwards.size() != N + 1) throw ConfigError("market model: ois_forwards needs N + 1 entries");
    if (sigma.size() != N) throw ConfigError("market model: sigma needs one entry per settlement date");
    if (jump_sd.size() != N) throw ConfigError("market model: jump_sd needs one entry per settlement date");
    for (double s : sigma)
        if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("market model: sigma must be >= 0");
    for (double s : jump_sd)
        if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("market model: jump_sd must be >= 0");
    if (!(rho > -1.0 && rho <= 1.0)) throw ConfigError("market model: rho must lie in (-1, 1]");
    if (!std::isfinite(numeraire_jump)) throw ConfigError("market model: numeraire_jump must be finite");
}

namespace {

Mat correlation_root(std::size_t N, double rho) {
    Mat C = Mat::Constant(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N), rho);
    C.diagonal().setOnes();
    Eigen::SelfAdjointEigenSolver<Mat> es(C);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw ConfigError("market model: correlation matrix is not positive semidefinite");
    Eigen::LLT<Mat> llt(C);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    // rho = 1 and other singular cases
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

double jump_drift(const GaussianMarketParams& p, int n) {
    const double s = p.jump_sd[static_cast<std::size_t>(n)];
    return p.forward_centered ? s * p.numeraire_jump - 0.5 * s * s : -0.5 * s * s;
}

} // namespace

MarketModelSpec build_gaussian_market_model(const GaussianMarketParams& p) {
    p.validate();
    const int N = static_cast<int>(p.dates.size());
    auto par = std::make_shared<GaussianMarketParams>(p);
    auto root = std::make_shared<Mat>(correlation_root(p.dates.size(), p.rho));

    MarketModelSpec mm;
    mm.label = "gaussian_market_model";
    mm.delta = p.delta;
    mm.dates = p.dates;
    mm.L0 = p.L0;
    mm.L0_prev = p.L0_prev;
    mm.x0 = Eigen::Map<const Vec>(p.L0.data(), N);

    std::vector<double> od = p.dates;
    od.push_back(p.dates.back() + p.delta);
    HJMModelSpec& o = mm.ois;
    o.label = "deterministic OIS atoms";
    o.d = N;
    o.cal = DiscontinuityCalendar(od, od.back(), false);
    o.x0 = mm.x0;
    o.default_scheduled = MarkLaw::gaussian(1);
    CurveBlock c0;
    c0.f = [par, cal = o.cal](double, double T, double, const Vec&, bool) {
        const int k = cal.index_of(T);
        return k < 0 ? 0.0 : par->ois_forwards[static_cast<std::size_t>(k)];
    };
    o.curve[0.0] = c0;
    o.dB = [par](int n, const Vec&, const Vec& z) {
        const double c = par->numeraire_jump;
        return std::expm1(par->ois_forwards[static_cast<std::size_t>(n)] + c * z(0) + 0.5 * c * c);
    };

    mm.L = [](double, int i, const Vec& x, bool) { return x(i); };
    mm.aL = [](double, int, const Vec&) { return 0.0; };
    mm.bL = [par, root](double t, int i, const Vec& x) -> Vec {
        const auto ui = static_cast<std::size_t>(i);
        if (t >= par->dates[ui]) return Vec::Zero(root->cols());
        return par->sigma[ui] * (1.0 + par->delta * x(i)) / par->delta * root->row(i).transpose();
    };
    mm.dL = [par](int n, int i, const Vec& x, const Vec& z) {
        if (i < n || n >= static_cast<int>(par->dates.size())) return 0.0;
        const double s = par->jump_sd[static_cast<std::size_t>(n)];
        return (1.0 + par->delta * x(i)) * std::expm1(s * z(0) + jump_drift(*par, n)) / par->delta;
    };
    return mm;
}

Vec MarketPaths::state(std::size_t p, std::size_t k, bool left) const {
    const auto& v = left ? L_left : L;
    const std::size_t base = (p * times.size() + k) * static_cast<std::size_t>(N);
    return Eigen::Map<const Vec>(v.data() + base, N);
}

MarketPaths simulate_gaussian_market(const GaussianMarketParams& p, const std::vector<double>& times,
                                     std::size_t n_paths, std::uint64_t seed) {
    p.validate();
    if (n_paths == 0) throw ConfigError("n_paths must be >= 1");
    if (times.empty() || times.front() != 0.0) throw ConfigError("market simulation grid must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw ConfigError("market simulation grid must be strictly increasing");
    std::vector<double> od = p.dates;
    od.push_back(p.dates.back() + p.delta);
    std::vector<int> date_at(times.size(), -1);
    for (std::size_t n = 0; n < od.size(); ++n) {
        if (od[n] > times.back()) continue;
        auto it = std::find(times.begin(), times.end(), od[n]);
        if (it == times.end()) throw ConfigError("market simulation grid misses an OIS date");
        date_at[static_cast<std::size_t>(it - times.begin())] = static_cast<int>(n);
    }

    const int N = static_cast<int>(p.dates.size());
    const Mat root = correlation_root(p.dates.size(), p.rho);
    MarketPaths out;
    out.times = times;
    out.n_paths = n_paths;
    out.N = N;
    out.d = N;
    const std::size_t nt = times.size();
    out.L.assign(n_paths * nt * static_cast<std::size_t>(N), 0.0);
    out.L_left = out.L;
    out.dW.assign(n_paths * nt * static_cast<std::size_t>(N), 0.0);
    out.z.assign(n_paths * nt, 0.0);

    for (std::size_t path = 0; path < n_paths; ++path) {
        PathRng rng(seed, path);
        std::normal_distribution<double> nd;
        Vec Y(N);
        for (int i = 0; i < N; ++i) Y(i) = std::log1p(p.delta * p.L0[static_cast<std::size_t>(i)]);
        auto store = [&](std::vector<double>& v, std::size_t k) {
            for (int i = 0; i < N; ++i)
                v[(path * nt + k) * static_cast<std::size_t>(N) + static_cast<std::size_t>(i)] = std::expm1(Y(i)) / p.delta;
        };
        store(out.L_left, 0);
        store(out.L, 0);
        for (std::size_t k = 1; k < nt; ++k) {
            const double dt = times[k] - times[k - 1];
            Vec dW(N);
            for (int j = 0; j < N; ++j) dW(j) = std::sqrt(dt) * nd(rng);
            for (int j = 0; j < N; ++j) out.dW[(path * nt + k) * static_cast<std::size_t>(N) + static_cast<std::size_t>(j)] = dW(j);
            for (int i = 0; i < N; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                if (times[k] > p.dates[ui]) continue;
                Y(i) += p.sigma[ui] * root.row(i).dot(dW) - 0.5 * p.sigma[ui] * p.sigma[ui] * dt;
            }
            store(out.L_left, k);
            if (date_at[k] >= 0) {
                const double z = nd(rng);
                out.z[path * nt + k] = z;
                const int n = date_at[k];
                if (n < N) {
                    const double s = p.jump_sd[static_cast<std::size_t>(n)];
                    for (int i = n; i < N; ++i) Y(i) += s * z + jump_drift(p, n);
                }
            }
            store(out.L, k);
        }
    }
    return out;
}

RoundTripReport embedding_round_trip(const MarketModelSpec& mm, const HJMModelSpec& emb, const MarketPaths& paths) {
    const int N = mm.N();
    if (paths.N != N) throw ConfigError("round trip: path dimension differs from the model");
    const double delta = mm.delta;
    RoundTripReport rep;
    const auto& times = paths.times;
    const std::size_t nt = times.size();
    const double floor = 1e-4;

    for (std::size_t p = 0; p < paths.n_paths; ++p) {
        std::vector<double> f(static_cast<std::size_t>(N));
        for (int k = 0; k < N; ++k) f[static_cast<std::size_t>(k)] = emb.forward(0.0, emb.cal[static_cast<std::size_t>(k)], delta, emb.x0);
        double S = emb.spread0.at(delta);

        auto compare = [&](std::size_t kt) {
            const double t = times[kt];
            const Vec x = paths.state(p, kt);
            double logP = 0.0;
            for (int k = 0; k < N; ++k) {
                const double Tk = emb.cal[static_cast<std::size_t>(k)];
                if (Tk < t) continue;
                if (Tk > t) logP -= f[static_cast<std::size_t>(k)];
                const double P0 = mm.ois.bond(t, Tk + delta, 0.0, x);
                const double L_rec = (S * std::exp(logP) / P0 - 1.0) / delta;
                const double L_sim = x(k);
                const double err = std::abs(L_rec - L_sim);
                rep.max_abs_error = std::max(rep.max_abs_error, err);
                rep.max_rel_error = std::max(rep.max_rel_error, err / std::max(std::abs(L_sim), floor));
                ++rep.points;
            }
        };
        compare(0);

        for (std::size_t kt = 1; kt < nt; ++kt) {
            const double t0 = times[kt - 1], t1 = times[kt];
            const double dt = t1 - t0, tm = 0.5 * (t0 + t1);
            const Vec y = embedded_state(paths.state(p, kt - 1), S);
            Vec dW = Eigen::Map<const Vec>(paths.dW.data() + (p * nt + kt) * static_cast<std::size_t>(paths.d), paths.d);
            for (int k = 0; k < N; ++k) {
                const double Tk = emb.cal[static_cast<std::size_t>(k)];
                if (Tk < t1) continue;
                f[static_cast<std::size_t>(k)] += emb.eval_a(delta, tm, Tk, y) * dt + emb.eval_b(delta, tm, Tk, y).dot(dW);
            }
            const int n = emb.cal.index_of(t1);
            if (n >= 0) {
                const Vec yl = embedded_state(paths.state(p, kt, true), S);
                Vec z(1);
                z(0) = paths.z[p * nt + kt];
                for (int k = 0; k < N; ++k) {
                    const double Tk = emb.cal[static_cast<std::size_t>(k)];
                    if (Tk <= t1) continue;
                    f[static_cast<std::size_t>(k)] += emb.eval_dV(delta, n, Tk, yl, z);
                }
                S *= 1.0 + emb.eval_dA(delta, n, yl, z);
            }
            compare(kt);
        }
    }
    return rep;
}

} // namespace mcurve
