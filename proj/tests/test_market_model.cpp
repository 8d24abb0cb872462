#include "mcurve/errors.hpp"
#include "mcurve/market_model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace mcurve;

namespace {

GaussianMarketParams three_dates() {
    GaussianMarketParams p;
    p.delta = 0.5;
    p.dates = {0.5, 1.0, 1.5};
    p.L0 = {0.030, 0.032, 0.035};
    p.L0_prev = 0.028;
    p.ois_forwards = {0.012, 0.013, 0.014, 0.015};
    p.sigma = {0.20, 0.18, 0.15};
    p.rho = 0.5;
    p.jump_sd = {0.1, 0.1, 0.1};
    p.numeraire_jump = 0.05;
    return p;
}

const ConditionReport& get(const CheckSuite& s, const std::string& name) {
    for (const auto& c : s.conditions)
        if (c.name == name) return c;
    throw std::runtime_error("no condition " + name);
}

HJMCheckGrid market_grid(const MarketModelSpec& mm, int n = 11, int states = 4) {
    return make_check_grid(mm.ois.cal, mm.dates.back() + mm.delta, n, market_states(mm, states, 3));
}

HJMCheckGrid emb_grid(const MarketModelSpec& mm, const HJMModelSpec& emb, int n = 11, int states = 4) {
    return make_check_grid(emb.cal, emb.cal.horizon(), n, embedded_check_states(mm, states, 3));
}

std::size_t index_of_time(const std::vector<double>& ts, double t) {
    return static_cast<std::size_t>(std::find(ts.begin(), ts.end(), t) - ts.begin());
}

} // namespace

TEST(MarketModel, ForwardCentredJumpsPass) {
    auto mm = build_gaussian_market_model(three_dates());
    auto suite = check_market_model_conditions(mm, market_grid(mm));
    EXPECT_TRUE(suite.pass(1e-8));
    EXPECT_GT(get(suite, "market(ii)").n_points, 0u);
    EXPECT_LE(get(suite, "ois:hjm(iii)").max_abs, 1e-12);
}

TEST(MarketModel, RiskNeutralCentredJumpsFail) {
    auto p = three_dates();
    p.forward_centered = false;
    auto mm = build_gaussian_market_model(p);
    auto suite = check_market_model_conditions(mm, market_grid(mm));
    EXPECT_LE(get(suite, "market(i)").max_abs, 1e-12);
    // E[(1 + dL-ratio - 1) / (1 + dB)] with lognormal factors: (1 + delta L)/delta * (exp(-s c) - 1) exp(-f)
    EXPECT_GT(get(suite, "market(ii)").max_abs, 1e-4);
    mm.bond_ratio_true_martingale = true;
    auto fwd = check_forward_measure_criterion(mm, 1.5, 0.5, market_grid(mm));
    EXPECT_GT(get(fwd, "forward_jump_mean").max_abs, 1e-4);
}

TEST(MarketModel, JumpResidualMatchesHandValue) {
    auto p = three_dates();
    p.forward_centered = false;
    auto mm = build_gaussian_market_model(p);
    HJMCheckGrid g;
    g.t = {0.2};
    g.states = {mm.x0};
    auto suite = check_market_model_conditions(mm, g);
    // first date, third rate: E[dL / (1 + dB)] = (1 + delta L)/delta (exp(-s c) - 1) exp(-f(0, T_1, 0))
    const double s = 0.1, c = 0.05;
    const double expect = (1.0 + 0.5 * 0.035) / 0.5 * std::expm1(-s * c) * std::exp(-0.012);
    bool found = false;
    for (const auto& pt : get(suite, "market(ii)").worst)
        if (pt.i == 0 && pt.T == 1.5) {
            EXPECT_NEAR(pt.residual, expect, 1e-12);
            found = true;
        }
    EXPECT_TRUE(found);
}

TEST(MarketModel, ForwardCriterionAgreesWithChecker) {
    for (bool centred : {true, false}) {
        auto p = three_dates();
        p.forward_centered = centred;
        auto mm = build_gaussian_market_model(p);
        mm.bond_ratio_true_martingale = true;
        const auto g = market_grid(mm);
        bool fwd_ok = true;
        for (double T : mm.dates) fwd_ok = fwd_ok && check_forward_measure_criterion(mm, T, 0.5, g).pass(1e-8);
        EXPECT_EQ(check_market_model_conditions(mm, g).pass(1e-8), fwd_ok) << centred;
        EXPECT_EQ(fwd_ok, centred);
    }
}

TEST(MarketModel, ForwardCriterionNeedsAssertion) {
    auto mm = build_gaussian_market_model(three_dates());
    EXPECT_THROW(check_forward_measure_criterion(mm, 1.0, 0.5, market_grid(mm)), ConfigError);
    mm.bond_ratio_true_martingale = true;
    EXPECT_THROW(check_forward_measure_criterion(mm, 1.2, 0.5, market_grid(mm)), ConfigError);
    EXPECT_THROW(check_forward_measure_criterion(mm, 1.0, 0.25, market_grid(mm)), ConfigError);
    EXPECT_FALSE(check_forward_measure_criterion(mm, 1.0, 0.5, market_grid(mm)).notes.empty());
}

TEST(MarketModel, Validation) {
    auto p = three_dates();
    p.dates = {0.5, 1.0, 1.6};
    EXPECT_THROW(build_gaussian_market_model(p), ConfigError);
    p = three_dates();
    p.ois_forwards.pop_back();
    EXPECT_THROW(build_gaussian_market_model(p), ConfigError);
    p = three_dates();
    p.sigma[1] = -0.1;
    EXPECT_THROW(build_gaussian_market_model(p), ConfigError);
    p = three_dates();
    p.rho = -1.0;
    EXPECT_THROW(build_gaussian_market_model(p), ConfigError);
    auto mm = build_gaussian_market_model(three_dates());
    HJMCheckGrid g;
    g.t = {1.0};
    g.states = {mm.x0};
    EXPECT_THROW(check_market_model_conditions(mm, g), DomainError);
}

TEST(MarketModel, OisVolatilityEntersDrift) {
    // numeraire with H = h: the Ibor drift under Q must equal bL . H
    auto mm = build_gaussian_market_model(three_dates());
    const Vec h = Vec::Constant(3, 0.02);
    mm.ois.H = [h](double, const Vec&) { return h; };
    mm.ois.r = [](double, const Vec&) { return 3 * 0.0004; };
    auto g = market_grid(mm);
    EXPECT_GT(get(check_market_model_conditions(mm, g), "market(i)").max_abs, 1e-4);
    auto bL = mm.bL;
    mm.aL = [bL, h](double t, int i, const Vec& x) { return bL(t, i, x).dot(h); };
    EXPECT_LE(get(check_market_model_conditions(mm, g), "market(i)").max_abs, 1e-15);
}

TEST(Embedding, InitialForwardsFromHandInputs) {
    auto p = three_dates();
    auto mm = build_gaussian_market_model(p);
    auto emb = embed_market_model(mm);
    const double d = 0.5;
    std::vector<double> L{p.L0_prev, 0.030, 0.032, 0.035};
    const double S0 = (1.0 + d * 0.028) * std::exp(-0.012);
    EXPECT_NEAR(embedded_spread0(mm), S0, 1e-15);
    EXPECT_NEAR(emb.x0(3), S0, 1e-15);
    for (int i = 0; i < 3; ++i) {
        const double hand = p.ois_forwards[i + 1] - std::log((1.0 + d * L[i + 1]) / (1.0 + d * L[i]));
        EXPECT_NEAR(emb.forward(0.0, p.dates[i], d, emb.x0), hand, 1e-14) << i;
        EXPECT_NEAR(embedded_ibor_rate(emb, 0.0, i, emb.x0), L[i + 1], 1e-14) << i;
    }
    // beyond the last settlement date the tenor curve follows OIS
    EXPECT_NEAR(emb.forward(0.0, 2.0, d, emb.x0), 0.015, 1e-15);
    EXPECT_EQ(emb.forward(0.0, 0.7, d, emb.x0), 0.0);
}

TEST(Embedding, PassesGeneralChecks) {
    auto mm = build_gaussian_market_model(three_dates());
    auto emb = embed_market_model(mm);
    auto suite = check_hjm_conditions(emb, emb_grid(mm, emb));
    for (const auto& c : suite.conditions) EXPECT_LE(c.max_abs, 1e-8) << c.name;
    EXPECT_GT(get(suite, "hjm(iv)").n_points, 0u);
}

TEST(Embedding, SpreadJumpAlternativeForm) {
    auto p = three_dates();
    auto mm = build_gaussian_market_model(p);
    auto emb = embed_market_model(mm);
    const auto times = market_time_grid(p, 4);
    auto paths = simulate_gaussian_market(p, times, 5, 11);
    const double d = p.delta;
    for (std::size_t path = 0; path < paths.n_paths; ++path) {
        double S = emb.x0(3);
        double prev = (1.0 + d * p.L0_prev) * std::exp(-p.ois_forwards[0]);
        for (int n = 0; n < 3; ++n) {
            const std::size_t k = index_of_time(times, p.dates[n]);
            const Vec xl = paths.state(path, k, true), x = paths.state(path, k);
            const Vec z = Vec::Constant(1, paths.z[path * times.size() + k]);
            const double dA = emb.eval_dA(d, n, embedded_state(xl, S), z);
            // (1 + delta L(T_n,T_n)) P(T_n, T_{n+1}) over the same quantity one date earlier
            const double now = (1.0 + d * x(n)) * std::exp(-p.ois_forwards[n + 1]);
            EXPECT_NEAR(1.0 + dA, now / prev, 1e-13) << path << " " << n;
            S *= 1.0 + dA;
            prev = now;
        }
    }
}

TEST(Embedding, RoundTripDeterministic) {
    auto p = three_dates();
    std::fill(p.sigma.begin(), p.sigma.end(), 0.0);
    std::fill(p.jump_sd.begin(), p.jump_sd.end(), 0.0);
    auto mm = build_gaussian_market_model(p);
    auto emb = embed_market_model(mm);
    auto paths = simulate_gaussian_market(p, market_time_grid(p, 10), 3, 1);
    auto rt = embedding_round_trip(mm, emb, paths);
    EXPECT_GT(rt.points, 0u);
    EXPECT_LE(rt.max_rel_error, 1e-8);
}

TEST(Embedding, RoundTripTwoDatesStochastic) {
    GaussianMarketParams p;
    p.dates = {0.5, 1.0};
    p.L0 = {0.03, 0.031};
    p.L0_prev = 0.029;
    p.ois_forwards = {0.01, 0.011, 0.012};
    p.sigma = {0.25, 0.2};
    p.rho = 0.4;
    p.jump_sd = {0.15, 0.1};
    p.numeraire_jump = 0.08;
    auto mm = build_gaussian_market_model(p);
    auto emb = embed_market_model(mm);
    auto paths = simulate_gaussian_market(p, market_time_grid(p, 10), 1000, 5);
    auto rt = embedding_round_trip(mm, emb, paths);
    EXPECT_GT(rt.points, 1000u);
    EXPECT_LE(rt.max_rel_error, 1e-6);
    EXPECT_TRUE(check_hjm_conditions(emb, emb_grid(mm, emb)).pass(1e-8));
}

TEST(Embedding, SingleDate) {
    GaussianMarketParams p;
    p.dates = {1.0};
    p.delta = 1.0;
    p.L0 = {0.02};
    p.L0_prev = 0.02;
    p.ois_forwards = {0.01, 0.012};
    p.sigma = {0.1};
    p.jump_sd = {0.05};
    p.numeraire_jump = 0.02;
    auto mm = build_gaussian_market_model(p);
    auto emb = embed_market_model(mm);
    EXPECT_TRUE(check_hjm_conditions(emb, emb_grid(mm, emb)).pass(1e-8));
    // no maturity after the only settlement date carries a tenor shift
    EXPECT_EQ(emb.eval_dV(1.0, 0, 2.0, emb.x0, Vec::Constant(1, 1.0)), 0.0);
    auto rt = embedding_round_trip(mm, emb, simulate_gaussian_market(p, market_time_grid(p, 5), 50, 2));
    EXPECT_LE(rt.max_rel_error, 1e-6);
}

TEST(Embedding, DomainErrors) {
    auto p = three_dates();
    p.L0[1] = -1.0 / p.delta;
    EXPECT_THROW(embed_market_model(build_gaussian_market_model(p)), DomainError);
    p = three_dates();
    p.L0_prev = -2.0 / p.delta;
    EXPECT_THROW(embed_market_model(build_gaussian_market_model(p)), DomainError);
}

TEST(Embedding, NeedsAtomicEta) {
    auto mm = build_gaussian_market_model(three_dates());
    mm.ois.cal = DiscontinuityCalendar({0.5, 1.0, 1.5, 2.0}, 2.0, true);
    EXPECT_THROW(embed_market_model(mm), ConfigError);
}

TEST(MarketSimulation, ExactLognormalMoments) {
    auto p = three_dates();
    p.jump_sd = {0.0, 0.0, 0.0};
    const auto times = market_time_grid(p, 2);
    auto paths = simulate_gaussian_market(p, times, 20000, 8);
    // log(1 + delta L_3) at T_3 is Gaussian with variance sigma^2 T_3 and mean log(1 + delta L0) - sigma^2 T_3 / 2
    const std::size_t k = index_of_time(times, 1.5);
    double m = 0.0, m2 = 0.0;
    for (std::size_t q = 0; q < paths.n_paths; ++q) {
        double y = std::log1p(0.5 * paths.state(q, k)(2));
        m += y;
        m2 += y * y;
    }
    m /= paths.n_paths;
    const double var = m2 / paths.n_paths - m * m;
    const double v = 0.15 * 0.15 * 1.5;
    EXPECT_NEAR(m, std::log1p(0.5 * 0.035) - 0.5 * v, 4.0 * std::sqrt(v / paths.n_paths));
    EXPECT_NEAR(var / v, 1.0, 4.0 * std::sqrt(2.0 / paths.n_paths));
    EXPECT_THROW(simulate_gaussian_market(p, {0.0, 0.7, 2.0}, 1, 1), ConfigError);
}
