#include "fixtures.hpp"
#include "mcurve/errors.hpp"
#include "mcurve/models.hpp"
#include "mcurve/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mcurve;

namespace {

// eta-integrals of the spike loadings over (T_n, T], written out by hand, e = exp(-kappa3 (T - T_n))
struct SpikeIntegrals {
    double phi1_ois, phi7_ois, phi1_tenor, phi7_tenor;
};

SpikeIntegrals spike_integrals(double a, double c, double k3, double v) {
    double e = std::exp(-k3 * v), kk = 1.0 + a * k3;
    return {-(c / k3) * (e - 1.0) + (e - 1.0) * (e - 1.0) / (2.0 * k3 * k3), -(e - 1.0) / k3,
            ((a - c) * kk / k3) * (e - 1.0) + (kk * kk / (2.0 * k3 * k3)) * (e - 1.0) * (e - 1.0),
            -(kk / k3) * (e - 1.0)};
}

} // namespace

TEST(Models, Families) {
    EXPECT_EQ(model_families(), (std::vector<std::string>{"vasicek", "vasicek_jump", "multicurve_vasicek",
                                                          "multicurve_jump"}));
}

TEST(Models, Dimensions) {
    EXPECT_EQ(fixtures::vasicek().dim(), 3);
    EXPECT_EQ(fixtures::vasicek_jump().dim(), 5);
    EXPECT_EQ(fixtures::multicurve().dim(), 5);
    EXPECT_EQ(fixtures::multicurve_jump().dim(), 7);
}

TEST(Models, ParameterValidation) {
    auto p = fixtures::base_params();
    p.kappa1 = 0.0;
    EXPECT_THROW(build_vasicek_single(p), ConfigError);
    p = fixtures::base_params();
    p.sigma1 = -0.01;
    EXPECT_THROW(build_vasicek_single(p), ConfigError);
    p = fixtures::base_params();
    p.rho = 1.5;
    EXPECT_THROW(build_multicurve_vasicek(p, 0.5), ConfigError);
    p = fixtures::base_params();
    EXPECT_THROW(build_multicurve_vasicek(p, 0.0), ConfigError);
    p.kappa3 = -1.0;
    EXPECT_THROW(build_multicurve_jump(p, 0.5, fixtures::half_yearly()), ConfigError);
    p = fixtures::base_params();
    p.spread0 = 0.0;
    EXPECT_THROW(build_multicurve_vasicek(p, 0.5), ConfigError);
}

TEST(Models, SingleDateFamilyCalendar) {
    auto p = fixtures::base_params();
    EXPECT_THROW(build_vasicek_jump(p, DiscontinuityCalendar({1.0, 2.0}, 10.0)), ConfigError);
    EXPECT_THROW(build_vasicek_jump(p, DiscontinuityCalendar({}, 10.0)), ConfigError);
    EXPECT_THROW(build_vasicek_jump(p, 0.0), ConfigError);
    auto m = build_vasicek_jump(p, 2.5);
    EXPECT_EQ(m.cal.dates(), std::vector<double>{2.5});
    EXPECT_EQ(m.params.at("T1"), 2.5);
    EXPECT_TRUE(run_affine_checks(m, {11, 3, 2}).pass(1e-8));
}

TEST(Models, SpikeEtaIntegrals) {
    auto p = fixtures::jump_params();
    auto m = fixtures::multicurve_jump();
    for (int n = 0; n < 4; ++n) {
        double Tn = m.cal[n];
        for (double v : {0.25, 1.0, 5.0}) {
            double T = Tn + v;
            auto ref = spike_integrals(p.a, p.c, p.kappa3, v);
            Vec ois = phi_integral(m, Tn, Tn, T, 0.0);
            Vec ten = phi_integral(m, Tn, Tn, T, 0.5);
            // later dates inside (T_n, T] also carry atoms; the identities are stated on jump-free stretches
            if (!m.cal.dates_in(Tn, T).empty()) {
                auto g0 = [&](double u) { return m.load.phi.at(0.0)(Tn, u)(0); };
                auto g6 = [&](double u) { return m.load.phi.at(0.0)(Tn, u)(6); };
                auto h0 = [&](double u) { return m.load.phi.at(0.5)(Tn, u)(0); };
                auto h6 = [&](double u) { return m.load.phi.at(0.5)(Tn, u)(6); };
                EXPECT_NEAR(eta_integrate(g0, Tn, T, m.cal), ois(0), 1e-14);
                EXPECT_NEAR(eta_integrate(g6, Tn, T, m.cal), ois(6), 1e-14);
                EXPECT_NEAR(eta_integrate(h0, Tn, T, m.cal), ten(0), 1e-14);
                EXPECT_NEAR(eta_integrate(h6, Tn, T, m.cal), ten(6), 1e-14);
                continue;
            }
            EXPECT_NEAR(ois(0), ref.phi1_ois, 1e-10) << Tn << " " << v;
            EXPECT_NEAR(ois(6), ref.phi7_ois, 1e-10) << Tn << " " << v;
            EXPECT_NEAR(ten(0), ref.phi1_tenor, 1e-10) << Tn << " " << v;
            EXPECT_NEAR(ten(6), ref.phi7_tenor, 1e-10) << Tn << " " << v;
        }
    }
}

TEST(Models, SpikeEtaIntegralsSingleDate) {
    // one date so every (T_n, T] is jump-free
    for (double k3 : {0.5, 2.0, 50.0}) {
        auto p = fixtures::jump_params();
        p.kappa3 = k3;
        auto m = build_multicurve_jump(p, 0.5, DiscontinuityCalendar({1.0}, 10.0));
        for (double v : {0.25, 1.0, 5.0}) {
            auto ref = spike_integrals(p.a, p.c, k3, v);
            auto g = [&](double delta, int i) {
                return eta_integrate([&](double u) { return m.load.phi.at(delta)(1.0, u)(i); }, 1.0, 1.0 + v, m.cal);
            };
            EXPECT_NEAR(g(0.0, 0), ref.phi1_ois, 1e-10);
            EXPECT_NEAR(g(0.0, 6), ref.phi7_ois, 1e-10);
            EXPECT_NEAR(g(0.5, 0), ref.phi1_tenor, 1e-10);
            EXPECT_NEAR(g(0.5, 6), ref.phi7_tenor, 1e-10);
        }
    }
}

TEST(Models, OisJumpConditionFromSpikeIntegrals) {
    // -f(T_n-, T_n, 0) = -int phi_1 + (1/2)(-c - int phi_7)^2 for every T > T_n
    auto p = fixtures::jump_params();
    auto m = build_multicurve_jump(p, 0.5, DiscontinuityCalendar({1.0}, 10.0));
    for (double v : {0.25, 1.0, 5.0}) {
        auto ref = spike_integrals(p.a, p.c, p.kappa3, v);
        double lhs = -m.forward(1.0, 1.0, 0.0, m.x0, true);
        double rhs = -ref.phi1_ois + 0.5 * (-p.c - ref.phi7_ois) * (-p.c - ref.phi7_ois);
        EXPECT_NEAR(lhs, rhs, 1e-12) << v;
        EXPECT_NEAR(check_scheduled_jump_condition(m, 0, 1.0 + v, 0.0, m.x0), 0.0, 1e-12);
    }
}

TEST(Models, JumpFreeNestingSingleCurve) {
    auto p = fixtures::base_params();
    auto plain = build_vasicek_single(p);
    auto jump = build_vasicek_jump(p, 1.0); // a = b = 0
    for (double xi : {-0.01, 0.02, 0.06})
        for (double t : {0.0, 0.5, 1.0, 2.0})
            for (double T : {1.0, 1.5, 4.0, 9.0}) {
                if (T < t) continue;
                Vec x3 = Vec::Zero(3), x5 = Vec::Zero(5);
                x3(2) = x5(2) = xi;
                for (bool left : {false, true})
                    EXPECT_NEAR(jump.bond(t, T, 0.0, x5, left), plain.bond(t, T, 0.0, x3, false), 1e-12)
                        << xi << " " << t << " " << T;
            }
}

TEST(Models, JumpFreeNestingMultiCurve) {
    auto p = fixtures::jump_params();
    p.a = p.c = 0.0;
    auto mj = build_multicurve_jump(p, 0.5, DiscontinuityCalendar({}, 10.0));
    auto mv = build_multicurve_vasicek(p, 0.5);
    const double k1 = p.kappa1, k2 = p.kappa2, s1 = p.sigma1, s2 = p.sigma2, rho = p.rho;
    for (double t : {0.0, 0.7, 2.0})
        for (double T : {1.0, 3.0, 8.0}) {
            Vec x7 = Vec::Zero(7), x5 = Vec::Zero(5);
            x7(2) = x5(2) = 0.025;
            x7(4) = x5(4) = 0.004;
            EXPECT_NEAR(mj.bond(t, T, 0.0, x7, false), mv.bond(t, T, 0.0, x5, false), 1e-12);
            // tenor curve of the spike family is driven by xi1 - xi2: Gaussian closed form
            double tau = T - t;
            auto h = [&](double k) { return (1.0 - std::exp(-k * tau)) / k; };
            double m1 = p.theta1 * tau + (0.025 - p.theta1) * h(k1);
            double m2 = p.theta2 * tau + (0.004 - p.theta2) * h(k2);
            double v1 = s1 * s1 / (k1 * k1) * (tau - 2.0 * h(k1) + h(2.0 * k1));
            double v2 = s2 * s2 / (k2 * k2) * (tau - 2.0 * h(k2) + h(2.0 * k2));
            double c12 = rho * s1 * s2 / (k1 * k2) * (tau - h(k1) - h(k2) + h(k1 + k2));
            double expect = std::exp(-(m1 - m2) + 0.5 * (v1 + v2 - 2.0 * c12));
            EXPECT_NEAR(mj.bond(t, T, 0.5, x7, false), expect, 1e-12);
        }
}

TEST(Models, ShortEnds) {
    auto m = fixtures::multicurve_jump();
    Vec x = Vec::Zero(7);
    x << 1.3, 0.1, 0.031, 0.02, 0.007, 0.4, -0.08;
    for (double t : {0.2, 0.75, 3.0}) {
        EXPECT_NEAR(m.forward(t, t, 0.0, x, false), 0.031 - 0.08, 1e-15);
        EXPECT_NEAR(m.forward(t, t, 0.5, x, false), 0.031 - 0.007 + (1.0 + 0.2 * 2.0) * -0.08, 1e-15);
    }
    auto v = fixtures::multicurve();
    Vec y = Vec::Zero(5);
    y << 0.0, 0.0, 0.03, 0.0, 0.006;
    EXPECT_NEAR(v.forward(1.0, 1.0, 0.0, y, false), 0.03, 1e-16);
    EXPECT_NEAR(v.forward(1.0, 1.0, 0.5, y, false), 0.006, 1e-16);
}

TEST(Models, SpreadLoadings) {
    auto m = fixtures::multicurve_jump();
    Vec psi = m.load.psi(0.5, 7);
    EXPECT_EQ(psi, (Vec(7) << 0, 0, 0, 1, 0, 0, 0.2).finished());
    EXPECT_EQ(m.load.psi(0.0, 7), Vec::Zero(7));
    EXPECT_EQ(m.load.psi_jump.at(2), (Vec(7) << 0, 0, 0, 0, 0, 0, 0.05).finished());
}

TEST(Models, TypeOneSpikesWithoutDecay) {
    auto p = fixtures::jump_params();
    p.kappa3 = 0.0;
    auto m = build_multicurve_jump(p, 0.5, fixtures::half_yearly());
    EXPECT_TRUE(run_affine_checks(m, {11, 3, 4}).pass(1e-8));
    // J persists: its loading on the OIS forward does not decay
    EXPECT_EQ(m.load.phi.at(0.0)(0.2, 3.3)(6), 1.0);
}
