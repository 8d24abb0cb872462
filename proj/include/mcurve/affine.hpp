#pragma once

#include "mcurve/calendar.hpp"
#include "mcurve/curve.hpp"
#include "mcurve/report.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mcurve {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Finite-activity jump measure intensity * law(dx) on R^d.
struct JumpMeasure {
    enum class Law { Gaussian, Discrete, Sampled };
    double intensity = 0.0;
    Law law = Law::Gaussian;
    Vec mean;
    Mat cov;
    std::vector<Vec> points;
    std::vector<double> probs;
    std::function<Vec(std::mt19937_64&)> sampler;
    int mc_samples = 200000;
    std::uint64_t mc_seed = 7;

    // int F(P x) mu(dx); P has at most 3 rows. Gauss-Hermite (64 nodes per
    // direction) for Gaussian laws, exact sums for discrete ones, fixed-seed
    // Monte Carlo otherwise.
    double integrate(const Mat& P, const std::function<double(const Vec&)>& F) const;
};

// Transform of a scheduled jump at one calendar date:
// log E[exp(u . dX) | F_{T_n-}] = gamma0(u) + sum_i X^i_{T_n-} gamma_i(u).
// The realisation dX = delta_x(z, X_{T_n-}) with z ~ N(0, I_noise_dim)
// is what the simulator and the general checker use.
struct ScheduledJump {
    std::function<double(const Vec&)> gamma0;
    std::vector<std::pair<int, std::function<double(const Vec&)>>> gamma; // (state index, gamma_i)
    int noise_dim = 0;
    std::function<Vec(const Vec& z, const Vec& x_left)> delta_x;
};

// beta[0], alpha[0], mu[0] are the constant parts; entry i >= 1 multiplies
// the state coordinate i-1. Time-homogeneous.
struct AffineCharacteristics {
    int d = 0;
    std::vector<Vec> beta;
    std::vector<Mat> alpha;
    std::vector<std::optional<JumpMeasure>> mu;
    std::map<int, ScheduledJump> scheduled; // calendar index -> transform

    Vec drift(const Vec& x) const;
    Mat diffusion(const Vec& x) const;
    void validate() const;
};

using LoadingFn = std::function<Vec(double t, double T)>;

struct CurveLoadings {
    std::map<double, LoadingFn> phi;   // tenor (0 = OIS) -> phi(t,T,delta)
    std::map<double, Vec> psi_tenor;   // delta > 0 -> psi^delta (constant)
    std::map<int, Vec> psi_jump;       // calendar index -> psi_{T_n}
    std::function<double(double t, const Vec& x)> short_rate;
    // int_0^t r ds = w . (X_t - X_0) when present (used for exact discounting)
    Vec rate_integral_weights;

    Vec psi(double delta, int d) const;
};

// Exact-transition description used by the simulator.
struct ExactDynamics {
    struct Factor {
        int level;
        int integral;
        double kappa, theta, sigma;
    };
    struct Decay { // deterministic exponential decay between scheduled jumps
        int level;
        int integral;
        double kappa;
    };
    int clock = -1; // coordinate advancing with dt, -1 if none
    std::vector<Factor> factors;
    Mat corr;
    std::vector<Decay> decays;
    bool available() const { return clock >= 0 || !factors.empty() || !decays.empty(); }
};

// (t, T, delta, state, left) -> value; left selects the T_n- version at t = T_n
using StateCurveFn = std::function<double(double t, double T, double delta, const Vec& x, bool left)>;

struct AffineModel {
    std::string family;
    std::map<std::string, double> params;
    AffineCharacteristics ch;
    CurveLoadings load;
    DiscontinuityCalendar cal;
    TenorSet tenors;
    Vec x0;
    std::map<double, double> spread0;
    StateCurveFn forward;
    StateCurveFn bond;
    ExactDynamics dynamics;
    int driving_factor = 2;

    int dim() const { return ch.d; }
    double initial_forward(double T, double delta) const { return forward(0.0, T, delta, x0, false); }
    void validate() const;
};

// phi_bar(t,T,delta) = int_[t,T] phi(t,u,delta) eta(du), componentwise
Vec phi_bar(const AffineModel& m, double t, double T, double delta);
// int_(a,b] phi(t,u,delta) eta(du)
Vec phi_integral(const AffineModel& m, double t, double a, double b, double delta);

// residual per tenor (0 included) of the short-rate condition
std::map<double, double> check_short_rate_condition(const AffineModel& m, const Vec& x, double t);

// one row per (t, T, delta, i); t on calendar dates is rejected
ConditionReport check_drift_condition(const AffineModel& m, const std::vector<double>& t_grid,
                                      const std::vector<double>& T_grid);

double check_scheduled_jump_condition(const AffineModel& m, int n, double T, double delta, const Vec& x_left);

// n equidistant points on [0, horizon]; points on calendar dates are moved by eps
std::vector<double> condition_grid(double horizon, int n, const DiscontinuityCalendar& cal, double eps = 1e-9);

// Random states around X_0 for pointwise checks (deterministic in seed).
std::vector<Vec> random_states(const AffineModel& m, int count, std::uint64_t seed);

struct AffineCheckOptions {
    int grid = 21;
    int states = 10;
    std::uint64_t seed = 1;
};

// (i) on grid times x states, (ii) on the (t,T) lattice, (iii) at every date,
// every T on the lattice and every state.
CheckSuite run_affine_checks(const AffineModel& m, const AffineCheckOptions& opt = {});

struct RiccatiResult {
    double A = 0.0, B = 0.0;         // closed form
    double A_ode = 0.0, B_ode = 0.0; // explicit RK4
    std::size_t steps = 0;
    double discrepancy() const;
};

// E[exp(-int_0^tau xi + u xi_tau)] = exp(-A - B xi_0) for an OU factor.
RiccatiResult riccati_transform(double kappa, double theta, double sigma, double tau, double u,
                                double step = 1e-4);

double affine_bond_price(const AffineModel& m, double t, double T, double delta, const Vec& x, bool left = false);

// exp(-int_(t,T] f(t,u,delta) eta(du)) by quadrature of the model forward curve
double bond_price_from_forwards(const AffineModel& m, double t, double T, double delta, const Vec& x);

// Snapshot of the model curves at (t, x): density sampled on `maturities`,
// atoms at calendar dates >= t.
ForwardCurveField implied_curve(const AffineModel& m, double t, const Vec& x, const std::vector<double>& maturities);

} // namespace mcurve
