#pragma once

#include "mcurve/affine.hpp"
#include "mcurve/calendar.hpp"
#include "mcurve/report.hpp"

#include <functional>
#include <map>
#include <vector>

namespace mcurve {

// Law of a jump mark. Gaussian marks are z ~ N(0, I_dim) and are integrated
// with tensor Gauss-Hermite (64 nodes, dim <= 3); discrete marks are summed.
struct MarkLaw {
    enum class Kind { Deterministic, Gaussian, Discrete };
    Kind kind = Kind::Deterministic;
    int dim = 0;
    std::vector<Vec> nodes;
    std::vector<double> probs;

    static MarkLaw deterministic();
    static MarkLaw gaussian(int dim);
    static MarkLaw discrete(std::vector<Vec> nodes, std::vector<double> probs);

    // (node, weight) pairs; weights sum to 1
    std::vector<std::pair<Vec, double>> support() const;
    double expect(const std::function<double(const Vec&)>& f) const;
    void validate() const;
};

using RateFn = std::function<double(double t, const Vec& x)>;
using VecRateFn = std::function<Vec(double t, const Vec& x)>;
using MarkFn = std::function<double(double t, const Vec& x, const Vec& mark)>;
using DateFn = std::function<double(int n, const Vec& x_left, const Vec& z)>;
using CoefFn = std::function<double(double t, double T, const Vec& x)>;
using VolFn = std::function<Vec(double t, double T, const Vec& x)>;
using JumpCoefFn = std::function<double(double t, const Vec& mark, double T, const Vec& x)>;
using ShiftFn = std::function<double(int n, double T, const Vec& x_left, const Vec& z)>;

// Forward-rate dynamics of one tenor (0 = OIS). Unset functions are zero.
struct CurveBlock {
    StateCurveFn f;  // f(t,T,delta) as a function of the state
    CoefFn a;
    VolFn b;
    JumpCoefFn g;
    ShiftFn dV;      // Delta V(T_n, T, delta)
};

// Spread S^delta = S_0 E(int alpha dt + H dW + L^delta * (mu - nu) + sum Delta A)
struct TenorBlock {
    RateFn alpha;
    VecRateFn H;
    MarkFn L;
    DateFn dA;
};

// General model given by state-feedback coefficient functions. Continuous
// jumps have compensator intensity(t,x) * jump_law(dx); scheduled jumps at
// date n are driven by a mark z drawn from scheduled_law(n) independently of
// F_{T_n-}.
struct HJMModelSpec {
    std::string label;
    int d = 1; // Brownian dimension
    DiscontinuityCalendar cal;
    std::vector<double> tenors; // delta > 0
    Vec x0;
    std::map<double, double> spread0;

    // numeraire X^0 = exp(int r dt) E(int H dW + L * (mu - nu) + sum Delta B)
    RateFn r;
    VecRateFn H;
    MarkFn L;
    DateFn dB;

    RateFn intensity;
    MarkLaw jump_law;
    std::map<int, MarkLaw> scheduled;
    MarkLaw default_scheduled = MarkLaw::deterministic();

    std::map<double, CurveBlock> curve; // keys 0 and every tenor
    std::map<double, TenorBlock> tenor; // keys = tenors

    const MarkLaw& scheduled_law(int n) const;
    std::vector<double> tenors_with_ois() const;
    void validate() const;

    // coefficient evaluation with zero defaults
    double eval_r(double t, const Vec& x) const;
    Vec eval_H(double t, const Vec& x) const;
    double eval_L(double t, const Vec& x, const Vec& m) const;
    double eval_dB(int n, const Vec& x, const Vec& z) const;
    double eval_intensity(double t, const Vec& x) const;
    double forward(double t, double T, double delta, const Vec& x, bool left = false) const;
    double eval_a(double delta, double t, double T, const Vec& x) const;
    Vec eval_b(double delta, double t, double T, const Vec& x) const;
    double eval_g(double delta, double t, const Vec& m, double T, const Vec& x) const;
    double eval_dV(double delta, int n, double T, const Vec& x, const Vec& z) const;
    double eval_alpha(double delta, double t, const Vec& x) const;
    Vec eval_Hd(double delta, double t, const Vec& x) const;
    double eval_Ld(double delta, double t, const Vec& x, const Vec& m) const;
    double eval_dA(double delta, int n, const Vec& x, const Vec& z) const;

    // int_[t,T] a eta and int_[t,T] b eta
    double abar(double delta, double t, double T, const Vec& x) const;
    Vec bbar(double delta, double t, double T, const Vec& x) const;
    double gbar(double delta, double t, const Vec& m, double T, const Vec& x) const;
    // int_(T_n,T] Delta V(T_n,u,delta) eta(du)
    double dV_integral(double delta, int n, double T, const Vec& x, const Vec& z) const;
    // exp(-int_(t,T] f(t,u,delta) eta(du))
    double bond(double t, double T, double delta, const Vec& x, bool left = false) const;
};

struct HJMCheckGrid {
    std::vector<double> t;    // evaluation times, none on a calendar date
    std::vector<double> T;    // maturities (calendar dates are added for (iii)/(iv))
    std::vector<Vec> states;
};

// Equidistant t/T grid with calendar dates moved by eps, plus the given states.
HJMCheckGrid make_check_grid(const DiscontinuityCalendar& cal, double horizon, int n, std::vector<Vec> states,
                             double eps = 1e-9);

// Conditions "hjm(i)", "hjm_r", "hjm_s", "hjm(ii)", "hjm(iii)", "hjm(iv)",
// "integrability" (int |Lambda| lambda finite) and "assumptions" (L, Delta B,
// L^delta, Delta A^delta > -1 on the mark support).
CheckSuite check_hjm_conditions(const HJMModelSpec& spec, const HJMCheckGrid& grid);

// dQ'/dQ = E(-theta dW - psi * (mu - nu) - sum Y_n 1_{[T_n, oo)})
struct MeasureChangeSpec {
    VecRateFn theta;
    MarkFn psi; // < 1
    DateFn Y;   // < 1, E[Y_n | F_{T_n-}] = 0
};

// Risk-neutral conditions for the OIS bank account under Q'. The spec's own
// numeraire block must be trivial. Conditions "elmm_r", "elmm_s", "elmm(ii)",
// "elmm(iii)", "elmm(iv)", "elmm_mean_Y", "integrability".
// Throws ConfigError when psi >= 1 or Y >= 1 on the mark support.
CheckSuite check_elmm_conditions(const HJMModelSpec& spec, const MeasureChangeSpec& change, const HJMCheckGrid& grid);

// The same model under Q with numeraire exp(int r) / Z': H = theta,
// L = psi / (1 - psi), Delta B = Y / (1 - Y), r + |theta|^2 + int psi^2/(1-psi).
HJMModelSpec elmm_equivalent_numeraire(const HJMModelSpec& spec, const MeasureChangeSpec& change);

// Numeraire P(., T*) / P(0, T*) expressed through (r, H, L, Delta B).
HJMModelSpec terminal_bond_numeraire(const HJMModelSpec& spec, double T_star);

} // namespace mcurve
