#pragma once

#include "mcurve/hjm.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace mcurve {

// Single-tenor market model on settlement dates T_1 < ... < T_N with spacing
// delta. Index i = 0..N-1 refers to T_{i+1}. The OIS block lives on a
// calendar whose first N dates are the settlement dates and whose last date
// is T_N + delta; calendar index n is the date T_{n+1}.
struct MarketModelSpec {
    std::string label;
    double delta = 0.5;
    std::vector<double> dates;
    std::vector<double> L0; // L(0, T_i, delta)
    double L0_prev = 0.0;   // L(0, T_1 - delta, delta)
    Vec x0;
    HJMModelSpec ois;

    std::function<double(double t, int i, const Vec& x, bool left)> L;
    std::function<double(double t, int i, const Vec& x)> aL;
    std::function<Vec(double t, int i, const Vec& x)> bL;
    std::function<double(double t, const Vec& mark, int i, const Vec& x)> gL;
    std::function<double(int n, int i, const Vec& x_left, const Vec& z)> dL;

    // user assertion that P(., T) / X^0 is a true martingale for every OIS maturity
    bool bond_ratio_true_martingale = false;

    int N() const { return static_cast<int>(dates.size()); }
    double eval_aL(double t, int i, const Vec& x) const;
    Vec eval_bL(double t, int i, const Vec& x) const;
    double eval_gL(double t, const Vec& m, int i, const Vec& x) const;
    double eval_dL(int n, int i, const Vec& x, const Vec& z) const;
    // throws ConfigError on a non-equidistant grid or a mismatched OIS calendar
    void validate() const;
};

// OIS conditions (prefixed "ois:"), "market(i)", "market(ii)" and
// "market_integrability". Only grid.t and grid.states are used for the Ibor
// rates; maturities are the settlement dates.
CheckSuite check_market_model_conditions(const MarketModelSpec& spec, const HJMCheckGrid& grid);

// Drift of L(., T, delta) under the (T+delta)-forward measure ("forward_drift")
// and E^{T+delta}[Delta L(T_n, T, delta) | F_{T_n-}] ("forward_jump_mean").
// Refuses with ConfigError unless bond_ratio_true_martingale is set.
CheckSuite check_forward_measure_criterion(const MarketModelSpec& spec, double T, double delta,
                                           const HJMCheckGrid& grid);

// HJM form of the market model on eta = sum of unit atoms at the OIS dates.
// State: the market-model state with the spread S^delta appended. Spread
// coefficients are alpha = H = L = 0; drifts a(., T_i, delta) come from the
// HJM drift condition. Throws DomainError when 1 + delta L(0, T, delta) <= 0.
HJMModelSpec embed_market_model(const MarketModelSpec& spec);

// S_0 = (1 + delta L(0, T_0, delta)) P(0, T_1)
double embedded_spread0(const MarketModelSpec& spec);
Vec embedded_state(const Vec& x, double S);

// L(t, T_i, delta) = (S P(t, T_i, delta) / P(t, T_i + delta) - 1) / delta from the embedded model
double embedded_ibor_rate(const HJMModelSpec& emb, double t, int i, const Vec& x_emb, bool left = false);

// X_0 followed by count - 1 states with L_i moved by 0.005 N(0,1) (deterministic in seed)
std::vector<Vec> market_states(const MarketModelSpec& spec, int count, std::uint64_t seed);
// market_states with the spread appended: S_0 for the first, S_0 exp(0.05 N(0,1)) otherwise
std::vector<Vec> embedded_check_states(const MarketModelSpec& spec, int count, std::uint64_t seed);

// Shifted-lognormal Ibor rates: log(1 + delta L_i) has volatility sigma_i
// along row i of chol(corr) (corr_ij = rho for i != j) and jumps by
// s_n z + m_n at each settlement date T_n <= T_i with z ~ N(0,1). The
// numeraire jumps by exp(f(0,T_n,0) + c z + c^2/2) at every OIS date and OIS
// forwards are deterministic. m_n = s_n c - s_n^2/2 centres the jumps under
// the forward measure; m_n = -s_n^2/2 centres them under Q.
struct GaussianMarketParams {
    double delta = 0.5;
    std::vector<double> dates;
    std::vector<double> L0;
    double L0_prev = 0.0;
    std::vector<double> ois_forwards; // atom values f(0, T_k, 0), N + 1 entries
    std::vector<double> sigma;
    double rho = 0.0;
    std::vector<double> jump_sd; // N entries
    double numeraire_jump = 0.0;
    bool forward_centered = true;

    void validate() const;
};

MarketModelSpec build_gaussian_market_model(const GaussianMarketParams& p);

struct MarketPaths {
    std::vector<double> times;
    std::size_t n_paths = 0;
    int N = 0;
    int d = 0;
    std::vector<double> L;      // [path][time][i], value at t
    std::vector<double> L_left; // [path][time][i], left limit
    std::vector<double> dW;     // [path][time][d], increment over (t_{k-1}, t_k]
    std::vector<double> z;      // [path][time], mark at a settlement or OIS date
    Vec state(std::size_t p, std::size_t k, bool left = false) const;
};

// steps_per_period points per delta on [0, T_N + delta]; contains every OIS date
std::vector<double> market_time_grid(const GaussianMarketParams& p, int steps_per_period);

// Exact simulation on a grid containing every OIS date.
MarketPaths simulate_gaussian_market(const GaussianMarketParams& p, const std::vector<double>& times,
                                     std::size_t n_paths, std::uint64_t seed);

struct RoundTripReport {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t points = 0;
};

// Integrates the embedded forwards f(., T_i, delta) and the spread along the
// simulated paths (Euler with the recorded Brownian increments and marks) and
// compares the implied Ibor rates with the simulated ones at every grid time.
RoundTripReport embedding_round_trip(const MarketModelSpec& mm, const HJMModelSpec& emb, const MarketPaths& paths);

} // namespace mcurve
