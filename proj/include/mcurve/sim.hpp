#pragma once

#include "mcurve/affine.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mcurve {

// SplitMix64 stream keyed by (seed, path). Path p draws the same numbers
// whatever the thread layout.
class PathRng {
public:
    using result_type = std::uint64_t;
    PathRng(std::uint64_t seed, std::uint64_t path);
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

private:
    std::uint64_t state_;
};

struct SimulationPlan {
    std::vector<double> times; // sorted; times[0] is the start time
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::uint64_t path_offset = 0; // simulate paths [offset, offset + n_paths)
    unsigned threads = 1;          // 0 = hardware concurrency
    double numeraire_drift = 0.0;  // extra drift of log X^0 per year (violation injection)
    std::optional<Vec> x_start;    // state at times[0]; default X_0
    double euler_step = 1e-3;      // sub-step of the fallback scheme

    // equidistant grid on [0, horizon] merged with every calendar date <= horizon
    static SimulationPlan uniform(const AffineModel& m, double horizon, int steps, std::size_t n_paths,
                                  std::uint64_t seed);
    // throws ConfigError on empty/unsorted grids, n_paths == 0 or a missing calendar date
    void validate(const DiscontinuityCalendar& cal) const;
};

struct PathEnsemble {
    int d = 0;
    std::size_t n_paths = 0;
    std::vector<double> times;
    std::vector<int> date_slot; // per time index: slot of the left-limit record, -1 if not a calendar date
    std::size_t n_slots = 0;
    std::string method;         // "exact" or "euler"
    std::uint64_t seed = 0;
    std::uint64_t path_offset = 0;
    double numeraire_drift = 0.0;
    Vec x0;
    std::map<double, double> spread0;
    std::map<double, Vec> psi_tenor;

    std::vector<double> x;           // [path][time][coord]
    std::vector<double> x_left;      // [path][slot][coord]
    std::vector<double> log_num;     // [path][time]
    std::vector<double> log_num_left;// [path][slot]

    std::size_t n_times() const { return times.size(); }
    bool is_date(std::size_t k) const { return date_slot[k] >= 0; }
    Vec state(std::size_t p, std::size_t k, bool left = false) const;
    double numeraire(std::size_t p, std::size_t k, bool left = false) const;
    // S^delta_t = S^delta_0 exp(psi^delta . (X_t - X_0))
    double spread(std::size_t p, std::size_t k, double delta, bool left = false) const;
    int time_index(double t) const; // exact match or -1
};

PathEnsemble simulate(const AffineModel& m, const SimulationPlan& plan);

struct Asset {
    enum class Kind { OisBond, FraLeg };
    Kind kind = Kind::OisBond;
    double T = 1.0;
    double delta = 0.0;
    std::string label() const;
    // X^0-undiscounted value at (t, x); fra_leg is S^delta P(t,T,delta) on multi-curve
    // models and P(t,T) - P(t,T+delta) on single-curve ones.
    double value(const AffineModel& m, double t, const Vec& x, double spread, bool left) const;
};

struct MartingaleRow {
    double t = 0.0;
    double mean = 0.0;
    double se = 0.0;
    double initial = 0.0;
    double z = 0.0;
};

struct MartingaleReport {
    std::string asset;
    std::size_t n_paths = 0;
    std::vector<MartingaleRow> rows;
    double max_abs_z = 0.0;
    bool degenerate = false; // fewer than 100 paths
    std::vector<std::string> warnings;
};

// Check times default to the grid times in (t0, T].
MartingaleReport martingale_test(const AffineModel& m, const PathEnsemble& ens, const Asset& asset,
                                 const std::vector<double>& check_times = {});

struct JumpBin {
    double lo = 0.0, hi = 0.0;
    std::size_t count = 0;
    double mean = 0.0, se = 0.0, z = 0.0;
    bool suppressed = false;
};

struct ScheduledJumpReport {
    int n = 0;
    double date = 0.0;
    std::string asset;
    std::size_t n_paths = 0;
    double mean = 0.0, se = 0.0, z = 0.0;
    std::vector<JumpBin> bins;
};

// Discounted value at T_n minus its left limit, overall and in quantile bins of
// the pre-jump driving factor.
ScheduledJumpReport scheduled_jump_test(const AffineModel& m, const PathEnsemble& ens, const Asset& asset, int n,
                                        int n_bins = 5);

nlohmann::json to_json(const MartingaleReport& r);
nlohmann::json to_json(const ScheduledJumpReport& r);

// path,time,left,x0..x{d-1},numeraire,S_<delta>...; at most max_paths paths
void write_ensemble_csv(const PathEnsemble& ens, const std::string& path, std::size_t max_paths);

// sum in a fixed binary-tree order
double pairwise_sum(const double* v, std::size_t n);

// (mean, standard error) with pairwise sums
std::pair<double, double> mean_se(const std::vector<double>& v);

} // namespace mcurve
