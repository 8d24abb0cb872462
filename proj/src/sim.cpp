#include "mcurve/sim.hpp"

#include "mcurve/errors.hpp"
#include "mcurve/ou.hpp"
#include "mcurve/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

namespace mcurve {

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) {
    std::uint64_t a = seed, b = path ^ 0xD1B54A32D192ED03ULL;
    state_ = splitmix(a) ^ splitmix(b);
}

PathRng::result_type PathRng::operator()() { return splitmix(state_); }

SimulationPlan SimulationPlan::uniform(const AffineModel& m, double horizon, int steps, std::size_t n_paths,
                                       std::uint64_t seed) {
    if (steps < 1) throw ConfigError("simulation needs at least one step");
    if (!(horizon > 0.0)) throw ConfigError("simulation horizon must be > 0");
    SimulationPlan p;
    for (int k = 0; k <= steps; ++k) p.times.push_back(horizon * k / steps);
    p.times.back() = horizon;
    for (double d : m.cal.dates())
        if (d <= horizon) p.times.push_back(d);
    std::sort(p.times.begin(), p.times.end());
    p.times.erase(std::unique(p.times.begin(), p.times.end()), p.times.end());
    p.n_paths = n_paths;
    p.seed = seed;
    return p;
}

void SimulationPlan::validate(const DiscontinuityCalendar& cal) const {
    if (n_paths == 0) throw ConfigError("n_paths must be >= 1");
    if (times.size() < 2) throw ConfigError("simulation grid needs at least two times");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!std::isfinite(times[k]) || times[k] < 0.0) throw ConfigError("grid times must be finite and >= 0");
        if (k > 0 && !(times[k - 1] < times[k])) throw ConfigError("grid times must be strictly increasing");
    }
    for (double d : cal.dates()) {
        if (d <= times.front() || d > times.back()) continue;
        if (!std::binary_search(times.begin(), times.end(), d))
            throw ConfigError("simulation grid is missing calendar date " + std::to_string(d));
    }
    if (!(euler_step > 0.0)) throw ConfigError("euler_step must be > 0");
}

Vec PathEnsemble::state(std::size_t p, std::size_t k, bool left) const {
    const std::size_t nt = times.size();
    if (left && date_slot[k] >= 0) {
        const double* src = &x_left[(p * n_slots + static_cast<std::size_t>(date_slot[k])) * d];
        return Eigen::Map<const Vec>(src, d);
    }
    return Eigen::Map<const Vec>(&x[(p * nt + k) * d], d);
}

double PathEnsemble::numeraire(std::size_t p, std::size_t k, bool left) const {
    if (left && date_slot[k] >= 0) return std::exp(log_num_left[p * n_slots + static_cast<std::size_t>(date_slot[k])]);
    return std::exp(log_num[p * times.size() + k]);
}

double PathEnsemble::spread(std::size_t p, std::size_t k, double delta, bool left) const {
    auto s0 = spread0.find(delta);
    auto psi = psi_tenor.find(delta);
    if (s0 == spread0.end() || psi == psi_tenor.end()) throw ConfigError("no spread for this tenor");
    return s0->second * std::exp(psi->second.dot(state(p, k, left) - x0));
}

int PathEnsemble::time_index(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t) return -1;
    return static_cast<int>(it - times.begin());
}

namespace {

struct StepKernel {
    double dt = 0.0;
    std::vector<double> e, h;       // per OU factor
    std::vector<double> de, dh;     // per decay
    Mat C;                          // sqrt of the (level, integral) covariance
};

void simulate_exact_path(const AffineModel& m, const SimulationPlan& plan, const std::vector<StepKernel>& ker,
                         PathEnsemble& ens, std::size_t p) {
    const auto& dyn = m.dynamics;
    const int d = ens.d;
    const std::size_t nt = ens.times.size();
    PathRng rng(plan.seed, plan.path_offset + p);
    std::normal_distribution<double> nd;
    Vec x = plan.x_start ? *plan.x_start : m.x0;
    double ln = 0.0;
    const Vec& w = m.load.rate_integral_weights;
    auto store = [&](std::size_t k) {
        std::copy(x.data(), x.data() + d, &ens.x[(p * nt + k) * d]);
        ens.log_num[p * nt + k] = ln;
    };
    auto store_left = [&](std::size_t k, const Vec& xl, double lnl) {
        const auto s = static_cast<std::size_t>(ens.date_slot[k]);
        std::copy(xl.data(), xl.data() + d, &ens.x_left[(p * ens.n_slots + s) * d]);
        ens.log_num_left[p * ens.n_slots + s] = lnl;
    };
    store(0);
    if (ens.date_slot[0] >= 0) store_left(0, x, ln);
    Vec z;
    for (std::size_t k = 0; k + 1 < nt; ++k) {
        const StepKernel& K = ker[k];
        Vec xn = x;
        if (dyn.clock >= 0) xn(dyn.clock) += K.dt;
        for (std::size_t j = 0; j < dyn.factors.size(); ++j) {
            const auto& f = dyn.factors[j];
            const double dev = x(f.level) - f.theta;
            xn(f.level) = f.theta + dev * K.e[j];
            xn(f.integral) = x(f.integral) + f.theta * K.dt + dev * K.h[j];
        }
        if (K.C.cols() > 0) {
            z.resize(K.C.cols());
            for (int r = 0; r < z.size(); ++r) z(r) = nd(rng);
            Vec shock = K.C * z;
            for (std::size_t j = 0; j < dyn.factors.size(); ++j) {
                xn(dyn.factors[j].level) += shock(2 * j);
                xn(dyn.factors[j].integral) += shock(2 * j + 1);
            }
        }
        for (std::size_t j = 0; j < dyn.decays.size(); ++j) {
            const auto& c = dyn.decays[j];
            const double J = x(c.level);
            xn(c.level) = J * K.de[j];
            xn(c.integral) = x(c.integral) + J * K.dh[j];
        }
        if (w.size() == d) ln += w.dot(xn - x);
        ln += plan.numeraire_drift * K.dt;
        x = xn;
        const std::size_t k1 = k + 1;
        if (ens.date_slot[k1] >= 0) {
            const int n = m.cal.index_of(ens.times[k1]);
            store_left(k1, x, ln);
            auto sj = m.ch.scheduled.find(n);
            if (sj != m.ch.scheduled.end()) {
                Vec zz(sj->second.noise_dim);
                for (int r = 0; r < zz.size(); ++r) zz(r) = nd(rng);
                Vec dx = sj->second.delta_x(zz, x);
                auto pj = m.load.psi_jump.find(n);
                if (pj != m.load.psi_jump.end()) ln += pj->second.dot(dx);
                x += dx;
            }
        }
        store(k1);
    }
}

void simulate_euler_path(const AffineModel& m, const SimulationPlan& plan, PathEnsemble& ens, std::size_t p) {
    const int d = ens.d;
    const std::size_t nt = ens.times.size();
    PathRng rng(plan.seed, plan.path_offset + p);
    std::normal_distribution<double> nd;
    Vec x = plan.x_start ? *plan.x_start : m.x0;
    double ln = 0.0;
    auto store = [&](std::size_t k) {
        std::copy(x.data(), x.data() + d, &ens.x[(p * nt + k) * d]);
        ens.log_num[p * nt + k] = ln;
    };
    store(0);
    if (ens.date_slot[0] >= 0) {
        const auto s = static_cast<std::size_t>(ens.date_slot[0]);
        std::copy(x.data(), x.data() + d, &ens.x_left[(p * ens.n_slots + s) * d]);
        ens.log_num_left[p * ens.n_slots + s] = ln;
    }
    Vec z(d);
    for (std::size_t k = 0; k + 1 < nt; ++k) {
        const double t0 = ens.times[k], dt = ens.times[k + 1] - t0;
        const int sub = std::max(1, static_cast<int>(std::ceil(dt / plan.euler_step)));
        const double h = dt / sub;
        for (int s = 0; s < sub; ++s) {
            const double t = t0 + s * h;
            Mat C = psd_sqrt(m.ch.diffusion(x));
            Vec dx = m.ch.drift(x) * h;
            if (C.cols() > 0) {
                Vec zz(C.cols());
                for (int r = 0; r < zz.size(); ++r) zz(r) = nd(rng);
                dx += C * zz * std::sqrt(h);
            }
            ln += (m.load.short_rate(t, x) + plan.numeraire_drift) * h;
            x += dx;
        }
        const std::size_t k1 = k + 1;
        if (ens.date_slot[k1] >= 0) {
            const int n = m.cal.index_of(ens.times[k1]);
            const auto sl = static_cast<std::size_t>(ens.date_slot[k1]);
            std::copy(x.data(), x.data() + d, &ens.x_left[(p * ens.n_slots + sl) * d]);
            ens.log_num_left[p * ens.n_slots + sl] = ln;
            auto sj = m.ch.scheduled.find(n);
            if (sj != m.ch.scheduled.end()) {
                Vec zz(sj->second.noise_dim);
                for (int r = 0; r < zz.size(); ++r) zz(r) = nd(rng);
                Vec dx = sj->second.delta_x(zz, x);
                auto pj = m.load.psi_jump.find(n);
                if (pj != m.load.psi_jump.end()) ln += pj->second.dot(dx);
                x += dx;
            }
        }
        store(k1);
    }
}

} // namespace

PathEnsemble simulate(const AffineModel& m, const SimulationPlan& plan) {
    plan.validate(m.cal);
    for (std::size_t i = 0; i < m.ch.mu.size(); ++i)
        if (m.ch.mu[i]) throw NotImplementedError("simulation of continuous-time jump measures is not supported");
    if (plan.x_start && plan.x_start->size() != m.dim()) throw ConfigError("x_start has the wrong dimension");

    PathEnsemble ens;
    ens.d = m.dim();
    ens.n_paths = plan.n_paths;
    ens.times = plan.times;
    ens.seed = plan.seed;
    ens.path_offset = plan.path_offset;
    ens.numeraire_drift = plan.numeraire_drift;
    ens.x0 = m.x0;
    ens.spread0 = m.spread0;
    ens.psi_tenor = m.load.psi_tenor;
    ens.method = m.dynamics.available() ? "exact" : "euler";
    const std::size_t nt = ens.times.size();
    ens.date_slot.assign(nt, -1);
    for (std::size_t k = 0; k < nt; ++k)
        if (m.cal.contains(ens.times[k])) ens.date_slot[k] = static_cast<int>(ens.n_slots++);
    const auto d = static_cast<std::size_t>(ens.d);
    ens.x.assign(plan.n_paths * nt * d, 0.0);
    ens.log_num.assign(plan.n_paths * nt, 0.0);
    ens.x_left.assign(plan.n_paths * ens.n_slots * d, 0.0);
    ens.log_num_left.assign(plan.n_paths * ens.n_slots, 0.0);

    std::vector<StepKernel> ker;
    if (ens.method == "exact") {
        const auto& dyn = m.dynamics;
        std::vector<OUParams> fp;
        for (const auto& f : dyn.factors) fp.push_back({f.kappa, f.theta, f.sigma});
        for (std::size_t k = 0; k + 1 < nt; ++k) {
            StepKernel K;
            K.dt = ens.times[k + 1] - ens.times[k];
            for (const auto& f : dyn.factors) {
                K.e.push_back(std::exp(-f.kappa * K.dt));
                K.h.push_back(hfun(f.kappa, K.dt));
            }
            for (const auto& c : dyn.decays) {
                K.de.push_back(std::exp(-c.kappa * K.dt));
                K.dh.push_back(hfun(c.kappa, K.dt));
            }
            K.C = fp.empty() ? Mat(0, 0) : psd_sqrt(ou_step_covariance(fp, dyn.corr, K.dt));
            ker.push_back(std::move(K));
        }
    }

    unsigned threads = plan.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : plan.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, plan.n_paths));
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            if (ens.method == "exact")
                simulate_exact_path(m, plan, ker, ens, p);
            else
                simulate_euler_path(m, plan, ens, p);
        }
    };
    if (threads <= 1) {
        work(0, plan.n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (plan.n_paths + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            std::size_t lo = t * chunk, hi = std::min(plan.n_paths, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return ens;
}

std::string Asset::label() const {
    char buf[96];
    if (kind == Kind::OisBond)
        std::snprintf(buf, sizeof buf, "ois_bond(T=%g)", T);
    else
        std::snprintf(buf, sizeof buf, "fra_leg(T=%g,delta=%g)", T, delta);
    return buf;
}

double Asset::value(const AffineModel& m, double t, const Vec& x, double spread, bool left) const {
    if (t > T) throw DomainError("asset evaluated after its maturity");
    if (kind == Kind::OisBond) return affine_bond_price(m, t, T, 0.0, x, left);
    if (!(delta > 0.0)) throw ConfigError("fra_leg needs delta > 0");
    if (m.tenors.contains(delta)) return spread * affine_bond_price(m, t, T, delta, x, left);
    if (!m.tenors.empty()) throw ConfigError("fra_leg tenor not in the model's tenor set");
    return affine_bond_price(m, t, T, 0.0, x, left) - affine_bond_price(m, t, T + delta, 0.0, x, left);
}

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n == 0) return {0.0, 0.0};
    const double mean = pairwise_sum(v.data(), n) / static_cast<double>(n);
    if (n < 2) return {mean, 0.0};
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

namespace {

double zscore(double diff, double se, double scale) {
    if (se > 0.0) return diff / se;
    return std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(scale)) ? 0.0 : HUGE_VAL;
}

double asset_spread(const AffineModel& m, const PathEnsemble& ens, const Asset& a, std::size_t p, std::size_t k,
                    bool left) {
    if (a.kind == Asset::Kind::FraLeg && m.tenors.contains(a.delta)) return ens.spread(p, k, a.delta, left);
    return 1.0;
}

} // namespace

MartingaleReport martingale_test(const AffineModel& m, const PathEnsemble& ens, const Asset& asset,
                                 const std::vector<double>& check_times) {
    MartingaleReport rep;
    rep.asset = asset.label();
    rep.n_paths = ens.n_paths;
    if (ens.n_paths < 100) {
        rep.degenerate = true;
        rep.warnings.push_back("fewer than 100 paths: z-scores are unreliable");
    }
    std::vector<std::size_t> idx;
    if (check_times.empty()) {
        for (std::size_t k = 1; k < ens.n_times(); ++k)
            if (ens.times[k] <= asset.T) idx.push_back(k);
    } else {
        for (double t : check_times) {
            int k = ens.time_index(t);
            if (k < 0) throw ConfigError("check time " + std::to_string(t) + " is not on the simulation grid");
            if (t > asset.T) throw ConfigError("check time after asset maturity");
            idx.push_back(static_cast<std::size_t>(k));
        }
    }
    const double t0 = ens.times[0];
    double s0 = 1.0;
    if (asset.kind == Asset::Kind::FraLeg && m.tenors.contains(asset.delta)) s0 = ens.spread(0, 0, asset.delta);
    const double init = asset.value(m, t0, ens.state(0, 0), s0, false) / ens.numeraire(0, 0);
    std::vector<double> v(ens.n_paths);
    for (std::size_t k : idx) {
        const double t = ens.times[k];
        for (std::size_t p = 0; p < ens.n_paths; ++p)
            v[p] = asset.value(m, t, ens.state(p, k), asset_spread(m, ens, asset, p, k, false), false) /
                   ens.numeraire(p, k);
        auto [mean, se] = mean_se(v);
        MartingaleRow row{t, mean, se, init, zscore(mean - init, se, init)};
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(row.z));
        rep.rows.push_back(row);
    }
    return rep;
}

ScheduledJumpReport scheduled_jump_test(const AffineModel& m, const PathEnsemble& ens, const Asset& asset, int n,
                                        int n_bins) {
    if (n < 0 || static_cast<std::size_t>(n) >= m.cal.size()) throw ConfigError("calendar index out of range");
    const double Tn = m.cal[static_cast<std::size_t>(n)];
    const int ki = ens.time_index(Tn);
    if (ki < 0 || !ens.is_date(static_cast<std::size_t>(ki))) throw ConfigError("calendar date not on the simulation grid");
    if (asset.T < Tn) throw ConfigError("asset matures before the calendar date");
    const auto k = static_cast<std::size_t>(ki);
    ScheduledJumpReport rep;
    rep.n = n;
    rep.date = Tn;
    rep.asset = asset.label();
    rep.n_paths = ens.n_paths;
    std::vector<double> jump(ens.n_paths), key(ens.n_paths);
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        const Vec xl = ens.state(p, k, true), xp = ens.state(p, k, false);
        const double post = asset.value(m, Tn, xp, asset_spread(m, ens, asset, p, k, false), false) / ens.numeraire(p, k);
        const double pre =
            asset.value(m, Tn, xl, asset_spread(m, ens, asset, p, k, true), true) / ens.numeraire(p, k, true);
        jump[p] = post - pre;
        key[p] = xl(m.driving_factor);
    }
    auto [mean, se] = mean_se(jump);
    rep.mean = mean;
    rep.se = se;
    rep.z = zscore(mean, se, 1.0);

    std::vector<std::size_t> order(ens.n_paths);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    for (int b = 0; b < n_bins; ++b) {
        const std::size_t lo = ens.n_paths * static_cast<std::size_t>(b) / static_cast<std::size_t>(n_bins);
        const std::size_t hi = ens.n_paths * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(n_bins);
        JumpBin bin;
        bin.count = hi - lo;
        if (bin.count > 0) {
            bin.lo = key[order[lo]];
            bin.hi = key[order[hi - 1]];
        }
        if (bin.count < 10) {
            bin.suppressed = true;
        } else {
            std::vector<double> v;
            v.reserve(bin.count);
            for (std::size_t i = lo; i < hi; ++i) v.push_back(jump[order[i]]);
            auto [bm, bs] = mean_se(v);
            bin.mean = bm;
            bin.se = bs;
            bin.z = zscore(bm, bs, 1.0);
        }
        rep.bins.push_back(bin);
    }
    return rep;
}

nlohmann::json to_json(const MartingaleReport& r) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["asset"] = r.asset;
    j["n_paths"] = r.n_paths;
    j["max_abs_z"] = std::isfinite(r.max_abs_z) ? nlohmann::json(r.max_abs_z) : nlohmann::json("inf");
    j["degenerate"] = r.degenerate;
    j["warnings"] = r.warnings;
    auto& rows = j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"t", row.t},
                        {"mean", row.mean},
                        {"se", row.se},
                        {"initial", row.initial},
                        {"z", std::isfinite(row.z) ? nlohmann::json(row.z) : nlohmann::json("inf")}});
    return j;
}

nlohmann::json to_json(const ScheduledJumpReport& r) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["n"] = r.n;
    j["date"] = r.date;
    j["asset"] = r.asset;
    j["n_paths"] = r.n_paths;
    j["mean"] = r.mean;
    j["se"] = r.se;
    j["z"] = std::isfinite(r.z) ? nlohmann::json(r.z) : nlohmann::json("inf");
    auto& bins = j["bins"] = nlohmann::json::array();
    for (const auto& b : r.bins) {
        nlohmann::json row{{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"suppressed", b.suppressed}};
        if (!b.suppressed) {
            row["mean"] = b.mean;
            row["se"] = b.se;
            row["z"] = std::isfinite(b.z) ? nlohmann::json(b.z) : nlohmann::json("inf");
        }
        bins.push_back(row);
    }
    return j;
}

void write_ensemble_csv(const PathEnsemble& ens, const std::string& path, std::size_t max_paths) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "path,time,left";
    for (int i = 0; i < ens.d; ++i) out << ",x" << i;
    out << ",numeraire";
    for (const auto& [delta, s] : ens.spread0) {
        (void)s;
        char buf[48];
        std::snprintf(buf, sizeof buf, ",S_%.17g", delta);
        out << buf;
    }
    out << "\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    const std::size_t np = std::min(max_paths, ens.n_paths);
    for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t k = 0; k < ens.n_times(); ++k) {
            for (int side = ens.is_date(k) ? 1 : 0; side >= 0; --side) {
                const bool left = side == 1;
                Vec x = ens.state(p, k, left);
                out << (ens.path_offset + p) << ',' << num(ens.times[k]) << ',' << (left ? 1 : 0);
                for (int i = 0; i < ens.d; ++i) out << ',' << num(x(i));
                out << ',' << num(ens.numeraire(p, k, left));
                for (const auto& [delta, s] : ens.spread0) {
                    (void)s;
                    out << ',' << num(ens.spread(p, k, delta, left));
                }
                out << '\n';
            }
        }
    }
}

} // namespace mcurve
