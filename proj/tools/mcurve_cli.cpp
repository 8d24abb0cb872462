// mcurve: pricing, curve snapshots, condition checks, simulation and
// market-model embedding from a JSON run config.

#include "mcurve/affine_bridge.hpp"
#include "mcurve/curve.hpp"
#include "mcurve/errors.hpp"
#include "mcurve/market_model.hpp"
#include "mcurve/model_config.hpp"
#include "mcurve/report.hpp"
#include "mcurve/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace mcurve;
using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> tolerance;
    std::optional<unsigned> threads;
};

RunConfig load(const Options& o) {
    RunConfig rc = load_run_config(o.config);
    if (o.seed) rc.check.seed = rc.simulate.seed = rc.embed.seed = *o.seed;
    if (o.paths) rc.simulate.n_paths = rc.embed.round_trip_paths = *o.paths;
    if (o.tolerance) {
        if (!(*o.tolerance > 0.0)) throw ConfigError("--tolerance must be > 0");
        rc.check.tolerance = rc.embed.tolerance = *o.tolerance;
    }
    if (o.threads) rc.simulate.threads = *o.threads;
    return rc;
}

const AffineModel& affine(const RunConfig& rc, const char* cmd) {
    if (!rc.model) throw ConfigError(std::string(cmd) + " needs an affine model family, got '" + rc.family + "'");
    return *rc.model;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << text;
    if (!f) throw ConfigError("write to '" + path + "' failed");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int cmd_price(const Options& o) {
    const RunConfig rc = load(o);
    const AffineModel& m = affine(rc, "price");
    std::ostringstream out;
    out << "delta,T,P,L";
    for (double K : rc.price.strikes) out << ",FRA(K=" << fmt(K) << ")";
    out << "\n";
    std::vector<double> deltas{0.0};
    for (double d : m.tenors.tenors()) deltas.push_back(d);
    for (double delta : deltas) {
        for (double T : rc.price.maturities) {
            if (!(T >= 0.0)) throw ConfigError("price maturities must be >= 0");
            const double P = affine_bond_price(m, 0.0, T, delta, m.x0);
            out << fmt(delta) << "," << fmt(T) << "," << fmt(P);
            if (delta == 0.0) {
                out << ",";
                for (std::size_t k = 0; k < rc.price.strikes.size(); ++k) out << ",";
            } else {
                const double S = m.spread0.at(delta);
                const double Pn = affine_bond_price(m, 0.0, T + delta, 0.0, m.x0);
                out << "," << fmt(forward_ibor_rate(S, P, Pn, delta));
                for (double K : rc.price.strikes) out << "," << fmt(fra_price(S, P, Pn, delta, K));
            }
            out << "\n";
        }
    }
    emit(out.str(), o.out);
    return kPass;
}

int cmd_curve(const Options& o) {
    const RunConfig rc = load(o);
    const AffineModel& m = affine(rc, "curve");
    const ForwardCurveField field = implied_curve(m, rc.curve.t, m.x0, rc.curve.maturities);
    std::ostringstream out;
    write_curve_csv(field, out);
    emit(out.str(), o.out);
    return kPass;
}

json market_header(const RunConfig& rc, const char* cmd) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = cmd;
    j["family"] = rc.family;
    return j;
}

HJMCheckGrid market_grid(const MarketModelSpec& mm, const CheckRequest& c, const std::vector<Vec>& states) {
    const double horizon = mm.dates.back() + mm.delta;
    return make_check_grid(mm.ois.cal, horizon, c.grid, states, c.eps);
}

void append(CheckSuite& dst, const CheckSuite& src, const std::string& prefix) {
    for (auto c : src.conditions) {
        c.name = prefix + c.name;
        dst.conditions.push_back(c);
    }
    for (const auto& n : src.notes) dst.notes.push_back(prefix + n);
}

int cmd_check(const Options& o) {
    const RunConfig rc = load(o);
    const double tol = rc.check.tolerance;
    CheckSuite suite;
    if (rc.kind == ConfigKind::Affine) {
        const AffineModel& m = *rc.model;
        AffineCheckOptions opt;
        opt.grid = rc.check.grid;
        opt.states = rc.check.states;
        opt.seed = rc.check.seed;
        suite = run_affine_checks(m, opt);
        // the same model through the general checker
        const HJMModelSpec h = to_hjm_spec(m);
        const auto states = random_states(m, rc.check.states, rc.check.seed);
        const double horizon = m.params.count("horizon") ? m.params.at("horizon") : m.cal.horizon();
        append(suite, check_hjm_conditions(h, make_check_grid(m.cal, horizon, rc.check.grid, states, rc.check.eps)),
               "general:");
        if (m.tenors.empty()) suite.notes.push_back("no tenors configured: only delta = 0 was checked");
    } else {
        const MarketModelSpec mm = build_gaussian_market_model(*rc.market);
        if (rc.kind == ConfigKind::MarketModel) {
            suite = check_market_model_conditions(mm, market_grid(mm, rc.check, market_states(mm, rc.check.states, rc.check.seed)));
        } else {
            const HJMModelSpec emb = embed_market_model(mm);
            const auto states = embedded_check_states(mm, rc.check.states, rc.check.seed);
            suite = check_hjm_conditions(emb, make_check_grid(emb.cal, emb.cal.horizon(), rc.check.grid, states, rc.check.eps));
            suite.conditions.push_back(verify_embedded_values(rc.embedded, mm, emb));
        }
    }
    json j = to_json(suite, tol);
    j["command"] = "check";
    j["family"] = rc.family;
    if (!rc.perturb.empty()) j["perturb"] = rc.perturb;
    emit(j.dump(2) + "\n", o.out);
    const bool ok = suite.pass(tol);
    if (!ok) {
        std::string names;
        for (const auto& n : suite.failing(tol)) names += (names.empty() ? "" : ", ") + n;
        std::cerr << "check failed: " << names << "\n";
    }
    return ok ? kPass : kFail;
}

int cmd_simulate(const Options& o) {
    const RunConfig rc = load(o);
    const AffineModel& m = affine(rc, "simulate");
    const SimulateRequest& s = rc.simulate;
    const double horizon = s.horizon ? *s.horizon : std::min(5.0, m.cal.horizon());
    SimulationPlan plan = SimulationPlan::uniform(m, horizon, s.steps, s.n_paths, s.seed);
    plan.threads = s.threads;
    plan.numeraire_drift = s.numeraire_drift;
    plan.validate(m.cal);
    const PathEnsemble ens = simulate(m, plan);

    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "simulate";
    j["family"] = rc.family;
    j["seed"] = s.seed;
    j["n_paths"] = s.n_paths;
    j["method"] = ens.method;
    j["numeraire_drift"] = s.numeraire_drift;
    j["z_threshold"] = s.z_threshold;
    bool ok = true;
    auto& mj = j["martingale"] = json::array();
    auto& sj = j["scheduled_jumps"] = json::array();
    for (const Asset& a : s.assets) {
        if (a.T > horizon) throw ConfigError("asset " + a.label() + " matures after the simulation horizon");
        const MartingaleReport r = martingale_test(m, ens, a, s.check_times);
        ok = ok && !(r.max_abs_z > s.z_threshold);
        mj.push_back(to_json(r));
        for (std::size_t n = 0; n < m.cal.size(); ++n) {
            if (m.cal[n] > a.T || ens.time_index(m.cal[n]) < 0) continue;
            const ScheduledJumpReport jr = scheduled_jump_test(m, ens, a, static_cast<int>(n), s.bins);
            ok = ok && !(std::abs(jr.z) > s.z_threshold);
            sj.push_back(to_json(jr));
        }
    }
    j["pass"] = ok;

    if (o.out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::filesystem::create_directories(o.out);
        emit(j.dump(2) + "\n", (std::filesystem::path(o.out) / "martingale.json").string());
        if (s.export_paths > 0)
            write_ensemble_csv(ens, (std::filesystem::path(o.out) / "ensemble.csv").string(), s.export_paths);
    }
    return ok ? kPass : kFail;
}

int cmd_embed(const Options& o) {
    const RunConfig rc = load(o);
    if (rc.kind != ConfigKind::MarketModel) throw ConfigError("embed needs a gaussian_market_model config");
    const GaussianMarketParams& p = *rc.market;
    const MarketModelSpec mm = build_gaussian_market_model(p);
    HJMModelSpec emb;
    try {
        emb = embed_market_model(mm);
    } catch (const DomainError& e) {
        throw DomainError(std::string("embedding-domain error: ") + e.what());
    }
    const double tol = rc.embed.tolerance;

    CheckSuite pre = check_market_model_conditions(mm, market_grid(mm, rc.check, market_states(mm, rc.check.states, rc.check.seed)));
    const auto states = embedded_check_states(mm, rc.check.states, rc.check.seed);
    CheckSuite post = check_hjm_conditions(emb, make_check_grid(emb.cal, emb.cal.horizon(), rc.check.grid, states, rc.check.eps));

    const auto times = market_time_grid(p, rc.embed.steps_per_period);
    const MarketPaths paths = simulate_gaussian_market(p, times, rc.embed.round_trip_paths, rc.embed.seed);
    const RoundTripReport rt = embedding_round_trip(mm, emb, paths);
    const bool det = std::all_of(p.sigma.begin(), p.sigma.end(), [](double s) { return s == 0.0; }) &&
                     std::all_of(p.jump_sd.begin(), p.jump_sd.end(), [](double s) { return s == 0.0; });
    const double rt_tol = det ? 1e-8 : rc.embed.round_trip_tolerance;

    const json spec = export_embedding(p, emb, rc.check);
    json j = market_header(rc, "embed");
    j["market_model"] = to_json(pre, tol);
    j["embedded"] = to_json(post, tol);
    j["round_trip"] = {{"paths", rc.embed.round_trip_paths},
                       {"seed", rc.embed.seed},
                       {"grid_points", times.size()},
                       {"max_rel_error", rt.max_rel_error},
                       {"max_abs_error", rt.max_abs_error},
                       {"points", rt.points},
                       {"tolerance", rt_tol},
                       {"pass", rt.max_rel_error <= rt_tol}};
    j["notes"] = json::array({"canonical embedding: H^delta = 0, L^delta = 0; other choices of the spread "
                              "coefficients give the same Ibor rates"});
    const bool ok = pre.pass(tol) && post.pass(tol) && rt.max_rel_error <= rt_tol;
    j["pass"] = ok;
    if (o.out.empty()) {
        j["spec"] = spec;
    } else {
        emit(spec.dump(2) + "\n", o.out);
        j["spec_file"] = o.out;
    }
    std::cout << j.dump(2) << "\n";
    if (!ok) std::cerr << "embed: verification failed\n";
    return ok ? kPass : kFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-curve HJM toolkit"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config,-c", o.config, "run config (JSON)")->required();
        sub->add_option("--out,-o", o.out, "output file (directory for simulate)");
        sub->add_option("--seed", o.seed, "override every seed in the config");
        sub->add_option("--paths", o.paths, "override the number of paths");
        sub->add_option("--tolerance", o.tolerance, "override the check tolerance");
        sub->add_option("--threads", o.threads, "simulation threads (0 = all cores)");
    };
    std::function<int(const Options&)> run;
    const std::vector<std::pair<const char*, std::pair<const char*, int (*)(const Options&)>>> cmds{
        {"price", {"bond prices, Ibor rates and FRA values at time 0 (CSV)", cmd_price}},
        {"curve", {"forward-curve snapshot (CSV)", cmd_curve}},
        {"check", {"drift and jump conditions (JSON report)", cmd_check}},
        {"simulate", {"Monte Carlo martingale and scheduled-jump tests", cmd_simulate}},
        {"embed", {"HJM form of a market model", cmd_embed}}};
    for (const auto& [name, info] : cmds) {
        CLI::App* sub = app.add_subcommand(name, info.first);
        add_common(sub);
        auto fn = info.second;
        sub->callback([&run, fn] { run = fn; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }
    try {
        return run(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
    } catch (const UnsupportedLawError& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
    } catch (const NotImplementedError& e) {
        std::cerr << "not implemented: " << e.what() << "\n";
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kConfigError;
}
