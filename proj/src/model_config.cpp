#include "mcurve/model_config.hpp"

#include "mcurve/errors.hpp"
#include "mcurve/report.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace mcurve {

using nlohmann::json;

const std::vector<std::string>& config_families() {
    static const std::vector<std::string> f = [] {
        std::vector<std::string> v = model_families();
        v.push_back("flat");
        v.push_back("gaussian_market_model");
        v.push_back("embedded_market_model");
        return v;
    }();
    return f;
}

namespace {

std::string family_list() {
    std::string s;
    for (const auto& f : config_families()) s += (s.empty() ? "" : ", ") + f;
    return s;
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double num(const json& j, const std::string& what) {
    if (!j.is_number()) throw ConfigError(what + " must be a number");
    return j.get<double>();
}

std::vector<double> nums(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
    std::vector<double> v;
    for (const auto& e : j) v.push_back(num(e, what));
    return v;
}

std::uint64_t count(const json& j, const std::string& what) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(what + " must be an integer");
    if (j.get<long long>() < 0) throw ConfigError(what + " must be >= 0");
    return j.get<std::uint64_t>();
}

void set_param(VasicekParams& p, const std::string& k, double v) {
    static const std::map<std::string, double VasicekParams::*> fields{
        {"kappa1", &VasicekParams::kappa1}, {"theta1", &VasicekParams::theta1}, {"sigma1", &VasicekParams::sigma1},
        {"xi1_0", &VasicekParams::xi1_0},   {"kappa2", &VasicekParams::kappa2}, {"theta2", &VasicekParams::theta2},
        {"sigma2", &VasicekParams::sigma2}, {"xi2_0", &VasicekParams::xi2_0},   {"rho", &VasicekParams::rho},
        {"a", &VasicekParams::a},           {"b", &VasicekParams::b},           {"c", &VasicekParams::c},
        {"kappa3", &VasicekParams::kappa3}, {"spread0", &VasicekParams::spread0}, {"horizon", &VasicekParams::horizon}};
    auto it = fields.find(k);
    if (it == fields.end()) throw ConfigError("unknown model parameter '" + k + "'");
    p.*(it->second) = v;
}

bool known_family(const std::string& f) {
    for (const auto& g : config_families())
        if (g == f) return true;
    return false;
}

} // namespace

AffineModel build_affine_model(const std::string& family, const std::map<std::string, double>& params,
                               const std::vector<double>& tenors, const std::optional<DiscontinuityCalendar>& cal) {
    if (!known_family(family) || family == "gaussian_market_model" || family == "embedded_market_model")
        throw ConfigError("unknown affine model family '" + family + "'; valid families: " + family_list());
    VasicekParams p;
    std::string fam = family;
    if (family == "flat") {
        fam = "vasicek";
        for (const auto& [k, v] : params) {
            if (k == "rate") {
                p.theta1 = v;
                p.xi1_0 = v;
            } else if (k == "horizon" || k == "spread0") {
                set_param(p, k, v);
            } else {
                throw ConfigError("unknown parameter '" + k + "' for family flat (rate, horizon, spread0)");
            }
        }
        p.sigma1 = 0.0;
    } else {
        for (const auto& [k, v] : params) set_param(p, k, v);
    }

    const bool multi = fam == "multicurve_vasicek" || fam == "multicurve_jump";
    if (multi && tenors.size() != 1) throw ConfigError(fam + " needs exactly one tenor");
    if (!multi && !tenors.empty()) throw ConfigError(fam + " is single-curve: tenors must be empty");
    const bool jump = fam == "vasicek_jump" || fam == "multicurve_jump";
    if (!jump && cal && !cal->empty()) throw ConfigError(fam + " has no scheduled jumps: calendar must be empty");

    DiscontinuityCalendar c = cal ? *cal : DiscontinuityCalendar({1.0}, p.horizon);
    if (jump && c.empty()) throw ConfigError(fam + " needs at least one calendar date");
    AffineModel m;
    if (fam == "vasicek") m = build_vasicek_single(p);
    else if (fam == "vasicek_jump") m = build_vasicek_jump(p, c);
    else if (fam == "multicurve_vasicek") m = build_multicurve_vasicek(p, tenors.front());
    else m = build_multicurve_jump(p, tenors.front(), c);
    if (family == "flat") {
        m.family = "flat";
        m.params = {{"rate", p.theta1}, {"horizon", p.horizon}};
    }
    return m;
}

AffineModel build_perturbed_model(const std::string& family, const std::map<std::string, double>& params,
                                  const std::map<std::string, double>& shift, const std::vector<double>& tenors,
                                  const std::optional<DiscontinuityCalendar>& cal) {
    AffineModel base = build_affine_model(family, params, tenors, cal);
    if (shift.empty()) return base;
    std::map<std::string, double> shifted = params;
    for (const auto& [k, v] : shift) {
        if (!std::isfinite(v)) throw ConfigError("perturbation of '" + k + "' must be finite");
        auto it = base.params.find(k);
        if (it == base.params.end()) throw ConfigError("cannot perturb unknown parameter '" + k + "'");
        shifted[k] = it->second + v;
    }
    AffineModel moved = build_affine_model(family, shifted, tenors, cal);
    base.ch = moved.ch;
    base.dynamics = moved.dynamics;
    for (const auto& [k, v] : shift) base.params["perturb." + k] = v;
    return base;
}

json to_json(const GaussianMarketParams& p) {
    return json{{"delta", p.delta},
                {"dates", p.dates},
                {"L0", p.L0},
                {"L0_prev", p.L0_prev},
                {"ois_forwards", p.ois_forwards},
                {"sigma", p.sigma},
                {"rho", p.rho},
                {"jump_sd", p.jump_sd},
                {"numeraire_jump", p.numeraire_jump},
                {"forward_centered", p.forward_centered}};
}

GaussianMarketParams market_params_from_json(const json& j) {
    only_keys(j, "market-model params",
              {"delta", "dates", "L0", "L0_prev", "ois_forwards", "sigma", "rho", "jump_sd", "numeraire_jump",
               "forward_centered"});
    GaussianMarketParams p;
    if (!j.contains("dates") || !j.contains("L0") || !j.contains("ois_forwards"))
        throw ConfigError("market-model params need dates, L0 and ois_forwards");
    if (j.contains("delta")) p.delta = num(j["delta"], "delta");
    p.dates = nums(j["dates"], "dates");
    p.L0 = nums(j["L0"], "L0");
    p.L0_prev = j.contains("L0_prev") ? num(j["L0_prev"], "L0_prev") : (p.L0.empty() ? 0.0 : p.L0.front());
    p.ois_forwards = nums(j["ois_forwards"], "ois_forwards");
    p.sigma = j.contains("sigma") ? nums(j["sigma"], "sigma") : std::vector<double>(p.dates.size(), 0.0);
    p.jump_sd = j.contains("jump_sd") ? nums(j["jump_sd"], "jump_sd") : std::vector<double>(p.dates.size(), 0.0);
    if (j.contains("rho")) p.rho = num(j["rho"], "rho");
    if (j.contains("numeraire_jump")) p.numeraire_jump = num(j["numeraire_jump"], "numeraire_jump");
    if (j.contains("forward_centered")) {
        if (!j["forward_centered"].is_boolean()) throw ConfigError("forward_centered must be a boolean");
        p.forward_centered = j["forward_centered"].get<bool>();
    }
    p.validate();
    return p;
}

namespace {

std::optional<DiscontinuityCalendar> parse_calendar(const json& j, double horizon, const std::string& base_dir) {
    if (j.is_null()) return std::nullopt;
    if (j.is_array()) return DiscontinuityCalendar(nums(j, "calendar"), horizon);
    only_keys(j, "calendar", {"dates", "file", "valuation_date"});
    if (j.contains("dates") == j.contains("file")) throw ConfigError("calendar needs exactly one of dates or file");
    if (j.contains("dates")) {
        if (j.contains("valuation_date")) throw ConfigError("valuation_date applies to calendar files only");
        return DiscontinuityCalendar(nums(j["dates"], "calendar.dates"), horizon);
    }
    if (!j["file"].is_string()) throw ConfigError("calendar.file must be a string");
    std::filesystem::path f = j["file"].get<std::string>();
    if (f.is_relative()) f = std::filesystem::path(base_dir) / f;
    std::optional<std::string> val;
    if (j.contains("valuation_date")) {
        if (!j["valuation_date"].is_string()) throw ConfigError("valuation_date must be an ISO date string");
        val = j["valuation_date"].get<std::string>();
    }
    return read_calendar_csv(f.string(), horizon, val);
}

Asset parse_asset(const json& j) {
    only_keys(j, "simulate.assets[]", {"kind", "T", "delta"});
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("asset kind must be ois_bond or fra_leg");
    Asset a;
    const std::string k = j["kind"].get<std::string>();
    if (k == "ois_bond") a.kind = Asset::Kind::OisBond;
    else if (k == "fra_leg") a.kind = Asset::Kind::FraLeg;
    else throw ConfigError("unknown asset kind '" + k + "' (ois_bond, fra_leg)");
    if (!j.contains("T")) throw ConfigError("asset needs a maturity T");
    a.T = num(j["T"], "asset T");
    if (!(a.T > 0.0)) throw ConfigError("asset maturity must be > 0");
    if (j.contains("delta")) a.delta = num(j["delta"], "asset delta");
    if (a.kind == Asset::Kind::FraLeg && !(a.delta > 0.0)) throw ConfigError("fra_leg needs delta > 0");
    return a;
}

void parse_check(const json& j, CheckRequest& c) {
    only_keys(j, "check", {"grid", "states", "tolerance", "seed", "eps"});
    if (j.contains("grid")) c.grid = static_cast<int>(count(j["grid"], "check.grid"));
    if (j.contains("states")) c.states = static_cast<int>(count(j["states"], "check.states"));
    if (j.contains("tolerance")) c.tolerance = num(j["tolerance"], "check.tolerance");
    if (j.contains("seed")) c.seed = count(j["seed"], "check.seed");
    if (j.contains("eps")) c.eps = num(j["eps"], "check.eps");
    if (c.grid < 2) throw ConfigError("check.grid must be >= 2");
    if (c.states < 1) throw ConfigError("check.states must be >= 1");
    if (!(c.tolerance > 0.0)) throw ConfigError("check.tolerance must be > 0");
    if (!(c.eps > 0.0)) throw ConfigError("check.eps must be > 0");
}

void parse_simulate(const json& j, SimulateRequest& s) {
    only_keys(j, "simulate",
              {"horizon", "steps", "n_paths", "seed", "threads", "assets", "check_times", "export_paths",
               "numeraire_drift", "bins", "z_threshold"});
    if (j.contains("horizon")) s.horizon = num(j["horizon"], "simulate.horizon");
    if (j.contains("steps")) s.steps = static_cast<int>(count(j["steps"], "simulate.steps"));
    if (j.contains("n_paths")) s.n_paths = count(j["n_paths"], "simulate.n_paths");
    if (j.contains("seed")) s.seed = count(j["seed"], "simulate.seed");
    if (j.contains("threads")) s.threads = static_cast<unsigned>(count(j["threads"], "simulate.threads"));
    if (j.contains("assets")) {
        if (!j["assets"].is_array()) throw ConfigError("simulate.assets must be an array");
        for (const auto& a : j["assets"]) s.assets.push_back(parse_asset(a));
    }
    if (j.contains("check_times")) s.check_times = nums(j["check_times"], "simulate.check_times");
    if (j.contains("export_paths")) s.export_paths = count(j["export_paths"], "simulate.export_paths");
    if (j.contains("numeraire_drift")) s.numeraire_drift = num(j["numeraire_drift"], "simulate.numeraire_drift");
    if (j.contains("bins")) s.bins = static_cast<int>(count(j["bins"], "simulate.bins"));
    if (j.contains("z_threshold")) s.z_threshold = num(j["z_threshold"], "simulate.z_threshold");
    if (s.steps < 1) throw ConfigError("simulate.steps must be >= 1");
    if (s.bins < 1) throw ConfigError("simulate.bins must be >= 1");
    if (!(s.z_threshold > 0.0)) throw ConfigError("simulate.z_threshold must be > 0");
}

void parse_embed(const json& j, EmbedRequest& e) {
    only_keys(j, "embed", {"round_trip_paths", "steps_per_period", "seed", "tolerance", "round_trip_tolerance"});
    if (j.contains("round_trip_paths")) e.round_trip_paths = count(j["round_trip_paths"], "embed.round_trip_paths");
    if (j.contains("steps_per_period")) e.steps_per_period = static_cast<int>(count(j["steps_per_period"], "embed.steps_per_period"));
    if (j.contains("seed")) e.seed = count(j["seed"], "embed.seed");
    if (j.contains("tolerance")) e.tolerance = num(j["tolerance"], "embed.tolerance");
    if (j.contains("round_trip_tolerance")) e.round_trip_tolerance = num(j["round_trip_tolerance"], "embed.round_trip_tolerance");
    if (e.steps_per_period < 1) throw ConfigError("embed.steps_per_period must be >= 1");
}

RunConfig parse_impl(const json& j, const std::string& base_dir) {
    only_keys(j, "config",
              {"schema_version", "model", "perturb", "calendar", "tenors", "price", "curve", "check", "simulate",
               "embed", "embedded", "description"});
    if (j.contains("schema_version")) {
        if (!j["schema_version"].is_string()) throw ConfigError("schema_version must be a string");
        if (j["schema_version"].get<std::string>() != kSchemaVersion)
            throw ConfigError("unsupported schema_version '" + j["schema_version"].get<std::string>() + "' (expected " +
                              kSchemaVersion + ")");
    }
    if (!j.contains("model")) throw ConfigError("config has no model block");
    const json& jm = j["model"];
    only_keys(jm, "model", {"family", "params"});
    if (!jm.contains("family") || !jm["family"].is_string()) throw ConfigError("model.family must be a string");

    RunConfig rc;
    rc.raw = j;
    rc.family = jm["family"].get<std::string>();
    if (!known_family(rc.family))
        throw ConfigError("unknown model family '" + rc.family + "'; valid families: " + family_list());
    const json params = jm.contains("params") ? jm["params"] : json::object();

    if (j.contains("check")) parse_check(j["check"], rc.check);
    if (j.contains("simulate")) parse_simulate(j["simulate"], rc.simulate);
    if (j.contains("embed")) parse_embed(j["embed"], rc.embed);

    if (rc.family == "gaussian_market_model" || rc.family == "embedded_market_model") {
        for (const char* k : {"perturb", "calendar", "tenors", "price", "curve", "simulate"})
            if (j.contains(k)) throw ConfigError(std::string("'") + k + "' is not used by market-model configs");
        rc.kind = rc.family == "gaussian_market_model" ? ConfigKind::MarketModel : ConfigKind::EmbeddedMarketModel;
        rc.market = market_params_from_json(params);
        if (rc.kind == ConfigKind::EmbeddedMarketModel) {
            if (!j.contains("embedded")) throw ConfigError("embedded_market_model config has no embedded block");
            rc.embedded = j["embedded"];
        } else if (j.contains("embedded")) {
            throw ConfigError("'embedded' belongs to embedded_market_model configs");
        }
        return rc;
    }
    if (j.contains("embed") || j.contains("embedded")) throw ConfigError("embedding needs a market-model family");

    if (!params.is_object()) throw ConfigError("model.params must be an object");
    std::map<std::string, double> pm;
    for (auto it = params.begin(); it != params.end(); ++it) pm[it.key()] = num(it.value(), "model.params." + it.key());
    if (j.contains("perturb")) {
        if (!j["perturb"].is_object()) throw ConfigError("perturb must be an object");
        for (auto it = j["perturb"].begin(); it != j["perturb"].end(); ++it)
            rc.perturb[it.key()] = num(it.value(), "perturb." + it.key());
    }
    std::vector<double> tenors;
    if (j.contains("tenors")) tenors = nums(j["tenors"], "tenors");
    const double horizon = pm.count("horizon") ? pm["horizon"] : VasicekParams{}.horizon;
    std::optional<DiscontinuityCalendar> cal;
    if (j.contains("calendar")) cal = parse_calendar(j["calendar"], horizon, base_dir);
    rc.model = build_perturbed_model(rc.family, pm, rc.perturb, tenors, cal);

    if (j.contains("price")) {
        only_keys(j["price"], "price", {"maturities", "strikes"});
        if (j["price"].contains("maturities")) rc.price.maturities = nums(j["price"]["maturities"], "price.maturities");
        if (j["price"].contains("strikes")) rc.price.strikes = nums(j["price"]["strikes"], "price.strikes");
    }
    if (j.contains("curve")) {
        only_keys(j["curve"], "curve", {"t", "maturities"});
        if (j["curve"].contains("t")) rc.curve.t = num(j["curve"]["t"], "curve.t");
        if (j["curve"].contains("maturities")) rc.curve.maturities = nums(j["curve"]["maturities"], "curve.maturities");
    }
    if (rc.curve.maturities.empty()) {
        for (int k = 1; k * 0.25 <= horizon + 1e-12; ++k) rc.curve.maturities.push_back(k * 0.25);
    }
    if (rc.simulate.assets.empty()) {
        const double T = std::min(5.0, horizon);
        const double delta = rc.model->tenors.empty() ? 0.5 : rc.model->tenors.tenors().front();
        rc.simulate.assets.push_back({Asset::Kind::OisBond, T, 0.0});
        rc.simulate.assets.push_back({Asset::Kind::FraLeg, T, delta});
    }
    return rc;
}

} // namespace

json export_embedding(const GaussianMarketParams& p, const HJMModelSpec& emb, const CheckRequest& check) {
    const double delta = p.delta;
    json e;
    e["delta"] = delta;
    e["ois_dates"] = emb.cal.dates();
    e["state"] = "L(t,T_1,delta) .. L(t,T_N,delta), S^delta_t";
    e["x0"] = std::vector<double>(emb.x0.data(), emb.x0.data() + emb.x0.size());
    e["spread0"] = emb.spread0.at(delta);
    std::vector<double> ft, fo;
    for (double T : p.dates) ft.push_back(emb.forward(0.0, T, delta, emb.x0));
    for (double T : emb.cal.dates()) fo.push_back(emb.forward(0.0, T, 0.0, emb.x0));
    e["initial_forwards"] = {{"tenor", ft}, {"ois", fo}};
    e["spread_coefficients"] = {{"alpha", 0.0}, {"H", 0.0}, {"L", 0.0}};
    e["eta"] = "unit atoms at ois_dates";
    json j;
    j["schema_version"] = kSchemaVersion;
    j["model"] = {{"family", "embedded_market_model"}, {"params", to_json(p)}};
    j["embedded"] = e;
    j["check"] = {{"grid", check.grid}, {"states", check.states}, {"tolerance", check.tolerance},
                  {"seed", check.seed}, {"eps", check.eps}};
    return j;
}

ConditionReport verify_embedded_values(const json& stored, const MarketModelSpec& mm, const HJMModelSpec& emb) {
    ConditionReport c("embedded_initial_values");
    try {
        const double delta = mm.delta;
        if (std::abs(num(stored.at("delta"), "embedded.delta") - delta) > 0.0)
            throw ConfigError("embedded.delta differs from the model tenor");
        c.add({0.0, 0.0, delta, -1, 0, num(stored.at("spread0"), "embedded.spread0") - emb.spread0.at(delta)});
        const auto ft = nums(stored.at("initial_forwards").at("tenor"), "embedded.initial_forwards.tenor");
        const auto fo = nums(stored.at("initial_forwards").at("ois"), "embedded.initial_forwards.ois");
        if (ft.size() != mm.dates.size() || fo.size() != emb.cal.size())
            throw ConfigError("embedded.initial_forwards has the wrong length");
        for (std::size_t i = 0; i < ft.size(); ++i)
            c.add({0.0, mm.dates[i], delta, static_cast<int>(i), 0, ft[i] - emb.forward(0.0, mm.dates[i], delta, emb.x0)});
        for (std::size_t k = 0; k < fo.size(); ++k)
            c.add({0.0, emb.cal[k], 0.0, static_cast<int>(k), 0, fo[k] - emb.forward(0.0, emb.cal[k], 0.0, emb.x0)});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed embedded block: ") + e.what());
    }
    return c;
}

RunConfig parse_run_config(const json& j, const std::string& base_dir) {
    try {
        return parse_impl(j, base_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_run_config(j, dir.empty() ? "." : dir.string());
}

} // namespace mcurve
