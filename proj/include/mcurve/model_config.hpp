#pragma once

#include "mcurve/market_model.hpp"
#include "mcurve/models.hpp"
#include "mcurve/sim.hpp"

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace mcurve {

struct CheckRequest {
    int grid = 21;
    int states = 10;
    double tolerance = 1e-8;
    std::uint64_t seed = 1;
    double eps = 1e-9;
};

struct PriceRequest {
    std::vector<double> maturities{1.0, 2.0, 5.0};
    std::vector<double> strikes{0.0};
};

struct CurveRequest {
    double t = 0.0;
    std::vector<double> maturities; // default: quarterly up to the horizon
};

struct SimulateRequest {
    std::optional<double> horizon;
    int steps = 100;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::vector<Asset> assets;
    std::vector<double> check_times;
    std::size_t export_paths = 0;
    double numeraire_drift = 0.0;
    int bins = 5;
    double z_threshold = 4.0;
};

struct EmbedRequest {
    std::size_t round_trip_paths = 200;
    int steps_per_period = 10;
    std::uint64_t seed = 1;
    double tolerance = 1e-8;
    double round_trip_tolerance = 1e-6;
};

enum class ConfigKind { Affine, MarketModel, EmbeddedMarketModel };

struct RunConfig {
    nlohmann::json raw;
    std::string family;
    ConfigKind kind = ConfigKind::Affine;
    std::optional<AffineModel> model;
    std::optional<GaussianMarketParams> market;
    nlohmann::json embedded; // stored values of an exported embedding
    std::map<std::string, double> perturb;
    CheckRequest check;
    PriceRequest price;
    CurveRequest curve;
    SimulateRequest simulate;
    EmbedRequest embed;
};

// affine families, "flat", and the two market-model families
const std::vector<std::string>& config_families();

// Throws ConfigError on unknown keys, bad values or unknown families.
// Relative calendar files are resolved against base_dir.
RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

// params use the VasicekParams field names; "flat" takes {"rate", "horizon", "spread0"}
AffineModel build_affine_model(const std::string& family, const std::map<std::string, double>& params,
                               const std::vector<double>& tenors, const std::optional<DiscontinuityCalendar>& cal);

// characteristics and exact dynamics from the shifted parameters, loadings and curves from the base ones
AffineModel build_perturbed_model(const std::string& family, const std::map<std::string, double>& params,
                                  const std::map<std::string, double>& shift, const std::vector<double>& tenors,
                                  const std::optional<DiscontinuityCalendar>& cal);

nlohmann::json to_json(const GaussianMarketParams& p);
GaussianMarketParams market_params_from_json(const nlohmann::json& j);

// Embedded spec file: market-model params plus the emitted initial values
// (spread, f(0,T_i,delta), OIS atoms). Re-ingested as family embedded_market_model.
nlohmann::json export_embedding(const GaussianMarketParams& p, const HJMModelSpec& emb, const CheckRequest& check);

// "embedded_initial_values": stored values against a fresh embedding
ConditionReport verify_embedded_values(const nlohmann::json& stored, const MarketModelSpec& mm, const HJMModelSpec& emb);

} // namespace mcurve
