#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace mcurve {

inline constexpr const char* kSchemaVersion = "1.0";

struct ResidualPoint {
    double t = 0.0;
    double T = 0.0;
    double delta = 0.0;
    int i = -1;      // characteristic index or calendar index, -1 when unused
    int state = -1;  // index into the supplied state list
    double residual = 0.0;
};

// Residuals of one condition over a grid. Keeps the worst points.
struct ConditionReport {
    std::string name;
    double max_abs = 0.0;
    std::size_t n_points = 0;
    bool finite = true;
    std::vector<ResidualPoint> worst;

    explicit ConditionReport(std::string n = {}) : name(std::move(n)) {}
    void add(const ResidualPoint& p, std::size_t keep = 10);
    void merge(const ConditionReport& other, std::size_t keep = 10);
    bool pass(double tol) const { return finite && max_abs <= tol; }
};

nlohmann::json to_json(const ConditionReport& r);

struct CheckSuite {
    std::vector<ConditionReport> conditions;
    std::vector<std::string> notes;
    double max_abs() const;
    bool pass(double tol) const;
    std::vector<std::string> failing(double tol) const;
    ConditionReport* find(const std::string& name);
};

nlohmann::json to_json(const CheckSuite& s, double tol);

} // namespace mcurve
