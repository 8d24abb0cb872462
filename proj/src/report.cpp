#include "mcurve/report.hpp"

#include <algorithm>
#include <cmath>

namespace mcurve {

void ConditionReport::add(const ResidualPoint& p, std::size_t keep) {
    ++n_points;
    if (!std::isfinite(p.residual)) {
        finite = false;
    } else {
        max_abs = std::max(max_abs, std::abs(p.residual));
    }
    auto worse = [](const ResidualPoint& a, const ResidualPoint& b) {
        double fa = std::isfinite(a.residual) ? std::abs(a.residual) : HUGE_VAL;
        double fb = std::isfinite(b.residual) ? std::abs(b.residual) : HUGE_VAL;
        return fa > fb;
    };
    auto pos = std::upper_bound(worst.begin(), worst.end(), p, worse);
    worst.insert(pos, p);
    if (worst.size() > keep) worst.pop_back();
}

void ConditionReport::merge(const ConditionReport& other, std::size_t keep) {
    std::size_t n = n_points + other.n_points;
    for (const auto& p : other.worst) add(p, keep);
    n_points = n;
    finite = finite && other.finite;
    max_abs = std::max(max_abs, other.max_abs);
}

nlohmann::json to_json(const ConditionReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["max_abs_residual"] = r.max_abs;
    j["points"] = r.n_points;
    j["finite"] = r.finite;
    auto& w = j["worst"] = nlohmann::json::array();
    for (const auto& p : r.worst) {
        nlohmann::json row{{"t", p.t}, {"T", p.T}, {"delta", p.delta}, {"residual", p.residual}};
        if (p.i >= 0) row["i"] = p.i;
        if (p.state >= 0) row["state"] = p.state;
        if (!std::isfinite(p.residual)) row["residual"] = "non-finite";
        w.push_back(row);
    }
    return j;
}

double CheckSuite::max_abs() const {
    double m = 0.0;
    for (const auto& c : conditions) m = std::max(m, c.finite ? c.max_abs : HUGE_VAL);
    return m;
}

bool CheckSuite::pass(double tol) const {
    return std::all_of(conditions.begin(), conditions.end(), [&](const auto& c) { return c.pass(tol); });
}

std::vector<std::string> CheckSuite::failing(double tol) const {
    std::vector<std::string> out;
    for (const auto& c : conditions)
        if (!c.pass(tol)) out.push_back(c.name);
    return out;
}

ConditionReport* CheckSuite::find(const std::string& name) {
    for (auto& c : conditions)
        if (c.name == name) return &c;
    return nullptr;
}

nlohmann::json to_json(const CheckSuite& s, double tol) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["tolerance"] = tol;
    j["pass"] = s.pass(tol);
    j["failing"] = s.failing(tol);
    auto& arr = j["conditions"] = nlohmann::json::array();
    for (const auto& c : s.conditions) {
        auto cj = to_json(c);
        cj["pass"] = c.pass(tol);
        arr.push_back(cj);
    }
    if (!s.notes.empty()) j["notes"] = s.notes;
    return j;
}

} // namespace mcurve
