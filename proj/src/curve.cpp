#include "mcurve/curve.hpp"

#include "mcurve/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

namespace mcurve {

ForwardCurveField::ForwardCurveField(double t, DiscontinuityCalendar cal) : t_(t), cal_(std::move(cal)) {}

void ForwardCurveField::set_density(double delta, std::vector<double> maturities, std::vector<double> values) {
    if (maturities.empty() || maturities.size() != values.size())
        throw ConfigError("density grid and values must be non-empty and of equal length");
    for (std::size_t i = 0; i < maturities.size(); ++i) {
        if (!std::isfinite(maturities[i]) || !std::isfinite(values[i]))
            throw DomainError("density grid contains non-finite entries");
        if (i > 0 && !(maturities[i - 1] < maturities[i]))
            throw ConfigError("density maturities must be strictly increasing");
    }
    auto& c = curves_[delta];
    c.maturities = std::move(maturities);
    c.values = std::move(values);
}

void ForwardCurveField::set_flat(double delta, double rate) {
    set_density(delta, {t_}, {rate});
}

void ForwardCurveField::set_atom(double delta, double T, double value) {
    if (!cal_.contains(T))
        throw DomainError("atom at " + std::to_string(T) + " which is not a calendar date");
    if (!std::isfinite(value)) throw DomainError("atom value not finite");
    curves_[delta].atoms[T] = value;
}

std::vector<double> ForwardCurveField::tenors() const {
    std::vector<double> out;
    for (const auto& [d, c] : curves_) out.push_back(d);
    return out;
}

const ForwardCurveField::TenorCurve& ForwardCurveField::get(double delta) const {
    auto it = curves_.find(delta);
    if (it == curves_.end()) throw DomainError("no curve for tenor " + std::to_string(delta));
    return it->second;
}

const std::vector<double>& ForwardCurveField::grid(double delta) const { return get(delta).maturities; }

double ForwardCurveField::density(double delta, double T) const {
    const auto& c = get(delta);
    if (c.maturities.empty()) return 0.0;
    const auto& m = c.maturities;
    if (T <= m.front()) return c.values.front();
    if (T >= m.back()) return c.values.back();
    auto hi = static_cast<std::size_t>(std::upper_bound(m.begin(), m.end(), T) - m.begin());
    std::size_t lo = hi - 1;
    double w = (T - m[lo]) / (m[hi] - m[lo]);
    return c.values[lo] + w * (c.values[hi] - c.values[lo]);
}

bool ForwardCurveField::has_atom(double delta, double T) const {
    const auto& c = get(delta);
    return c.atoms.count(T) > 0;
}

double ForwardCurveField::atom(double delta, double T) const {
    const auto& c = get(delta);
    auto it = c.atoms.find(T);
    if (it == c.atoms.end())
        throw ConfigError("missing atom value for tenor " + std::to_string(delta) + " at " + std::to_string(T));
    return it->second;
}

double ForwardCurveField::density_integral(double delta, double a, double b) const {
    const auto& c = get(delta);
    if (c.maturities.empty()) return 0.0;
    // trapezoid over the breakpoints in (a,b) is exact for a piecewise-linear function
    std::vector<double> pts{a};
    for (double m : c.maturities)
        if (m > a && m < b) pts.push_back(m);
    pts.push_back(b);
    double sum = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        sum += 0.5 * (pts[i] - pts[i - 1]) * (density(delta, pts[i - 1]) + density(delta, pts[i]));
    return sum;
}

double ForwardCurveField::integrate(double delta, double a, double b) const {
    if (a > b) throw DomainError("integrate: a > b");
    if (a == b) return 0.0;
    double sum = cal_.has_lebesgue() ? density_integral(delta, a, b) : 0.0;
    for (double d : cal_.dates_in(a, b)) sum += atom(delta, d);
    return sum;
}

void SpreadState::set(double delta, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw DomainError("spread must be finite and > 0");
    values_[delta] = value;
}

double SpreadState::get(double delta) const {
    auto it = values_.find(delta);
    if (it == values_.end()) throw DomainError("no spread for tenor " + std::to_string(delta));
    return it->second;
}

double bond_price(const ForwardCurveField& curve, double t, double T, double delta) {
    if (T < t) throw DomainError("bond_price: T < t");
    if (T > curve.calendar().horizon()) throw DomainError("bond_price: T beyond horizon");
    if (T == t) return 1.0;
    return std::exp(-curve.integrate(delta, t, T));
}

double fra_price(double S, double P_tenor, double P_ois, double delta, double K) {
    if (!(P_tenor > 0.0) || !(P_ois > 0.0)) throw DomainError("fra_price: bond prices must be > 0");
    return S * P_tenor - (1.0 + delta * K) * P_ois;
}

double forward_ibor_rate(double S, double P_tenor, double P_ois, double delta) {
    if (delta == 0.0) throw DomainError("forward_ibor_rate: no Ibor rate for tenor 0");
    if (!(delta > 0.0)) throw DomainError("forward_ibor_rate: tenor must be > 0");
    if (!(P_ois > 0.0)) throw DomainError("forward_ibor_rate: P_ois must be > 0");
    return (S * P_tenor / P_ois - 1.0) / delta;
}

double spread_from_curves(const ForwardCurveField& curve, double L_spot, double delta, double t) {
    if (!(delta > 0.0)) throw DomainError("spread_from_curves: tenor must be > 0");
    double growth = 1.0 + delta * L_spot;
    if (!(growth > 0.0)) throw DomainError("spread_from_curves: 1 + delta L <= 0");
    return bond_price(curve, t, t + delta, 0.0) * growth;
}

void write_curve_csv(const ForwardCurveField& curve, std::ostream& out) {
    out << "tenor,maturity,density_value,atom_value\n";
    out << std::setprecision(17);
    for (double delta : curve.tenors()) {
        std::set<double> mats(curve.grid(delta).begin(), curve.grid(delta).end());
        for (double d : curve.calendar().dates())
            if (curve.has_atom(delta, d)) mats.insert(d);
        for (double T : mats) {
            out << delta << ',' << T << ',' << curve.density(delta, T) << ',';
            if (curve.has_atom(delta, T)) out << curve.atom(delta, T);
            out << '\n';
        }
    }
}

} // namespace mcurve
