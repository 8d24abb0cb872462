#pragma once

#include "mcurve/calendar.hpp"

#include <iosfwd>
#include <map>
#include <vector>

namespace mcurve {

// Snapshot of u -> f(t,u,delta) for every tenor at a fixed evaluation time:
// piecewise-linear density on a maturity grid (flat beyond its ends) plus
// atom values at the calendar dates.
class ForwardCurveField {
public:
    ForwardCurveField(double t, DiscontinuityCalendar cal);

    void set_density(double delta, std::vector<double> maturities, std::vector<double> values);
    void set_flat(double delta, double rate);
    void set_atom(double delta, double T, double value);

    double time() const { return t_; }
    const DiscontinuityCalendar& calendar() const { return cal_; }
    bool has_tenor(double delta) const { return curves_.count(delta) > 0; }
    std::vector<double> tenors() const;

    double density(double delta, double T) const;
    bool has_atom(double delta, double T) const;
    double atom(double delta, double T) const;
    // int_(a,b] f(t,u,delta) eta(du), exact for the piecewise-linear density
    double integrate(double delta, double a, double b) const;

    const std::vector<double>& grid(double delta) const;

private:
    struct TenorCurve {
        std::vector<double> maturities;
        std::vector<double> values;
        std::map<double, double> atoms;
    };
    const TenorCurve& get(double delta) const;
    double density_integral(double delta, double a, double b) const;

    double t_;
    DiscontinuityCalendar cal_;
    std::map<double, TenorCurve> curves_;
};

// Per-tenor multiplicative spread S^delta_t.
class SpreadState {
public:
    void set(double delta, double value);
    double get(double delta) const;
    bool has(double delta) const { return values_.count(delta) > 0; }

private:
    std::map<double, double> values_;
};

// exp(-int_(t,T] f(t,u,delta) eta(du))
double bond_price(const ForwardCurveField& curve, double t, double T, double delta);

double fra_price(double S, double P_tenor, double P_ois, double delta, double K);

double forward_ibor_rate(double S, double P_tenor, double P_ois, double delta);

// S^delta_t = P(t, t+delta) (1 + delta L_spot)
double spread_from_curves(const ForwardCurveField& curve, double L_spot, double delta, double t);

// columns: tenor, maturity, density_value, atom_value (empty off the calendar)
void write_curve_csv(const ForwardCurveField& curve, std::ostream& out);

} // namespace mcurve
