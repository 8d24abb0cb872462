#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mcurve {

// Scheduled discontinuity dates and the measure eta = Lebesgue + unit atoms.
// Membership is decided by exact equality of doubles.
class DiscontinuityCalendar {
public:
    DiscontinuityCalendar() = default;
    DiscontinuityCalendar(std::vector<double> dates, double horizon, bool lebesgue = true);

    const std::vector<double>& dates() const { return dates_; }
    double horizon() const { return horizon_; }
    std::size_t size() const { return dates_.size(); }
    bool empty() const { return dates_.empty(); }
    double operator[](std::size_t n) const { return dates_[n]; }

    // false: eta is purely atomic (used by the market-model embedding)
    bool has_lebesgue() const { return lebesgue_; }

    bool contains(double t) const;
    // index of t in dates, or -1
    int index_of(double t) const;
    // number of dates <= t
    std::size_t count_upto(double t) const;
    // dates in (a, b]
    std::vector<double> dates_in(double a, double b) const;

    // eta((a, b])
    double measure(double a, double b) const;

private:
    std::vector<double> dates_;
    double horizon_ = 0.0;
    bool lebesgue_ = true;
};

// Strictly increasing positive tenors. The OIS sentinel 0 is implicit.
class TenorSet {
public:
    TenorSet() = default;
    explicit TenorSet(std::vector<double> tenors);

    const std::vector<double>& tenors() const { return tenors_; }
    bool empty() const { return tenors_.empty(); }
    bool contains(double delta) const;
    // {0} followed by the tenors
    std::vector<double> with_ois() const;

private:
    std::vector<double> tenors_;
};

using ScalarFn = std::function<double(double)>;

// int_(a,b] g deta. The Lebesgue part uses adaptive Gauss-Kronrod between
// calendar dates; atoms add g(T_n) for a < T_n <= b.
double eta_integrate(const ScalarFn& g, double a, double b, const DiscontinuityCalendar& cal);

// Closed interval [a, b]: includes the atom at a when a is a calendar date.
double eta_integrate_closed(const ScalarFn& g, double a, double b, const DiscontinuityCalendar& cal);

// Lebesgue part only, same splitting and checks.
double lebesgue_integrate(const ScalarFn& g, double a, double b, const DiscontinuityCalendar& cal);

// One ISO-8601 date (YYYY-MM-DD) or decimal year fraction per line. Blank
// lines, '#' comments and a non-numeric header are skipped. ISO dates are
// converted ACT/365F relative to valuation_date, which is then required.
DiscontinuityCalendar read_calendar_csv(const std::string& path, double horizon,
                                        const std::optional<std::string>& valuation_date = std::nullopt);

// year fraction ACT/365F between two ISO dates
double year_fraction(const std::string& from_iso, const std::string& to_iso);

} // namespace mcurve
