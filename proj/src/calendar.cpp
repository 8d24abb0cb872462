#include "mcurve/calendar.hpp"

#include "mcurve/errors.hpp"
#include "mcurve/quadrature.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mcurve {

DiscontinuityCalendar::DiscontinuityCalendar(std::vector<double> dates, double horizon, bool lebesgue)
    : dates_(std::move(dates)), horizon_(horizon), lebesgue_(lebesgue) {
    if (!std::isfinite(horizon_) || horizon_ < 0.0)
        throw ConfigError("calendar horizon must be finite and >= 0");
    for (std::size_t n = 0; n < dates_.size(); ++n) {
        double t = dates_[n];
        if (!std::isfinite(t) || t < 0.0)
            throw ConfigError("calendar date must be finite and >= 0");
        if (t > horizon_)
            throw ConfigError("calendar date " + std::to_string(t) + " beyond horizon");
        if (n > 0 && !(dates_[n - 1] < t))
            throw ConfigError("calendar dates must be strictly increasing");
    }
}

bool DiscontinuityCalendar::contains(double t) const {
    return std::binary_search(dates_.begin(), dates_.end(), t);
}

int DiscontinuityCalendar::index_of(double t) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), t);
    if (it == dates_.end() || *it != t) return -1;
    return static_cast<int>(it - dates_.begin());
}

std::size_t DiscontinuityCalendar::count_upto(double t) const {
    return static_cast<std::size_t>(std::upper_bound(dates_.begin(), dates_.end(), t) - dates_.begin());
}

std::vector<double> DiscontinuityCalendar::dates_in(double a, double b) const {
    auto lo = std::upper_bound(dates_.begin(), dates_.end(), a);
    auto hi = std::upper_bound(dates_.begin(), dates_.end(), b);
    if (hi < lo) return {};
    return {lo, hi};
}

double DiscontinuityCalendar::measure(double a, double b) const {
    if (b <= a) return 0.0;
    double atoms = static_cast<double>(dates_in(a, b).size());
    return (lebesgue_ ? (b - a) : 0.0) + atoms;
}

TenorSet::TenorSet(std::vector<double> tenors) : tenors_(std::move(tenors)) {
    for (std::size_t i = 0; i < tenors_.size(); ++i) {
        if (!(tenors_[i] > 0.0) || !std::isfinite(tenors_[i]))
            throw ConfigError("tenors must be finite and > 0");
        if (i > 0 && !(tenors_[i - 1] < tenors_[i]))
            throw ConfigError("tenors must be strictly increasing");
    }
}

bool TenorSet::contains(double delta) const {
    return std::binary_search(tenors_.begin(), tenors_.end(), delta);
}

std::vector<double> TenorSet::with_ois() const {
    std::vector<double> out{0.0};
    out.insert(out.end(), tenors_.begin(), tenors_.end());
    return out;
}

namespace {

double checked(const ScalarFn& g, double u) {
    double v = g(u);
    if (!std::isfinite(v))
        throw DomainError("integrand not finite at u = " + std::to_string(u));
    return v;
}

double gk(const ScalarFn& g, double a, double b) {
    auto f = [&](double u) { return Eigen::VectorXd::Constant(1, checked(g, u)); };
    return integrate_vec(f, a, b, 1)(0);
}

} // namespace

double lebesgue_integrate(const ScalarFn& g, double a, double b, const DiscontinuityCalendar& cal) {
    if (a > b) throw DomainError("eta_integrate: a > b");
    if (a == b || !cal.has_lebesgue()) return 0.0;
    // split at dates strictly inside so piecewise tables are integrated piece by piece
    double sum = 0.0, lo = a;
    for (double d : cal.dates_in(a, b)) {
        if (d >= b) break;
        sum += gk(g, lo, d);
        lo = d;
    }
    sum += gk(g, lo, b);
    return sum;
}

double eta_integrate(const ScalarFn& g, double a, double b, const DiscontinuityCalendar& cal) {
    if (a > b) throw DomainError("eta_integrate: a > b");
    if (a == b) return 0.0;
    double sum = lebesgue_integrate(g, a, b, cal);
    for (double d : cal.dates_in(a, b)) sum += checked(g, d);
    return sum;
}

double eta_integrate_closed(const ScalarFn& g, double a, double b, const DiscontinuityCalendar& cal) {
    if (a > b) throw DomainError("eta_integrate: a > b");
    double sum = eta_integrate(g, a, b, cal);
    if (cal.contains(a)) sum += checked(g, a);
    return sum;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::chrono::sys_days parse_iso(const std::string& s) {
    int y = 0;
    unsigned m = 0, d = 0;
    char sep1 = 0, sep2 = 0;
    std::istringstream in(s);
    in >> y >> sep1 >> m >> sep2 >> d;
    if (!in || sep1 != '-' || sep2 != '-' || !in.eof())
        throw ConfigError("not an ISO-8601 date: '" + s + "'");
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw ConfigError("invalid calendar date: '" + s + "'");
    return std::chrono::sys_days{ymd};
}

bool looks_iso(const std::string& s) {
    return s.size() == 10 && s[4] == '-' && s[7] == '-';
}

} // namespace

double year_fraction(const std::string& from_iso, const std::string& to_iso) {
    auto days = (parse_iso(to_iso) - parse_iso(from_iso)).count();
    return static_cast<double>(days) / 365.0;
}

DiscontinuityCalendar read_calendar_csv(const std::string& path, double horizon,
                                        const std::optional<std::string>& valuation_date) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open calendar file: " + path);
    std::vector<double> dates;
    std::string line;
    int lineno = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++lineno;
        auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        std::string cell = trim(line);
        if (auto comma = cell.find(','); comma != std::string::npos) cell = trim(cell.substr(0, comma));
        if (cell.empty()) continue;
        if (looks_iso(cell)) {
            if (!valuation_date)
                throw ConfigError(path + ":" + std::to_string(lineno) + ": ISO date needs a valuation_date");
            dates.push_back(year_fraction(*valuation_date, cell));
        } else {
            double v = 0.0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || p != cell.data() + cell.size()) {
                if (first_content) { first_content = false; continue; } // header
                throw ConfigError(path + ":" + std::to_string(lineno) + ": cannot parse '" + cell + "'");
            }
            dates.push_back(v);
        }
        first_content = false;
    }
    try {
        return DiscontinuityCalendar(std::move(dates), horizon);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

} // namespace mcurve
