#include "mcurve/affine.hpp"
#include "mcurve/errors.hpp"
#include "mcurve/ou.hpp"

#include <array>
#include <boost/numeric/odeint/integrate/integrate_n_steps.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>
#include <cmath>
#include <sstream>

namespace mcurve {

double RiccatiResult::discrepancy() const { return std::abs(A - A_ode) + std::abs(B - B_ode); }

RiccatiResult riccati_transform(double kappa, double theta, double sigma, double tau, double u, double step) {
    if (!(kappa > 0.0)) throw DomainError("riccati_transform: kappa must be > 0");
    if (!(sigma >= 0.0)) throw DomainError("riccati_transform: sigma must be >= 0");
    if (!(tau >= 0.0)) throw DomainError("riccati_transform: tau must be >= 0");
    if (!(step > 0.0)) throw DomainError("riccati_transform: step must be > 0");

    RiccatiResult res;
    auto ab = vasicek_transform({kappa, theta, sigma}, tau, u);
    res.A = ab.A;
    res.B = ab.B;

    // state (A, B): B' = 1 - kappa B, A' = kappa theta B - sigma^2 B^2 / 2
    using State = std::array<double, 2>;
    State y{0.0, -u};
    auto rhs = [&](const State& s, State& dy, double) {
        dy[1] = 1.0 - kappa * s[1];
        dy[0] = kappa * theta * s[1] - 0.5 * sigma * sigma * s[1] * s[1];
    };
    std::size_t n = tau == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(tau / step - 1e-9));
    if (n > 0) {
        boost::numeric::odeint::runge_kutta4<State> rk;
        boost::numeric::odeint::integrate_n_steps(rk, rhs, y, 0.0, tau / static_cast<double>(n), n);
    }
    if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
        std::ostringstream msg;
        msg << "riccati_transform: RK4 produced non-finite values (kappa=" << kappa << ", sigma=" << sigma
            << ", tau=" << tau << ", u=" << u << ", steps=" << n << ")";
        throw NumericalError(msg.str());
    }
    res.A_ode = y[0];
    res.B_ode = y[1];
    res.steps = n;
    return res;
}

} // namespace mcurve
