#pragma once

#include "mcurve/affine.hpp"
#include "mcurve/ou.hpp"

#include <string>
#include <vector>

namespace mcurve {

// Parameters shared by the four Gaussian example families. Factor 1 drives
// the OIS curve, factor 2 the spread; a, b, c and kappa3 parametrise the
// scheduled jumps.
struct VasicekParams {
    double kappa1 = 0.5, theta1 = 0.03, sigma1 = 0.01, xi1_0 = 0.02;
    double kappa2 = 0.3, theta2 = 0.005, sigma2 = 0.005, xi2_0 = 0.005;
    double rho = 0.0;
    double a = 0.0;      // jump loading of the tenor curve / state after the date
    double b = 0.0;      // std-dev of the numeraire jump (single-date family)
    double c = 0.0;      // numeraire loading on the jump (multi-date family)
    double kappa3 = 0.0; // decay of the jump component J
    double spread0 = 1.0;
    double horizon = 10.0;

    OUParams factor1() const { return {kappa1, theta1, sigma1}; }
    OUParams factor2() const { return {kappa2, theta2, sigma2}; }
    void validate(bool two_factor) const;
};

// state (t, int xi, xi); r = xi
AffineModel build_vasicek_single(const VasicekParams& p);

// state (int eta, int xi, xi, 1{t>=T1} xi_T1, 1{t>=T1} eps); single scheduled date
AffineModel build_vasicek_jump(const VasicekParams& p, const DiscontinuityCalendar& cal);
AffineModel build_vasicek_jump(const VasicekParams& p, double T1 = 1.0);

// state (t, int xi1, xi1, int xi2, xi2); f(t,t,delta) = xi2
AffineModel build_multicurve_vasicek(const VasicekParams& p, double delta);

// state (int eta, int xi1, xi1, int xi2, xi2, int J, J)
AffineModel build_multicurve_jump(const VasicekParams& p, double delta, const DiscontinuityCalendar& cal);

const std::vector<std::string>& model_families();

} // namespace mcurve
