#pragma once

#include "mcurve/models.hpp"

// The shipped example models with the parameters of configs/example_5_*.json.
namespace fixtures {

inline mcurve::VasicekParams base_params() {
    mcurve::VasicekParams p;
    p.horizon = 10.0;
    return p;
}

inline mcurve::AffineModel vasicek() { return mcurve::build_vasicek_single(base_params()); }

inline mcurve::AffineModel vasicek_jump(double a = 0.2, double b = 0.1) {
    auto p = base_params();
    p.a = a;
    p.b = b;
    return mcurve::build_vasicek_jump(p, 1.0);
}

inline mcurve::AffineModel multicurve(double rho = 0.3) {
    auto p = base_params();
    p.rho = rho;
    return mcurve::build_multicurve_vasicek(p, 0.5);
}

inline mcurve::VasicekParams jump_params() {
    auto p = base_params();
    p.rho = 0.3;
    p.a = 0.2;
    p.c = 0.05;
    p.kappa3 = 2.0;
    return p;
}

inline mcurve::DiscontinuityCalendar half_yearly(double horizon = 10.0) {
    return mcurve::DiscontinuityCalendar({0.5, 1.0, 1.5, 2.0}, horizon);
}

inline mcurve::AffineModel multicurve_jump() {
    return mcurve::build_multicurve_jump(jump_params(), 0.5, half_yearly());
}

} // namespace fixtures
