#pragma once

#include <Eigen/Dense>

namespace mcurve {

// Local description of a semimartingale X over one step:
// dX = drift dt + vol . dW, plus a jump of size jump at the end of the step.
struct SemimartingaleIncrement {
    double drift = 0.0;
    Eigen::VectorXd vol;
    double jump = 0.0;
};

// W with E(X) E(Y) / E(Z) = E(W):
//   W = X + Y - Z + <X,Y> - <Y,Z> - <X,Z> + <Z,Z>
//       + sum (dZ (-dX - dY + dZ) + dX dY) / (1 + dZ).
// Requires 1 + jump of Z > 0.
SemimartingaleIncrement ratio_increment(const SemimartingaleIncrement& x, const SemimartingaleIncrement& y,
                                        const SemimartingaleIncrement& z);

// Growth factor of E(X) over a step of length dt with Brownian increment dW,
// exact for constant coefficients: exp(drift dt + vol.dW - |vol|^2 dt / 2) (1 + jump).
double stochastic_exponential_step(const SemimartingaleIncrement& x, double dt, const Eigen::VectorXd& dW);

} // namespace mcurve
