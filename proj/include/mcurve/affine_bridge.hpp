#pragma once

#include "mcurve/affine.hpp"
#include "mcurve/hjm.hpp"

namespace mcurve {

// The affine model written in general HJM form:
//   a = phi^T beta(x), b = C(x)^T phi, g = phi^T dx, Delta V = phi(T_n,.)^T Delta X,
//   r from the model, H = 0, L = 0, 1 + Delta B = exp(psi_{T_n}^T Delta X),
//   alpha^delta, H^delta, L^delta, Delta A^delta from S^delta = S_0 exp(psi^delta . (X - X_0)),
// with C(x) C(x)^T the diffusion matrix. Continuous jumps are supported for a
// state-independent Gaussian or discrete measure mu_0 only.
HJMModelSpec to_hjm_spec(const AffineModel& m);

} // namespace mcurve
