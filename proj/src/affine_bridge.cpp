#include "mcurve/affine_bridge.hpp"

#include "mcurve/errors.hpp"
#include "mcurve/quadrature.hpp"

#include <cmath>
#include <memory>

namespace mcurve {

namespace {

// C(x) padded to d columns; the last state is cached per thread since every
// maturity on a grid row asks for the same x.
Mat vol_root(const AffineModel& m, const Vec& x) {
    thread_local const AffineModel* last_m = nullptr;
    thread_local Vec last_x;
    thread_local Mat last_C;
    if (last_m == &m && last_x.size() == x.size() && last_x == x) return last_C;
    const int d = m.dim();
    Mat C = Mat::Zero(d, d);
    Mat r = psd_sqrt(m.ch.diffusion(x));
    C.leftCols(r.cols()) = r;
    last_m = &m;
    last_x = x;
    last_C = C;
    return C;
}

struct JumpMap {
    Vec mean;
    Mat root;
    bool gaussian = false;
    Vec operator()(const Vec& mark) const { return gaussian ? Vec(mean + root * mark) : mark; }
};

} // namespace

HJMModelSpec to_hjm_spec(const AffineModel& m) {
    m.validate();
    for (std::size_t i = 1; i < m.ch.mu.size(); ++i)
        if (m.ch.mu[i]) throw UnsupportedLawError("state-dependent jump measures have no HJM translation here");
    auto mp = std::make_shared<AffineModel>(m);
    const int d = m.dim();

    HJMModelSpec s;
    s.label = m.family;
    s.d = d;
    s.cal = m.cal;
    s.tenors = m.tenors.tenors();
    s.x0 = m.x0;
    s.spread0 = m.spread0;

    auto jm = std::make_shared<JumpMap>();
    if (!m.ch.mu.empty() && m.ch.mu[0]) {
        const JumpMeasure& mu = *m.ch.mu[0];
        if (mu.law == JumpMeasure::Law::Gaussian) {
            jm->gaussian = true;
            jm->mean = mu.mean;
            jm->root = psd_sqrt(mu.cov);
            s.jump_law = MarkLaw::gaussian(static_cast<int>(jm->root.cols()));
            if (jm->root.cols() == 0) s.jump_law = MarkLaw::discrete({Vec::Zero(0)}, {1.0});
        } else if (mu.law == JumpMeasure::Law::Discrete) {
            s.jump_law = MarkLaw::discrete(mu.points, mu.probs);
        } else {
            throw UnsupportedLawError("sampled jump laws have no closed-form conditional expectations");
        }
        const double lam = mu.intensity;
        s.intensity = [lam](double, const Vec&) { return lam; };
    }

    s.r = [mp](double t, const Vec& x) { return mp->load.short_rate(t, x); };

    // the checker integrates Delta V over maturities for fixed (n, x, z)
    auto jump_dx = [mp](int n, const Vec& x, const Vec& z) -> Vec {
        thread_local const AffineModel* last_m = nullptr;
        thread_local int last_n = -1;
        thread_local Vec last_x, last_z, last_dx;
        if (last_m == mp.get() && last_n == n && last_x.size() == x.size() && last_x == x &&
            last_z.size() == z.size() && last_z == z)
            return last_dx;
        auto it = mp->ch.scheduled.find(n);
        Vec dx = it == mp->ch.scheduled.end() ? Vec(Vec::Zero(mp->dim())) : it->second.delta_x(z, x);
        last_m = mp.get();
        last_n = n;
        last_x = x;
        last_z = z;
        last_dx = dx;
        return dx;
    };
    for (const auto& [n, sj] : m.ch.scheduled) s.scheduled[n] = MarkLaw::gaussian(sj.noise_dim);
    s.dB = [mp, jump_dx](int n, const Vec& x, const Vec& z) {
        auto it = mp->load.psi_jump.find(n);
        if (it == mp->load.psi_jump.end()) return 0.0;
        return std::expm1(it->second.dot(jump_dx(n, x, z)));
    };

    for (double delta : m.tenors.with_ois()) {
        CurveBlock cb;
        cb.f = m.forward;
        auto phi = m.load.phi.at(delta);
        cb.a = [mp, phi](double t, double T, const Vec& x) { return phi(t, T).dot(mp->ch.drift(x)); };
        cb.b = [mp, phi](double t, double T, const Vec& x) -> Vec { return vol_root(*mp, x).transpose() * phi(t, T); };
        if (s.intensity) cb.g = [phi, jm](double t, const Vec& mark, double T, const Vec&) { return phi(t, T).dot((*jm)(mark)); };
        cb.dV = [mp, phi, jump_dx](int n, double T, const Vec& x, const Vec& z) {
            const double Tn = mp->cal[static_cast<std::size_t>(n)];
            return phi(Tn, T).dot(jump_dx(n, x, z));
        };
        s.curve[delta] = cb;
        if (delta == 0.0) continue;

        const Vec psi = m.load.psi(delta, d);
        TenorBlock tb;
        auto lam = s.intensity;
        auto law = s.jump_law;
        tb.alpha = [mp, psi, lam, law, jm](double t, const Vec& x) {
            double v = psi.dot(mp->ch.drift(x)) + 0.5 * psi.dot(mp->ch.diffusion(x) * psi);
            if (lam)
                v += lam(t, x) * law.expect([&](const Vec& mark) {
                    const double y = psi.dot((*jm)(mark));
                    return std::expm1(y) - y;
                });
            return v;
        };
        tb.H = [mp, psi](double, const Vec& x) -> Vec { return vol_root(*mp, x).transpose() * psi; };
        if (lam) tb.L = [psi, jm](double, const Vec&, const Vec& mark) { return std::expm1(psi.dot((*jm)(mark))); };
        tb.dA = [psi, jump_dx](int n, const Vec& x, const Vec& z) { return std::expm1(psi.dot(jump_dx(n, x, z))); };
        s.tenor[delta] = tb;
    }
    s.validate();
    return s;
}

} // namespace mcurve
