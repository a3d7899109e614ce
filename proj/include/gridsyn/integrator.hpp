#pragma once

namespace gridsyn {

// Classical fourth-order Runge-Kutta step for dx/dt = f(x).
template <typename Vec, typename F>
Vec rk4_step(const F& f, const Vec& x, double dt) {
    const Vec k1 = f(x);
    const Vec k2 = f(Vec(x + (0.5 * dt) * k1));
    const Vec k3 = f(Vec(x + (0.5 * dt) * k2));
    const Vec k4 = f(Vec(x + dt * k3));
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// n equal steps of size dt.
template <typename Vec, typename F>
Vec rk4_integrate(const F& f, Vec x, double dt, int n) {
    for (int i = 0; i < n; ++i) x = rk4_step(f, x, dt);
    return x;
}

}  // namespace gridsyn
