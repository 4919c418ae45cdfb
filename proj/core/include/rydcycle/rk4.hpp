#pragma once

namespace rydcycle {

/// One classical fourth-order Runge-Kutta step for an autonomous system.
/// State must form a vector space under + and scalar *.
template <typename State, typename Rhs>
void rk4_step(State& y, double dt, Rhs&& f) {
  const State k1 = f(y);
  const State k2 = f(State(y + (0.5 * dt) * k1));
  const State k3 = f(State(y + (0.5 * dt) * k2));
  const State k4 = f(State(y + dt * k3));
  y = State(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace rydcycle
