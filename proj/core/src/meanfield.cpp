#include "rydcycle/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "rydcycle/errors.hpp"
#include "rydcycle/model.hpp"
#include "rydcycle/rk4.hpp"

namespace rydcycle {

using level::g;
using level::r;
using level::s;

MFState MFState::ground() {
  MFState st;
  st.rho(g, g) = 1.0;
  return st;
}

MFState MFState::mixture(double n_s, double n_r) {
  MFState st;
  st.rho(g, g) = 1.0 - n_s - n_r;
  st.rho(s, s) = n_s;
  st.rho(r, r) = n_r;
  return st;
}

MFState MFState::from_coords(const MFCoords& x) {
  MFState st;
  st.rho(s, s) = x[0];
  st.rho(r, r) = x[1];
  st.rho(g, g) = 1.0 - x[0] - x[1];
  // sigma^ab = rho(b, a)
  st.rho(s, g) = {x[2], x[3]};
  st.rho(r, g) = {x[4], x[5]};
  st.rho(r, s) = {x[6], x[7]};
  st.rho(g, s) = std::conj(st.rho(s, g));
  st.rho(g, r) = std::conj(st.rho(r, g));
  st.rho(s, r) = std::conj(st.rho(r, s));
  return st;
}

MFCoords MFState::coords() const {
  MFCoords x;
  x << rho(s, s).real(), rho(r, r).real(), rho(s, g).real(), rho(s, g).imag(), rho(r, g).real(),
      rho(r, g).imag(), rho(r, s).real(), rho(r, s).imag();
  return x;
}

double MFState::trace_error() const { return std::abs(rho.trace() - 1.0); }

double MFState::hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

double MFState::min_eigenvalue() const {
  const Eigen::Matrix3cd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::Matrix3cd lindblad_rhs(const Eigen::Matrix3cd& rho, const Eigen::Matrix3cd& h,
                              const SystemParams& p) {
  const std::complex<double> minus_i(0.0, -1.0);
  Eigen::Matrix3cd d = minus_i * (h * rho - rho * h);
  const int channels[2] = {s, r};
  const double rates[2] = {p.gamma_s, p.gamma_r};
  for (int c = 0; c < 2; ++c) {
    const int a = channels[c];
    const double gamma = rates[c];
    d(g, g) += gamma * rho(a, a);
    d.row(a) -= 0.5 * gamma * rho.row(a);
    d.col(a) -= 0.5 * gamma * rho.col(a);
  }
  return d;
}

Eigen::Matrix3cd mf_rhs(const MFState& state, const SystemParams& p, const CollectiveCouplings& chi) {
  const FieldShift shift = mean_field_shifts(state.n_s(), state.n_r(), chi);
  return lindblad_rhs(state.rho, single_atom_hamiltonian(p, shift), p);
}

MFCoords mf_rhs(const MFCoords& x, const SystemParams& p, const CollectiveCouplings& chi) {
  MFState derivative;
  derivative.rho = mf_rhs(MFState::from_coords(x), p, chi);
  // coords() reads the diagonal and lower triangle only; the trace entry is
  // implied.
  return derivative.coords();
}

std::vector<double> MFTrajectory::n_s() const {
  std::vector<double> out(states.size());
  std::transform(states.begin(), states.end(), out.begin(), [](const MFState& st) { return st.n_s(); });
  return out;
}

std::vector<double> MFTrajectory::n_r() const {
  std::vector<double> out(states.size());
  std::transform(states.begin(), states.end(), out.begin(), [](const MFState& st) { return st.n_r(); });
  return out;
}

MFTrajectory evolve_mf(const MFState& initial, const SystemParams& p, const CollectiveCouplings& chi,
                       double t_end, double dt_max, double sample_interval) {
  if (!(t_end > 0.0)) throw std::invalid_argument("evolve_mf: t_end must be positive");
  if (!(dt_max > 0.0)) throw std::invalid_argument("evolve_mf: dt_max must be positive");
  const auto n_steps = static_cast<long>(std::ceil(t_end / dt_max - 1e-9));
  const double dt = t_end / static_cast<double>(n_steps);
  const long stride = sample_interval > 0.0 ? std::max(1L, std::lround(sample_interval / dt)) : 1L;

  MFTrajectory out;
  out.times.reserve(n_steps / stride + 2);
  out.states.reserve(n_steps / stride + 2);

  Eigen::Matrix3cd rho = initial.rho;
  auto f = [&](const Eigen::Matrix3cd& y) {
    const FieldShift shift = mean_field_shifts(y(s, s).real(), y(r, r).real(), chi);
    return lindblad_rhs(y, single_atom_hamiltonian(p, shift), p);
  };
  out.times.push_back(0.0);
  out.states.push_back({rho});
  for (long step = 1; step <= n_steps; ++step) {
    rk4_step(rho, dt, f);
    const double drift = std::abs(rho.trace() - 1.0);
    if (!(drift <= 1e-6)) {
      throw IntegrationError("evolve_mf: trace drift " + std::to_string(drift) + " at t = " +
                             std::to_string(step * dt) + "; reduce dt_max (currently " +
                             std::to_string(dt_max) + ")");
    }
    if (step % stride == 0 || step == n_steps) {
      out.times.push_back(step * dt);
      out.states.push_back({rho});
    }
  }
  return out;
}

namespace {

Jacobian8 central_difference(const MFCoords& x, const SystemParams& p, const CollectiveCouplings& chi,
                             double h) {
  Jacobian8 j;
  for (int col = 0; col < 8; ++col) {
    MFCoords plus = x;
    MFCoords minus = x;
    plus[col] += h;
    minus[col] -= h;
    j.col(col) = (mf_rhs(plus, p, chi) - mf_rhs(minus, p, chi)) / (2.0 * h);
  }
  return j;
}

// Steady state of one atom in a frozen field; the flow is affine in the
// coordinates once the shifts are fixed.
MFCoords frozen_field_steady_state(double n_s, double n_r, const SystemParams& p,
                                   const CollectiveCouplings& chi) {
  const Eigen::Matrix3cd h = single_atom_hamiltonian(p, mean_field_shifts(n_s, n_r, chi));
  auto affine = [&](const MFCoords& x) {
    MFState d;
    d.rho = lindblad_rhs(MFState::from_coords(x).rho, h, p);
    return d.coords();
  };
  const MFCoords b = affine(MFCoords::Zero());
  Jacobian8 a;
  for (int col = 0; col < 8; ++col) a.col(col) = affine(MFCoords::Unit(col)) - b;
  return a.fullPivLu().solve(-b);
}

std::vector<MFCoords> start_grid(int n_starts, const SystemParams& p, const CollectiveCouplings& chi) {
  static constexpr double kPops[][2] = {{0.0, 0.0}, {0.0, 0.3}, {0.3, 0.0}, {0.3, 0.3},
                                        {0.0, 0.6}, {0.6, 0.0}, {0.6, 0.3}, {0.3, 0.6}};
  static constexpr double kSeeds[][2] = {{0.05, 0.05}, {-0.05, 0.05}, {0.05, -0.05}};
  constexpr int n_pops = 8;
  std::vector<MFCoords> starts;
  starts.reserve(n_starts);
  for (int k = 0; k < n_starts; ++k) {
    const double ns = kPops[k % n_pops][0];
    const double nr = kPops[k % n_pops][1];
    const int variant = (k / n_pops) % 4;
    if (variant == 0) {
      starts.push_back(frozen_field_steady_state(ns, nr, p, chi));
      continue;
    }
    const double* seed = kSeeds[variant - 1];
    MFCoords x = MFCoords::Zero();
    x[0] = ns;
    x[1] = nr;
    x[2] = seed[0];
    x[3] = seed[1];
    x[4] = seed[0];
    x[5] = seed[1];
    starts.push_back(x);
  }
  return starts;
}

std::optional<MFCoords> newton(MFCoords x, const SystemParams& p, const CollectiveCouplings& chi) {
  MFCoords f = mf_rhs(x, p, chi);
  double norm = f.norm();
  for (int iter = 0; iter < 200 && norm >= 1e-12; ++iter) {
    const Jacobian8 j = central_difference(x, p, chi, 1e-7);
    const MFCoords step = j.fullPivLu().solve(-f);
    if (!step.allFinite()) return std::nullopt;
    double alpha = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k, alpha *= 0.5) {
      const MFCoords trial = x + alpha * step;
      const MFCoords ft = mf_rhs(trial, p, chi);
      if (ft.norm() < norm) {
        x = trial;
        f = ft;
        norm = ft.norm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(norm < 1e-10)) return std::nullopt;
  return x;
}

}  // namespace

std::vector<FixedPoint> find_fixed_points(const SystemParams& p, const CollectiveCouplings& chi,
                                          int n_starts) {
  if (n_starts < 8) throw std::invalid_argument("find_fixed_points: n_starts must be >= 8");
  std::vector<FixedPoint> roots;
  for (const MFCoords& start : start_grid(n_starts, p, chi)) {
    const auto root = newton(start, p, chi);
    if (!root) continue;
    const MFState st = MFState::from_coords(*root);
    if (st.min_eigenvalue() < -1e-9) continue;
    const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const FixedPoint& fp) {
      return (fp.state.rho - st.rho).cwiseAbs().maxCoeff() < 1e-6;
    });
    if (!duplicate) roots.push_back({st, mf_rhs(*root, p, chi).norm()});
  }
  if (roots.empty()) {
    throw std::runtime_error("find_fixed_points: no fixed point found from " + std::to_string(n_starts) +
                             " starts");
  }
  std::sort(roots.begin(), roots.end(), [](const FixedPoint& a, const FixedPoint& b) {
    if (a.state.n_r() != b.state.n_r()) return a.state.n_r() < b.state.n_r();
    return a.state.n_s() < b.state.n_s();
  });
  return roots;
}

Jacobian8 jacobian(const MFState& fixed_point, const SystemParams& p, const CollectiveCouplings& chi) {
  const MFCoords x = fixed_point.coords();
  const double residual = mf_rhs(x, p, chi).norm();
  if (!(residual < 1e-8)) {
    throw std::invalid_argument("jacobian: state is not a fixed point (residual " +
                                std::to_string(residual) + ")");
  }
  const Jacobian8 fine = central_difference(x, p, chi, 1e-6);
  const Jacobian8 coarse = central_difference(x, p, chi, 1e-5);
  const double disagreement = (fine - coarse).cwiseAbs().maxCoeff();
  if (!(disagreement < 1e-4)) {
    throw IllConditionedError("jacobian: stencils at 1e-6 and 1e-5 disagree by " +
                              std::to_string(disagreement));
  }
  return fine;
}

EigenSpectrum eigen_spectrum(const Jacobian8& j) {
  Eigen::EigenSolver<Jacobian8> solver(j, false);
  EigenSpectrum out;
  for (int k = 0; k < 8; ++k) out.values[k] = solver.eigenvalues()[k];
  std::sort(out.values.begin(), out.values.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return out;
}

}  // namespace rydcycle
