#include "rydcycle/exact.hpp"

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "rydcycle/errors.hpp"
#include "rydcycle/rk4.hpp"

namespace rydcycle {

namespace {

constexpr int kG = 0;
constexpr int kS = 1;
constexpr int kR = 2;

Eigen::Index basis_dim(int n_atoms) {
  Eigen::Index d = 1;
  for (int l = 0; l < n_atoms; ++l) d *= 3;
  return d;
}

void check_capacity(int n_atoms) {
  if (n_atoms < 1 || n_atoms > kMaxExactAtoms) {
    throw CapacityError("exact oracle supports 1.." + std::to_string(kMaxExactAtoms) + " atoms, got " +
                        std::to_string(n_atoms));
  }
}

}  // namespace

DensityMatrix::DensityMatrix(int n_atoms, Eigen::MatrixXcd rho) : n_atoms_(n_atoms), rho_(std::move(rho)) {
  check_capacity(n_atoms);
  const Eigen::Index d = basis_dim(n_atoms);
  if (rho_.rows() != d || rho_.cols() != d) {
    throw std::invalid_argument("DensityMatrix: expected a " + std::to_string(d) + "x" + std::to_string(d) +
                                " matrix");
  }
}

DensityMatrix DensityMatrix::ground(int n_atoms) {
  check_capacity(n_atoms);
  const Eigen::Index d = basis_dim(n_atoms);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  rho(0, 0) = 1.0;
  return DensityMatrix(n_atoms, std::move(rho));
}

DensityMatrix DensityMatrix::product(std::span<const Eigen::Matrix3cd> sites) {
  const int n = static_cast<int>(sites.size());
  check_capacity(n);
  Eigen::MatrixXcd rho = sites[0];
  for (int l = 1; l < n; ++l) {
    const Eigen::Index d = rho.rows();
    Eigen::MatrixXcd next(3 * d, 3 * d);
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) next.block(3 * a, 3 * b, 3, 3) = rho(a, b) * sites[l];
    }
    rho = std::move(next);
  }
  return DensityMatrix(n, std::move(rho));
}

double DensityMatrix::trace_error() const { return std::abs(rho_.trace() - 1.0); }

double DensityMatrix::hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityMatrix::population(int site, int level) const {
  Eigen::Index stride = 1;
  for (int l = site + 1; l < n_atoms_; ++l) stride *= 3;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rho_.rows(); ++i) {
    if ((i / stride) % 3 == level) sum += rho_(i, i).real();
  }
  return sum;
}

ExactLiouvillian::ExactLiouvillian(const SystemParams& p, const CouplingMatrix& couplings)
    : params_(p), n_atoms_(static_cast<int>(couplings.size())) {
  check_capacity(n_atoms_);
  p.validate(true);
  dim_ = basis_dim(n_atoms_);
  const auto d = static_cast<std::size_t>(dim_);
  const auto n = static_cast<std::size_t>(n_atoms_);

  std::vector<Eigen::Index> stride(n);
  for (std::size_t l = 0; l < n; ++l) {
    stride[l] = 1;
    for (std::size_t k = l + 1; k < n; ++k) stride[l] *= 3;
  }

  digits_.resize(d * n);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t l = 0; l < n; ++l) {
      digits_[i * n + l] = static_cast<std::uint8_t>((static_cast<Eigen::Index>(i) / stride[l]) % 3);
    }
  }

  energy_.assign(d, 0.0);
  decay_.assign(d, 0.0);
  partner_offsets_.assign(d + 1, 0);
  recycles_.assign(2 * n, {});
  for (std::size_t i = 0; i < d; ++i) {
    const std::uint8_t* dig = &digits_[i * n];
    double e = 0.0;
    double kappa = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (dig[l] == kS) {
        e -= p.delta_s;
        kappa += 0.5 * p.gamma_s;
      } else if (dig[l] == kR) {
        e -= p.delta_r;
        kappa += 0.5 * p.gamma_r;
      }
      // Ordered double sum: each unordered pair enters twice.
      for (std::size_t k = l + 1; k < n; ++k) {
        const PairCoupling v = couplings.pair(l, k);
        const int a = dig[l];
        const int b = dig[k];
        if (a == kS && b == kS) e += 2.0 * v.ss;
        else if (a == kR && b == kR) e += 2.0 * v.rr;
        else if ((a == kS && b == kR) || (a == kR && b == kS)) e += 2.0 * v.sr;
      }
    }
    energy_[i] = e;
    decay_[i] = kappa;

    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t l = 0; l < n; ++l) {
      const Eigen::Index st = stride[l];
      switch (dig[l]) {
        case kG:
          partners_.push_back({static_cast<std::int32_t>(ii + kS * st), 0.5 * p.omega_s});
          partners_.push_back({static_cast<std::int32_t>(ii + kR * st), 0.5 * p.omega_r});
          recycles_[2 * l].push_back({static_cast<std::int32_t>(ii + kS * st), static_cast<std::int32_t>(ii),
                                      p.gamma_s});
          recycles_[2 * l + 1].push_back({static_cast<std::int32_t>(ii + kR * st),
                                          static_cast<std::int32_t>(ii), p.gamma_r});
          break;
        case kS:
          partners_.push_back({static_cast<std::int32_t>(ii - kS * st), 0.5 * p.omega_s});
          break;
        default:
          partners_.push_back({static_cast<std::int32_t>(ii - kR * st), 0.5 * p.omega_r});
          break;
      }
    }
    partner_offsets_[i + 1] = static_cast<std::int32_t>(partners_.size());
  }
}

Eigen::MatrixXcd ExactLiouvillian::apply(const Eigen::MatrixXcd& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw std::invalid_argument("ExactLiouvillian::apply: dimension mismatch");
  }
  const std::complex<double> I(0.0, 1.0);
  Eigen::MatrixXcd out(dim_, dim_);
  // Diagonal part of H and the anticommutator of the decay.
  for (Eigen::Index j = 0; j < dim_; ++j) {
    for (Eigen::Index i = 0; i < dim_; ++i) {
      const std::complex<double> coeff(-(decay_[i] + decay_[j]), -(energy_[i] - energy_[j]));
      out(i, j) = coeff * rho(i, j);
    }
  }
  // Drives: -i (H_off rho - rho H_off).
  for (Eigen::Index j = 0; j < dim_; ++j) {
    for (Eigen::Index i = 0; i < dim_; ++i) {
      std::complex<double> acc = 0.0;
      for (auto q = partner_offsets_[i]; q < partner_offsets_[i + 1]; ++q) {
        acc += partners_[q].weight * rho(partners_[q].index, j);
      }
      out(i, j) -= I * acc;
    }
    for (auto q = partner_offsets_[j]; q < partner_offsets_[j + 1]; ++q) {
      out.col(j) += (I * partners_[q].weight) * rho.col(partners_[q].index);
    }
  }
  // Recycling L rho L^+ with L = |g><a| at one site.
  for (const auto& channel : recycles_) {
    for (const Recycle& cj : channel) {
      for (const Recycle& ci : channel) out(ci.to, cj.to) += ci.gamma * rho(ci.from, cj.from);
    }
  }
  return out;
}

double ExactLiouvillian::energy(const Eigen::MatrixXcd& rho) const {
  std::complex<double> e = 0.0;
  for (Eigen::Index i = 0; i < dim_; ++i) {
    e += energy_[i] * rho(i, i);
    for (auto q = partner_offsets_[i]; q < partner_offsets_[i + 1]; ++q) {
      e += partners_[q].weight * rho(partners_[q].index, i);
    }
  }
  return e.real();
}

Eigen::MatrixXcd liouvillian_apply(const DensityMatrix& rho, const SystemParams& p,
                                   const CouplingMatrix& couplings) {
  if (static_cast<int>(couplings.size()) != rho.n_atoms()) {
    throw std::invalid_argument("liouvillian_apply: coupling matrix size does not match atom count");
  }
  return ExactLiouvillian(p, couplings).apply(rho.matrix());
}

double ExactTrajectory::mean_n_s(std::size_t sample) const {
  double sum = 0.0;
  for (int l = 0; l < n_atoms; ++l) sum += site_n_s(sample, l);
  return sum / n_atoms;
}

double ExactTrajectory::mean_n_r(std::size_t sample) const {
  double sum = 0.0;
  for (int l = 0; l < n_atoms; ++l) sum += site_n_r(sample, l);
  return sum / n_atoms;
}

ExactTrajectory evolve_exact(const DensityMatrix& initial, const SystemParams& p,
                             const CouplingMatrix& couplings, double t_end, double dt,
                             double sample_interval) {
  if (static_cast<int>(couplings.size()) != initial.n_atoms()) {
    throw std::invalid_argument("evolve_exact: coupling matrix size does not match atom count");
  }
  if (!(t_end > 0.0) || !(dt > 0.0)) throw std::invalid_argument("evolve_exact: t_end and dt must be positive");
  const ExactLiouvillian generator(p, couplings);
  const auto n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(n_steps);
  const long stride = sample_interval > 0.0 ? std::max(1L, std::lround(sample_interval / h)) : 1L;
  const int n = initial.n_atoms();
  const long check_every = std::max(1L, n_steps / 10);

  ExactTrajectory out;
  out.n_atoms = n;
  DensityMatrix state = initial;
  auto record = [&](double t) {
    out.times.push_back(t);
    for (int l = 0; l < n; ++l) {
      out.n_s.push_back(state.population(l, kS));
      out.n_r.push_back(state.population(l, kR));
    }
  };
  record(0.0);
  auto f = [&](const Eigen::MatrixXcd& y) { return generator.apply(y); };
  for (long step = 1; step <= n_steps; ++step) {
    rk4_step(state.matrix(), h, f);
    const double drift = state.trace_error();
    if (!(drift <= 1e-6)) {
      throw IntegrationError("evolve_exact: trace drift " + std::to_string(drift) + " at t = " +
                             std::to_string(step * h));
    }
    if (n <= 3 && step % check_every == 0) {
      const double lowest = state.min_eigenvalue();
      if (lowest < -1e-7) {
        throw IntegrationError("evolve_exact: density matrix lost positivity (min eigenvalue " +
                               std::to_string(lowest) + ")");
      }
    }
    if (step % stride == 0 || step == n_steps) record(step * h);
  }
  return out;
}

}  // namespace rydcycle
