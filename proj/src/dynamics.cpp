#include "hcb/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace hcb {

Trajectory evolve(const SparseOperator& op, const Vector& psi0, double t_max, double dt,
                  int sample_every) {
  if (op.cols() != psi0.size()) throw std::domain_error("evolve: shape mismatch");
  if (dt <= 0 || t_max < 0) throw std::domain_error("evolve: non-positive step or horizon");
  if (sample_every < 1) throw std::domain_error("evolve: sample_every must be >= 1");
  const double rho = spectral_radius_bound(op);
  if (rho > 0 && dt > 0.1 / rho)
    throw std::domain_error("evolve: dt exceeds 0.1 / spectral radius bound");

  const Complex minus_i{0.0, -1.0};
  Trajectory traj;
  traj.initial_norm_sq = psi0.squaredNorm();
  if (traj.initial_norm_sq == 0.0) throw std::domain_error("evolve: zero initial state");

  Vector psi = psi0;
  Vector k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size()), tmp(psi.size());
  const auto n_steps = static_cast<long>(std::llround(t_max / dt));

  auto sample = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(psi);
    traj.norm_sq.push_back(psi.squaredNorm() / traj.initial_norm_sq);
  };
  sample(0.0);
  for (long s = 1; s <= n_steps; ++s) {
    k1.noalias() = op * psi;
    k1 *= minus_i;
    tmp = psi + (0.5 * dt) * k1;
    k2.noalias() = op * tmp;
    k2 *= minus_i;
    tmp = psi + (0.5 * dt) * k2;
    k3.noalias() = op * tmp;
    k3 *= minus_i;
    tmp = psi + dt * k3;
    k4.noalias() = op * tmp;
    k4 *= minus_i;
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!psi.allFinite()) break;  // keep the samples collected so far
    if (s % sample_every == 0 || s == n_steps) sample(s * dt);
  }
  return traj;
}

Trajectory evolve_spectral(const SparseOperator& op, const Vector& psi0,
                           const std::vector<double>& times) {
  if (op.cols() != psi0.size()) throw std::domain_error("evolve_spectral: shape mismatch");
  const Matrix h = Matrix(op);
  Eigen::ComplexEigenSolver<Matrix> solver(h, true);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("evolve_spectral: eigensolver failed");
  const auto& v = solver.eigenvectors();
  const Vector coeff = v.partialPivLu().solve(psi0);
  Trajectory traj;
  traj.initial_norm_sq = psi0.squaredNorm();
  const Complex minus_i{0.0, -1.0};
  for (double t : times) {
    Vector phase(coeff.size());
    for (Eigen::Index i = 0; i < coeff.size(); ++i)
      phase[i] = std::exp(minus_i * solver.eigenvalues()[i] * t) * coeff[i];
    traj.times.push_back(t);
    traj.states.push_back(v * phase);
    traj.norm_sq.push_back(traj.states.back().squaredNorm() / traj.initial_norm_sq);
  }
  return traj;
}

Eigen::MatrixXd site_profile(const Trajectory& traj, const FockBasis& basis) {
  const auto n_samples = static_cast<Eigen::Index>(traj.states.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n_samples, basis.sites());
  for (Eigen::Index s = 0; s < n_samples; ++s) {
    const Vector& psi = traj.states[static_cast<std::size_t>(s)];
    if (psi.size() != basis.dim()) throw std::domain_error("site_profile: basis mismatch");
    for (Eigen::Index k = 0; k < basis.dim(); ++k) {
      const double w = std::norm(psi[k]) / traj.initial_norm_sq;
      ConfigMask c = basis.config(k);
      while (c) {
        p(s, mask_ctz(c)) += w;
        c &= c - 1;
      }
    }
  }
  return p;
}

std::vector<double> total_probability(const Trajectory& traj) { return traj.norm_sq; }

std::vector<double> fidelity(const Trajectory& traj, const StateVector& target) {
  const double tn = target.amplitudes.norm();
  if (std::abs(tn - 1.0) > 1e-8) throw std::domain_error("fidelity: target must be unit norm");
  std::vector<double> f;
  f.reserve(traj.states.size());
  for (const auto& psi : traj.states) {
    const double nrm2 = psi.squaredNorm();
    if (nrm2 == 0.0) throw std::domain_error("fidelity: zero-norm evolved state");
    f.push_back(std::norm(target.amplitudes.dot(psi)) / nrm2);
  }
  return f;
}

PowerLawFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values,
                          double t1, double t2) {
  if (times.size() != values.size()) throw std::domain_error("fit_power_law: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t1 || times[i] > t2 || times[i] <= 0) continue;
    if (values[i] <= 0)
      throw std::domain_error("fit_power_law: non-positive sample inside the window");
    const double x = std::log(times[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw std::domain_error("fit_power_law: fewer than two samples in the window");
  const double denom = n * sxx - sx * sx;
  PowerLawFit fit;
  fit.samples = n;
  fit.slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.slope * sx) / n;
  if (n > 2) {
    double ss = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < t1 || times[i] > t2 || times[i] <= 0) continue;
      const double r = std::log(values[i]) - (intercept + fit.slope * std::log(times[i]));
      ss += r * r;
    }
    fit.stderr = std::sqrt(ss / (n - 2) / (sxx - sx * sx / n));
  }
  return fit;
}

}  // namespace hcb
