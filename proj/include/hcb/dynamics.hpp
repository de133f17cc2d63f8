#ifndef HCB_DYNAMICS_HPP
#define HCB_DYNAMICS_HPP

#include <vector>

#include "hcb/fockspace.hpp"
#include "hcb/states.hpp"

namespace hcb {

// Sampled non-unitary evolution. norm_sq holds ||phi(t)||^2 / ||phi(0)||^2.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> norm_sq;
  double initial_norm_sq = 1.0;
};

struct PowerLawFit {
  double slope = 0.0;
  double stderr = 0.0;
  int samples = 0;
};

// Integrates i dpsi/dt = H psi with fixed-step classical RK4; no
// renormalization. Requires dt <= 0.1 / spectral_radius_bound(H).
// Aborts with the last good time on NaN/overflow.
Trajectory evolve(const SparseOperator& op, const Vector& psi0, double t_max, double dt,
                  int sample_every = 1);

// Spectral-decomposition propagation, cross-check mode only; invalid at EPs.
Trajectory evolve_spectral(const SparseOperator& op, const Vector& psi0,
                           const std::vector<double>& times);

// p_j(t) = <phi(t)| n_j |phi(t)> / ||phi(0)||^2, samples x sites.
Eigen::MatrixXd site_profile(const Trajectory& traj, const FockBasis& basis);

// P(t) = (1/n) sum_j p_j(t) = ||phi(t)||^2 / ||phi(0)||^2.
std::vector<double> total_probability(const Trajectory& traj);

// F(t) = |<target|phi(t)>|^2 / ||phi(t)||^2 for a unit-norm target.
std::vector<double> fidelity(const Trajectory& traj, const StateVector& target);

// Least-squares slope of ln P vs ln t over the window [t1, t2].
PowerLawFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values,
                          double t1, double t2);

}  // namespace hcb

#endif
