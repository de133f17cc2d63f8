#include "hcb/states.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hcb {

namespace {

void check_basis(const StateVector& s) {
  if (!s.basis) throw std::domain_error("state: missing basis");
}

StateVector from_single_particle_amplitudes(std::shared_ptr<const FockBasis> basis,
                                            const std::vector<Complex>& g) {
  // (sum_r g_r a_r^dag)^n |0> = n! sum_{|S|=n} (prod_{r in S} g_r) |S>;
  // the common n! drops out under normalization
  StateVector out;
  out.basis = basis;
  out.amplitudes.resize(basis->dim());
  for (Eigen::Index k = 0; k < basis->dim(); ++k) {
    ConfigMask c = basis->config(k);
    Complex prod{1, 0};
    while (c) {
      prod *= g[static_cast<std::size_t>(mask_ctz(c))];
      c &= c - 1;
    }
    out.amplitudes[k] = prod;
  }
  double fact = 1.0;
  for (int i = 2; i <= basis->particles(); ++i) fact *= i;
  const double nrm = out.amplitudes.norm();
  if (nrm == 0.0) throw std::domain_error("state: zero-norm expansion");
  out.raw_norm = fact * nrm;
  out.amplitudes /= nrm;
  return out;
}

}  // namespace

StateVector condensate_state(std::shared_ptr<const FockBasis> basis, const CondensateSpec& spec,
                             std::span<const double> site_phases) {
  if (!basis) throw std::domain_error("condensate_state: missing basis");
  if (basis->particles() != spec.particles)
    throw std::domain_error("condensate_state: particle number mismatch");
  if (site_phases.size() != static_cast<std::size_t>(basis->sites()))
    throw std::domain_error("condensate_state: phase table size mismatch");
  const double s = spec.sign == PhaseSign::Minus ? -1.0 : 1.0;
  std::vector<Complex> g(site_phases.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = Complex{std::cos(s * site_phases[i]), std::sin(s * site_phases[i])};
  return from_single_particle_amplitudes(std::move(basis), g);
}

Complex biorthogonal_overlap(const StateVector& left, const StateVector& right) {
  check_basis(left);
  check_basis(right);
  if (left.basis->sites() != right.basis->sites() ||
      left.basis->particles() != right.basis->particles())
    throw std::domain_error("biorthogonal_overlap: basis mismatch");
  return left.amplitudes.dot(right.amplitudes);  // Eigen conjugates the left factor
}

Complex correlation(const StateVector& psi, int site, const std::array<int, 3>& displacement,
                    const LatticeSpec& spec) {
  check_basis(psi);
  if (site < 0 || site >= spec.total_sites())
    throw std::domain_error("correlation: site out of range");
  auto c = site_coords(site, spec);
  for (int a = 0; a < 3; ++a) {
    int m = c[a] + displacement[a];
    if (spec.bc[a] == Boundary::Periodic && spec.axis_active(a)) {
      m = (m - 1) % spec.dims[a];
      if (m < 0) m += spec.dims[a];
      ++m;
    } else if (m < 1 || m > spec.dims[a]) {
      throw std::domain_error("correlation: displacement leaves the lattice on open axis " +
                              std::to_string(a + 1));
    }
    c[a] = m;
  }
  const int target = site_index(c, spec);
  const auto& basis = *psi.basis;
  if (target == site) {
    Complex acc{0, 0};
    for (Eigen::Index k = 0; k < basis.dim(); ++k)
      if ((basis.config(k) >> site) & 1) acc += std::norm(psi.amplitudes[k]);
    return acc;
  }
  // <psi| a_site^dag a_target |psi>: configs with target occupied, site free
  Complex acc{0, 0};
  for (Eigen::Index k = 0; k < basis.dim(); ++k) {
    const auto moved = hop_element(basis.config(k), target, site);
    if (!moved) continue;
    acc += std::conj(psi.amplitudes[basis.index_of(*moved)]) * psi.amplitudes[k];
  }
  return acc;
}

StateVector gaussian_wavepacket(std::shared_ptr<const FockBasis> basis,
                                const WavepacketSpec& spec) {
  if (!basis) throw std::domain_error("gaussian_wavepacket: missing basis");
  if (basis->particles() != spec.particles)
    throw std::domain_error("gaussian_wavepacket: particle number mismatch");
  if (spec.alpha <= 0) throw std::domain_error("gaussian_wavepacket: alpha must be positive");
  if (spec.center < 1 || spec.center > basis->sites())
    throw std::domain_error("gaussian_wavepacket: center outside the chain");
  std::vector<Complex> g(static_cast<std::size_t>(basis->sites()));
  for (int j = 1; j <= basis->sites(); ++j) {
    const double x = j - spec.center;
    const double env = std::exp(-0.5 * spec.alpha * spec.alpha * x * x);
    g[static_cast<std::size_t>(j - 1)] =
        env * Complex{std::cos(spec.momentum * j), std::sin(spec.momentum * j)};
  }
  return from_single_particle_amplitudes(std::move(basis), g);
}

StateVector product_state(std::shared_ptr<const FockBasis> basis, const std::vector<int>& sites) {
  if (!basis) throw std::domain_error("product_state: missing basis");
  if (static_cast<int>(sites.size()) != basis->particles())
    throw std::domain_error("product_state: site count must equal particle number");
  ConfigMask mask = 0;
  for (int s : sites) {
    if (s < 0 || s >= basis->sites()) throw std::domain_error("product_state: site out of range");
    const ConfigMask bit = ConfigMask{1} << s;
    if (mask & bit) throw std::domain_error("product_state: duplicate site");
    mask |= bit;
  }
  StateVector out;
  out.basis = std::move(basis);
  out.amplitudes = Vector::Zero(out.basis->dim());
  out.amplitudes[out.basis->index_of(mask)] = Complex{1, 0};
  out.raw_norm = 1.0;
  return out;
}

void export_state(const StateVector& psi, std::ostream& os) {
  check_basis(psi);
  os.precision(17);
  for (Eigen::Index k = 0; k < psi.basis->dim(); ++k)
    os << mask_to_string(psi.basis->config(k)) << " " << psi.amplitudes[k].real() << " "
       << psi.amplitudes[k].imag() << "\n";
}

}  // namespace hcb
