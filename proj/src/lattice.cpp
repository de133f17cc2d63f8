#include "hcb/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hcb {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGridSnapTol = 1e-12;
}  // namespace

int LatticeSpec::open_active_axes() const {
  int k = 0;
  for (int a = 0; a < 3; ++a)
    if (axis_active(a) && open(a)) ++k;
  return k;
}

void validate_lattice(LatticeSpec& spec) {
  for (int a = 0; a < 3; ++a) {
    if (spec.dims[a] < 1)
      throw std::domain_error("lattice: dims must be >= 1, axis " + std::to_string(a + 1));
    if (!std::isfinite(spec.momentum[a]) || !std::isfinite(spec.coupling[a]))
      throw std::domain_error("lattice: non-finite parameter on axis " + std::to_string(a + 1));
    if (spec.bc[a] == Boundary::Periodic && spec.axis_active(a)) {
      const int n = spec.dims[a];
      const double step = kTwoPi / n;
      const double m = spec.momentum[a] / step;
      const double m_round = std::round(m);
      if (std::abs(spec.momentum[a] - m_round * step) > kGridSnapTol)
        throw std::domain_error("lattice: periodic axis " + std::to_string(a + 1) +
                                " momentum not on the 2*pi*m/N grid");
      spec.momentum[a] = m_round * step;  // snap
    }
  }
  if (spec.total_sites() > 127)
    throw std::domain_error("lattice: more than 127 sites not representable in the mask");
}

int site_index(const std::array<int, 3>& coords, const LatticeSpec& spec) {
  for (int a = 0; a < 3; ++a)
    if (coords[a] < 1 || coords[a] > spec.dims[a])
      throw std::domain_error("site_index: coordinate out of range on axis " +
                              std::to_string(a + 1));
  return (coords[0] - 1) + spec.dims[0] * ((coords[1] - 1) + spec.dims[1] * (coords[2] - 1));
}

std::array<int, 3> site_coords(int index, const LatticeSpec& spec) {
  if (index < 0 || index >= spec.total_sites())
    throw std::domain_error("site_coords: index out of range");
  const int m1 = index % spec.dims[0];
  const int m2 = (index / spec.dims[0]) % spec.dims[1];
  const int m3 = index / (spec.dims[0] * spec.dims[1]);
  return {m1 + 1, m2 + 1, m3 + 1};
}

std::vector<Bond> bonds(const LatticeSpec& spec) {
  std::vector<Bond> out;
  const int n_sites = spec.total_sites();
  for (int axis = 0; axis < 3; ++axis) {
    const int len = spec.dims[axis];
    if (len < 2) continue;
    const bool periodic = spec.bc[axis] == Boundary::Periodic;
    for (int i = 0; i < n_sites; ++i) {
      auto c = site_coords(i, spec);
      if (c[axis] < len) {
        auto c2 = c;
        ++c2[axis];
        out.push_back({i, site_index(c2, spec), axis, false, 1.0});
      } else if (periodic && len > 2) {
        auto c2 = c;
        c2[axis] = 1;
        out.push_back({i, site_index(c2, spec), axis, true, 1.0});
      }
    }
    if (periodic && len == 2) {
      // a_{r+2e} = a_r makes the wrap term coincide with the direct bond;
      // the pair is connected once with doubled weight
      for (auto& b : out)
        if (b.axis == axis) b.weight = 2.0;
    }
  }
  return out;
}

ResonantParams resonant_parameters(const LatticeSpec& spec) {
  ResonantParams p;
  for (int a = 0; a < 3; ++a) {
    p.interaction[a] = spec.coupling[a] * std::cos(spec.momentum[a]);
    if (spec.open(a) && spec.axis_active(a))
      p.boundary_mu[a] = 0.5 * spec.coupling[a] *
                         Complex{std::cos(spec.momentum[a]), std::sin(spec.momentum[a])};
  }
  return p;
}

double condensate_energy_per_particle(const LatticeSpec& spec) {
  const auto p = resonant_parameters(spec);
  double e = 0.0;
  for (int a = 0; a < 3; ++a)
    if (spec.axis_active(a)) e += p.interaction[a];
  return e;
}

std::vector<double> site_phases(const LatticeSpec& spec) {
  std::vector<double> phases(static_cast<std::size_t>(spec.total_sites()));
  for (int i = 0; i < spec.total_sites(); ++i) {
    const auto c = site_coords(i, spec);
    phases[static_cast<std::size_t>(i)] = spec.momentum[0] * c[0] + spec.momentum[1] * c[1] +
                                          spec.momentum[2] * c[2];
  }
  return phases;
}

std::vector<double> critical_momenta(int chain_length) {
  if (chain_length < 2) throw std::domain_error("critical_momenta: chain length must be >= 2");
  std::vector<double> qs;
  qs.reserve(static_cast<std::size_t>(2 * chain_length - 2));
  for (int m = 1; m <= 2 * chain_length - 1; ++m) {
    if (m == chain_length) continue;
    qs.push_back(std::numbers::pi * m / chain_length);
  }
  return qs;
}

bool is_critical_momentum(double q, int chain_length, double tol) {
  if (chain_length < 2) throw std::domain_error("is_critical_momentum: chain length must be >= 2");
  const double step = std::numbers::pi / chain_length;
  const double m = q / step;
  const double m_round = std::round(m);
  if (std::abs(q - m_round * step) > tol) return false;
  const int mi = static_cast<int>(m_round);
  return mi >= 1 && mi <= 2 * chain_length - 1 && mi != chain_length;
}

}  // namespace hcb
