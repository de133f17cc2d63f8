#ifndef HCB_STATES_HPP
#define HCB_STATES_HPP

#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "hcb/fockspace.hpp"

namespace hcb {

// Complex amplitude vector over a fixed-n basis. Unit-normalized constructors
// keep the analytic prefactor of the raw expansion in raw_norm; amplitudes are
// never silently renormalized afterwards.
struct StateVector {
  std::shared_ptr<const FockBasis> basis;
  Vector amplitudes;
  double raw_norm = 1.0;  // Euclidean norm of the expansion before normalization

  double norm() const { return amplitudes.norm(); }
};

enum class PhaseSign { Minus, Plus };  // e^{-i q.r} (psi) vs e^{+i q.r} (phi)

struct CondensateSpec {
  int particles = 1;
  PhaseSign sign = PhaseSign::Minus;
};

struct WavepacketSpec {
  double alpha = 0.05;   // width parameter
  double center = 1.0;   // N0, site units
  double momentum = 0.0; // carrier q
  int particles = 1;
};

// (sum_r g_r a_r^dag)^n |0> for unimodular g_r = e^{-+ i q.r}; unit norm.
// site_phases holds q.r per site.
StateVector condensate_state(std::shared_ptr<const FockBasis> basis, const CondensateSpec& spec,
                             std::span<const double> site_phases);

// <left|right> with the left entry conjugated; realizes the biorthogonal norm
// when left/right are the +/- phase partners.
Complex biorthogonal_overlap(const StateVector& left, const StateVector& right);

// <psi| a_r^dag a_{r+R} |psi> by direct hop application. R is a per-axis
// displacement; open axes reject displacements leaving the lattice, periodic
// axes wrap.
Complex correlation(const StateVector& psi, int site, const std::array<int, 3>& displacement,
                    const LatticeSpec& spec);

// (sum_j g_j a_j^dag)^n |0> with g_j = e^{-alpha^2 (j - N0)^2 / 2} e^{i q j}
// on a 1D chain; unit norm.
StateVector gaussian_wavepacket(std::shared_ptr<const FockBasis> basis,
                                const WavepacketSpec& spec);

// prod_j a_{sites[j]}^dag |0>: a single basis configuration.
StateVector product_state(std::shared_ptr<const FockBasis> basis, const std::vector<int>& sites);

// Text export: "config-mask re im" per line.
void export_state(const StateVector& psi, std::ostream& os);

}  // namespace hcb

#endif
