#ifndef HCB_LATTICE_HPP
#define HCB_LATTICE_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace hcb {

using Complex = std::complex<double>;

enum class Boundary { Open, Periodic };

// Rectangular lattice N1 x N2 x N3 with per-axis boundary conditions,
// couplings J and momenta q. Axes with N_a = 1 carry no bonds and no
// boundary potential. Immutable after construction.
struct LatticeSpec {
  std::array<int, 3> dims{1, 1, 1};
  std::array<Boundary, 3> bc{Boundary::Open, Boundary::Open, Boundary::Open};
  std::array<double, 3> coupling{1.0, 1.0, 1.0};  // J_a
  std::array<double, 3> momentum{0.0, 0.0, 0.0};  // q_a (radians)

  int total_sites() const { return dims[0] * dims[1] * dims[2]; }
  bool axis_active(int a) const { return dims[a] >= 2; }
  bool open(int a) const { return bc[a] == Boundary::Open; }
  int open_active_axes() const;
};

// Derived resonant parameters: interaction V_a = J_a cos q_a and boundary
// potential mu_a = J_a e^{i q_a}/2 on the first layer of each open axis
// (conjugate on the last layer). Periodic axes carry mu_a = 0.
struct ResonantParams {
  std::array<double, 3> interaction{0.0, 0.0, 0.0};   // V_a
  std::array<Complex, 3> boundary_mu{Complex{0, 0}, Complex{0, 0}, Complex{0, 0}};
};

struct Bond {
  int from = 0;
  int to = 0;
  int axis = 0;       // 0..2
  bool wrap = false;  // crosses a periodic seam
  double weight = 1.0;  // 2 on periodic axes of length 2 (wrap doubles the pair)
};

// Validates dims/bc/q. Periodic axes require q_a on the 2*pi*m/N_a grid;
// values within 1e-12 of a grid point are snapped in place.
void validate_lattice(LatticeSpec& spec);

// Row-major embedding, axis 1 fastest. Coordinates are 1-based (m_a in 1..N_a).
int site_index(const std::array<int, 3>& coords, const LatticeSpec& spec);
std::array<int, 3> site_coords(int index, const LatticeSpec& spec);

std::vector<Bond> bonds(const LatticeSpec& spec);

ResonantParams resonant_parameters(const LatticeSpec& spec);

// Eigenvalue of the condensate per particle: sum of V_a over active axes.
double condensate_energy_per_particle(const LatticeSpec& spec);

// Phase q.r for every site, in site-index order.
std::vector<double> site_phases(const LatticeSpec& spec);

// Critical momenta of an open chain of length N: {pi m / N : m = 1..2N-1, m != N}.
std::vector<double> critical_momenta(int chain_length);

bool is_critical_momentum(double q, int chain_length, double tol = 1e-9);

}  // namespace hcb

#endif
