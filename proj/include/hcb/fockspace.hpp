#ifndef HCB_FOCKSPACE_HPP
#define HCB_FOCKSPACE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "hcb/lattice.hpp"

namespace hcb {

using SparseOperator = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Occupation mask; 128 bits so chains up to 127 sites fit.
using ConfigMask = unsigned __int128;

int mask_popcount(ConfigMask m);
int mask_ctz(ConfigMask m);              // index of the lowest set bit
std::string mask_to_string(ConfigMask m);  // decimal

// Ordered n-particle hardcore occupation basis on N sites. Configurations are
// N-bit masks with exactly n bits set, strictly increasing by integer value.
class FockBasis {
 public:
  static constexpr std::int64_t kDefaultCap = 2'000'000;

  FockBasis(int sites, int particles, std::int64_t cap = kDefaultCap);

  int sites() const { return sites_; }
  int particles() const { return particles_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(configs_.size()); }
  ConfigMask config(Eigen::Index i) const { return configs_[static_cast<std::size_t>(i)]; }
  const std::vector<ConfigMask>& configs() const { return configs_; }

  // exact inverse of config(); -1 when the mask is not in the basis
  Eigen::Index index_of(ConfigMask mask) const;

 private:
  int sites_;
  int particles_;
  std::vector<ConfigMask> configs_;
};

std::int64_t binomial(int n, int k);  // throws on overflow

// Moves one particle i -> j: set iff bit i occupied and bit j free.
std::optional<ConfigMask> hop_element(ConfigMask mask, int i, int j);

// Hopping convention: Half assembles the J/2 form; One doubles the whole
// operator (hopping J, interaction 2 J cos q, boundary J e^{+-iq}).
enum class HopScale { Half, One };

SparseOperator build_hamiltonian(const LatticeSpec& spec, const ResonantParams& params,
                                 const FockBasis& basis, HopScale scale = HopScale::Half);

// Diagonal occupation operator n_site.
SparseOperator number_operator(const FockBasis& basis, int site);

// Site-reversal permutation (all active axes reversed) lifted to the basis:
// perm[i] = index of the reversed configuration.
std::vector<Eigen::Index> reversal_permutation(const FockBasis& basis, const LatticeSpec& spec);

// max row sum of |H_ij|, cheap spectral-radius bound
double spectral_radius_bound(const SparseOperator& op);

// Triplet text export: "dim nnz" header then "row col re im" lines.
void export_triplets(const SparseOperator& op, std::ostream& os);

}  // namespace hcb

#endif
