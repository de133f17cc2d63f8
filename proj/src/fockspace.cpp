#include "hcb/fockspace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hcb {

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    if (r > std::numeric_limits<std::int64_t>::max() / (n - k + i))
      throw std::overflow_error("binomial: overflow");
    r = r * (n - k + i) / i;
  }
  return r;
}

int mask_popcount(ConfigMask m) {
  return std::popcount(static_cast<std::uint64_t>(m)) +
         std::popcount(static_cast<std::uint64_t>(m >> 64));
}

int mask_ctz(ConfigMask m) {
  const auto lo = static_cast<std::uint64_t>(m);
  if (lo) return std::countr_zero(lo);
  return 64 + std::countr_zero(static_cast<std::uint64_t>(m >> 64));
}

std::string mask_to_string(ConfigMask m) {
  if (m == 0) return "0";
  std::string s;
  while (m != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(m % 10)));
    m /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

FockBasis::FockBasis(int sites, int particles, std::int64_t cap)
    : sites_(sites), particles_(particles) {
  if (sites < 0 || sites > 127) throw std::domain_error("FockBasis: sites must be in 0..127");
  if (particles < 0 || particles > sites)
    throw std::domain_error("FockBasis: particles must be in 0..sites");
  const std::int64_t size = binomial(sites, particles);
  if (size > cap)
    throw std::length_error("FockBasis: sector size " + std::to_string(size) +
                            " exceeds cap " + std::to_string(cap));
  configs_.reserve(static_cast<std::size_t>(size));
  if (particles == 0) {
    configs_.push_back(0);
    return;
  }
  // Gosper's hack: next integer with the same popcount
  ConfigMask v = (ConfigMask{1} << particles) - 1;
  const ConfigMask limit = (ConfigMask{1} << sites) - 1;
  while (true) {
    configs_.push_back(v);
    if (configs_.size() == static_cast<std::size_t>(size)) break;
    const ConfigMask c = v & (~v + 1);
    const ConfigMask r = v + c;
    v = (((r ^ v) >> 2) / c) | r;
    if (v > limit) break;
  }
  if (configs_.size() != static_cast<std::size_t>(size))
    throw std::logic_error("FockBasis: enumeration mismatch");
}

Eigen::Index FockBasis::index_of(ConfigMask mask) const {
  const auto it = std::lower_bound(configs_.begin(), configs_.end(), mask);
  if (it == configs_.end() || *it != mask) return -1;
  return static_cast<Eigen::Index>(it - configs_.begin());
}

std::optional<ConfigMask> hop_element(ConfigMask mask, int i, int j) {
  const ConfigMask bi = ConfigMask{1} << i;
  const ConfigMask bj = ConfigMask{1} << j;
  if (!(mask & bi) || (mask & bj)) return std::nullopt;
  return (mask & ~bi) | bj;
}

SparseOperator build_hamiltonian(const LatticeSpec& spec, const ResonantParams& params,
                                 const FockBasis& basis, HopScale scale) {
  if (basis.sites() != spec.total_sites())
    throw std::domain_error("build_hamiltonian: basis size does not match lattice");
  const auto bond_list = bonds(spec);
  const int n_sites = spec.total_sites();

  // per-site boundary potential accumulated over open axes (corners stack)
  std::vector<Complex> site_mu(static_cast<std::size_t>(n_sites), Complex{0, 0});
  for (int i = 0; i < n_sites; ++i) {
    const auto c = site_coords(i, spec);
    for (int a = 0; a < 3; ++a) {
      if (!spec.axis_active(a) || !spec.open(a)) continue;
      if (c[a] == 1) site_mu[static_cast<std::size_t>(i)] += params.boundary_mu[a];
      if (c[a] == spec.dims[a])
        site_mu[static_cast<std::size_t>(i)] += std::conj(params.boundary_mu[a]);
    }
  }

  const double factor = scale == HopScale::One ? 2.0 : 1.0;
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(basis.dim()) * (bond_list.size() + 1));
  for (Eigen::Index col = 0; col < basis.dim(); ++col) {
    const ConfigMask c = basis.config(col);
    Complex diag{0, 0};
    for (const auto& b : bond_list) {
      const bool oi = (c >> b.from) & 1;
      const bool oj = (c >> b.to) & 1;
      if (oi && oj) diag += params.interaction[b.axis] * b.weight;
      const double t = 0.5 * spec.coupling[b.axis] * b.weight * factor;
      if (t == 0.0) continue;
      if (oi && !oj) {
        const auto moved = hop_element(c, b.from, b.to);
        triplets.emplace_back(basis.index_of(*moved), col, Complex{t, 0});
      } else if (oj && !oi) {
        const auto moved = hop_element(c, b.to, b.from);
        triplets.emplace_back(basis.index_of(*moved), col, Complex{t, 0});
      }
    }
    for (int i = 0; i < n_sites; ++i)
      if ((c >> i) & 1) diag += site_mu[static_cast<std::size_t>(i)];
    if (diag != Complex{0, 0}) triplets.emplace_back(col, col, factor * diag);
  }
  SparseOperator h(basis.dim(), basis.dim());
  h.setFromTriplets(triplets.begin(), triplets.end());
  h.prune([](Eigen::Index, Eigen::Index, const Complex& v) { return v != Complex{0, 0}; });
  h.makeCompressed();
  return h;
}

SparseOperator number_operator(const FockBasis& basis, int site) {
  if (site < 0 || site >= basis.sites())
    throw std::domain_error("number_operator: site out of range");
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (Eigen::Index i = 0; i < basis.dim(); ++i)
    if ((basis.config(i) >> site) & 1) triplets.emplace_back(i, i, Complex{1, 0});
  SparseOperator op(basis.dim(), basis.dim());
  op.setFromTriplets(triplets.begin(), triplets.end());
  op.makeCompressed();
  return op;
}

std::vector<Eigen::Index> reversal_permutation(const FockBasis& basis, const LatticeSpec& spec) {
  const int n_sites = spec.total_sites();
  std::vector<int> site_map(static_cast<std::size_t>(n_sites));
  for (int i = 0; i < n_sites; ++i) {
    auto c = site_coords(i, spec);
    for (int a = 0; a < 3; ++a)
      if (spec.axis_active(a)) c[a] = spec.dims[a] + 1 - c[a];
    site_map[static_cast<std::size_t>(i)] = site_index(c, spec);
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(basis.dim()));
  for (Eigen::Index i = 0; i < basis.dim(); ++i) {
    const ConfigMask c = basis.config(i);
    ConfigMask r = 0;
    for (int s = 0; s < n_sites; ++s)
      if ((c >> s) & 1) r |= ConfigMask{1} << site_map[static_cast<std::size_t>(s)];
    perm[static_cast<std::size_t>(i)] = basis.index_of(r);
  }
  return perm;
}

double spectral_radius_bound(const SparseOperator& op) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < op.outerSize(); ++r) {
    double s = 0.0;
    for (SparseOperator::InnerIterator it(op, r); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

void export_triplets(const SparseOperator& op, std::ostream& os) {
  os << op.rows() << " " << op.nonZeros() << "\n";
  os.precision(17);
  for (Eigen::Index r = 0; r < op.outerSize(); ++r)
    for (SparseOperator::InnerIterator it(op, r); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value().real() << " " << it.value().imag()
         << "\n";
}

}  // namespace hcb
