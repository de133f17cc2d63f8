#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hcb/fockspace.hpp"
#include "hcb/states.hpp"

using namespace hcb;
using std::numbers::pi;

namespace {

LatticeSpec make_spec(std::array<int, 3> dims, std::array<Boundary, 3> bc,
                      std::array<double, 3> q, std::array<double, 3> j = {1, 1, 1}) {
  LatticeSpec s;
  s.dims = dims;
  s.bc = bc;
  s.momentum = q;
  s.coupling = j;
  validate_lattice(s);
  return s;
}

constexpr auto kOpen = Boundary::Open;
constexpr auto kPeriodic = Boundary::Periodic;

// Brute-force dense assembly straight from the operator algebra, kept
// independent of the sparse code path.
Matrix dense_oracle(const LatticeSpec& spec, const ResonantParams& params,
                    const FockBasis& basis, double factor) {
  const auto bond_list = bonds(spec);
  Matrix h = Matrix::Zero(basis.dim(), basis.dim());
  for (Eigen::Index col = 0; col < basis.dim(); ++col) {
    const ConfigMask c = basis.config(col);
    for (Eigen::Index row = 0; row < basis.dim(); ++row) {
      const ConfigMask cp = basis.config(row);
      Complex elem{0, 0};
      for (const auto& b : bond_list) {
        const ConfigMask bi = ConfigMask{1} << b.from;
        const ConfigMask bj = ConfigMask{1} << b.to;
        // (J/2) a_i^dag a_j term: c must hold j and not i, cp = c - j + i
        if ((c & bj) && !(c & bi) && cp == ((c ^ bj) | bi))
          elem += 0.5 * spec.coupling[b.axis] * b.weight;
        if ((c & bi) && !(c & bj) && cp == ((c ^ bi) | bj))
          elem += 0.5 * spec.coupling[b.axis] * b.weight;
        if (row == col && (c & bi) && (c & bj))
          elem += params.interaction[b.axis] * b.weight;
      }
      if (row == col) {
        for (int site = 0; site < spec.total_sites(); ++site) {
          if (!((c >> site) & 1)) continue;
          const auto coords = site_coords(site, spec);
          for (int a = 0; a < 3; ++a) {
            if (!spec.axis_active(a) || spec.bc[a] != kOpen) continue;
            if (coords[a] == 1) elem += params.boundary_mu[a];
            if (coords[a] == spec.dims[a]) elem += std::conj(params.boundary_mu[a]);
          }
        }
      }
      h(row, col) = factor * elem;
    }
  }
  return h;
}

}  // namespace

TEST_CASE("basis enumeration sizes and ordering") {
  CHECK(FockBasis(10, 2).dim() == 45);
  CHECK(FockBasis(10, 5).dim() == 252);
  CHECK(FockBasis(15, 4).dim() == 1365);
  CHECK(FockBasis(4, 0).dim() == 1);
  CHECK(FockBasis(4, 4).dim() == 1);

  const FockBasis b(10, 3);
  for (Eigen::Index i = 0; i < b.dim(); ++i) {
    CHECK(mask_popcount(b.config(i)) == 3);
    if (i > 0) CHECK(b.config(i) > b.config(i - 1));
    CHECK(b.index_of(b.config(i)) == i);
  }
  CHECK(b.index_of(0b111100) == -1);  // wrong particle count

  CHECK_THROWS_AS(FockBasis(30, 15, 1000), std::length_error);
  CHECK_THROWS_AS(FockBasis(4, 5), std::domain_error);
}

TEST_CASE("hop_element") {
  CHECK(hop_element(0b011, 0, 2).value() == 0b110);
  CHECK_FALSE(hop_element(0b011, 0, 1).has_value());  // target occupied
  CHECK_FALSE(hop_element(0b100, 0, 1).has_value());  // source empty
}

TEST_CASE("two-site chain matrix is the literal resonant form") {
  // [[mu, 1/2], [1/2, mu*]] with mu = e^{iq}/2
  const double q = 0.3;
  const auto spec = make_spec({2, 1, 1}, {kOpen, kOpen, kOpen}, {q, 0, 0});
  const auto h = Matrix(build_hamiltonian(spec, resonant_parameters(spec), FockBasis(2, 1)));
  const Complex mu = 0.5 * std::exp(Complex{0, q});
  CHECK(std::abs(h(0, 0) - mu) < 1e-15);
  CHECK(std::abs(h(1, 1) - std::conj(mu)) < 1e-15);
  CHECK(std::abs(h(0, 1) - Complex{0.5, 0}) < 1e-15);
  CHECK(std::abs(h(1, 0) - Complex{0.5, 0}) < 1e-15);
}

TEST_CASE("hermitian limits") {
  // periodic ring: mu = 0, everything real
  const auto ring = make_spec({10, 1, 1}, {kPeriodic, kOpen, kOpen}, {2 * pi / 10, 0, 0});
  const auto h = Matrix(build_hamiltonian(ring, resonant_parameters(ring), FockBasis(10, 2)));
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-14);

  // open chain at q = 0 and q = pi: mu real
  for (double q : {0.0, pi}) {
    const auto open_spec = make_spec({6, 1, 1}, {kOpen, kOpen, kOpen}, {q, 0, 0});
    const auto ho =
        Matrix(build_hamiltonian(open_spec, resonant_parameters(open_spec), FockBasis(6, 2)));
    CHECK((ho - ho.adjoint()).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("PT symmetry of the 1D open chain") {
  const auto spec = make_spec({8, 1, 1}, {kOpen, kOpen, kOpen}, {pi / 8, 0, 0});
  const auto basis = FockBasis(8, 3);
  const auto h = Matrix(build_hamiltonian(spec, resonant_parameters(spec), basis));
  const auto perm = reversal_permutation(basis, spec);
  Matrix php(h.rows(), h.cols());
  for (Eigen::Index r = 0; r < h.rows(); ++r)
    for (Eigen::Index c = 0; c < h.cols(); ++c) php(r, c) = h(perm[r], perm[c]);
  CHECK((php.conjugate() - h).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("sparse assembly equals the dense oracle") {
  struct Case {
    LatticeSpec spec;
    int n;
  };
  std::vector<Case> cases;
  cases.push_back({make_spec({10, 1, 1}, {kOpen, kOpen, kOpen}, {pi / 10, 0, 0}), 2});
  cases.push_back({make_spec({10, 1, 1}, {kOpen, kOpen, kOpen}, {3 * pi / 10, 0, 0}), 3});
  cases.push_back({make_spec({10, 1, 1}, {kPeriodic, kOpen, kOpen}, {2 * pi / 10, 0, 0}), 3});
  cases.push_back({make_spec({5, 3, 1}, {kOpen, kPeriodic, kOpen}, {pi / 5, 2 * pi / 3, 0}), 2});
  cases.push_back(
      {make_spec({3, 2, 2}, {kPeriodic, kPeriodic, kPeriodic}, {2 * pi / 3, pi, pi}), 2});
  cases.push_back({make_spec({4, 3, 1}, {kOpen, kOpen, kOpen}, {0.4, 1.1, 0}, {1, 0.7, 1}), 2});
  for (const auto& [spec, n] : cases) {
    const FockBasis basis(spec.total_sites(), n);
    REQUIRE(basis.dim() <= 500);
    const auto params = resonant_parameters(spec);
    for (HopScale scale : {HopScale::Half, HopScale::One}) {
      const double factor = scale == HopScale::One ? 2.0 : 1.0;
      const auto sparse = Matrix(build_hamiltonian(spec, params, basis, scale));
      const auto dense = dense_oracle(spec, params, basis, factor);
      CHECK((sparse - dense).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
}

TEST_CASE("particle number is conserved structurally") {
  const auto spec = make_spec({6, 1, 1}, {kOpen, kOpen, kOpen}, {pi / 6, 0, 0});
  const FockBasis basis(6, 3);
  const auto h = build_hamiltonian(spec, resonant_parameters(spec), basis);
  for (Eigen::Index r = 0; r < h.outerSize(); ++r)
    for (SparseOperator::InnerIterator it(h, r); it; ++it) {
      CHECK(mask_popcount(basis.config(it.row())) == 3);
      CHECK(mask_popcount(basis.config(it.col())) == 3);
    }
}

TEST_CASE("number operator") {
  const auto basis = std::make_shared<FockBasis>(6, 2);
  for (int site : {0, 3, 5}) {
    const auto op = number_operator(*basis, site);
    for (Eigen::Index i = 0; i < basis->dim(); ++i) {
      const double expect = ((basis->config(i) >> site) & 1) != 0 ? 1.0 : 0.0;
      CHECK(Matrix(op)(i, i) == Complex{expect, 0.0});
    }
  }
  CHECK_THROWS_AS(number_operator(*basis, 6), std::domain_error);

  // sum_j n_j = n * identity on the sector
  Matrix sum = Matrix::Zero(basis->dim(), basis->dim());
  for (int j = 0; j < 6; ++j) sum += Matrix(number_operator(*basis, j));
  CHECK((sum - 2.0 * Matrix::Identity(basis->dim(), basis->dim())).cwiseAbs().maxCoeff() == 0.0);

  // <phi|n_j|phi> equals ||a_j phi||^2, the annihilated state built in the
  // (n-1)-particle sector
  std::mt19937 rng(42);
  std::normal_distribution<double> dist;
  Vector phi(basis->dim());
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] = Complex{dist(rng), dist(rng)};
  phi /= phi.norm();
  const FockBasis lower(6, 1);
  for (int j = 0; j < 6; ++j) {
    Vector aphi = Vector::Zero(lower.dim());
    for (Eigen::Index i = 0; i < basis->dim(); ++i) {
      const ConfigMask c = basis->config(i);
      if ((c >> j) & 1) aphi[lower.index_of(c & ~(ConfigMask{1} << j))] += phi[i];
    }
    const Complex lhs = phi.dot(number_operator(*basis, j) * phi);
    CHECK(lhs.real() == doctest::Approx(aphi.squaredNorm()).epsilon(1e-12));
    CHECK(std::abs(lhs.imag()) < 1e-14);
  }
}

TEST_CASE("condensate eigenstate residual (resonant open chain)") {
  const auto spec = make_spec({10, 1, 1}, {kOpen, kOpen, kOpen}, {pi / 10, 0, 0});
  const auto basis = std::make_shared<FockBasis>(10, 2);
  const auto h = build_hamiltonian(spec, resonant_parameters(spec), *basis);
  const auto phases = site_phases(spec);
  const auto psi = condensate_state(basis, {2, PhaseSign::Minus}, phases);
  const Complex energy{2 * std::cos(pi / 10), 0.0};
  CHECK((h * psi.amplitudes - energy * psi.amplitudes).norm() <= 1e-10);
}

TEST_CASE("dimension mismatch is rejected") {
  const auto spec = make_spec({6, 1, 1}, {kOpen, kOpen, kOpen}, {pi / 6, 0, 0});
  CHECK_THROWS_AS(build_hamiltonian(spec, resonant_parameters(spec), FockBasis(5, 2)),
                  std::domain_error);
}

TEST_CASE("triplet export format") {
  const auto spec = make_spec({2, 1, 1}, {kOpen, kOpen, kOpen}, {0.3, 0, 0});
  const auto h = build_hamiltonian(spec, resonant_parameters(spec), FockBasis(2, 1));
  std::ostringstream os;
  export_triplets(h, os);
  std::istringstream is(os.str());
  Eigen::Index dim, nnz;
  is >> dim >> nnz;
  CHECK(dim == 2);
  CHECK(nnz == h.nonZeros());
  Eigen::Index row, col;
  double re, im;
  int lines = 0;
  while (is >> row >> col >> re >> im) ++lines;
  CHECK(lines == nnz);
}
