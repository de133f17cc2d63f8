#include "hcb/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hcb {

namespace {

double matrix_scale(const Matrix& h) {
  const double maxabs = h.cwiseAbs().maxCoeff();
  return maxabs * static_cast<double>(h.rows());
}

// Unitary similarity swapping the adjacent diagonal entries t(k,k) and
// t(k+1,k+1) of an upper-triangular matrix (Givens built from the eigenvector
// of the trailing eigenvalue).
void swap_adjacent_entries(Matrix& t, Eigen::Index k) {
  const Complex a = t(k, k);
  const Complex b = t(k, k + 1);
  const Complex c = t(k + 1, k + 1);
  const Complex v0 = b;
  const Complex v1 = c - a;
  const double nrm = std::hypot(std::abs(v0), std::abs(v1));
  if (nrm == 0.0) return;  // already coincident; nothing to move
  const Complex cs = v0 / nrm;
  const Complex sn = v1 / nrm;
  Eigen::Matrix2cd g;
  g << cs, -std::conj(sn), sn, std::conj(cs);
  t.middleRows(k, 2) = g.adjoint() * t.middleRows(k, 2);
  t.middleCols(k, 2) = t.middleCols(k, 2) * g;
  t(k + 1, k) = Complex{0, 0};
}

// Restriction of (T - mean I) to the invariant subspace of the selected
// diagonal positions, obtained by bubbling them to the top-left corner.
Matrix cluster_block(const Matrix& t_in, std::vector<Eigen::Index> positions, Complex mean) {
  Matrix t = t_in;
  std::sort(positions.begin(), positions.end());
  for (std::size_t dest = 0; dest < positions.size(); ++dest) {
    for (Eigen::Index k = positions[dest] - 1; k >= static_cast<Eigen::Index>(dest); --k)
      swap_adjacent_entries(t, k);
  }
  const auto a = static_cast<Eigen::Index>(positions.size());
  Matrix m = t.topLeftCorner(a, a);
  m.diagonal().array() -= mean;
  return m;
}

int count_below(const Eigen::VectorXd& singular_values, double threshold) {
  int n = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    if (singular_values[i] < threshold) ++n;
  return n;
}

struct UnionFind {
  std::vector<Eigen::Index> parent;
  explicit UnionFind(Eigen::Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  }
  Eigen::Index find(Eigen::Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(Eigen::Index a, Eigen::Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(a)] = b;
  }
};

}  // namespace

Eigen::Index dense_cap() {
  if (const char* env = std::getenv("HARDCORE_EP_DENSE_CAP")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<Eigen::Index>(v);
  }
  return 4096;
}

Eigendecomposition eigendecompose(const SparseOperator& op) {
  if (op.rows() > dense_cap())
    throw std::length_error("eigendecompose: dimension exceeds the dense cap");
  Matrix h = Matrix(op);
  Eigen::ComplexEigenSolver<Matrix> solver(h, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecompose: QR iteration failed to converge");
  Eigendecomposition out;
  const Eigen::Index n = h.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& ev = solver.eigenvalues();
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (ev[a].real() != ev[b].real()) return ev[a].real() < ev[b].real();
    return ev[a].imag() < ev[b].imag();
  });
  out.eigenvalues.resize(n);
  out.right_vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues[i] = ev[order[static_cast<std::size_t>(i)]];
    out.right_vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

SpectralReport classify(const SparseOperator& op, const Tolerances& tol) {
  if (op.rows() > dense_cap())
    throw std::length_error("classify: dimension exceeds the dense cap");
  const Matrix h = Matrix(op);
  const Eigen::Index dim = h.rows();
  const double scale = matrix_scale(h);

  SpectralReport rep;
  rep.tol_imag_abs = tol.imag_rel * scale;
  rep.tol_cluster_abs = tol.cluster_rel * scale;
  rep.tol_rank_abs = tol.rank_rel * scale;

  Eigen::ComplexSchur<Matrix> schur(h, /*computeU=*/false);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("classify: Schur reduction failed to converge");
  const Matrix& t = schur.matrixT();
  Vector w = t.diagonal();

  rep.eigenvalues.assign(w.data(), w.data() + dim);
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (w[i].imag() > rep.tol_imag_abs) ++rep.n_complex_pairs;
    if (std::abs(w[i].imag()) > rep.tol_imag_abs) ++rep.n_complex_total;
  }

  // single-linkage clustering, sweep over eigenvalues sorted by real part
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return w[a].real() < w[b].real(); });
  UnionFind uf(dim);
  for (Eigen::Index ii = 0; ii < dim; ++ii) {
    for (Eigen::Index jj = ii + 1; jj < dim; ++jj) {
      const Eigen::Index i = order[static_cast<std::size_t>(ii)];
      const Eigen::Index j = order[static_cast<std::size_t>(jj)];
      if (w[j].real() - w[i].real() > rep.tol_cluster_abs) break;
      if (std::abs(w[j] - w[i]) <= rep.tol_cluster_abs) uf.unite(i, j);
    }
  }
  std::vector<std::vector<Eigen::Index>> groups(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) groups[static_cast<std::size_t>(uf.find(i))].push_back(i);

  // ambiguity: any two distinct clusters within 10x of merging
  {
    std::vector<Complex> centers;
    for (const auto& g : groups)
      if (!g.empty()) {
        Complex c{0, 0};
        for (auto i : g) c += w[i];
        centers.push_back(c / static_cast<double>(g.size()));
      }
    std::sort(centers.begin(), centers.end(),
              [](Complex a, Complex b) { return a.real() < b.real(); });
    for (std::size_t i = 0; i + 1 < centers.size() && !rep.ambiguous_clustering; ++i) {
      for (std::size_t j = i + 1; j < centers.size(); ++j) {
        if (centers[j].real() - centers[i].real() > 10 * rep.tol_cluster_abs) break;
        if (std::abs(centers[j] - centers[i]) <= 10 * rep.tol_cluster_abs) {
          rep.ambiguous_clustering = true;
          break;
        }
      }
    }
  }

  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    Cluster cl;
    cl.algebraic = static_cast<int>(g.size());
    Complex mean{0, 0};
    for (auto i : g) mean += w[i];
    mean /= static_cast<double>(g.size());
    cl.value = mean;
    for (auto i : g) cl.radius = std::max(cl.radius, std::abs(w[i] - mean));

    const Matrix m = cluster_block(t, g, mean);
    const double eps_local = std::max(rep.tol_rank_abs, 2.0 * cl.radius);
    Eigen::JacobiSVD<Matrix> svd(m);
    const double norm_m = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    std::vector<int> nullity{0, count_below(svd.singularValues(), eps_local)};
    cl.geometric = std::max(1, nullity[1]);
    if (cl.geometric >= cl.algebraic) {
      cl.jordan_order = 1;
      rep.clusters.push_back(cl);
      continue;
    }
    Matrix mk = m;
    double norm_prev = norm_m;
    int k = 1;
    while (nullity.back() < cl.algebraic && k <= cl.algebraic) {
      mk = mk * m;
      ++k;
      const double thr = k * std::pow(norm_m, k - 1) * eps_local;
      Eigen::JacobiSVD<Matrix> svdk(mk);
      nullity.push_back(count_below(svdk.singularValues(), thr));
      const double norm_k = svdk.singularValues().size() ? svdk.singularValues()[0] : 0.0;
      if (nullity.back() >= cl.algebraic) {
        cl.witness_low = norm_prev;
        cl.witness_high = norm_k;
      }
      norm_prev = norm_k;
    }
    cl.jordan_order = k;
    // blocks of size >= s: nullity[s] - nullity[s-1]
    cl.defective_blocks = nullity.size() > 2 ? nullity[2] - nullity[1]
                                             : cl.algebraic - cl.geometric;
    rep.n_coalescing += cl.defective_blocks;
    for (std::size_t s = 2; s < nullity.size(); ++s) {
      const int at_least_s = nullity[s] - nullity[s - 1];
      const int at_least_s1 = s + 1 < nullity.size()
                                  ? nullity[s + 1] - nullity[s]
                                  : 0;
      for (int b = 0; b < at_least_s - at_least_s1; ++b)
        rep.orders.push_back(static_cast<int>(s));
    }
    rep.clusters.push_back(cl);
  }
  std::sort(rep.clusters.begin(), rep.clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    return a.value.imag() < b.value.imag();
  });
  std::sort(rep.orders.begin(), rep.orders.end());
  return rep;
}

std::string summary_string(const SpectralReport& report) {
  std::ostringstream os;
  os << report.n_complex_pairs << ",";
  if (report.n_coalescing == 0) {
    os << "-";
    return os.str();
  }
  const bool uniform = std::adjacent_find(report.orders.begin(), report.orders.end(),
                                          std::not_equal_to<>()) == report.orders.end();
  if (uniform) {
    os << report.orders.front() << "x" << report.n_coalescing;
  } else {
    for (std::size_t i = 0; i < report.orders.size(); ++i)
      os << (i ? "+" : "") << report.orders[i];
  }
  return os.str();
}

std::string report_to_json(const SpectralReport& report, int indent) {
  nlohmann::json j;
  j["summary"] = summary_string(report);
  j["n_complex_pairs"] = report.n_complex_pairs;
  j["n_complex_total"] = report.n_complex_total;
  j["n_coalescing"] = report.n_coalescing;
  j["orders"] = report.orders;
  j["ambiguous_clustering"] = report.ambiguous_clustering;
  j["corner_potential_stacking"] = report.corner_potential_stacking;
  j["tolerances"] = {{"imag", report.tol_imag_abs},
                     {"cluster", report.tol_cluster_abs},
                     {"rank", report.tol_rank_abs}};
  auto& eig = j["eigenvalues"] = nlohmann::json::array();
  for (const auto& e : report.eigenvalues) eig.push_back({e.real(), e.imag()});
  auto& cls = j["clusters"] = nlohmann::json::array();
  for (const auto& c : report.clusters) {
    cls.push_back({{"value", {c.value.real(), c.value.imag()}},
                   {"algebraic", c.algebraic},
                   {"geometric", c.geometric},
                   {"jordan_order", c.jordan_order},
                   {"defective_blocks", c.defective_blocks},
                   {"radius", c.radius},
                   {"nilpotency_witness", {c.witness_low, c.witness_high}}});
  }
  return j.dump(indent);
}

double verify_eigenstate(const SparseOperator& op, const Vector& psi, Complex energy) {
  if (op.cols() != psi.size()) throw std::domain_error("verify_eigenstate: shape mismatch");
  return (op * psi - energy * psi).norm();
}

std::int64_t ep_order_free_boson(int resonant_dims, int particles) {
  if (resonant_dims < 1) throw std::domain_error("ep_order_free_boson: n_d must be >= 1");
  if (particles < 0) throw std::domain_error("ep_order_free_boson: n must be >= 0");
  return binomial(resonant_dims + particles - 1, particles);
}

}  // namespace hcb
