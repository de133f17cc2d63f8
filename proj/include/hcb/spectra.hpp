#ifndef HCB_SPECTRA_HPP
#define HCB_SPECTRA_HPP

#include <string>
#include <vector>

#include "hcb/fockspace.hpp"

namespace hcb {

// Classification thresholds, relative to scale = max|H_ij| * dim. The absolute
// values actually used are recorded in every report.
struct Tolerances {
  double imag_rel = 1e-8;     // |Im E| above this counts as complex
  double cluster_rel = 1e-7;  // single-linkage clustering radius
  double rank_rel = 1e-8;     // singular-value cutoff for nullity
};

struct Cluster {
  Complex value;               // algebraic mean of the clustered eigenvalues
  int algebraic = 1;           // a
  int geometric = 1;           // g (nullity of the restricted block)
  int jordan_order = 1;        // largest block size
  int defective_blocks = 0;    // number of Jordan blocks of size >= 2
  double radius = 0.0;         // max |lambda_i - mean|
  double witness_low = 0.0;    // ||M^{k-1}|| (stays above tolerance)
  double witness_high = 0.0;   // ||M^k||   (falls below tolerance)
};

struct SpectralReport {
  std::vector<Complex> eigenvalues;  // sorted by (Re, Im)
  std::vector<Cluster> clusters;     // only multiplicity >= 2 entries
  int n_complex_pairs = 0;           // eigenvalues with Im > tol (one per conjugate pair)
  int n_complex_total = 0;           // eigenvalues with |Im| > tol
  int n_coalescing = 0;              // total Jordan blocks of size >= 2
  std::vector<int> orders;           // block size per coalescing block
  bool ambiguous_clustering = false; // two clusters within 10x cluster tol of merging
  bool corner_potential_stacking = false;  // >= 2 open active axes
  double tol_imag_abs = 0.0, tol_cluster_abs = 0.0, tol_rank_abs = 0.0;
};

struct Eigendecomposition {
  Vector eigenvalues;
  Matrix right_vectors;
};

// Dense cap for eigensolves; HARDCORE_EP_DENSE_CAP overrides.
Eigen::Index dense_cap();

// General complex dense eigendecomposition (eigenvalues sorted by (Re, Im),
// vectors matched).
Eigendecomposition eigendecompose(const SparseOperator& op);

SpectralReport classify(const SparseOperator& op, const Tolerances& tol = {});

// Level-structure summary in table form: "n_CM,n_ORxn_CS", e.g. "0,2x36";
// "-" when no coalescing blocks exist.
std::string summary_string(const SpectralReport& report);

// JSON serialization of a report (eigenvalues, clusters, tolerances, summary).
std::string report_to_json(const SpectralReport& report, int indent = 2);

// ||H psi - E psi||_2 for unit-norm psi.
double verify_eigenstate(const SparseOperator& op, const Vector& psi, Complex energy);

// Free-boson EP order: C(n_d + n - 1, n).
std::int64_t ep_order_free_boson(int resonant_dims, int particles);

}  // namespace hcb

#endif
