// hardcore-ep: batch front-end for the hardcore-boson EP simulator.
//
//   hardcore-ep <spectrum|verify|overlap|odlro|scatter|generate|sweep>
//               --config <path> [--out <dir>] [--check <golden-dir>] [--threads k]
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 check mismatch.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "hcb/dynamics.hpp"
#include "hcb/fockspace.hpp"
#include "hcb/lattice.hpp"
#include "hcb/spectra.hpp"
#include "hcb/states.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hcb;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& context) {
  if (!obj.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError(context + ": unknown key '" + key + "'");
  }
}

// momentum values: plain number or "<a>pi/<b>" (also "pi", "<a>pi", "pi/<b>")
double parse_momentum(const json& v, const std::string& context) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string())
    throw ConfigError(context + ": momentum must be a number or 'a pi/b' string");
  const std::string s = v.get<std::string>();
  const auto pos = s.find("pi");
  try {
    if (pos == std::string::npos) {
      std::size_t used = 0;
      const double x = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return x;
    }
    double num = 1.0, den = 1.0;
    if (pos > 0) {
      std::size_t used = 0;
      num = std::stod(s.substr(0, pos), &used);
      if (used != pos) throw std::invalid_argument(s);
    }
    const std::string rest = s.substr(pos + 2);
    if (!rest.empty()) {
      if (rest[0] != '/') throw std::invalid_argument(s);
      std::size_t used = 0;
      den = std::stod(rest.substr(1), &used);
      if (used != rest.size() - 1) throw std::invalid_argument(s);
    }
    if (den == 0.0) throw std::invalid_argument(s);
    return num * std::numbers::pi / den;
  } catch (const std::exception&) {
    throw ConfigError(context + ": cannot parse momentum '" + s + "'");
  }
}

std::string momentum_label(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  std::ostringstream os;
  os.precision(12);
  os << v.get<double>();
  return os.str();
}

Boundary parse_boundary(const std::string& s, const std::string& context) {
  if (s == "open") return Boundary::Open;
  if (s == "periodic") return Boundary::Periodic;
  throw ConfigError(context + ": boundary must be 'open' or 'periodic', got '" + s + "'");
}

struct LatticeConfig {
  LatticeSpec spec;
  HopScale hop_scale = HopScale::Half;
};

LatticeConfig lattice_from_json(const json& j, const std::string& context) {
  require_keys(j, {"dims", "bc", "J", "q", "hop_scale"}, context);
  if (!j.contains("dims")) throw ConfigError(context + ": missing 'dims'");
  LatticeConfig out;
  const auto& dims = j.at("dims");
  if (!dims.is_array() || dims.size() != 3)
    throw ConfigError(context + ": dims must be [N1,N2,N3]");
  for (int a = 0; a < 3; ++a) out.spec.dims[a] = dims[a].get<int>();
  if (j.contains("bc")) {
    const auto& bc = j.at("bc");
    if (!bc.is_array() || bc.size() != 3) throw ConfigError(context + ": bc must have 3 entries");
    for (int a = 0; a < 3; ++a) out.spec.bc[a] = parse_boundary(bc[a].get<std::string>(), context);
  }
  if (j.contains("J")) {
    const auto& cj = j.at("J");
    if (!cj.is_array() || cj.size() != 3) throw ConfigError(context + ": J must have 3 entries");
    for (int a = 0; a < 3; ++a) out.spec.coupling[a] = cj[a].get<double>();
  }
  if (j.contains("q")) {
    const auto& q = j.at("q");
    if (!q.is_array() || q.size() != 3) throw ConfigError(context + ": q must have 3 entries");
    for (int a = 0; a < 3; ++a) out.spec.momentum[a] = parse_momentum(q[a], context + ".q");
  }
  if (j.contains("hop_scale")) {
    const std::string hs = j.at("hop_scale").get<std::string>();
    if (hs == "half")
      out.hop_scale = HopScale::Half;
    else if (hs == "one")
      out.hop_scale = HopScale::One;
    else
      throw ConfigError(context + ": hop_scale must be 'half' or 'one'");
  }
  try {
    validate_lattice(out.spec);
  } catch (const std::domain_error& e) {
    throw ConfigError(context + ": " + std::string(e.what()));
  }
  return out;
}

json lattice_to_json(const LatticeConfig& lc) {
  json j;
  j["dims"] = lc.spec.dims;
  j["bc"] = json::array();
  for (int a = 0; a < 3; ++a)
    j["bc"].push_back(lc.spec.bc[a] == Boundary::Open ? "open" : "periodic");
  j["J"] = lc.spec.coupling;
  j["q"] = lc.spec.momentum;
  j["hop_scale"] = lc.hop_scale == HopScale::Half ? "half" : "one";
  return j;
}

void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os << content;
  }
  fs::rename(tmp, path);
}

std::string header_block(const json& config, const json& extra = {}) {
  std::ostringstream os;
  os << "# hardcore-ep output\n";
  os << "# config: " << config.dump() << "\n";
  if (!extra.is_null() && !extra.empty()) os << "# resolved: " << extra.dump() << "\n";
  return os.str();
}

void run_pool(std::vector<std::function<void()>>& jobs, int threads) {
  threads = std::max(1, threads);
  if (threads == 1) {
    for (auto& j : jobs) j();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        try {
          jobs[i]();
        } catch (...) {
          std::scoped_lock lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_double(double x, int prec = 12) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

Tolerances tolerances_from_json(const json& cfg, const std::string& context) {
  Tolerances tol;
  if (cfg.contains("tolerances")) {
    const auto& t = cfg.at("tolerances");
    require_keys(t, {"imag_rel", "cluster_rel", "rank_rel"}, context + ".tolerances");
    tol.imag_rel = t.value("imag_rel", tol.imag_rel);
    tol.cluster_rel = t.value("cluster_rel", tol.cluster_rel);
    tol.rank_rel = t.value("rank_rel", tol.rank_rel);
  }
  return tol;
}

// ---------------------------------------------------------------- spectrum

int run_spectrum(const json& cfg, const fs::path& out, const std::string& check_dir,
                 int threads) {
  require_keys(cfg, {"experiment", "table_name", "lattice", "n", "cells", "tolerances", "seed"},
               "spectrum");
  const std::string table = cfg.value("table_name", "spectrum");
  const LatticeConfig base = lattice_from_json(cfg.at("lattice"), "spectrum.lattice");
  const Tolerances tol = tolerances_from_json(cfg, "spectrum");

  struct Cell {
    std::string q1_label;
    double q1;
    int n;
  };
  std::vector<Cell> cells;
  if (cfg.contains("cells")) {
    const auto& c = cfg.at("cells");
    require_keys(c, {"q1", "n"}, "spectrum.cells");
    for (const auto& qv : c.at("q1"))
      for (const auto& nv : c.at("n"))
        cells.push_back({momentum_label(qv), parse_momentum(qv, "spectrum.cells.q1"),
                         nv.get<int>()});
  } else {
    if (!cfg.contains("n")) throw ConfigError("spectrum: missing 'n'");
    cells.push_back({format_double(base.spec.momentum[0]), base.spec.momentum[0],
                     cfg.at("n").get<int>()});
  }

  std::vector<std::string> summaries(cells.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    jobs.push_back([&, i] {
      const Cell& cell = cells[i];
      LatticeConfig lc = base;
      lc.spec.momentum[0] = cell.q1;
      validate_lattice(lc.spec);
      const FockBasis basis(lc.spec.total_sites(), cell.n);
      const auto h = build_hamiltonian(lc.spec, resonant_parameters(lc.spec), basis, lc.hop_scale);
      auto rep = classify(h, tol);
      rep.corner_potential_stacking = lc.spec.open_active_axes() >= 2;
      summaries[i] =
          "q1=" + cell.q1_label + " n=" + std::to_string(cell.n) + ": " + summary_string(rep);

      json body = json::parse(report_to_json(rep));
      body["provenance"] = {{"config", cfg},
                            {"lattice_resolved", lattice_to_json(lc)},
                            {"cell", {{"q1", cell.q1_label}, {"n", cell.n}}}};
      atomic_write(out / (table + "_cell_" + std::to_string(i) + ".json"), body.dump(2) + "\n");
    });
  }
  run_pool(jobs, threads);

  std::ostringstream table_text;
  for (const auto& s : summaries) table_text << s << "\n";
  atomic_write(out / (table + "_summary.txt"), header_block(cfg) + table_text.str());
  std::cout << table_text.str();

  if (!check_dir.empty()) {
    const fs::path golden = fs::path(check_dir) / (table + "_summary.txt");
    std::ifstream is(golden);
    if (!is) throw CheckError("check: cannot open golden file " + golden.string());
    std::vector<std::string> want;
    std::string line;
    while (std::getline(is, line))
      if (!line.empty() && line[0] != '#') want.push_back(line);
    std::ostringstream diffs;
    bool ok = want.size() == summaries.size();
    if (!ok) diffs << "row count: got " << summaries.size() << " want " << want.size() << "\n";
    for (std::size_t i = 0; i < std::min(want.size(), summaries.size()); ++i)
      if (want[i] != summaries[i]) {
        ok = false;
        diffs << "mismatch: got '" << summaries[i] << "' want '" << want[i] << "'\n";
      }
    if (!ok) throw CheckError("golden table check failed for " + table + "\n" + diffs.str());
    std::cout << "check: " << table << " matches golden\n";
  }
  return 0;
}

// ------------------------------------------------------------------ verify

int run_verify(const json& cfg, const fs::path& out, int threads) {
  require_keys(cfg, {"experiment", "grid", "seed"}, "verify");
  std::mt19937 rng(cfg.value("seed", 0));

  struct Case {
    LatticeConfig lc;
    int n;
    bool control;
  };
  std::vector<Case> cases;
  if (!cfg.contains("grid")) throw ConfigError("verify: missing 'grid'");
  for (const auto& block : cfg.at("grid")) {
    require_keys(block, {"type", "N", "n", "cases", "controls"}, "verify.grid");
    const std::string type = block.at("type").get<std::string>();
    const bool controls = block.value("controls", false);
    if (type == "open_chain_criticals" || type == "ring_grid") {
      for (const auto& nv : block.at("N")) {
        const int n_sites = nv.get<int>();
        std::vector<double> qs;
        if (type == "open_chain_criticals") {
          qs = critical_momenta(n_sites);
        } else {
          for (int m = 1; m <= n_sites; ++m) qs.push_back(2 * std::numbers::pi * m / n_sites);
        }
        for (double q : qs)
          for (const auto& nn : block.at("n")) {
            const int n = nn.get<int>();
            if (n > n_sites) continue;
            LatticeConfig lc;
            lc.spec.dims = {n_sites, 1, 1};
            lc.spec.bc[0] = type == "open_chain_criticals" ? Boundary::Open : Boundary::Periodic;
            lc.spec.momentum[0] = q;
            validate_lattice(lc.spec);
            cases.push_back({lc, n, controls});
          }
      }
    } else if (type == "explicit") {
      for (const auto& c : block.at("cases")) {
        require_keys(c, {"lattice", "n"}, "verify.grid.cases");
        cases.push_back({lattice_from_json(c.at("lattice"), "verify.grid.cases.lattice"),
                         c.at("n").get<int>(), controls});
      }
    } else {
      throw ConfigError("verify: unknown grid type '" + type + "'");
    }
  }

  std::vector<std::string> rows(cases.size());
  std::vector<std::uint32_t> seeds(cases.size());
  for (auto& s : seeds) s = rng();
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    jobs.push_back([&, i] {
      const auto& c = cases[i];
      auto basis = std::make_shared<FockBasis>(c.lc.spec.total_sites(), c.n);
      const auto h =
          build_hamiltonian(c.lc.spec, resonant_parameters(c.lc.spec), *basis, c.lc.hop_scale);
      const auto psi = condensate_state(basis, {c.n, PhaseSign::Minus}, site_phases(c.lc.spec));
      const double scale_factor = c.lc.hop_scale == HopScale::One ? 2.0 : 1.0;
      const double energy = scale_factor * c.n * condensate_energy_per_particle(c.lc.spec);
      const double resid = verify_eigenstate(h, psi.amplitudes, Complex{energy, 0});
      std::ostringstream os;
      os << c.lc.spec.dims[0] << "x" << c.lc.spec.dims[1] << "x" << c.lc.spec.dims[2] << ","
         << (c.lc.spec.bc[0] == Boundary::Open ? "open" : "periodic") << ","
         << format_double(c.lc.spec.momentum[0]) << "," << format_double(c.lc.spec.momentum[1])
         << "," << format_double(c.lc.spec.momentum[2]) << "," << c.n << ","
         << format_double(energy) << "," << format_double(resid, 6);
      if (c.control) {
        std::mt19937 local(seeds[i]);
        std::normal_distribution<double> dist;
        Vector v(basis->dim());
        for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = Complex{dist(local), dist(local)};
        v /= v.norm();
        os << "," << format_double(verify_eigenstate(h, v, Complex{energy, 0}), 6);
      }
      rows[i] = os.str();
    });
  }
  run_pool(jobs, threads);

  bool any_controls = false;
  for (const auto& c : cases) any_controls |= c.control;
  std::ostringstream csv;
  csv << header_block(cfg);
  csv << "dims,bc1,q1,q2,q3,n,energy,residual" << (any_controls ? ",control_residual" : "")
      << "\n";
  for (const auto& r : rows) csv << r << "\n";
  atomic_write(out / "verify.csv", csv.str());
  std::cout << "verify: " << cases.size() << " cases written to " << (out / "verify.csv") << "\n";
  return 0;
}

// ------------------------------------------------------------------ overlap

int run_overlap(const json& cfg, const fs::path& out) {
  require_keys(cfg, {"experiment", "N", "q", "n", "midpoints"}, "overlap");
  const int n_sites = cfg.at("N").get<int>();
  std::vector<std::pair<std::string, double>> qs;
  if (cfg.at("q").is_string() && cfg.at("q").get<std::string>() == "criticals") {
    for (double q : critical_momenta(n_sites)) qs.emplace_back(format_double(q), q);
  } else {
    for (const auto& qv : cfg.at("q"))
      qs.emplace_back(momentum_label(qv), parse_momentum(qv, "overlap.q"));
  }
  if (cfg.value("midpoints", false)) {
    std::vector<double> sorted;
    for (auto& [_, q] : qs) sorted.push_back(q);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
      qs.emplace_back("mid:" + format_double(0.5 * (sorted[i] + sorted[i + 1])),
                      0.5 * (sorted[i] + sorted[i + 1]));
  }

  std::ostringstream csv;
  csv << header_block(cfg);
  csv << "q,n,overlap_re,overlap_im,overlap_abs,critical\n";
  for (const auto& [label, q] : qs) {
    LatticeSpec spec;
    spec.dims = {n_sites, 1, 1};
    spec.momentum = {q, 0, 0};
    validate_lattice(spec);
    const auto phases = site_phases(spec);
    for (const auto& nv : cfg.at("n")) {
      const int n = nv.get<int>();
      if (n > n_sites) continue;
      auto basis = std::make_shared<FockBasis>(n_sites, n);
      const auto psi = condensate_state(basis, {n, PhaseSign::Minus}, phases);
      const auto phi = condensate_state(basis, {n, PhaseSign::Plus}, phases);
      const Complex ov = biorthogonal_overlap(phi, psi);
      csv << label << "," << n << "," << format_double(ov.real()) << ","
          << format_double(ov.imag()) << "," << format_double(std::abs(ov)) << ","
          << (is_critical_momentum(q, n_sites) ? 1 : 0) << "\n";
    }
  }
  atomic_write(out / "overlap.csv", csv.str());
  std::cout << "overlap: written " << (out / "overlap.csv") << "\n";
  return 0;
}

// -------------------------------------------------------------------- odlro

int run_odlro(const json& cfg, const fs::path& out) {
  require_keys(cfg, {"experiment", "lattice", "n"}, "odlro");
  const LatticeConfig lc = lattice_from_json(cfg.at("lattice"), "odlro.lattice");
  const int n = cfg.at("n").get<int>();
  const int n_sites = lc.spec.total_sites();
  auto basis = std::make_shared<FockBasis>(n_sites, n);
  const auto psi = condensate_state(basis, {n, PhaseSign::Minus}, site_phases(lc.spec));
  const double formula =
      n_sites > 1 ? double(n) * (n_sites - n) / (double(n_sites) * (n_sites - 1)) : 0.0;

  std::ostringstream csv;
  csv << header_block(cfg, {{"formula", formula}});
  csv << "site,R1,R2,R3,corr_re,corr_im,corr_abs,delta_vs_formula\n";
  double worst = 0.0;
  for (int site = 0; site < n_sites; ++site) {
    for (int d1 = 0; d1 < lc.spec.dims[0]; ++d1)
      for (int d2 = 0; d2 < lc.spec.dims[1]; ++d2)
        for (int d3 = 0; d3 < lc.spec.dims[2]; ++d3) {
          if (d1 == 0 && d2 == 0 && d3 == 0) continue;
          const auto c = site_coords(site, lc.spec);
          bool in_range = true;
          const std::array<int, 3> disp{d1, d2, d3};
          for (int a = 0; a < 3; ++a)
            if (lc.spec.bc[a] == Boundary::Open && c[a] + disp[a] > lc.spec.dims[a])
              in_range = false;
          if (!in_range) continue;
          const Complex corr = correlation(psi, site, disp, lc.spec);
          const double delta = std::abs(std::abs(corr) - formula);
          worst = std::max(worst, delta);
          csv << site << "," << d1 << "," << d2 << "," << d3 << "," << format_double(corr.real())
              << "," << format_double(corr.imag()) << "," << format_double(std::abs(corr)) << ","
              << format_double(delta, 6) << "\n";
        }
  }
  atomic_write(out / "odlro.csv", csv.str());
  std::cout << "odlro: worst |corr|-formula delta " << worst << "\n";
  return 0;
}

// ------------------------------------------------------------------ scatter

struct ScatterResult {
  std::vector<double> times;
  std::vector<double> prob;
  Eigen::MatrixXd profile;
  double t_star = 0.0;
  double contrast = 0.0;
  double final_p = 0.0;
};

ScatterResult scatter_run(int n_sites, int n, double q_sys, double alpha, double center,
                          double q_packet, double t_max, double dt_factor, int samples,
                          int window) {
  LatticeSpec spec;
  spec.dims = {n_sites, 1, 1};
  // absorbing potential e^{-i q_sys} on site 1 realized by lattice momentum -q_sys
  spec.momentum = {2 * std::numbers::pi - q_sys, 0, 0};
  validate_lattice(spec);
  auto basis = std::make_shared<FockBasis>(n_sites, n);
  const auto h = build_hamiltonian(spec, resonant_parameters(spec), *basis, HopScale::One);
  const auto psi0 = gaussian_wavepacket(basis, {alpha, center, q_packet, n});
  const double rho = spectral_radius_bound(h);
  const double dt = dt_factor / rho;
  const auto n_steps = static_cast<long>(std::llround(t_max / dt));
  const int sample_every = static_cast<int>(std::max(1L, n_steps / std::max(1, samples)));
  const auto traj = evolve(h, psi0.amplitudes, t_max, dt, sample_every);

  ScatterResult res;
  res.times = traj.times;
  res.prob = total_probability(traj);
  res.profile = site_profile(traj, *basis);
  res.final_p = res.prob.back();
  Eigen::Index best = 0;
  double best_sum = -1.0;
  for (Eigen::Index s = 0; s < res.profile.rows(); ++s) {
    const double w = res.profile.row(s).head(window).sum();
    if (w > best_sum) {
      best_sum = w;
      best = s;
    }
  }
  res.t_star = res.times[static_cast<std::size_t>(best)];
  const auto win = res.profile.row(best).head(window);
  const double mean = win.mean();
  const double sd = std::sqrt((win.array() - mean).square().sum() / window);
  res.contrast = mean > 0 ? sd / mean : 0.0;
  return res;
}

int run_scatter(const json& cfg, const fs::path& out, int threads) {
  require_keys(
      cfg,
      {"experiment", "N", "alpha", "N0", "q_c", "q", "n", "t_max", "dt_factor", "samples",
       "window"},
      "scatter");
  const int n_sites = cfg.at("N").get<int>();
  const double alpha = cfg.at("alpha").get<double>();
  const double center = cfg.at("N0").get<double>();
  const double q_sys = parse_momentum(cfg.at("q_c"), "scatter.q_c");
  const double dt_factor = cfg.value("dt_factor", 0.05);
  const int samples = cfg.value("samples", 400);
  const int window = cfg.value("window", 15);
  if (n_sites < 2) throw ConfigError("scatter: N must be >= 2");
  if (samples < 1) throw ConfigError("scatter: samples must be >= 1");
  if (window < 1 || window > n_sites) throw ConfigError("scatter: window outside the chain");
  if (cfg.contains("t_max") && cfg.at("t_max").is_number() &&
      cfg.at("t_max").get<double>() <= 0)
    throw ConfigError("scatter: degenerate time grid, t_max must be positive");
  if (!cfg.contains("q") || !cfg.contains("n")) throw ConfigError("scatter: need 'q' and 'n'");

  struct Run {
    std::string q_label;
    double q;
    int n;
  };
  std::vector<Run> runs;
  for (const auto& nv : cfg.at("n"))
    for (const auto& qv : cfg.at("q"))
      runs.push_back({momentum_label(qv), parse_momentum(qv, "scatter.q"), nv.get<int>()});

  std::vector<ScatterResult> results(runs.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    jobs.push_back([&, i] {
      const auto& r = runs[i];
      double t_max;
      if (cfg.contains("t_max") && cfg.at("t_max").is_number()) {
        t_max = cfg.at("t_max").get<double>();
      } else {
        // packet reaches the boundary and any reflection returns to mid-chain
        const double v = 2.0 * std::sin(r.q);
        if (v <= 0) throw ConfigError("scatter: packet momentum must have positive velocity");
        t_max = (center + 0.5 * n_sites) / v;
      }
      results[i] =
          scatter_run(n_sites, r.n, q_sys, alpha, center, r.q, t_max, dt_factor, samples, window);
    });
  }
  run_pool(jobs, threads);

  std::ostringstream fringe;
  fringe << header_block(cfg);
  fringe << "n,q,t_max,P_final,t_star,fringe_contrast\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const auto& res = results[i];
    const std::string stem = "scatter_n" + std::to_string(r.n) + "_run" + std::to_string(i);

    std::ostringstream csv;
    csv << header_block(cfg, {{"q", r.q}, {"n", r.n}});
    csv << "t,P\n";
    for (std::size_t s = 0; s < res.times.size(); ++s)
      csv << format_double(res.times[s]) << "," << format_double(res.prob[s]) << "\n";
    atomic_write(out / (stem + ".csv"), csv.str());

    std::ostringstream nd;
    nd << header_block(cfg, {{"q", r.q}, {"n", r.n}});
    for (std::size_t s = 0; s < res.times.size(); ++s) {
      json rec;
      rec["t"] = res.times[s];
      const auto row = res.profile.row(static_cast<Eigen::Index>(s));
      rec["p_j"] = std::vector<double>(row.begin(), row.end());
      nd << rec.dump() << "\n";
    }
    atomic_write(out / (stem + ".ndjson"), nd.str());

    fringe << r.n << "," << r.q_label << "," << format_double(res.times.back()) << ","
           << format_double(res.final_p) << "," << format_double(res.t_star) << ","
           << format_double(res.contrast) << "\n";
  }
  atomic_write(out / "scatter_summary.csv", fringe.str());
  std::cout << "scatter: " << runs.size() << " runs written under " << out << "\n";
  return 0;
}

// ----------------------------------------------------------------- generate

int run_generate(const json& cfg, const fs::path& out, int threads) {
  require_keys(cfg, {"experiment", "N", "runs", "t_max", "dt_factor", "samples", "fit_window"},
               "generate");
  const int n_sites = cfg.at("N").get<int>();
  const double t_max = cfg.value("t_max", 2000.0);
  const double dt_factor = cfg.value("dt_factor", 0.05);
  const int samples = cfg.value("samples", 400);
  double fit_lo = t_max / 10, fit_hi = t_max;
  if (cfg.contains("fit_window")) {
    fit_lo = cfg.at("fit_window")[0].get<double>();
    fit_hi = cfg.at("fit_window")[1].get<double>();
  }

  struct Run {
    std::string q_label;
    double q;
    int n;
  };
  std::vector<Run> runs;
  for (const auto& rv : cfg.at("runs")) {
    require_keys(rv, {"q", "n"}, "generate.runs");
    runs.push_back(
        {momentum_label(rv.at("q")), parse_momentum(rv.at("q"), "generate.runs.q"),
         rv.at("n").get<int>()});
  }

  struct RunOut {
    std::vector<double> t, p, f, f_plus;
    PowerLawFit fit;
  };
  std::vector<RunOut> results(runs.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    jobs.push_back([&, i] {
      const auto& r = runs[i];
      LatticeSpec spec;
      spec.dims = {n_sites, 1, 1};
      spec.momentum = {r.q, 0, 0};
      validate_lattice(spec);
      auto basis = std::make_shared<FockBasis>(n_sites, r.n);
      const auto h = build_hamiltonian(spec, resonant_parameters(spec), *basis, HopScale::One);
      std::vector<int> sites(static_cast<std::size_t>(r.n));
      for (int k = 0; k < r.n; ++k) sites[static_cast<std::size_t>(k)] = k;
      const auto psi0 = product_state(basis, sites);
      const auto target = condensate_state(basis, {r.n, PhaseSign::Minus}, site_phases(spec));
      const auto partner = condensate_state(basis, {r.n, PhaseSign::Plus}, site_phases(spec));
      const double rho = spectral_radius_bound(h);
      const double dt = dt_factor / rho;
      const auto n_steps = static_cast<long>(std::llround(t_max / dt));
      const int sample_every = static_cast<int>(std::max(1L, n_steps / std::max(1, samples)));
      const auto traj = evolve(h, psi0.amplitudes, t_max, dt, sample_every);
      RunOut o;
      o.t = traj.times;
      o.p = total_probability(traj);
      o.f = fidelity(traj, target);
      o.f_plus = fidelity(traj, partner);
      o.fit = fit_power_law(o.t, o.p, fit_lo, fit_hi);
      results[i] = std::move(o);
    });
  }
  run_pool(jobs, threads);

  std::ostringstream fits;
  fits << header_block(cfg);
  fits << "q,n,final_F,final_F_plus,slope,slope_stderr,final_P\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const auto& o = results[i];
    std::ostringstream csv;
    csv << header_block(cfg, {{"q", r.q}, {"n", r.n}});
    csv << "t,P,F,norm2\n";
    for (std::size_t s = 0; s < o.t.size(); ++s)
      csv << format_double(o.t[s]) << "," << format_double(o.p[s]) << "," << format_double(o.f[s])
          << "," << format_double(o.p[s]) << "\n";
    atomic_write(out / ("generate_run" + std::to_string(i) + ".csv"), csv.str());
    fits << r.q_label << "," << r.n << "," << format_double(o.f.back()) << ","
         << format_double(o.f_plus.back()) << "," << format_double(o.fit.slope, 6) << ","
         << format_double(o.fit.stderr, 4) << "," << format_double(o.p.back(), 8) << "\n";
  }
  atomic_write(out / "generate_fits.csv", fits.str());
  std::cout << "generate: " << runs.size() << " runs written under " << out << "\n";
  return 0;
}

// -------------------------------------------------------------------- sweep

int dispatch(const json& cfg, const fs::path& out, const std::string& check_dir, int threads);

int run_sweep(const json& cfg, const fs::path& out, int threads) {
  require_keys(cfg, {"experiment", "runs"}, "sweep");
  if (!cfg.contains("runs")) throw ConfigError("sweep: missing 'runs'");
  // validate up front so a bad cell cannot abort a half-written sweep
  for (const auto& run : cfg.at("runs")) require_keys(run, {"name", "config"}, "sweep.runs");
  std::vector<std::function<void()>> jobs;
  std::atomic<int> rc{0};
  for (const auto& run : cfg.at("runs")) {
    const std::string name = run.at("name").get<std::string>();
    const json inner = run.at("config");
    jobs.push_back([&rc, out, name, inner] {
      const int code = dispatch(inner, out / name, "", 1);
      int prev = rc.load();
      while (prev < code && !rc.compare_exchange_weak(prev, code)) {
      }
    });
  }
  run_pool(jobs, threads);
  return rc.load();
}

int dispatch(const json& cfg, const fs::path& out, const std::string& check_dir, int threads) {
  if (!cfg.contains("experiment")) throw ConfigError("config: missing 'experiment'");
  const std::string exp = cfg.at("experiment").get<std::string>();
  if (exp == "spectrum") return run_spectrum(cfg, out, check_dir, threads);
  if (exp == "verify") return run_verify(cfg, out, threads);
  if (exp == "overlap") return run_overlap(cfg, out);
  if (exp == "odlro") return run_odlro(cfg, out);
  if (exp == "scatter") return run_scatter(cfg, out, threads);
  if (exp == "generate") return run_generate(cfg, out, threads);
  if (exp == "sweep") return run_sweep(cfg, out, threads);
  throw ConfigError("config: unknown experiment '" + exp + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hardcore-boson exceptional-point simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", check_dir;
  int threads = 1;
  for (const char* name :
       {"spectrum", "verify", "overlap", "odlro", "scatter", "generate", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run-config JSON")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--check", check_dir, "golden directory for --check mode");
    sub->add_option("--threads", threads, "worker threads");
  }

  CLI11_PARSE(app, argc, argv);

  json cfg;
  try {
    std::ifstream is(config_path);
    if (!is) throw ConfigError("cannot open config " + config_path);
    cfg = json::parse(is);
  } catch (const json::parse_error& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (cfg.contains("experiment") && cfg.at("experiment").get<std::string>() != sub)
      throw ConfigError("config experiment '" + cfg.at("experiment").get<std::string>() +
                        "' does not match subcommand '" + sub + "'");
    return dispatch(cfg, out_dir, check_dir, threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CheckError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::length_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
