// rib — restricted-invertibility and block-factorization toolbox.
//
// Subcommands: analyze, select, verify, oracle, scaling, demo-factor.
// Exit codes: 0 success, 1 input/contract error, 2 budget/guarantee failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rib/blockfact.hpp"
#include "rib/io.hpp"
#include "rib/operator.hpp"
#include "rib/ribsel.hpp"
#include "rib/signavg.hpp"
#include "rib/space.hpp"

namespace {

using rib::io::json;

class Timer {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

json run_report(const std::string& command, json inputs, json outputs,
                const Timer& timer) {
  json j;
  j["command"] = command;
  j["version"] = rib::io::kVersion;
  j["inputs"] = std::move(inputs);
  j["outputs"] = std::move(outputs);
  j["timing_ms"] = timer.elapsed_ms();
  return j;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

rib::SpaceSpec parse_family_flags(const std::string& family,
                                  const std::string& p_str, int dim) {
  if (family != "lp")
    throw std::invalid_argument("scaling: only the lp family is supported");
  double p;
  if (p_str == "inf" || p_str == "Inf" || p_str == "infinity")
    p = std::numeric_limits<double>::infinity();
  else
    p = std::stod(p_str);
  return rib::SpaceSpec::lp(p, dim);
}

// least-squares slope of log y against log x
std::optional<double> loglog_slope(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
  if (xs.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// --- analyze -----------------------------------------------------------

int cmd_analyze(const std::string& space_file, const std::string& matrix_file,
                double eta) {
  Timer timer;
  const rib::SpaceSpec s = rib::io::load_space(space_file);
  const rib::Operator t = rib::io::load_matrix(matrix_file);
  if (t.dim() != s.dim())
    throw std::invalid_argument("space dimension " + std::to_string(s.dim()) +
                                " does not match matrix dimension " +
                                std::to_string(t.dim()));
  const int n = s.dim();
  json out;
  out["dim"] = n;
  out["delta"] = rib::diagonal_delta(t);
  out["diagonal_min_signed"] = rib::signed_diagonal_min(t);
  // the certified norm bound is unavailable for lorentz beyond the
  // enumeration guard; report what is computable
  std::optional<double> gamma_upper;
  if (s.is_lp() || s.dim() <= 6)
    gamma_upper = rib::op_norm(s, t, rib::NormMode::upper);
  out["gamma_upper"] = gamma_upper ? json(*gamma_upper) : json(nullptr);
  if (s.is_lp() && (s.p() == 1.0 || s.p() == 2.0 || s.infinite_p()))
    out["gamma_exact"] = rib::op_norm(s, t, rib::NormMode::exact);
  auto [lam, mu] = rib::lambda_mu(s, n);
  out["lambda_n"] = lam;
  out["mu_n"] = mu;
  if (n >= 2) out["nu_n"] = rib::nu(s, n);
  out["tau_symmetric"] = rib::tau(s, n, rib::TauMode::symmetric);
  out["tau_upper"] = rib::tau(s, n, rib::TauMode::upper);
  out["lambda_mu_product_ok"] = rib::check_lambda_mu_product(s, n);
  if (rib::diagonal_delta(t) > 0.0 && gamma_upper) {
    const auto params = rib::compute_params(s, t, eta, 0, 1);
    out["window_lower"] = params.window_lower;
    out["window_upper"] = params.window_upper;
    out["alpha"] = params.alpha;
    const auto bounds = rib::expected_offdiag_bound(s, t, params);
    out["offdiag_bound_entrywise"] = bounds.entrywise;
    out["offdiag_bound_best"] = bounds.best;
    out["kappa1"] = bounds.kappa1;
  }
  json inputs;
  inputs["space"] = rib::io::space_to_json(s);
  inputs["matrix_file"] = matrix_file;
  inputs["eta"] = eta;
  emit(run_report("analyze", inputs, out, timer));
  return 0;
}

// --- select ------------------------------------------------------------

int cmd_select(const std::string& space_file, const std::string& matrix_file,
               double eta, std::uint64_t seed, long max_trials,
               std::optional<double> gamma, const std::string& out_prefix) {
  Timer timer;
  const rib::SpaceSpec s = rib::io::load_space(space_file);
  const rib::Operator t = rib::io::load_matrix(matrix_file);
  if (t.dim() != s.dim())
    throw std::invalid_argument("space/matrix dimension mismatch");
  const rib::SelectionResult res =
      rib::select_sigma_result(s, t, eta, seed, max_trials, gamma);
  json inputs;
  inputs["space"] = rib::io::space_to_json(s);
  inputs["matrix_file"] = matrix_file;
  inputs["eta"] = eta;
  inputs["seed"] = seed;
  inputs["max_trials"] = max_trials;
  if (gamma) inputs["gamma"] = *gamma;
  json out;
  out["params"] = rib::io::to_json(res.params);
  if (!res.certificate) {
    out["accepted"] = false;
    json best;
    best["trial_index"] = res.best.trial_index;
    best["sigma_size"] = res.best.sigma.size();
    best["in_omega_prime"] = res.best.in_omega_prime;
    best["offdiag_norm"] = res.best.offdiag_norm;
    best["offdiag_threshold"] =
        res.params.kappa1 / (1.0 - res.params.kappa2);
    best["deficit"] = res.best.offdiag_norm -
                      res.params.kappa1 / (1.0 - res.params.kappa2);
    out["best_candidate"] = std::move(best);
    emit(run_report("select", inputs, out, timer));
    std::cerr << "select: trial budget exhausted after " << max_trials
              << " trials\n";
    return 2;
  }
  const rib::SelectionCertificate& cert = *res.certificate;
  const rib::FactorizationCertificate fact =
      rib::factorize(s, t, cert.sigma, eta);
  out["accepted"] = true;
  out["selection"] = rib::io::to_json(cert);
  out["factorization_residual"] = fact.residual;
  if (!out_prefix.empty()) {
    std::ofstream sel(out_prefix + ".selection.json");
    sel << rib::io::to_json(cert).dump(2) << "\n";
    std::ofstream fac(out_prefix + ".factorization.json");
    fac << rib::io::to_json(fact).dump(2) << "\n";
    out["selection_file"] = out_prefix + ".selection.json";
    out["factorization_file"] = out_prefix + ".factorization.json";
  } else {
    out["factorization"] = rib::io::to_json(fact);
  }
  emit(run_report("select", inputs, out, timer));
  return fact.residual <= 1e-10 ? 0 : 2;
}

// --- verify ------------------------------------------------------------

struct CheckTable {
  int failures = 0;
  void row(const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "ok    " : "FAIL  ") << name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << "\n";
    if (!ok) ++failures;
  }
};

void verify_averaging(CheckTable& table, int trials, std::uint64_t seed) {
  for (int L : {2, 4, 6, 8}) {
    const auto signs = rib::enumerate_balanced(L);
    const double expected = rib::detail::comb(L, L / 2);
    table.row("balanced count L=" + std::to_string(L),
              static_cast<double>(signs.size()) == expected);
    double worst = 0.0;
    for (int k = 0; k < L; ++k)
      for (int l = 0; l < L; ++l) {
        if (k == l) continue;
        double sum = 0;
        for (const auto& eps : signs) sum += eps[k] * eps[l];
        worst = std::max(worst, std::fabs(sum / signs.size() + 1.0 / (L - 1)));
      }
    table.row("pair correlation L=" + std::to_string(L), worst <= 1e-14,
              "max err " + std::to_string(worst));
  }
  rib::rng::Stream stream(seed, 0xa59ull);
  double worst = 0.0;
  std::string first_bad;
  for (int tcase = 0; tcase < trials; ++tcase) {
    const int L = (tcase % 2 == 0) ? 2 : 4;
    const int N = L + static_cast<int>(stream.below(9 - L));
    Eigen::MatrixXd m(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) m(i, j) = stream.uniform(-1.0, 1.0);
    rib::Operator t(m);
    std::vector<int> a(N);
    for (int i = 0; i < N; ++i) a[i] = i;
    const double err = std::fabs(rib::cond_average_closed(t, a, L) -
                                 rib::cond_average_brute(t, a, L));
    if (err > 1e-12 && first_bad.empty())
      first_bad = "; counterexample: trial " + std::to_string(tcase) +
                  ", N=" + std::to_string(N) + ", L=" + std::to_string(L) +
                  ", seed=" + std::to_string(seed);
    worst = std::max(worst, err);
  }
  table.row("closed vs brute conditional average", worst <= 1e-12,
            "max err " + std::to_string(worst) + first_bad);
}

void verify_diaglemma(CheckTable& table, int trials, std::uint64_t seed) {
  rib::rng::Stream stream(seed, 0xd1a6ull);
  const double ps[3] = {1.0, 2.0, std::numeric_limits<double>::infinity()};
  int violations = 0;
  std::string first_bad;
  const int N = 10;
  for (int tcase = 0; tcase < trials; ++tcase) {
    const rib::SpaceSpec s = rib::SpaceSpec::lp(ps[tcase % 3], N);
    Eigen::MatrixXd m(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        m(i, j) = (i == j) ? stream.uniform(0.5, 2.0)
                           : stream.uniform(-0.5, 0.5);
    rib::Operator t(m);
    std::vector<int> a(N);
    for (int i = 0; i < N; ++i) a[i] = i;
    for (int L : {2, 4}) {
      if (rib::cond_average_closed(t, a, L) <
          rib::diag_lower_bound(s, t, N, L)) {
        ++violations;
        if (first_bad.empty())
          first_bad = "; counterexample: trial " + std::to_string(tcase) +
                      ", p index " + std::to_string(tcase % 3) + ", L=" +
                      std::to_string(L) + ", seed=" + std::to_string(seed);
      }
    }
  }
  table.row("conditional average >= diagonal lower bound", violations == 0,
            std::to_string(violations) + " violations" + first_bad);
  // block search on random positive-diagonal operators
  int search_fail = 0;
  std::string search_bad;
  for (int tcase = 0; tcase < std::min(trials, 10); ++tcase) {
    const rib::SpaceSpec s = rib::SpaceSpec::lp(ps[tcase % 3], 64);
    Eigen::MatrixXd m(64, 64);
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j)
        m(i, j) = (i == j) ? stream.uniform(1.0, 2.0)
                           : stream.uniform(-0.01, 0.01);
    rib::Operator t(m);
    const double kappa = 0.5;
    try {
      const rib::BlockPair pair = rib::block_search(s, t, 2, kappa);
      const double delta = rib::signed_diagonal_min(t);
      if (pair.value < (1.0 - kappa) * delta * 2) ++search_fail;
    } catch (const std::exception& e) {
      ++search_fail;
      if (search_bad.empty())
        search_bad = std::string("; trial ") + std::to_string(tcase) + ": " +
                     e.what();
    }
  }
  table.row("block search reaches (1-kappa) delta L", search_fail == 0,
            std::to_string(search_fail) + " failures" + search_bad);
}

void verify_blocks(CheckTable& table, int trials, std::uint64_t seed) {
  rib::rng::Stream stream(seed, 0xb1c5ull);
  const double ps[3] = {1.0, 2.0, std::numeric_limits<double>::infinity()};
  bool qb_ok = true, norm_ok = true;
  std::string qb_bad, norm_bad;
  for (int tcase = 0; tcase < trials; ++tcase) {
    const int L = (tcase % 2 == 0) ? 2 : 4;
    const int m = 2 + static_cast<int>(stream.below(3));
    const int n = 40;
    rib::BlockSystem sys;
    sys.L = L;
    int cursor = 0;
    for (int j = 0; j < m; ++j) {
      std::vector<int> block;
      for (int i = 0; i < L; ++i) {
        cursor += 1 + static_cast<int>(stream.below(2));
        block.push_back(cursor - 1);
      }
      const auto signs = rib::enumerate_balanced(L);
      sys.blocks.push_back(block);
      sys.signs.push_back(signs[stream.below(signs.size())]);
    }
    if (cursor > n) continue;
    const rib::SpaceSpec big = rib::SpaceSpec::lp(ps[tcase % 3], n);
    const rib::SpaceSpec small = big.restricted(m);
    auto [bmat, qmat] = rib::build_BQ(small, big, sys);
    const Eigen::MatrixXd qb = qmat * bmat;
    if (!qb.isApprox(static_cast<double>(L) *
                         Eigen::MatrixXd::Identity(m, m),
                     0.0)) {
      qb_ok = false;
      if (qb_bad.empty())
        qb_bad = "counterexample: trial " + std::to_string(tcase) +
                 ", seed=" + std::to_string(seed);
    }
    const double cap = big.cu() * big.cs() * L + 1e-12;
    if (rib::induced_norm(small, big, bmat, rib::NormMode::exact) > cap ||
        rib::induced_norm(big, small, qmat, rib::NormMode::exact) > cap) {
      norm_ok = false;
      if (norm_bad.empty())
        norm_bad = "counterexample: trial " + std::to_string(tcase) +
                   ", seed=" + std::to_string(seed);
    }
  }
  table.row("Q B = L I exactly", qb_ok, qb_bad);
  table.row("||B||, ||Q|| <= cu cs L", norm_ok, norm_bad);
  // projection through the identity
  const rib::SpaceSpec s8 = rib::SpaceSpec::lp(2.0, 8);
  rib::BlockSystem sys;
  sys.L = 2;
  sys.blocks = {{0, 1}, {2, 3}, {4, 5}, {6, 7}};
  sys.signs = {{1, -1}, {1, -1}, {1, -1}, {1, -1}};
  const Eigen::MatrixXd p = rib::build_P(rib::Operator::identity(8), sys);
  bool proj_ok = true;
  for (int j = 0; j < 4; ++j) {
    const Eigen::VectorXd bj = sys.b(j, 8);
    if ((p * bj - bj).cwiseAbs().maxCoeff() > 1e-14) proj_ok = false;
  }
  table.row("P restricted to the block span is the identity", proj_ok);
  const auto demo = rib::demo_factorization(s8, rib::Operator::identity(8), 4,
                                            2, 1.0);
  table.row("identity demo factorization residual <= 1e-10",
            demo.residual <= 1e-10,
            "residual " + std::to_string(demo.residual));
}

void verify_norms(CheckTable& table, int trials, std::uint64_t seed) {
  rib::rng::Stream stream(seed, 0x4e04ull);
  std::vector<rib::SpaceSpec> spaces;
  spaces.push_back(rib::SpaceSpec::lp(1.0, 16));
  spaces.push_back(rib::SpaceSpec::lp(1.5, 16));
  spaces.push_back(rib::SpaceSpec::lp(2.0, 16));
  spaces.push_back(rib::SpaceSpec::lp(3.0, 16));
  spaces.push_back(
      rib::SpaceSpec::lp(std::numeric_limits<double>::infinity(), 16));
  {
    std::vector<double> w(16);
    for (int i = 0; i < 16; ++i) w[i] = 1.0 / (i + 1);
    spaces.push_back(rib::SpaceSpec::lorentz(w));
  }
  double holder_worst = 0.0;
  bool absolute_ok = true;
  std::string holder_bad, abs_bad;
  for (int tcase = 0; tcase < trials; ++tcase) {
    const auto& s = spaces[tcase % spaces.size()];
    std::vector<double> x(16), y(16), ax(16);
    for (int i = 0; i < 16; ++i) {
      x[i] = stream.uniform(-1.0, 1.0);
      y[i] = stream.uniform(-1.0, 1.0);
      ax[i] = std::fabs(x[i]);
    }
    const double lhs = std::fabs(rib::bilinear(std::span<const double>(x),
                                               std::span<const double>(y)));
    const double rhs = rib::norm(s, x) * rib::dual_norm(s, y);
    if (lhs > rhs * (1.0 + 1e-12) && holder_bad.empty())
      holder_bad = "counterexample: trial " + std::to_string(tcase) +
                   ", seed=" + std::to_string(seed);
    holder_worst = std::max(holder_worst, lhs - rhs * (1.0 + 1e-12));
    if (rib::norm(s, x) != rib::norm(s, ax)) {
      absolute_ok = false;
      if (abs_bad.empty())
        abs_bad = "counterexample: trial " + std::to_string(tcase) +
                  ", seed=" + std::to_string(seed);
    }
  }
  table.row("pairing bounded by norm times dual norm", holder_worst <= 0.0,
            holder_bad);
  table.row("norms are absolute", absolute_ok, abs_bad);
  bool tau_ok = true;
  std::string tau_bad;
  for (std::size_t si = 0; si < spaces.size(); ++si) {
    const auto& s = spaces[si];
    if (s.is_lp() && !(s.p() == 1.0 || s.p() == 2.0 || s.infinite_p()))
      continue;  // symmetric collapse still exact, brute just slower: skip 1.5/3
    for (int m = 2; m <= 4; ++m) {
      const double brute = rib::tau(s, m, rib::TauMode::brute);
      const double sym = rib::tau(s, m, rib::TauMode::symmetric);
      if (std::fabs(brute - sym) > 1e-12) {
        tau_ok = false;
        if (tau_bad.empty())
          tau_bad = "counterexample: space " + std::to_string(si) + ", m=" +
                    std::to_string(m);
      }
    }
  }
  table.row("tau brute equals symmetric collapse (m <= 4)", tau_ok, tau_bad);
  bool eq_ok = true, mono_ok = true;
  std::string eq_bad, mono_bad;
  for (std::size_t si = 0; si < spaces.size(); ++si) {
    const auto& s = spaces[si];
    double prev = 0.0;
    for (int m = 1; m <= s.dim(); ++m) {
      if (!rib::check_lambda_mu_product(s, m)) {
        eq_ok = false;
        if (eq_bad.empty())
          eq_bad = "counterexample: space " + std::to_string(si) + ", m=" +
                   std::to_string(m);
      }
      const double lam = rib::lambda_mu(s, m).first;
      if (lam + 1e-12 < prev) {
        mono_ok = false;
        if (mono_bad.empty())
          mono_bad = "counterexample: space " + std::to_string(si) + ", m=" +
                     std::to_string(m);
      }
      prev = lam;
    }
  }
  table.row("lambda(m) mu(m) <= 2 cu cs m", eq_ok, eq_bad);
  table.row("lambda nondecreasing", mono_ok, mono_bad);
}

int cmd_verify(const std::string& suite, int trials, std::uint64_t seed) {
  CheckTable table;
  if (suite == "averaging")
    verify_averaging(table, trials, seed);
  else if (suite == "diaglemma")
    verify_diaglemma(table, trials, seed);
  else if (suite == "blocks")
    verify_blocks(table, trials, seed);
  else if (suite == "norms")
    verify_norms(table, trials, seed);
  else
    throw std::invalid_argument("unknown suite: " + suite);
  std::cout << (table.failures == 0 ? "all checks passed\n"
                                    : std::to_string(table.failures) +
                                          " checks failed\n");
  return table.failures == 0 ? 0 : 1;
}

// --- oracle ------------------------------------------------------------

int cmd_oracle(const std::string& space_file, const std::string& matrix_file,
               double eta, std::optional<std::uint64_t> select_seed) {
  Timer timer;
  const rib::SpaceSpec s = rib::io::load_space(space_file);
  const rib::Operator t = rib::io::load_matrix(matrix_file);
  if (t.dim() != s.dim())
    throw std::invalid_argument("space/matrix dimension mismatch");
  const auto [sigma, inv_norm] = rib::oracle_max_sigma(s, t, eta);
  json out;
  out["sigma"] = rib::io::indices_to_json(sigma);
  out["sigma_size"] = sigma.size();
  out["inverse_norm"] = inv_norm;
  if (select_seed) {
    const auto cert = rib::select_sigma(s, t, eta, *select_seed);
    out["select_sigma"] = rib::io::indices_to_json(cert.sigma);
    out["select_sigma_size"] = cert.sigma.size();
    out["select_within_oracle"] = cert.sigma.size() <= sigma.size();
  }
  json inputs;
  inputs["space"] = rib::io::space_to_json(s);
  inputs["matrix_file"] = matrix_file;
  inputs["eta"] = eta;
  if (select_seed) inputs["seed"] = *select_seed;
  emit(run_report("oracle", inputs, out, timer));
  return 0;
}

// --- scaling -----------------------------------------------------------

int cmd_scaling(const std::string& family, const std::string& p_str,
                const std::vector<int>& sizes, double eta,
                std::uint64_t seed) {
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1])
      throw std::invalid_argument("scaling: sizes must be ascending");
  std::vector<double> ns, gs;
  struct Row {
    int n;
    double tau, alpha, guarantee;
    long sigma_median;
  };
  std::vector<Row> rows;
  for (int n : sizes) {
    const rib::SpaceSpec s = parse_family_flags(family, p_str, n);
    const rib::Operator t = rib::Operator::identity(n);
    const auto params = rib::compute_params(s, t, eta, seed, 100000);
    const double guarantee =
        std::sqrt(params.delta * std::min(1.0, eta) / (16.0 * params.gamma)) *
        std::sqrt(static_cast<double>(n) / params.tau_n);
    std::vector<long> sizes_seen;
    for (std::uint64_t k = 0; k < 5; ++k) {
      const auto res = rib::select_sigma_result(s, t, eta, seed + k, 100000);
      sizes_seen.push_back(
          res.certificate
              ? static_cast<long>(res.certificate->sigma.size())
              : 0L);
    }
    std::sort(sizes_seen.begin(), sizes_seen.end());
    rows.push_back({n, params.tau_n, params.alpha, guarantee, sizes_seen[2]});
    ns.push_back(static_cast<double>(n));
    gs.push_back(guarantee);
  }
  const auto slope = loglog_slope(ns, gs);
  std::cout << "n,tau,alpha,guarantee_size,sigma_median,fitted_exponent\n";
  for (const auto& r : rows) {
    std::cout << r.n << "," << rib::io::format_full(r.tau) << ","
              << rib::io::format_full(r.alpha) << ","
              << rib::io::format_full(r.guarantee) << "," << r.sigma_median
              << ",";
    if (slope) std::cout << rib::io::format_full(*slope);
    std::cout << "\n";
  }
  return 0;
}

// --- demo-factor -------------------------------------------------------

int cmd_demo_factor(const std::string& space_file,
                    const std::string& matrix_file, int m, int L,
                    std::optional<double> kappa, double eta,
                    const std::string& blocks_file) {
  Timer timer;
  const rib::SpaceSpec s = rib::io::load_space(space_file);
  const rib::Operator t = rib::io::load_matrix(matrix_file);
  if (t.dim() != s.dim())
    throw std::invalid_argument("space/matrix dimension mismatch");
  rib::DemoFactorization demo;
  if (!blocks_file.empty()) {
    std::ifstream in(blocks_file);
    if (!in)
      throw std::invalid_argument("cannot open block file: " + blocks_file);
    json bj;
    in >> bj;
    const rib::BlockSystem sys = rib::io::blocksystem_from_json(bj);
    sys.validate(t.dim());
    const double k =
        kappa ? *kappa
              : rib::default_demo_kappa(s, eta, rib::diagonal_delta(t));
    demo = rib::demo_from_system(s, t, sys, eta, k);
  } else {
    demo = rib::demo_factorization(s, t, m, L, eta, kappa);
  }
  json out;
  out["residual"] = demo.residual;
  if (demo.norm_product) {
    out["norm_product"] = *demo.norm_product;
    out["norm_product_mode"] = demo.norm_product_exact ? "exact" : "upper";
  } else {
    out["norm_product"] = nullptr;
    out["norm_product_mode"] = nullptr;
  }
  out["bound_target"] = demo.bound_target;
  out["kappa"] = demo.kappa;
  out["gamma_cross"] = demo.blocks.gamma_cross;
  out["g_offdiag_norm"] = demo.g_offdiag_norm;
  out["neumann_certified"] = demo.neumann_certified;
  out["schedule_met"] = demo.blocks.schedule_met;
  out["pool_guaranteed"] = demo.blocks.guaranteed;
  out["block_diagonals"] = demo.blocks.block_diagonals;
  out["blocks"] = rib::io::blocksystem_to_json(demo.blocks.system);
  out["E"] = rib::io::matrix_to_json(demo.e);
  out["F"] = rib::io::matrix_to_json(demo.f);
  json inputs;
  inputs["space"] = rib::io::space_to_json(s);
  inputs["matrix_file"] = matrix_file;
  inputs["m"] = m;
  inputs["L"] = L;
  inputs["eta"] = eta;
  if (kappa) inputs["kappa"] = *kappa;
  emit(run_report("demo-factor", inputs, out, timer));
  return demo.residual <= 1e-10 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"restricted invertibility and factorization certificates on "
               "finite sequence spaces"};
  app.require_subcommand(1);

  std::string space_file, matrix_file, out_prefix, suite;
  std::string family = "lp", p_str = "2";
  double eta = 1.0;
  std::uint64_t seed = 0;
  long max_trials = 100000;
  int trials = 100, m_blocks = 4, block_L = 2;
  std::vector<int> sizes;
  double gamma_val = 0.0, kappa_val = 0.0;
  bool has_gamma = false, has_kappa = false, has_select_seed = false;

  auto* analyze = app.add_subcommand("analyze", "basis profile and operator diagnostics");
  analyze->add_option("space", space_file)->required();
  analyze->add_option("matrix", matrix_file)->required();
  analyze->add_option("--eta", eta, "target inverse-norm slack");

  auto* select = app.add_subcommand("select", "randomized subset selection with certificates");
  select->add_option("space", space_file)->required();
  select->add_option("matrix", matrix_file)->required();
  select->add_option("--eta", eta)->required();
  select->add_option("--seed", seed)->required();
  select->add_option("--max-trials", max_trials);
  select->add_option("--gamma", gamma_val, "tighter certified bound for ||T||")
      ->each([&](const std::string&) { has_gamma = true; });
  select->add_option("--out", out_prefix, "prefix for certificate files");

  auto* verify = app.add_subcommand("verify", "run a property suite");
  verify->add_option("--suite", suite)
      ->required()
      ->check(CLI::IsMember({"averaging", "diaglemma", "blocks", "norms"}));
  verify->add_option("--trials", trials);
  verify->add_option("--seed", seed)->required();

  auto* oracle = app.add_subcommand("oracle", "exhaustive optimal subset (n <= 14)");
  oracle->add_option("space", space_file)->required();
  oracle->add_option("matrix", matrix_file)->required();
  oracle->add_option("--eta", eta)->required();
  oracle->add_option("--seed", seed, "also run select with this seed and compare")
      ->each([&](const std::string&) { has_select_seed = true; });

  auto* scaling = app.add_subcommand("scaling", "guarantee-size sweep (CSV)");
  scaling->add_option("--family", family);
  scaling->add_option("--p", p_str);
  scaling->add_option("--sizes", sizes)->required()->delimiter(',');
  scaling->add_option("--eta", eta);
  scaling->add_option("--seed", seed)->required();

  std::string blocks_file;
  auto* demo = app.add_subcommand("demo-factor", "finite block factorization demo");
  demo->add_option("space", space_file)->required();
  demo->add_option("matrix", matrix_file)->required();
  auto* m_opt = demo->add_option("--m", m_blocks, "number of blocks (greedy)");
  demo->add_option("--L", block_L);
  demo->add_option("--kappa", kappa_val)
      ->each([&](const std::string&) { has_kappa = true; });
  demo->add_option("--eta", eta)->required();
  demo->add_option("--blocks", blocks_file,
                   "block system JSON (skips the greedy search)")
      ->excludes(m_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(space_file, matrix_file, eta);
    if (select->parsed())
      return cmd_select(space_file, matrix_file, eta, seed, max_trials,
                        has_gamma ? std::optional<double>(gamma_val)
                                  : std::nullopt,
                        out_prefix);
    if (verify->parsed()) return cmd_verify(suite, trials, seed);
    if (oracle->parsed())
      return cmd_oracle(space_file, matrix_file, eta,
                        has_select_seed ? std::optional<std::uint64_t>(seed)
                                        : std::nullopt);
    if (scaling->parsed())
      return cmd_scaling(family, p_str, sizes, eta, seed);
    if (demo->parsed()) {
      if (blocks_file.empty() && m_opt->count() == 0)
        throw std::invalid_argument("demo-factor: provide --m or --blocks");
      return cmd_demo_factor(space_file, matrix_file, m_blocks, block_L,
                             has_kappa ? std::optional<double>(kappa_val)
                                       : std::nullopt,
                             eta, blocks_file);
    }
  } catch (const rib::budget_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
