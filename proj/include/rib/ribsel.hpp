#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rib/operator.hpp"
#include "rib/rng.hpp"
#include "rib/signavg.hpp"
#include "rib/space.hpp"

namespace rib {

// Constants of the randomized selection procedure plus the window diagnostics
// for the pair of inequalities relating tau(n) to delta, Gamma and eta.
struct SelectionParams {
  double delta = 0.0;   // min_j |<T e_j, e_j*>|
  double gamma = 0.0;   // certified upper bound for ||T||
  double eta = 0.0;
  double kappa1 = 0.0;  // min(1, eta) / 4
  double kappa2 = 0.0;  // min(eta, 1/(1+eta)) / 4
  double alpha = 0.0;   // Bernoulli selection probability
  std::uint64_t seed = 0;
  long max_trials = 0;
  int n = 0;
  double tau_n = 0.0;
  bool window_lower = false;   // delta min(1,eta) / (4 Gamma n) <= tau(n)
  bool window_upper = false;
  bool alpha_clamped = false;  // alpha formula exceeded 1 and was clamped
};

inline SelectionParams compute_params(const SpaceSpec& s, const Operator& t,
                                      double eta, std::uint64_t seed,
                                      long max_trials,
                                      std::optional<double> gamma = {}) {
  if (t.dim() != s.dim())
    throw std::invalid_argument("compute_params: dimension mismatch");
  if (!(eta > 0.0)) throw std::invalid_argument("compute_params: eta must be > 0");
  if (max_trials < 1)
    throw std::invalid_argument("compute_params: max_trials must be >= 1");
  SelectionParams p;
  p.n = s.dim();
  p.delta = diagonal_delta(t);
  if (p.delta <= 0.0)
    throw std::invalid_argument("compute_params: operator has zero diagonal");
  p.gamma = gamma ? *gamma : op_norm(s, t, NormMode::upper);
  if (!(p.gamma > 0.0))
    throw std::invalid_argument("compute_params: Gamma must be positive");
  p.eta = eta;
  p.kappa1 = std::min(1.0, eta) / 4.0;
  p.kappa2 = std::min(eta, 1.0 / (1.0 + eta)) / 4.0;
  p.seed = seed;
  p.max_trials = max_trials;
  p.tau_n = tau(s, p.n, TauMode::symmetric);
  const double dm = p.delta * std::min(1.0, eta);
  p.window_lower = dm / (4.0 * p.gamma * p.n) <= p.tau_n;
  const double cap = std::min(eta, 1.0 / (1.0 + eta)) * p.n + 16.0;
  p.window_upper = p.tau_n <= dm / (1024.0 * p.gamma) * cap * cap / p.n;
  p.alpha = std::sqrt(p.delta * p.kappa1 / p.gamma) /
            std::sqrt(static_cast<double>(p.n) * p.tau_n);
  if (p.alpha > 1.0) {  // happens exactly when the lower window fails
    p.alpha = 1.0;
    p.alpha_clamped = true;
  }
  return p;
}

// Bounds on the expected off-diagonal norm E||A - R||: the entrywise sum
// bound (alpha^2/delta) sum_{i!=j} |<T e_i, e_j*>| and the two refinements
// through the signed row/column sums, whose minimum never exceeds kappa1.
struct OffdiagBounds {
  double entrywise = 0.0;
  double dual_refined = 0.0;    // via max_i || sum_{j!=i} sign_ij e_j* ||
  double primal_refined = 0.0;  // via max_j || sum_{i!=j} sign_ij e_i ||
  double best = 0.0;
  double kappa1 = 0.0;
  bool within_kappa1 = false;
};

inline OffdiagBounds expected_offdiag_bound(const SpaceSpec& s,
                                            const Operator& t,
                                            const SelectionParams& p) {
  if (t.dim() != s.dim())
    throw std::invalid_argument("expected_offdiag_bound: dimension mismatch");
  const int n = t.dim();
  OffdiagBounds out;
  out.kappa1 = p.kappa1;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) sum += std::fabs(t.entry(j, i));  // <T e_i, e_j*>
  const double a2 = p.alpha * p.alpha;
  out.entrywise = a2 / p.delta * sum;
  // sign_ij = sign(<T e_i, e_j*>), +1 at zero entries
  std::vector<double> v(static_cast<std::size_t>(n));
  double dual_max = 0.0, primal_max = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      v[static_cast<std::size_t>(j)] =
          (j == i) ? 0.0 : (t.entry(j, i) < 0.0 ? -1.0 : 1.0);
    dual_max = std::max(dual_max, dual_norm(s, v));
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i)
      v[static_cast<std::size_t>(i)] =
          (i == j) ? 0.0 : (t.entry(j, i) < 0.0 ? -1.0 : 1.0);
    primal_max = std::max(primal_max, norm(s, v));
  }
  const double scale = a2 * p.gamma / p.delta * n;
  out.dual_refined = scale * dual_max;
  out.primal_refined = scale * primal_max;
  out.best = std::min({out.entrywise, out.dual_refined, out.primal_refined});
  out.within_kappa1 = out.best <= p.kappa1 * (1.0 + 1e-12);
  return out;
}

struct TrialCandidate {
  long trial_index = -1;
  std::vector<int> sigma;      // 0-based selected coordinates
  bool in_omega_prime = false; // | |sigma| - alpha n | <= alpha n / 2
  double omega_distance = 0.0;
  double offdiag_norm = 0.0;   // ||A - R|| on the selected block
  bool accepted = false;
};

namespace detail {

// A - R restricted to sigma: zero diagonal, entries <Te_i,e_j*>/<Te_j,e_j*>.
inline Eigen::MatrixXd normalized_offdiag_block(const Operator& t,
                                                const std::vector<int>& sigma) {
  const int k = static_cast<int>(sigma.size());
  Eigen::MatrixXd s(k, k);
  for (int a = 0; a < k; ++a) {
    const double d = t.entry(sigma[static_cast<std::size_t>(a)],
                             sigma[static_cast<std::size_t>(a)]);
    for (int b = 0; b < k; ++b)
      s(a, b) = (a == b) ? 0.0
                         : t.entry(sigma[static_cast<std::size_t>(a)],
                                   sigma[static_cast<std::size_t>(b)]) /
                               d;
  }
  return s;
}

// D^-1 T on sigma x sigma (unit diagonal by construction).
inline Eigen::MatrixXd normalized_block(const Operator& t,
                                        const std::vector<int>& sigma) {
  Eigen::MatrixXd s = normalized_offdiag_block(t, sigma);
  s.diagonal().setConstant(1.0);
  return s;
}

inline double measured_block_norm(const SpaceSpec& s,
                                  const Eigen::MatrixXd& block) {
  const int k = static_cast<int>(block.rows());
  if (k == 0) return 0.0;
  const SpaceSpec rs = s.restricted(k);
  if (s.is_lp()) {
    const double p = s.p();
    const bool exact = p == 1.0 || p == 2.0 || s.infinite_p();
    return induced_norm(rs, rs, block,
                        exact ? NormMode::exact : NormMode::upper);
  }
  return induced_norm(rs, rs, block, NormMode::upper);
}

inline int thread_budget() {
  const char* env = std::getenv("RIB_THREADS");
  if (env == nullptr) return 1;
  const int v = std::atoi(env);
  return std::clamp(v, 1, 256);
}

}  // namespace detail

// One Bernoulli trial: draw the selectors from the per-trial substream,
// measure ||A - R|| on the selected block and test membership in the
// concentration window and the kappa1/(1-kappa2) acceptance threshold.
inline TrialCandidate sample_and_test(const SpaceSpec& s, const Operator& t,
                                      const SelectionParams& p,
                                      long trial_index) {
  rng::Stream stream(p.seed, static_cast<std::uint64_t>(trial_index));
  TrialCandidate c;
  c.trial_index = trial_index;
  for (int i = 0; i < p.n; ++i)
    if (stream.bernoulli(p.alpha)) c.sigma.push_back(i);
  const double an = p.alpha * p.n;
  c.omega_distance = std::fabs(static_cast<double>(c.sigma.size()) - an);
  c.in_omega_prime = c.omega_distance <= an / 2.0;
  c.offdiag_norm =
      c.sigma.size() <= 1
          ? 0.0
          : detail::measured_block_norm(
                s, detail::normalized_offdiag_block(t, c.sigma));
  c.accepted =
      c.in_omega_prime && c.offdiag_norm <= p.kappa1 / (1.0 - p.kappa2);
  return c;
}

struct SelectionCertificate {
  std::vector<int> sigma;       // 0-based
  double offdiag_norm = 0.0;
  double inverse_norm = 0.0;    // spectral for p=2, Neumann-derived otherwise
  double neumann_bound = 0.0;   // (1-kappa2)/(1-kappa1-kappa2)
  double guarantee_size = 0.0;  // sqrt(delta min(1,eta)/(16 Gamma)) sqrt(n/tau)
  bool window_satisfied = false;
  long trials_used = 0;
  std::uint64_t seed = 0;
};

struct SelectionResult {
  SelectionParams params;
  std::optional<SelectionCertificate> certificate;
  TrialCandidate best;  // best rejected candidate (diagnostics on failure)
};

namespace detail {

// (better in_omega_prime, then smaller offdiag / window distance, then index)
inline bool candidate_better(const TrialCandidate& a, const TrialCandidate& b) {
  if (b.trial_index < 0) return true;
  if (a.in_omega_prime != b.in_omega_prime) return a.in_omega_prime;
  if (a.in_omega_prime) {
    if (a.offdiag_norm != b.offdiag_norm) return a.offdiag_norm < b.offdiag_norm;
  } else {
    if (a.omega_distance != b.omega_distance)
      return a.omega_distance < b.omega_distance;
  }
  return a.trial_index < b.trial_index;
}

}  // namespace detail

// Runs Bernoulli trials until one is accepted; the accepted trial with the
// smallest index wins regardless of the RIB_THREADS parallelism, so results
// are reproducible.  On budget exhaustion throws budget_error after stashing
// the best candidate in the result (see select_sigma_result).
inline SelectionResult select_sigma_result(const SpaceSpec& s,
                                           const Operator& t, double eta,
                                           std::uint64_t seed,
                                           long max_trials = 100000,
                                           std::optional<double> gamma = {}) {
  SelectionResult res;
  res.params = compute_params(s, t, eta, seed, max_trials, gamma);
  const SelectionParams& p = res.params;
  const int threads = detail::thread_budget();
  std::optional<TrialCandidate> winner;

  long trial = 0;
  while (trial < max_trials && !winner) {
    const long batch =
        std::min<long>(max_trials - trial, threads == 1 ? 1 : 4L * threads);
    std::vector<TrialCandidate> cands(static_cast<std::size_t>(batch));
    if (threads == 1) {
      for (long b = 0; b < batch; ++b)
        cands[static_cast<std::size_t>(b)] =
            sample_and_test(s, t, p, trial + b);
    } else {
      std::vector<std::thread> pool;
      std::atomic<long> next{0};
      for (int w = 0; w < threads; ++w)
        pool.emplace_back([&]() {
          for (long b = next.fetch_add(1); b < batch; b = next.fetch_add(1))
            cands[static_cast<std::size_t>(b)] =
                sample_and_test(s, t, p, trial + b);
        });
      for (auto& th : pool) th.join();
    }
    for (const auto& c : cands) {
      if (c.accepted) {
        winner = c;
        break;
      }
      if (detail::candidate_better(c, res.best)) res.best = c;
    }
    trial += batch;
  }

  if (!winner) return res;  // certificate stays empty

  SelectionCertificate cert;
  cert.sigma = winner->sigma;
  cert.offdiag_norm = winner->offdiag_norm;
  cert.neumann_bound = (1.0 - p.kappa2) / (1.0 - p.kappa1 - p.kappa2);
  if (s.is_lp() && s.p() == 2.0 && !cert.sigma.empty()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        detail::normalized_block(t, cert.sigma));
    const double smin = svd.singularValues().minCoeff();
    cert.inverse_norm = smin > 0.0
                            ? 1.0 / smin
                            : std::numeric_limits<double>::infinity();
  } else {
    cert.inverse_norm = 1.0 / (1.0 - cert.offdiag_norm);
  }
  cert.guarantee_size =
      std::sqrt(p.delta * std::min(1.0, p.eta) / (16.0 * p.gamma)) *
      std::sqrt(static_cast<double>(p.n) / p.tau_n);
  cert.window_satisfied = p.window_lower && p.window_upper;
  cert.trials_used = winner->trial_index + 1;
  cert.seed = seed;
  res.certificate = cert;
  return res;
}

inline SelectionCertificate select_sigma(const SpaceSpec& s, const Operator& t,
                                         double eta, std::uint64_t seed,
                                         long max_trials = 100000,
                                         std::optional<double> gamma = {}) {
  SelectionResult res =
      select_sigma_result(s, t, eta, seed, max_trials, gamma);
  if (!res.certificate)
    throw budget_error(
        "select_sigma: trial budget exhausted after " +
        std::to_string(max_trials) + " trials (best candidate: |sigma|=" +
        std::to_string(res.best.sigma.size()) + ", offdiag_norm=" +
        std::to_string(res.best.offdiag_norm) + ", in_window=" +
        (res.best.in_omega_prime ? "yes" : "no") + ")");
  return *res.certificate;
}

struct FactorizationCertificate {
  std::vector<int> sigma;              // 0-based
  Eigen::MatrixXd e;                   // n x k coordinate inclusion
  Eigen::MatrixXd p;                   // k x n left factor
  double residual = 0.0;               // ||P T E - I|| (spectral)
  std::optional<double> norm_product;  // ||E|| ||P|| in the space norms
  bool norm_product_exact = false;     // both factors measured exactly
  double bound = 0.0;                  // cu^2 (1 + eta) / delta
};

// E includes the sigma coordinates, P = (R D^-1 T R)^-1 R D^-1; then
// P T E = I exactly up to the inversion roundoff.
inline FactorizationCertificate factorize(const SpaceSpec& s,
                                          const Operator& t,
                                          const std::vector<int>& sigma,
                                          double eta) {
  if (t.dim() != s.dim())
    throw std::invalid_argument("factorize: dimension mismatch");
  if (sigma.empty()) throw std::invalid_argument("factorize: empty sigma");
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i] < 0 || sigma[i] >= t.dim())
      throw std::invalid_argument("factorize: sigma index out of range");
    if (i > 0 && sigma[i] <= sigma[i - 1])
      throw std::invalid_argument("factorize: sigma must be increasing");
  }
  const int n = t.dim();
  const int k = static_cast<int>(sigma.size());
  double delta_sigma = std::numeric_limits<double>::infinity();
  for (int i : sigma) {
    const double d = std::fabs(t.entry(i, i));
    if (d == 0.0)
      throw std::invalid_argument("factorize: zero diagonal entry on sigma");
    delta_sigma = std::min(delta_sigma, d);
  }
  const Eigen::MatrixXd a = detail::normalized_block(t, sigma);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw std::invalid_argument("factorize: singular sigma-submatrix");
  const Eigen::MatrixXd ainv = lu.inverse();

  FactorizationCertificate cert;
  cert.sigma = sigma;
  cert.e = Eigen::MatrixXd::Zero(n, k);
  for (int b = 0; b < k; ++b) cert.e(sigma[static_cast<std::size_t>(b)], b) = 1.0;
  cert.p = Eigen::MatrixXd::Zero(k, n);
  for (int b = 0; b < k; ++b) {
    const int col = sigma[static_cast<std::size_t>(b)];
    cert.p.col(col) = ainv.col(b) / t.entry(col, col);
  }
  const Eigen::MatrixXd prod = cert.p * t.matrix() * cert.e;
  cert.residual = detail::spectral_norm_svd(
      prod - Eigen::MatrixXd::Identity(k, k));
  const SpaceSpec rs = s.restricted(k);
  const auto en = induced_norm_best_effort(rs, s, cert.e);
  const auto pn = induced_norm_best_effort(s, rs, cert.p);
  if (en && pn) {
    cert.norm_product = en->first * pn->first;
    cert.norm_product_exact = en->second == NormMode::exact &&
                              pn->second == NormMode::exact;
  }
  cert.bound = s.cu() * s.cu() * (1.0 + eta) / delta_sigma;
  return cert;
}

// Exhaustive ground truth: the largest sigma whose normalized submatrix has
// inverse norm at most 1 + eta, ties broken by the lexicographically smallest
// index set.  2^n subsets, guarded at n <= 14.
inline std::pair<std::vector<int>, double> oracle_max_sigma(const SpaceSpec& s,
                                                            const Operator& t,
                                                            double eta) {
  if (t.dim() != s.dim())
    throw std::invalid_argument("oracle_max_sigma: dimension mismatch");
  const int n = t.dim();
  if (n > 14)
    throw std::invalid_argument("oracle_max_sigma: limited to n <= 14");
  if (diagonal_delta(t) <= 0.0)
    throw std::invalid_argument("oracle_max_sigma: operator has zero diagonal");
  std::vector<int> best;
  double best_norm = 0.0;
  std::vector<int> sigma;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    sigma.clear();
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) sigma.push_back(i);
    if (sigma.size() < best.size()) continue;
    const Eigen::MatrixXd a = detail::normalized_block(t, sigma);
    double inv_norm;
    if (s.is_lp() && s.p() == 2.0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
      const double smin = svd.singularValues().minCoeff();
      if (smin == 0.0) continue;
      inv_norm = 1.0 / smin;
    } else {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (!lu.isInvertible()) continue;
      inv_norm = detail::measured_block_norm(s, lu.inverse());
    }
    if (inv_norm > 1.0 + eta) continue;
    if (sigma.size() > best.size() ||
        (sigma.size() == best.size() &&
         std::lexicographical_compare(sigma.begin(), sigma.end(), best.begin(),
                                      best.end()))) {
      best = sigma;
      best_norm = inv_norm;
    }
  }
  return {best, best_norm};
}

// Subset-size guarantees for a subsymmetric basis in terms of n, delta,
// Gamma, eta: the size as stated with prefactor 4, and the conservative value
// with prefactor 1/4 obtained by direct substitution of
// tau(n) <= sqrt(2 cu^3 cs^3 (n-1)) into the square-root guarantee.
struct SubsymmetricBound {
  bool precondition_ok = false;
  double stated_size = 0.0;
  double conservative_size = 0.0;
};

inline SubsymmetricBound subsymmetric_bound(const SpaceSpec& s, int n,
                                            double delta, double gamma,
                                            double eta) {
  if (n < 1) throw std::invalid_argument("subsymmetric_bound: n must be >= 1");
  if (!(gamma > 0.0) || !(eta > 0.0) || !(delta >= 0.0))
    throw std::invalid_argument("subsymmetric_bound: bad constants");
  SubsymmetricBound out;
  const double cu = s.cu(), cs = s.cs();
  const double cs3 = cs * cs * cs;
  const double dm = delta * std::min(1.0, eta);
  const bool ineq1 = n >= 1.0 + cu * dm / (4.0 * gamma);
  bool ineq2 = false;
  if (delta > 0.0) {
    const double denom = delta * delta * std::min(1.0, eta * eta) *
                         std::min(std::pow(eta, 4.0),
                                  std::pow(1.0 + eta, -4.0));
    ineq2 = n >= 2048.0 * cs3 / denom;
  }
  out.precondition_ok = ineq1 && ineq2;
  const double common = std::pow(2.0 * cu * cu * cu * cs3, -0.25) *
                        std::sqrt(dm / gamma) * std::pow(n, 0.25);
  out.stated_size = 4.0 * common;
  out.conservative_size = 0.25 * common;
  return out;
}

}  // namespace rib
