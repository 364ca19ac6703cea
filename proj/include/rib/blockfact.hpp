#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rib/operator.hpp"
#include "rib/signavg.hpp"
#include "rib/space.hpp"

namespace rib {

// Interval-ordered disjoint blocks of even size L with balanced signs per
// block; block j defines b_j = sum eps_k e_k and d_j = sum eps_k f_k.
struct BlockSystem {
  int L = 0;
  std::vector<std::vector<int>> blocks;  // 0-based, each strictly increasing
  std::vector<std::vector<int>> signs;   // +1/-1, balanced per block

  int count() const { return static_cast<int>(blocks.size()); }

  void validate(int n) const {
    if (L <= 0 || L % 2 != 0)
      throw std::invalid_argument("block system: L must be even and positive");
    if (blocks.size() != signs.size())
      throw std::invalid_argument("block system: blocks/signs size mismatch");
    int prev_max = -1;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      const auto& b = blocks[j];
      const auto& e = signs[j];
      if (static_cast<int>(b.size()) != L || e.size() != b.size())
        throw std::invalid_argument("block system: block size != L");
      int balance = 0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] < 0 || b[i] >= n)
          throw std::invalid_argument("block system: index out of range");
        if (i > 0 && b[i] <= b[i - 1])
          throw std::invalid_argument("block system: block not increasing");
        if (e[i] != 1 && e[i] != -1)
          throw std::invalid_argument("block system: signs must be +1/-1");
        balance += e[i];
      }
      if (balance != 0)
        throw std::invalid_argument("block system: signs not balanced");
      if (b.front() <= prev_max)
        throw std::invalid_argument(
            "block system: blocks must be interval-ordered and disjoint");
      prev_max = b.back();
    }
  }

  Eigen::VectorXd b(int j, int n) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    const auto& blk = blocks[static_cast<std::size_t>(j)];
    const auto& sg = signs[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < blk.size(); ++i)
      v[blk[i]] = static_cast<double>(sg[i]);
    return v;
  }
  // d_j has the same coordinates as b_j relative to the functionals
  Eigen::VectorXd d(int j, int n) const { return b(j, n); }
};

// Block embedding B (n x m, column j = b_j) and block projection Q (m x n,
// row j = d_j); Q B = L I_m holds exactly since the entries are integers.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_BQ(
    const SpaceSpec& small, const SpaceSpec& big, const BlockSystem& sys) {
  if (small.family() != big.family())
    throw std::invalid_argument("build_BQ: spaces must share the family");
  if (small.is_lp() && small.p() != big.p())
    throw std::invalid_argument("build_BQ: spaces must share the exponent");
  sys.validate(big.dim());
  const int m = sys.count();
  if (small.dim() != m)
    throw std::invalid_argument("build_BQ: small space dimension != #blocks");
  if (static_cast<long>(m) * sys.L > big.dim())
    throw std::invalid_argument("build_BQ: m * L exceeds the big dimension");
  Eigen::MatrixXd b(big.dim(), m);
  for (int j = 0; j < m; ++j) b.col(j) = sys.b(j, big.dim());
  Eigen::MatrixXd q = b.transpose();
  return {std::move(b), std::move(q)};
}

// Block projection P x = sum_j <x, d_j> / <T~ b_j, d_j> b_j (rank m).
inline Eigen::MatrixXd build_P(const Operator& t_tilde,
                               const BlockSystem& sys) {
  const int n = t_tilde.dim();
  sys.validate(n);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < sys.count(); ++j) {
    const Eigen::VectorXd bj = sys.b(j, n);
    const Eigen::VectorXd dj = sys.d(j, n);
    const double diag = dj.dot(t_tilde.matrix() * bj);
    if (diag == 0.0)
      throw std::invalid_argument(
          "build_P: vanishing block diagonal <T~ b_j, d_j>");
    p += bj * dj.transpose() / diag;
  }
  return p;
}

struct GreedyResult {
  BlockSystem system;
  std::vector<double> block_diagonals;  // <T~ b_j, d_j>
  std::vector<double> cross_terms;      // gamma_i = max cross term at step i
  std::vector<double> cross_targets;    // per-step tolerance schedule
  double gamma_cross = 0.0;             // max over steps
  bool schedule_met = false;
  bool guaranteed = false;              // n >= m * guaranteed pool size
  int pool_size = 0;
};

// Sequentially selects interval-ordered blocks: block i is searched in a
// window of fresh indices, keeping only candidates whose block diagonal
// reaches (1-kappa) delta L and among them minimizing the largest pairing
// against the previously selected blocks.  When n is smaller than m times the
// guaranteed pool size the search still runs on the shrunken windows; the
// result then carries guaranteed = false and the achieved cross-term maximum
// is reported instead of a bound.
inline GreedyResult greedy_blocks(const SpaceSpec& s, const Operator& t,
                                  int m, int L, double kappa) {
  if (t.dim() != s.dim())
    throw std::invalid_argument("greedy_blocks: dimension mismatch");
  if (m < 1) throw std::invalid_argument("greedy_blocks: m must be >= 1");
  if (L <= 0 || L % 2 != 0)
    throw std::invalid_argument("greedy_blocks: L must be even");
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("greedy_blocks: kappa must be in (0,1)");
  const Operator tt = with_positive_diagonal(t);
  const double delta = signed_diagonal_min(tt);
  const double gamma = op_norm(s, tt, NormMode::upper);
  const int n = t.dim();

  GreedyResult res;
  res.pool_size = guaranteed_pool_size(s, gamma, delta, kappa, L);
  res.guaranteed = static_cast<long>(m) * res.pool_size <= n;
  res.system.L = L;
  const double threshold = (1.0 - kappa) * delta * L;
  const auto sign_choices = enumerate_balanced(L);

  int start = 0;
  for (int i = 0; i < m; ++i) {
    const int fresh = n - start;
    const int reserve = L * (m - 1 - i);
    int window = std::min(res.pool_size, fresh - reserve);
    if (window < L)
      throw std::invalid_argument(
          "greedy_blocks: insufficient dimension for " + std::to_string(m) +
          " blocks of size " + std::to_string(L));
    // keep the candidate enumeration within the brute-force guard
    while (window > L &&
           detail::comb(window, L) * static_cast<double>(sign_choices.size()) >
               1e6)
      --window;

    std::optional<BlockPair> chosen;
    double chosen_score = 0.0;
    std::vector<int> block(static_cast<std::size_t>(L));
    detail::for_each_combination(window, L, [&](std::span<const int> sel) {
      for (int x = 0; x < L; ++x)
        block[static_cast<std::size_t>(x)] = start + sel[x];
      for (const auto& eps : sign_choices) {
        const double diag = detail::block_pairing(tt, block, eps);
        if (diag < threshold) continue;
        // largest pairing against previous blocks, either order
        double score = 0.0;
        for (int j = 0; j < i; ++j) {
          const auto& pb = res.system.blocks[static_cast<std::size_t>(j)];
          const auto& pe = res.system.signs[static_cast<std::size_t>(j)];
          double fwd = 0.0, bwd = 0.0;
          for (std::size_t x = 0; x < pb.size(); ++x)
            for (std::size_t y = 0; y < block.size(); ++y) {
              // <T~ b_j, d_i> and <T~ b_i, d_j>
              fwd += pe[x] * eps[y] * tt.entry(block[y], pb[x]);
              bwd += eps[y] * pe[x] * tt.entry(pb[x], block[y]);
            }
          score = std::max({score, std::fabs(fwd), std::fabs(bwd)});
        }
        if (!chosen || score < chosen_score) {
          chosen = BlockPair{block, eps, diag};
          chosen_score = score;
        }
      }
    });
    if (!chosen)
      throw budget_error(
          "greedy_blocks: no block in the window reached (1-kappa) delta L");
    res.system.blocks.push_back(chosen->block);
    res.system.signs.push_back(chosen->signs);
    res.block_diagonals.push_back(chosen->value);
    res.cross_terms.push_back(chosen_score);
    // tolerance schedule 2^{-i-1} kappa delta / (cd i), 1-based step index
    const double target =
        i == 0 ? 0.0
               : std::ldexp(kappa * delta, -(i + 2)) / (s.cd() * (i + 1));
    res.cross_targets.push_back(target);
    start = chosen->block.back() + 1;
  }
  res.gamma_cross = 0.0;
  res.schedule_met = true;
  for (std::size_t i = 1; i < res.cross_terms.size(); ++i) {
    res.gamma_cross = std::max(res.gamma_cross, res.cross_terms[i]);
    if (res.cross_terms[i] > res.cross_targets[i]) res.schedule_met = false;
  }
  return res;
}

struct DemoFactorization {
  Eigen::MatrixXd e;                   // m x n left factor
  Eigen::MatrixXd f;                   // n x m right factor
  double residual = 0.0;               // ||E T F - I_m|| (spectral)
  std::optional<double> norm_product;  // ||E|| ||F|| in the space norms
  bool norm_product_exact = false;
  double bound_target = 0.0;           // 2 cu^5 cs^3 / delta + eta
  double g_offdiag_norm = 0.0;         // ||G - I|| (spectral, block frame)
  bool neumann_certified = false;      // ||G - I|| < 1
  double kappa = 0.0;
  GreedyResult blocks;
};

// Default step parameter tied to the target constant: with slack eta the
// factorization aims at 2 cu^5 cs^3 / delta + eta, which fixes
// kappa = 1 / (2 + 4 cu^5 cs^3 / (eta delta)).
inline double default_demo_kappa(const SpaceSpec& s, double eta,
                                 double delta) {
  const double cu5 = std::pow(s.cu(), 5.0);
  const double cs3 = std::pow(s.cs(), 3.0);
  return 1.0 / (2.0 + 4.0 * cu5 * cs3 / (eta * delta));
}

// Assemble the factorization I_m = E T F through a given block system:
// G[i][j] = <T~ b_j, d_i> / <T~ b_i, d_i> is the block-frame matrix of the
// projected operator, E = L G^-1 Dg^-1 Q and F = M B / L.  The identity is
// exact in exact arithmetic once G is invertible; ||G - I|| < 1 certifies
// invertibility via the Neumann series, otherwise the inversion is still
// attempted and the certificate is flagged.
inline DemoFactorization demo_from_system(const SpaceSpec& s, const Operator& t,
                                          const BlockSystem& sys, double eta,
                                          double kappa) {
  const int n = t.dim();
  sys.validate(n);
  const int m = sys.count();
  const Operator tt = with_positive_diagonal(t);
  const double delta = diagonal_delta(t);

  const SpaceSpec small = s.restricted(m);
  auto [bmat, qmat] = build_BQ(small, s, sys);
  Eigen::MatrixXd cross = qmat * tt.matrix() * bmat;  // <T~ b_j, d_i>
  Eigen::VectorXd dg = cross.diagonal();
  for (int j = 0; j < m; ++j)
    if (dg[j] == 0.0)
      throw std::invalid_argument(
          "demo_factorization: vanishing block diagonal");
  Eigen::MatrixXd g = dg.cwiseInverse().asDiagonal() * cross;

  DemoFactorization out;
  out.kappa = kappa;
  out.blocks.system = sys;
  for (int j = 0; j < m; ++j) out.blocks.block_diagonals.push_back(dg[j]);
  out.g_offdiag_norm =
      detail::spectral_norm_svd(g - Eigen::MatrixXd::Identity(m, m));
  out.neumann_certified = out.g_offdiag_norm < 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  if (!lu.isInvertible())
    throw budget_error("demo_factorization: block frame matrix G is singular");
  out.e = static_cast<double>(sys.L) * lu.inverse() *
          dg.cwiseInverse().asDiagonal() * qmat;
  // F = M J B / L; the multiplier flips the rows of B matching flipped columns
  Eigen::MatrixXd f = bmat / static_cast<double>(sys.L);
  for (int i = 0; i < n; ++i)
    if (t.entry(i, i) < 0.0) f.row(i) = -f.row(i);
  out.f = std::move(f);
  out.residual = detail::spectral_norm_svd(out.e * t.matrix() * out.f -
                                           Eigen::MatrixXd::Identity(m, m));
  const auto en = induced_norm_best_effort(s, small, out.e);
  const auto fn = induced_norm_best_effort(small, s, out.f);
  if (en && fn) {
    out.norm_product = en->first * fn->first;
    out.norm_product_exact =
        en->second == NormMode::exact && fn->second == NormMode::exact;
  }
  const double cu5 = std::pow(s.cu(), 5.0);
  const double cs3 = std::pow(s.cs(), 3.0);
  out.bound_target = 2.0 * cu5 * cs3 / delta + eta;
  return out;
}

inline DemoFactorization demo_factorization(
    const SpaceSpec& s, const Operator& t, int m, int L, double eta,
    std::optional<double> kappa = std::nullopt) {
  if (!(eta > 0.0))
    throw std::invalid_argument("demo_factorization: eta must be > 0");
  const double delta = diagonal_delta(t);
  if (delta <= 0.0)
    throw std::invalid_argument("demo_factorization: zero diagonal");
  const double k = kappa ? *kappa : default_demo_kappa(s, eta, delta);
  GreedyResult blocks = greedy_blocks(s, t, m, L, k);
  DemoFactorization out = demo_from_system(s, t, blocks.system, eta, k);
  out.blocks = std::move(blocks);
  return out;
}

}  // namespace rib
