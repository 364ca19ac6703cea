#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rib/operator.hpp"
#include "rib/rng.hpp"
#include "rib/space.hpp"

namespace rib {

// Thrown when a sampled search or trial budget runs out; distinct from
// contract violations so the CLI can map it to its own exit code.
class budget_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double comb(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Visit all size-k subsets of {0..n-1} in lexicographic order.
template <class F>
void for_each_combination(int n, int k, F&& f) {
  if (k < 0 || k > n) return;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  while (true) {
    f(std::span<const int>(c));
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

}  // namespace detail

// All balanced sign vectors on a block of even size L, lexicographic with +1
// ordered first (equivalently: the +1 positions run through the size-L/2
// subsets in lexicographic order).
inline std::vector<std::vector<int>> enumerate_balanced(int L) {
  if (L <= 0 || L % 2 != 0)
    throw std::invalid_argument("balanced signs require even block size");
  std::vector<std::vector<int>> out;
  detail::for_each_combination(L, L / 2, [&](std::span<const int> plus) {
    std::vector<int> eps(static_cast<std::size_t>(L), -1);
    for (int p : plus) eps[static_cast<std::size_t>(p)] = 1;
    out.push_back(std::move(eps));
  });
  return out;
}

inline std::vector<std::vector<int>> enumerate_balanced(
    std::span<const int> block) {
  return enumerate_balanced(static_cast<int>(block.size()));
}

// Average of eps_k eps_l (k != l) over all balanced sign vectors, computed by
// brute force and checked exactly (in integers) against -1/(L-1).
inline double pair_correlation(int L) {
  if (L <= 0 || L % 2 != 0)
    throw std::invalid_argument("pair_correlation: L must be even");
  if (L > 30) throw std::invalid_argument("pair_correlation: L too large");
  std::int64_t sum = 0, count = 0;
  detail::for_each_combination(L, L / 2, [&](std::span<const int> plus) {
    int e0 = -1, e1 = -1;
    for (int p : plus) {
      if (p == 0) e0 = 1;
      if (p == 1) e1 = 1;
    }
    sum += e0 * e1;
    ++count;
  });
  // exact rational identity: sum / count == -1 / (L-1)
  if (sum * static_cast<std::int64_t>(L - 1) != -count)
    throw std::logic_error("pair_correlation: identity violated");
  return static_cast<double>(sum) / static_cast<double>(count);
}

namespace detail {

inline void check_index_set(const Operator& t, std::span<const int> a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || a[i] >= t.dim())
      throw std::invalid_argument("index set out of range");
    if (i > 0 && a[i] <= a[i - 1])
      throw std::invalid_argument("index set must be strictly increasing");
  }
}

// <T b, d> for the block B (global indices) with signs eps.
inline double block_pairing(const Operator& t, std::span<const int> block,
                            std::span<const int> eps) {
  double v = 0.0;
  for (std::size_t a = 0; a < block.size(); ++a)
    for (std::size_t b = 0; b < block.size(); ++b)
      v += eps[a] * eps[b] * t.entry(block[b], block[a]);
  return v;
}

}  // namespace detail

// Closed form of the conditional average of <T b, d> over all (B, eps) with
// B inside A, |B| = L: (L/N) B1 - (L/(N(N-1))) B2 where B1 sums the diagonal
// over A and B2 the off-diagonal pairings over A.
inline double cond_average_closed(const Operator& t, std::span<const int> a,
                                  int L) {
  detail::check_index_set(t, a);
  const int n = static_cast<int>(a.size());
  if (L <= 0 || L % 2 != 0)
    throw std::invalid_argument("cond_average: L must be even");
  if (L > n) throw std::invalid_argument("cond_average: L exceeds |A|");
  double b1 = 0.0, b2 = 0.0;
  for (int k : a) b1 += t.entry(k, k);
  for (int k : a)
    for (int l : a)
      if (k != l) b2 += t.entry(l, k);
  const double nn = static_cast<double>(n);
  return (L / nn) * b1 - (L / (nn * (nn - 1.0))) * b2;
}

// Same average computed by enumerating every (B, eps); cost-guarded.
inline double cond_average_brute(const Operator& t, std::span<const int> a,
                                 int L) {
  detail::check_index_set(t, a);
  const int n = static_cast<int>(a.size());
  if (L <= 0 || L % 2 != 0)
    throw std::invalid_argument("cond_average: L must be even");
  if (L > n) throw std::invalid_argument("cond_average: L exceeds |A|");
  const double work = detail::comb(n, L) * detail::comb(L, L / 2);
  if (work > 1e6)
    throw std::invalid_argument("cond_average_brute: enumeration too large");
  const auto signs = enumerate_balanced(L);
  double total = 0.0;
  std::int64_t count = 0;
  std::vector<int> block(static_cast<std::size_t>(L));
  detail::for_each_combination(n, L, [&](std::span<const int> sel) {
    for (int i = 0; i < L; ++i) block[static_cast<std::size_t>(i)] = a[sel[i]];
    for (const auto& eps : signs) {
      total += detail::block_pairing(t, block, eps);
      ++count;
    }
  });
  return total / static_cast<double>(count);
}

// Lower bound for the conditional average when T has positive diagonal:
// [delta - cd * ||T|| * nu(N) / (N-1)] * L, with delta the signed diagonal
// minimum and ||T|| replaced by the certified upper bound (which only
// weakens the bound, keeping it valid).
inline double diag_lower_bound(const SpaceSpec& s, const Operator& t, int N,
                               int L) {
  if (t.dim() != s.dim())
    throw std::invalid_argument("diag_lower_bound: dimension mismatch");
  if (L <= 0 || L % 2 != 0)
    throw std::invalid_argument("diag_lower_bound: L must be even");
  if (N < std::max(L, 2) || N > s.dim())
    throw std::invalid_argument("diag_lower_bound: need max(L,2) <= N <= n");
  const double delta = signed_diagonal_min(t);
  if (delta <= 0.0)
    throw std::invalid_argument(
        "diag_lower_bound: operator must have positive diagonal "
        "(compose with the multiplier first)");
  const double gamma = op_norm(s, t, NormMode::upper);
  return (delta - s.cd() * gamma * nu(s, N) / (N - 1.0)) * L;
}

// Disjoint block with balanced signs and the attained pairing value.
struct BlockPair {
  std::vector<int> block;  // 0-based, strictly increasing
  std::vector<int> signs;  // +1/-1, balanced
  double value = 0.0;      // <T b, d>
};

// Pool size that makes the averaged pairing guarantee kick in:
// max(L, 1 + ceil(2 cd^2 cu cs^3 Gamma^2 / (kappa^2 delta^2))).
inline int guaranteed_pool_size(const SpaceSpec& s, double gamma, double delta,
                                double kappa, int L) {
  const double cs3 = s.cs() * s.cs() * s.cs();
  const double raw = 2.0 * s.cd() * s.cd() * s.cu() * cs3 * gamma * gamma /
                     (kappa * kappa * delta * delta);
  if (!(raw >= 0) || raw > 1e9)
    throw std::invalid_argument("pool size out of range");
  return std::max(L, 1 + static_cast<int>(std::ceil(raw)));
}

// Search for a block pair with <T b, d> >= (1-kappa) delta L inside the pool
// {0..P-1}.  By default P is the guaranteed pool size (error if the space is
// too small); an explicit pool searches opportunistically.  Exhaustive
// enumeration within the cost guard cannot fail on the guaranteed pool since
// the maximum dominates the conditional average; the sampled fallback accepts
// any draw reaching the average and errors when its budget is exhausted.
inline BlockPair block_search(const SpaceSpec& s, const Operator& t, int L,
                              double kappa, std::uint64_t seed = 0,
                              std::optional<int> pool = std::nullopt) {
  if (t.dim() != s.dim())
    throw std::invalid_argument("block_search: dimension mismatch");
  if (L <= 0 || L % 2 != 0)
    throw std::invalid_argument("block_search: L must be even");
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("block_search: kappa must be in (0,1)");
  const double delta = signed_diagonal_min(t);
  if (delta <= 0.0)
    throw std::invalid_argument(
        "block_search: operator must have positive diagonal");
  int P;
  if (pool) {
    P = *pool;
    if (P < L || P > t.dim())
      throw std::invalid_argument("block_search: bad pool size");
  } else {
    const double gamma = op_norm(s, t, NormMode::upper);
    P = guaranteed_pool_size(s, gamma, delta, kappa, L);
    if (t.dim() < P)
      throw std::invalid_argument(
          "block_search: space too small for the guarantee (n < " +
          std::to_string(P) + ")");
  }
  const double threshold = (1.0 - kappa) * delta * L;
  const auto signs = enumerate_balanced(L);
  const double work = detail::comb(P, L) * static_cast<double>(signs.size());

  if (work <= 1e6) {
    BlockPair best;
    bool have = false;
    std::vector<int> block(static_cast<std::size_t>(L));
    detail::for_each_combination(P, L, [&](std::span<const int> sel) {
      for (int i = 0; i < L; ++i) block[static_cast<std::size_t>(i)] = sel[i];
      for (const auto& eps : signs) {
        const double v = detail::block_pairing(t, block, eps);
        if (!have || v > best.value) {
          best = BlockPair{block, eps, v};
          have = true;
        }
      }
    });
    if (!have || best.value < threshold)
      throw budget_error("block_search: no block reached (1-kappa) delta L " +
                         std::to_string(threshold) + " (best " +
                         std::to_string(have ? best.value : 0.0) + ")");
    return best;
  }

  // sampled fallback
  rng::Stream stream(seed, 0xb10c5full);
  const double budget_d = 10.0 * static_cast<double>(signs.size()) * P;
  const long budget = static_cast<long>(std::min(budget_d, 1e7));
  std::vector<int> idx(static_cast<std::size_t>(P));
  for (int i = 0; i < P; ++i) idx[static_cast<std::size_t>(i)] = i;
  BlockPair best;
  bool have = false;
  for (long it = 0; it < budget; ++it) {
    // partial Fisher-Yates for a uniform L-subset
    for (int i = 0; i < L; ++i) {
      const auto j = i + static_cast<int>(stream.below(
                             static_cast<std::uint64_t>(P - i)));
      std::swap(idx[static_cast<std::size_t>(i)],
                idx[static_cast<std::size_t>(j)]);
    }
    std::vector<int> block(idx.begin(), idx.begin() + L);
    std::sort(block.begin(), block.end());
    std::vector<int> eps(static_cast<std::size_t>(L), -1);
    // random balanced assignment
    std::vector<int> pos(static_cast<std::size_t>(L));
    for (int i = 0; i < L; ++i) pos[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < L / 2; ++i) {
      const auto j = i + static_cast<int>(stream.below(
                             static_cast<std::uint64_t>(L - i)));
      std::swap(pos[static_cast<std::size_t>(i)],
                pos[static_cast<std::size_t>(j)]);
      eps[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])] = 1;
    }
    const double v = detail::block_pairing(t, block, eps);
    if (!have || v > best.value) {
      best = BlockPair{std::move(block), std::move(eps), v};
      have = true;
    }
    if (best.value >= threshold) return best;
  }
  throw budget_error("block_search: sample budget exhausted (best " +
                     std::to_string(have ? best.value : 0.0) + " < " +
                     std::to_string(threshold) + ")");
}

}  // namespace rib
