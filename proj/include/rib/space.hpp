#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rib {

enum class Family { lp, lorentz };

// A finite-dimensional sequence-space norm given by a normalized basis
// family.  Both built-in families are 1-unconditional and symmetric, so the
// unconditionality and spreading constants default to 1; overriding them only
// widens the bounds reported downstream, it does not change the norm.  The
// pairing with the biorthogonal functionals has constant 1.
class SpaceSpec {
 public:
  static SpaceSpec lp(double p, int dim, double cu = 1.0, double cs = 1.0) {
    if (!(p >= 1.0))  // NaN rejected as well
      throw std::invalid_argument("lp family requires p >= 1");
    if (dim < 1) throw std::invalid_argument("space dimension must be >= 1");
    SpaceSpec s;
    s.family_ = Family::lp;
    s.p_ = p;
    s.dim_ = dim;
    s.set_constants(cu, cs);
    return s;
  }

  // Lorentz sequence norm d(w,1): weighted sum of the decreasing
  // rearrangement.  Weights must be strictly positive, nonincreasing and
  // start at 1 so that the basis vectors are normalized.
  static SpaceSpec lorentz(std::vector<double> weights, double cu = 1.0,
                           double cs = 1.0) {
    if (weights.empty())
      throw std::invalid_argument("lorentz family requires weights");
    if (weights.front() != 1.0)
      throw std::invalid_argument("lorentz weights must satisfy w_1 = 1");
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] > 0.0))
        throw std::invalid_argument("lorentz weights must be positive");
      if (i > 0 && weights[i] > weights[i - 1])
        throw std::invalid_argument("lorentz weights must be nonincreasing");
    }
    SpaceSpec s;
    s.family_ = Family::lorentz;
    s.dim_ = static_cast<int>(weights.size());
    s.weights_ = std::move(weights);
    s.set_constants(cu, cs);
    return s;
  }

  Family family() const { return family_; }
  bool is_lp() const { return family_ == Family::lp; }
  bool is_lorentz() const { return family_ == Family::lorentz; }

  double p() const {
    if (family_ != Family::lp) throw std::logic_error("p(): not an lp space");
    return p_;
  }
  bool infinite_p() const { return family_ == Family::lp && std::isinf(p_); }

  const std::vector<double>& weights() const {
    if (family_ != Family::lorentz)
      throw std::logic_error("weights(): not a lorentz space");
    return weights_;
  }

  int dim() const { return dim_; }
  double cu() const { return cu_; }
  double cs() const { return cs_; }
  double cd() const { return 1.0; }

  // Same family on the first k coordinates; the norm of a vector supported on
  // k coordinates of the big space equals its norm here (both families are
  // rearrangement invariant).
  SpaceSpec restricted(int k) const {
    if (k < 1 || k > dim_)
      throw std::invalid_argument("restricted(): bad dimension");
    if (family_ == Family::lp) return lp(p_, k, cu_, cs_);
    return lorentz(std::vector<double>(weights_.begin(), weights_.begin() + k),
                   cu_, cs_);
  }

 private:
  SpaceSpec() = default;

  void set_constants(double cu, double cs) {
    if (!(cu >= 1.0) || !(cs >= 1.0))
      throw std::invalid_argument("basis constants must be >= 1");
    cu_ = cu;
    cs_ = cs;
  }

  Family family_ = Family::lp;
  double p_ = 2.0;
  std::vector<double> weights_;
  int dim_ = 0;
  double cu_ = 1.0;
  double cs_ = 1.0;
};

namespace detail {

// Reused scratch keeps the hot enumeration loops allocation-free.
inline std::vector<double>& scratch() {
  thread_local std::vector<double> buf;
  return buf;
}

inline void abs_sorted_desc(std::span<const double> x, std::vector<double>& b) {
  b.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) b[i] = std::fabs(x[i]);
  std::sort(b.begin(), b.end(), std::greater<double>());
}

}  // namespace detail

inline double norm(const SpaceSpec& s, std::span<const double> x) {
  if (static_cast<int>(x.size()) != s.dim())
    throw std::invalid_argument("norm: vector length does not match dimension");
  if (s.is_lp()) {
    if (s.infinite_p()) {
      double m = 0;
      for (double v : x) m = std::max(m, std::fabs(v));
      return m;
    }
    const double p = s.p();
    if (p == 1.0) {
      double t = 0;
      for (double v : x) t += std::fabs(v);
      return t;
    }
    if (p == 2.0) {
      double t = 0;
      for (double v : x) t += v * v;
      return std::sqrt(t);
    }
    double t = 0;
    for (double v : x) t += std::pow(std::fabs(v), p);
    return std::pow(t, 1.0 / p);
  }
  auto& b = detail::scratch();
  detail::abs_sorted_desc(x, b);
  const auto& w = s.weights();
  double t = 0;
  for (std::size_t i = 0; i < b.size(); ++i) t += w[i] * b[i];
  return t;
}

// Norm of the dual space via the closed forms: the lp dual is lq with
// 1/p + 1/q = 1; the d(w,1) dual norm is sup_k (y*_1+...+y*_k)/(w_1+...+w_k)
// with y* the decreasing rearrangement of |y|.
inline double dual_norm(const SpaceSpec& s, std::span<const double> y) {
  if (static_cast<int>(y.size()) != s.dim())
    throw std::invalid_argument(
        "dual_norm: vector length does not match dimension");
  if (s.is_lp()) {
    double q;
    if (s.infinite_p())
      q = 1.0;
    else if (s.p() == 1.0)
      q = std::numeric_limits<double>::infinity();
    else
      q = s.p() / (s.p() - 1.0);
    return norm(SpaceSpec::lp(q, s.dim()), y);
  }
  auto& b = detail::scratch();
  detail::abs_sorted_desc(y, b);
  const auto& w = s.weights();
  double ys = 0, ws = 0, best = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    ys += b[i];
    ws += w[i];
    best = std::max(best, ys / ws);
  }
  return best;
}

inline double bilinear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("bilinear: length mismatch");
  double t = 0;
  for (std::size_t i = 0; i < x.size(); ++i) t += x[i] * y[i];
  return t;
}

// lambda(m) = ||e_1 + ... + e_m||, mu(m) = ||f_1 + ... + f_m||.
inline std::pair<double, double> lambda_mu(const SpaceSpec& s, int m) {
  if (m < 1 || m > s.dim())
    throw std::invalid_argument("lambda_mu: m out of range");
  std::vector<double> v(static_cast<std::size_t>(s.dim()), 0.0);
  std::fill(v.begin(), v.begin() + m, 1.0);
  return {norm(s, v), dual_norm(s, v)};
}

// nu(m): for the built-in symmetric families the supremum over index sets and
// the choice of removed index collapse, giving exactly
// min(lambda(m-1), mu(m-1)).  A spreading constant > 1 turns this into the
// upper bound cs * min(lambda(m-1), mu(m-1)).
inline double nu(const SpaceSpec& s, int m) {
  if (m < 2 || m > s.dim()) throw std::invalid_argument("nu: need 2 <= m <= n");
  auto [lam, mu_] = lambda_mu(s, m - 1);
  return s.cs() * std::min(lam, mu_);
}

enum class TauMode { brute, symmetric, upper };

namespace detail {

// Exact max-min over all sign matrices (eps_ij), off-diagonal entries free.
// 2^(m(m-1)) combinations, guarded at m <= 5.
inline double tau_brute(const SpaceSpec& s, int m) {
  if (m > 5)
    throw std::invalid_argument("tau: brute mode limited to m <= 5");
  if (m < 2) return 0.0;
  const SpaceSpec rs = s.restricted(m);
  const int bits = m * (m - 1);
  // bit index of the (i, j) entry, i != j (row-major, diagonal skipped)
  int pair_bit[5][5];
  {
    int b = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (i != j) pair_bit[i][j] = b++;
  }
  double best = 0.0;
  double col[5], row[5];
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
    double colmax = 0.0;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i)
        col[i] = (i == j) ? 0.0
                          : ((mask >> pair_bit[i][j]) & 1 ? 1.0 : -1.0);
      colmax = std::max(colmax, norm(rs, std::span<const double>(col, m)));
    }
    double rowmax = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j)
        row[j] = (j == i) ? 0.0
                          : ((mask >> pair_bit[i][j]) & 1 ? 1.0 : -1.0);
      rowmax = std::max(rowmax, dual_norm(rs, std::span<const double>(row, m)));
    }
    best = std::max(best, std::min(colmax, rowmax));
  }
  return best;
}

}  // namespace detail

// tau(m): brute enumerates every sign matrix; symmetric uses that signs are
// norm-irrelevant for absolute norms, collapsing to min(lambda(m-1), mu(m-1));
// upper is the unconditionality bound cu * min(lambda(m), mu(m)).
inline double tau(const SpaceSpec& s, int m, TauMode mode) {
  if (m < 1 || m > s.dim()) throw std::invalid_argument("tau: m out of range");
  switch (mode) {
    case TauMode::brute:
      return detail::tau_brute(s, m);
    case TauMode::symmetric: {
      if (m < 2) return 0.0;
      auto [lam, mu_] = lambda_mu(s, m - 1);
      return std::min(lam, mu_);
    }
    case TauMode::upper: {
      auto [lam, mu_] = lambda_mu(s, m);
      return s.cu() * std::min(lam, mu_);
    }
  }
  throw std::logic_error("tau: bad mode");
}

// lambda(m) * mu(m) <= 2 cu cs m.
inline bool check_lambda_mu_product(const SpaceSpec& s, int m) {
  auto [lam, mu_] = lambda_mu(s, m);
  return lam * mu_ <= 2.0 * s.cu() * s.cs() * static_cast<double>(m);
}

}  // namespace rib
