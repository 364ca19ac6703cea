#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rib/rng.hpp"
#include "rib/space.hpp"

namespace rib {

// Dense matrix of an operator relative to the basis.  Convention:
// entry(i, j) = <T e_j, e_i*>, i.e. column j holds the coordinates of T e_j.
class Operator {
 public:
  explicit Operator(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
      throw std::invalid_argument("operator matrix must be square");
    if (!m_.allFinite())
      throw std::invalid_argument("operator entries must be finite");
  }

  static Operator identity(int n) {
    return Operator(Eigen::MatrixXd::Identity(n, n));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double entry(int i, int j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

// min_j |<T e_j, e_j*>|; zero means the operator has no large diagonal.
inline double diagonal_delta(const Operator& t) {
  return t.matrix().diagonal().cwiseAbs().minCoeff();
}

// Signed minimum of the diagonal, used by the averaging bounds which require
// a positive diagonal.
inline double signed_diagonal_min(const Operator& t) {
  return t.matrix().diagonal().minCoeff();
}

inline Operator diagonal_part(const Operator& t) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(t.dim(), t.dim());
  d.diagonal() = t.matrix().diagonal();
  return Operator(std::move(d));
}

inline Operator diagonal_inverse(const Operator& t) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(t.dim(), t.dim());
  for (int i = 0; i < t.dim(); ++i) {
    const double v = t.entry(i, i);
    if (v == 0.0)
      throw std::invalid_argument("singular diagonal: zero diagonal entry");
    d(i, i) = 1.0 / v;
  }
  return Operator(std::move(d));
}

// Diagonal sign multiplier M with M e_j = sign(<T e_j, e_j*>) e_j.
inline Operator multiplier(const Operator& t) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(t.dim(), t.dim());
  for (int i = 0; i < t.dim(); ++i) {
    const double v = t.entry(i, i);
    if (v == 0.0)
      throw std::invalid_argument("multiplier: zero diagonal entry");
    d(i, i) = (v > 0.0) ? 1.0 : -1.0;
  }
  return Operator(std::move(d));
}

// T~ = T M: column j of T scaled by sign(<T e_j, e_j*>), so the diagonal of
// T~ is |diag T| and in particular strictly positive.
inline Operator with_positive_diagonal(const Operator& t) {
  Eigen::MatrixXd r = t.matrix();
  for (int j = 0; j < t.dim(); ++j)
    if (t.entry(j, j) < 0.0) r.col(j) = -r.col(j);
    else if (t.entry(j, j) == 0.0)
      throw std::invalid_argument("multiplier: zero diagonal entry");
  return Operator(std::move(r));
}

enum class NormMode { exact, upper };

namespace detail {

// Largest singular value via power iteration on T^t T.  Convergence is
// declared when the Rayleigh quotient stabilizes to 1e-12 relative change
// (at most 10000 iterations); a deterministic all-ones start plus one seeded
// restart guards against starts orthogonal to the top singular vector.
inline double spectral_norm_power(const Eigen::MatrixXd& t) {
  const Eigen::Index n = t.rows();
  if (n == 0) return 0.0;
  const Eigen::MatrixXd b = t.transpose() * t;
  const auto run = [&](Eigen::VectorXd v) {
    double nv = v.norm();
    if (nv == 0.0) return 0.0;
    v /= nv;
    double rho = 0.0, rho_prev = -1.0;
    for (int it = 0; it < 10000; ++it) {
      Eigen::VectorXd w = b * v;
      rho = v.dot(w);
      const double wn = w.norm();
      if (wn == 0.0) return 0.0;
      v = w / wn;
      if (rho_prev >= 0.0 &&
          std::fabs(rho - rho_prev) <= 1e-12 * std::max(rho, 1e-300))
        break;
      rho_prev = rho;
    }
    return rho;
  };
  const double rho1 = run(Eigen::VectorXd::Ones(n));
  rng::Stream restart(0x7261796c65696768ull);  // fixed stream, reproducible
  Eigen::VectorXd v2(n);
  for (Eigen::Index i = 0; i < n; ++i) v2[i] = restart.uniform(-1.0, 1.0);
  const double rho2 = run(std::move(v2));
  return std::sqrt(std::max({rho1, rho2, 0.0}));
}

inline double max_abs_col_sum(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

inline double max_abs_row_sum(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

inline double spectral_norm_svd(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

// Exact d(w,1) -> d(w,1) operator norm by maximizing over the extreme points
// of the unit ball, which are the sign patterns on a support S normalized by
// W_|S|.  Cost (3^n - 1)/2 norm evaluations; guarded at n <= 6.
inline double lorentz_norm_brute(const SpaceSpec& domain,
                                 const SpaceSpec& range,
                                 const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.cols());
  if (n > 6)
    throw std::invalid_argument(
        "op_norm: lorentz norm enumeration limited to dimension <= 6");
  std::vector<double> wsum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) wsum[i + 1] = wsum[i] + domain.weights()[i];
  std::vector<double> y(static_cast<std::size_t>(m.rows()));
  Eigen::VectorXd x(n);
  double best = 0.0;
  for (std::uint32_t supp = 1; supp < (1u << n); ++supp) {
    const int k = std::popcount(supp);
    int pos[6], np = 0;
    for (int i = 0; i < n; ++i)
      if (supp >> i & 1) pos[np++] = i;
    // first sign fixed to +1: x and -x have the same image norm
    for (std::uint32_t sg = 0; sg < (1u << (k - 1)); ++sg) {
      x.setZero();
      x[pos[0]] = 1.0;
      for (int b = 1; b < k; ++b) x[pos[b]] = (sg >> (b - 1) & 1) ? -1.0 : 1.0;
      Eigen::VectorXd img = m * x;
      for (Eigen::Index i = 0; i < img.size(); ++i) y[i] = img[i];
      best = std::max(best, norm(range, y) / wsum[k]);
    }
  }
  return best;
}

}  // namespace detail

// Induced operator norm of a (possibly rectangular) matrix between two spaces
// of the same family.  Exact formulas: max column sum (p=1), max row sum
// (p=inf), largest singular value (p=2; power iteration for square matrices).
// Upper mode: the interpolation bound ||T||_1^(1/p) ||T||_inf^(1-1/p) for
// other p, and extreme-point enumeration for lorentz (exact, hence also an
// upper bound).
inline double induced_norm(const SpaceSpec& domain, const SpaceSpec& range,
                           const Eigen::MatrixXd& m, NormMode mode) {
  if (m.cols() != domain.dim() || m.rows() != range.dim())
    throw std::invalid_argument("induced_norm: dimension mismatch");
  if (domain.family() != range.family())
    throw std::invalid_argument("induced_norm: mixed families unsupported");
  if (domain.is_lorentz()) {
    if (mode == NormMode::exact)
      throw std::invalid_argument(
          "op_norm: exact mode supported for p in {1, 2, inf} only");
    return detail::lorentz_norm_brute(domain, range, m);
  }
  if (domain.p() != range.p())
    throw std::invalid_argument("induced_norm: mixed exponents unsupported");
  const double p = domain.p();
  if (p == 1.0) return detail::max_abs_col_sum(m);
  if (domain.infinite_p()) return detail::max_abs_row_sum(m);
  if (p == 2.0) {
    if (mode == NormMode::exact)
      return m.rows() == m.cols() ? detail::spectral_norm_power(m)
                                  : detail::spectral_norm_svd(m);
    return std::sqrt(detail::max_abs_col_sum(m) * detail::max_abs_row_sum(m));
  }
  if (mode == NormMode::exact)
    throw std::invalid_argument(
        "op_norm: exact mode supported for p in {1, 2, inf} only");
  return std::pow(detail::max_abs_col_sum(m), 1.0 / p) *
         std::pow(detail::max_abs_row_sum(m), 1.0 - 1.0 / p);
}

inline double op_norm(const SpaceSpec& s, const Operator& t, NormMode mode) {
  return induced_norm(s, s, t.matrix(), mode);
}

// Best certified value available for this space: exact where supported,
// otherwise the upper bound; nullopt when neither can be evaluated.
inline std::optional<std::pair<double, NormMode>> induced_norm_best_effort(
    const SpaceSpec& domain, const SpaceSpec& range, const Eigen::MatrixXd& m) {
  if (domain.is_lp()) {
    const double p = domain.p();
    const NormMode mode = (p == 1.0 || p == 2.0 || domain.infinite_p())
                              ? NormMode::exact
                              : NormMode::upper;
    return std::make_pair(induced_norm(domain, range, m, mode), mode);
  }
  if (domain.dim() <= 6 && range.dim() <= 6)
    return std::make_pair(induced_norm(domain, range, m, NormMode::upper),
                          NormMode::upper);
  return std::nullopt;
}

inline double bilinear(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("bilinear: length mismatch");
  return x.dot(y);
}

}  // namespace rib
