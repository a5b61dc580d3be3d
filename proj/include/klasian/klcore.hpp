#pragma once

// Karhunen-Loeve / Wiener-series basis of standard Brownian motion on [0, 1].
//
// KL pairs of the min(s, t) kernel:
//   lambda_k = 1 / ((k - 1/2)^2 pi^2),   e_k(t) = sqrt(2) sin((k - 1/2) pi t),  k >= 1.
// Wiener series used for path synthesis:
//   B_L(t) = a_0 t + (sqrt(2)/pi) sum_{k=1}^{L} (a_k / k) sin(k pi t).
// Both truncations share the tail-variance bound 2 / (pi^2 L).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <boost/math/special_functions/cos_pi.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace klasian {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

inline void require_index(int k) {
  if (k < 1) throw std::invalid_argument("KL index must be >= 1, got " + std::to_string(k));
}

template <typename Scalar>
void require_unit_time(Scalar t) {
  if (!(t >= Scalar(0) && t <= Scalar(1)))
    throw std::domain_error("time must lie in [0, 1]");
}

}  // namespace detail

template <typename Scalar = double>
Scalar kl_eigenvalue(int k) {
  detail::require_index(k);
  const Scalar shifted = (Scalar(k) - Scalar(0.5)) * std::numbers::pi_v<Scalar>;
  return Scalar(1) / (shifted * shifted);
}

template <typename Scalar>
Scalar kl_eigenfunction(int k, Scalar t) {
  detail::require_index(k);
  detail::require_unit_time(t);
  return std::numbers::sqrt2_v<Scalar> *
         boost::math::sin_pi((Scalar(k) - Scalar(0.5)) * t);
}

/// Lipschitz constant of e_k on [0, 1].
template <typename Scalar = double>
Scalar kl_lipschitz_constant(int k) {
  detail::require_index(k);
  return std::numbers::sqrt2_v<Scalar> * (Scalar(k) - Scalar(0.5)) * std::numbers::pi_v<Scalar>;
}

/// Eigenvalues and eigenfunction Lipschitz constants for k = 1..L.
template <typename Scalar = double>
struct KlBasis {
  int max_index = 0;
  Vector<Scalar> eigenvalues;
  Vector<Scalar> lipschitz_constants;

  explicit KlBasis(int L) : max_index(L), eigenvalues(L), lipschitz_constants(L) {
    if (L < 1) throw std::invalid_argument("KlBasis needs L >= 1");
    for (int k = 1; k <= L; ++k) {
      eigenvalues(k - 1) = kl_eigenvalue<Scalar>(k);
      lipschitz_constants(k - 1) = kl_lipschitz_constant<Scalar>(k);
    }
  }

  /// sup_k lambda_k G(k)^2 over the retained indices (2 for this basis).
  Scalar bounded_eigenfunction_constant() const {
    return (eigenvalues.array() * lipschitz_constants.array().square()).maxCoeff();
  }
};

struct TailBound {
  double closed;       // 2 / (pi^2 L)
  double partial_sum;  // sum_{k=L+1}^{L+terms} 2 / ((k - 1/2)^2 pi^2)
};

inline constexpr long kTailPartialTerms = 1'000'000;

inline TailBound tail_variance_bound(int L) {
  if (L < 1) throw std::invalid_argument("tail_variance_bound needs L >= 1");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  double partial = 0.0;
  // Summed smallest-first to keep the long tail accurate.
  for (long k = L + kTailPartialTerms; k > L; --k) {
    const double shifted = static_cast<double>(k) - 0.5;
    partial += 2.0 / (shifted * shifted * pi2);
  }
  return {2.0 / (pi2 * L), partial};
}

/// Exact tail variance sum_{k>L} 2 lambda_k = (2/pi^2) psi'(L + 1/2).
inline double tail_variance_exact(int L) {
  if (L < 0) throw std::invalid_argument("tail_variance_exact needs L >= 0");
  return 2.0 / (std::numbers::pi * std::numbers::pi) * boost::math::trigamma(L + 0.5);
}

/// Smallest L >= 1 whose uniform-in-time tail variance is <= epsilon^2.
inline int truncation_index_bm(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const double target = epsilon * epsilon;
  const double closed = std::ceil(2.0 / (std::numbers::pi * std::numbers::pi * target));
  if (closed > 1e9) throw std::invalid_argument("epsilon too small for a representable index");
  // The closed bound always dominates the exact tail, so walk down from it.
  int L = std::max(1, static_cast<int>(closed));
  while (L > 1 && tail_variance_exact(L - 1) <= target) --L;
  return L;
}

/// One coefficient vector (a_0, ..., a_L) defining a smoothed path.
template <typename Scalar = double>
struct WienerCoefficients {
  Vector<Scalar> a;
  Scalar clip_bound = Scalar(8);

  int max_index() const { return static_cast<int>(a.size()) - 1; }

  void validate() const {
    if (a.size() < 1) throw std::invalid_argument("coefficient vector is empty");
    if (!a.allFinite()) throw std::domain_error("coefficient vector has non-finite entries");
    if (a.cwiseAbs().maxCoeff() > clip_bound)
      throw std::domain_error("coefficient exceeds its clip bound");
  }
};

/// Direct sine-series evaluation of B_L(t). sin_pi keeps B_L(0) = 0 and
/// B_L(1) = a_0 exact.
template <typename Scalar>
Scalar wiener_eval(const WienerCoefficients<Scalar>& coeffs, Scalar t) {
  detail::require_unit_time(t);
  const auto& a = coeffs.a;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar oscillatory(0);
  for (Eigen::Index k = 1; k < a.size(); ++k)
    oscillatory += a(k) / Scalar(k) * boost::math::sin_pi(Scalar(k) * t);
  return a(0) * t + std::numbers::sqrt2_v<Scalar> / pi * oscillatory;
}

/// B_L(t) through sin(k pi t) = sin(pi t) U_{k-1}(cos pi t), summed with a
/// single Clenshaw recurrence in x = cos(pi t).
template <typename Scalar>
Scalar wiener_eval_horner(const WienerCoefficients<Scalar>& coeffs, Scalar t) {
  detail::require_unit_time(t);
  const auto& a = coeffs.a;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar two_x = Scalar(2) * boost::math::cos_pi(t);
  Scalar b1(0), b2(0);
  for (Eigen::Index k = a.size() - 1; k >= 1; --k) {
    const Scalar b0 = a(k) / Scalar(k) + two_x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return a(0) * t + std::numbers::sqrt2_v<Scalar> / pi * boost::math::sin_pi(t) * b1;
}

/// Polynomial form with the 1/k weights folded in: c_k = a_k / k for the
/// U_{k-1} basis. Useful when one path is evaluated at many times.
template <typename Scalar>
class WienerPolynomial {
 public:
  explicit WienerPolynomial(const WienerCoefficients<Scalar>& coeffs)
      : drift_(coeffs.a(0)), weights_(coeffs.a.size() > 1 ? coeffs.a.size() - 1 : 0) {
    for (Eigen::Index k = 1; k < coeffs.a.size(); ++k)
      weights_(k - 1) = coeffs.a(k) / Scalar(k);
  }

  Scalar operator()(Scalar t) const {
    const Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar two_x = Scalar(2) * boost::math::cos_pi(t);
    Scalar b1(0), b2(0);
    for (Eigen::Index j = weights_.size() - 1; j >= 0; --j) {
      const Scalar b0 = weights_(j) + two_x * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return drift_ * t + std::numbers::sqrt2_v<Scalar> / pi * boost::math::sin_pi(t) * b1;
  }

  /// Upper bound on |dB_L/dt| over [0, 1].
  Scalar lipschitz_bound() const {
    Scalar sum(0);
    for (Eigen::Index j = 0; j < weights_.size(); ++j) sum += std::abs(weights_(j)) * Scalar(j + 1);
    return std::abs(drift_) + std::numbers::sqrt2_v<Scalar> * sum;
  }

 private:
  Scalar drift_;
  Vector<Scalar> weights_;
};

}  // namespace klasian
