#pragma once

// Sampling machinery for geometric Brownian motion on [0, 1].

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "klasian/klcore.hpp"
#include "klasian/random.hpp"

namespace klasian {

/// S_t = s0 exp(sigma B_t + (mu - sigma^2/2) t).
struct GbmParams {
  double s0 = 100.0;
  double mu = 0.0;
  double sigma = 0.2;

  double effective_drift() const noexcept { return mu - 0.5 * sigma * sigma; }
  void validate() const;
};

/// Strictly increasing times in [0, 1].
class TimeGrid {
 public:
  enum class Kind { monitoring, subsampling, custom };

  explicit TimeGrid(std::vector<double> points, Kind kind = Kind::custom);

  /// t_i = i / T for i = 1..T.
  static TimeGrid uniform_monitoring(int T);
  /// t_k = k / M for k = 0..M.
  static TimeGrid subsampling(int M);

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  Kind kind() const noexcept { return kind_; }

 private:
  std::vector<double> points_;
  Kind kind_;
};

/// Normalisation constant dominating G_L(a, t) over all clipped paths.
struct GmaxBound {
  double value = 0.0;
  double clip_bound = 8.0;
  std::uint64_t exceed_count = 0;
};

inline constexpr double kDefaultClip = 8.0;

/// Draw (a_0..a_L) i.i.d. N(0,1), each clamped to [-A, A]. `clamp_events`
/// is incremented once per clamped entry.
WienerCoefficients<double> sample_coefficients(RandomStream& stream, int L, double clip,
                                               std::uint64_t& clamp_events);
WienerCoefficients<double> sample_coefficients(RandomStream& stream, int L,
                                               double clip = kDefaultClip);

/// s0 exp(sigma b + effective_drift t). With a bound, values above it are
/// clamped and counted.
double gbm_from_bm(double b, double t, const GbmParams& params);
double gbm_from_bm(double b, double t, const GbmParams& params, GmaxBound& bound);

/// Exact GBM on `grid` via sequential lognormal increments from S(0) = s0.
Eigen::VectorXd gbm_path_sequential(RandomStream& stream, const TimeGrid& grid,
                                    const GbmParams& params);

/// Fill Brownian motion values at `fine_times` given exact values at the
/// sorted `coarse_times` (which must start at 0). Points beyond the last
/// coarse time are extended by independent increments.
Eigen::VectorXd brownian_bridge_refine(RandomStream& stream, const std::vector<double>& coarse_times,
                                       const Eigen::VectorXd& coarse_values,
                                       const std::vector<double>& fine_times);

/// s0 exp(sigma A (1 + (sqrt(2)/pi) H_L) + max(effective_drift, 0)).
GmaxBound g_max_bound(const GbmParams& params, int L, double clip);

/// Per-path envelope: max over a grid of sigma B_L + drift t, padded by the
/// Lipschitz constant times half the grid spacing. Dominates G_L(a, .) on [0, 1].
GmaxBound path_envelope(const WienerCoefficients<double>& coeffs, const GbmParams& params);

enum class TimeSampling { continuous, snapped };

struct RejectionResult {
  std::vector<double> times;
  std::uint64_t proposals = 0;
};

inline constexpr std::uint64_t kStarvationFactor = 1'000'000;

/// Draw `count` times with density proportional to G_L(a, t) by rejection
/// against `gmax`. Snapped mode proposes t uniformly from {i/T : i = 1..T}.
/// Throws std::runtime_error when kStarvationFactor * count proposals are
/// not enough.
RejectionResult rejection_sample_times(RandomStream& stream, const WienerCoefficients<double>& coeffs,
                                       std::uint64_t count, GmaxBound& gmax, const GbmParams& params,
                                       TimeSampling sampling = TimeSampling::continuous,
                                       int monitoring_count = 0);

/// Convenience: G_L(a, t) = s0 exp(sigma B_L(a, t) + effective_drift t).
double smoothed_gbm(const WienerPolynomial<double>& path, double t, const GbmParams& params);

}  // namespace klasian
