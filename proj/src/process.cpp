#include "klasian/process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace klasian {

void GbmParams::validate() const {
  if (!(s0 > 0.0) || !std::isfinite(s0)) throw std::invalid_argument("s0 must be > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be > 0");
  if (!std::isfinite(mu)) throw std::invalid_argument("mu must be finite");
}

TimeGrid::TimeGrid(std::vector<double> points, Kind kind) : points_(std::move(points)), kind_(kind) {
  if (points_.empty()) throw std::invalid_argument("time grid is empty");
  if (points_.front() < 0.0 || points_.back() > 1.0)
    throw std::domain_error("time grid must lie in [0, 1]");
  for (std::size_t i = 1; i < points_.size(); ++i)
    if (!(points_[i] > points_[i - 1]))
      throw std::invalid_argument("time grid must be strictly increasing");
}

TimeGrid TimeGrid::uniform_monitoring(int T) {
  if (T < 1) throw std::invalid_argument("monitoring count must be >= 1");
  std::vector<double> pts(static_cast<std::size_t>(T));
  for (int i = 1; i <= T; ++i) pts[static_cast<std::size_t>(i - 1)] = static_cast<double>(i) / T;
  return TimeGrid(std::move(pts), Kind::monitoring);
}

TimeGrid TimeGrid::subsampling(int M) {
  if (M < 1) throw std::invalid_argument("sub-sampling grid needs M >= 1");
  std::vector<double> pts(static_cast<std::size_t>(M) + 1);
  for (int k = 0; k <= M; ++k) pts[static_cast<std::size_t>(k)] = static_cast<double>(k) / M;
  return TimeGrid(std::move(pts), Kind::subsampling);
}

WienerCoefficients<double> sample_coefficients(RandomStream& stream, int L, double clip,
                                               std::uint64_t& clamp_events) {
  if (L < 0) throw std::invalid_argument("L must be >= 0");
  if (!(clip >= 4.0)) throw std::invalid_argument("clip bound must be >= 4");
  WienerCoefficients<double> coeffs;
  coeffs.clip_bound = clip;
  coeffs.a.resize(L + 1);
  for (int k = 0; k <= L; ++k) {
    double z = stream.normal();
    if (std::abs(z) > clip) {
      z = std::copysign(clip, z);
      ++clamp_events;
    }
    coeffs.a(k) = z;
  }
  return coeffs;
}

WienerCoefficients<double> sample_coefficients(RandomStream& stream, int L, double clip) {
  std::uint64_t ignored = 0;
  return sample_coefficients(stream, L, clip, ignored);
}

double gbm_from_bm(double b, double t, const GbmParams& params) {
  return params.s0 * std::exp(params.sigma * b + params.effective_drift() * t);
}

double gbm_from_bm(double b, double t, const GbmParams& params, GmaxBound& bound) {
  const double value = gbm_from_bm(b, t, params);
  if (!(value <= bound.value)) {
    ++bound.exceed_count;
    return bound.value;
  }
  return value;
}

double smoothed_gbm(const WienerPolynomial<double>& path, double t, const GbmParams& params) {
  return gbm_from_bm(path(t), t, params);
}

Eigen::VectorXd gbm_path_sequential(RandomStream& stream, const TimeGrid& grid,
                                    const GbmParams& params) {
  const auto& t = grid.points();
  const double drift = params.effective_drift();
  Eigen::VectorXd path(static_cast<Eigen::Index>(t.size()));
  double log_s = std::log(params.s0);
  double previous = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double dt = t[i] - previous;
    if (dt > 0.0) log_s += drift * dt + params.sigma * std::sqrt(dt) * stream.normal();
    path(static_cast<Eigen::Index>(i)) = std::exp(log_s);
    previous = t[i];
  }
  return path;
}

Eigen::VectorXd brownian_bridge_refine(RandomStream& stream, const std::vector<double>& coarse_times,
                                       const Eigen::VectorXd& coarse_values,
                                       const std::vector<double>& fine_times) {
  if (coarse_times.empty() || coarse_times.front() != 0.0)
    throw std::invalid_argument("bridge refinement needs coarse times starting at 0");
  if (static_cast<Eigen::Index>(coarse_times.size()) != coarse_values.size())
    throw std::invalid_argument("coarse times and values differ in length");
  if (!std::is_sorted(fine_times.begin(), fine_times.end()))
    throw std::invalid_argument("fine times must be sorted");

  Eigen::VectorXd fine(static_cast<Eigen::Index>(fine_times.size()));
  std::size_t right = 0;  // first coarse index with time >= current fine time
  double left_time = 0.0;
  double left_value = coarse_values(0);
  for (std::size_t i = 0; i < fine_times.size(); ++i) {
    const double t = fine_times[i];
    while (right < coarse_times.size() && coarse_times[right] < t) {
      // Entering a new coarse interval: restart from its left coarse point
      // unless a fine point already sits further right.
      if (coarse_times[right] >= left_time) {
        left_time = coarse_times[right];
        left_value = coarse_values(static_cast<Eigen::Index>(right));
      }
      ++right;
    }
    double value;
    if (right < coarse_times.size() && coarse_times[right] == t) {
      value = coarse_values(static_cast<Eigen::Index>(right));
    } else if (right < coarse_times.size()) {
      const double rt = coarse_times[right];
      const double rv = coarse_values(static_cast<Eigen::Index>(right));
      const double w = (t - left_time) / (rt - left_time);
      const double mean = left_value + w * (rv - left_value);
      const double var = (t - left_time) * (rt - t) / (rt - left_time);
      value = mean + std::sqrt(var) * stream.normal();
    } else {
      value = left_value + std::sqrt(t - left_time) * stream.normal();
    }
    fine(static_cast<Eigen::Index>(i)) = value;
    left_time = t;
    left_value = value;
  }
  return fine;
}

GmaxBound g_max_bound(const GbmParams& params, int L, double clip) {
  if (L < 0) throw std::invalid_argument("L must be >= 0");
  if (!(clip >= 4.0)) throw std::invalid_argument("clip bound must be >= 4");
  double harmonic = 0.0;
  for (int k = L; k >= 1; --k) harmonic += 1.0 / k;
  const double bm_bound = clip * (1.0 + std::numbers::sqrt2 / std::numbers::pi * harmonic);
  const double exponent = params.sigma * bm_bound + std::max(params.effective_drift(), 0.0);
  return {params.s0 * std::exp(exponent), clip, 0};
}

GmaxBound path_envelope(const WienerCoefficients<double>& coeffs, const GbmParams& params) {
  const WienerPolynomial<double> path(coeffs);
  const double drift = params.effective_drift();
  const int points = std::max(64, 4 * (coeffs.max_index() + 1));
  double max_exponent = -std::numeric_limits<double>::infinity();
  for (int j = 0; j <= points; ++j) {
    const double t = static_cast<double>(j) / points;
    max_exponent = std::max(max_exponent, params.sigma * path(t) + drift * t);
  }
  const double slope = params.sigma * path.lipschitz_bound() + std::abs(drift);
  const double padding = slope * 0.5 / points;
  return {params.s0 * std::exp(max_exponent + padding), coeffs.clip_bound, 0};
}

RejectionResult rejection_sample_times(RandomStream& stream, const WienerCoefficients<double>& coeffs,
                                       std::uint64_t count, GmaxBound& gmax, const GbmParams& params,
                                       TimeSampling sampling, int monitoring_count) {
  if (count < 1) throw std::invalid_argument("rejection sampler needs count >= 1");
  if (sampling == TimeSampling::snapped && monitoring_count < 1)
    throw std::invalid_argument("snapped sampling needs a monitoring count");
  const WienerPolynomial<double> path(coeffs);
  RejectionResult result;
  result.times.reserve(count);
  const std::uint64_t limit = kStarvationFactor * count;
  while (result.times.size() < count) {
    if (result.proposals >= limit)
      throw std::runtime_error("rejection sampler starved: " + std::to_string(result.times.size()) +
                               " of " + std::to_string(count) + " accepted after " +
                               std::to_string(result.proposals) + " proposals; G_max too large");
    ++result.proposals;
    double t = stream.uniform();
    if (sampling == TimeSampling::snapped) {
      const auto index = std::min<std::uint64_t>(
          static_cast<std::uint64_t>(t * monitoring_count), static_cast<std::uint64_t>(monitoring_count - 1));
      t = static_cast<double>(index + 1) / monitoring_count;
    }
    const double z = stream.uniform();
    const double g = gbm_from_bm(path(t), t, params, gmax);
    if (z <= g / gmax.value) result.times.push_back(t);
  }
  return result;
}

}  // namespace klasian
