#pragma once

// Discretely monitored Asian call: payoff definitions and price estimators.
// Interest rate is zero; RunOptions::discount_factor scales reported values.

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "klasian/process.hpp"

namespace klasian {

enum class AverageKind { arithmetic, geometric };

/// (sum_i w_i S(t_i) - K)^+ over the monitoring dates t_i = i / T.
struct AsianPayoffSpec {
  double strike = 100.0;
  int monitoring_count = 64;
  Eigen::VectorXd weights;
  AverageKind average = AverageKind::arithmetic;

  static AsianPayoffSpec uniform(double strike, int monitoring_count,
                                 AverageKind average = AverageKind::arithmetic);
  void validate() const;
};

enum class Method { baseline, kl_nested, subsample, geometric_closed_form };

std::string_view to_string(Method method);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_outer = 0;
  std::uint64_t n_inner = 1;
  std::uint64_t seed = 0;
  Method method = Method::baseline;
  // Diagnostics; zero when not applicable.
  std::uint64_t proposals = 0;
  std::uint64_t clamp_events = 0;
  int truncation = 0;
  int grid_points = 0;
};

struct RunOptions {
  unsigned workers = 0;  // 0: KLASIAN_WORKERS or hardware concurrency
  double discount_factor = 1.0;
};

double asian_payoff(const Eigen::Ref<const Eigen::VectorXd>& path_values, const AsianPayoffSpec& spec);

/// Exact-GBM paths on the monitoring grid, plain Monte Carlo.
Estimate price_baseline(const GbmParams& params, const AsianPayoffSpec& spec, std::uint64_t n_paths,
                        std::uint64_t seed, const RunOptions& options = {});

enum class InnerEstimator {
  acceptance_rate,    // G_max * (accepted - 1) / (proposed - 1)
  uniform_average,    // (1/M1) sum G_L(a, t_j), t_j uniform
  rejection_average,  // (1/M1) sum G_L(a, t_j), t_j from the rejection sampler
};

enum class EnvelopeKind { per_path, global };

struct NestedOptions {
  InnerEstimator inner = InnerEstimator::acceptance_rate;
  EnvelopeKind envelope = EnvelopeKind::per_path;
  TimeSampling sampling = TimeSampling::continuous;
  double clip = kDefaultClip;
};

/// M = ceil(c / eps^2), the default outer and inner sample counts.
std::uint64_t default_nested_samples(double epsilon, double constant = 4.0);

/// Nested estimator over KL-smoothed paths. L <= 0 selects truncation_index_bm(epsilon).
Estimate price_kl_nested(const GbmParams& params, const AsianPayoffSpec& spec, double epsilon,
                         std::uint64_t outer, std::uint64_t inner, int L, std::uint64_t seed,
                         const NestedOptions& nested = {}, const RunOptions& options = {});

/// M = ceil(1 / eps^2) grid points.
int subsample_grid_size(double epsilon);

/// Time-domain sub-sampling: GBM on t_k = k/M, k = 1..M, payoff averages those M values.
Estimate price_subsample(const GbmParams& params, const AsianPayoffSpec& spec, double epsilon,
                         std::uint64_t n_paths, std::uint64_t seed, const RunOptions& options = {});

/// Closed-form price of the discrete geometric-average call on `grid`.
double geometric_asian_closed_form(const GbmParams& params, const TimeGrid& grid, double strike);

}  // namespace klasian
