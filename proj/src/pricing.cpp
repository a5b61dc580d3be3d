#include "klasian/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "klasian/parallel.hpp"

namespace klasian {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

bool has_uniform_weights(const AsianPayoffSpec& spec) {
  const double w = 1.0 / spec.monitoring_count;
  return (spec.weights.array() - w).abs().maxCoeff() <= 1e-12;
}

double average_of(const Eigen::Ref<const Eigen::VectorXd>& values, AverageKind kind) {
  if (kind == AverageKind::arithmetic) return values.mean();
  return std::exp(values.array().log().mean());
}

// Each estimator draws from its own key so cross-method comparisons under one seed are independent.
std::uint64_t method_key(std::uint64_t seed, Method method) {
  return derive_seed(seed, 0x6b6c617369616e00ULL + static_cast<std::uint64_t>(method));
}

Estimate finish(const Moments& m, Method method, std::uint64_t seed, const RunOptions& options) {
  Estimate e;
  e.value = options.discount_factor * m.mean();
  e.std_error = options.discount_factor * m.std_error();
  e.n_outer = m.count;
  e.seed = seed;
  e.method = method;
  return e;
}

}  // namespace

AsianPayoffSpec AsianPayoffSpec::uniform(double strike, int monitoring_count, AverageKind average) {
  if (monitoring_count < 1) throw std::invalid_argument("monitoring count must be >= 1");
  AsianPayoffSpec spec;
  spec.strike = strike;
  spec.monitoring_count = monitoring_count;
  spec.weights = Eigen::VectorXd::Constant(monitoring_count, 1.0 / monitoring_count);
  spec.average = average;
  return spec;
}

void AsianPayoffSpec::validate() const {
  if (!(strike >= 0.0) || !std::isfinite(strike)) throw std::invalid_argument("strike must be >= 0");
  if (monitoring_count < 1) throw std::invalid_argument("monitoring count must be >= 1");
  if (weights.size() != monitoring_count)
    throw std::invalid_argument("weights length must equal the monitoring count");
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw std::invalid_argument("weights must sum to 1");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::baseline: return "baseline";
    case Method::kl_nested: return "kl-nested";
    case Method::subsample: return "subsample";
    case Method::geometric_closed_form: return "geometric-cf";
  }
  return "unknown";
}

double asian_payoff(const Eigen::Ref<const Eigen::VectorXd>& path_values, const AsianPayoffSpec& spec) {
  if (path_values.size() != spec.weights.size())
    throw std::invalid_argument("path length does not match the payoff weights");
  double average;
  if (spec.average == AverageKind::arithmetic) {
    average = spec.weights.dot(path_values);
  } else {
    average = std::exp(spec.weights.dot(path_values.array().log().matrix()));
  }
  return std::max(average - spec.strike, 0.0);
}

Estimate price_baseline(const GbmParams& params, const AsianPayoffSpec& spec, std::uint64_t n_paths,
                        std::uint64_t seed, const RunOptions& options) {
  params.validate();
  spec.validate();
  if (n_paths < 2) throw std::invalid_argument("baseline needs at least 2 paths");
  const TimeGrid grid = TimeGrid::uniform_monitoring(spec.monitoring_count);
  const std::uint64_t key = method_key(seed, Method::baseline);
  const Moments m = accumulate_paths(n_paths, options.workers, [&](std::uint64_t p) {
    RandomStream stream(key, p);
    return asian_payoff(gbm_path_sequential(stream, grid, params), spec);
  });
  Estimate e = finish(m, Method::baseline, seed, options);
  e.grid_points = spec.monitoring_count;
  return e;
}

std::uint64_t default_nested_samples(double epsilon, double constant) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  return static_cast<std::uint64_t>(std::ceil(constant / (epsilon * epsilon)));
}

Estimate price_kl_nested(const GbmParams& params, const AsianPayoffSpec& spec, double epsilon,
                         std::uint64_t outer, std::uint64_t inner, int L, std::uint64_t seed,
                         const NestedOptions& nested, const RunOptions& options) {
  params.validate();
  spec.validate();
  if (spec.average != AverageKind::arithmetic || !has_uniform_weights(spec))
    throw std::invalid_argument("kl-nested prices the uniform arithmetic average only");
  if (outer < 2 || inner < 2) throw std::invalid_argument("kl-nested needs M0, M1 >= 2");
  const int truncation = L > 0 ? L : truncation_index_bm(epsilon);
  const GmaxBound global = g_max_bound(params, truncation, nested.clip);

  struct PathOutcome {
    Moments payoff;
    std::uint64_t proposals = 0;
    std::uint64_t clamps = 0;
  };
  const std::uint64_t n_blocks = (outer + kPathBlockSize - 1) / kPathBlockSize;
  const std::uint64_t key = method_key(seed, Method::kl_nested);
  const auto blocks = run_blocks<PathOutcome>(n_blocks, options.workers, [&](std::uint64_t b) {
    PathOutcome out;
    const std::uint64_t end = std::min(outer, (b + 1) * kPathBlockSize);
    for (std::uint64_t p = b * kPathBlockSize; p < end; ++p) {
      RandomStream stream(key, p);
      const auto coeffs = sample_coefficients(stream, truncation, nested.clip, out.clamps);
      GmaxBound envelope =
          nested.envelope == EnvelopeKind::per_path ? path_envelope(coeffs, params) : global;
      double time_average = 0.0;
      if (nested.inner == InnerEstimator::uniform_average) {
        const WienerPolynomial<double> path(coeffs);
        double sum = 0.0;
        for (std::uint64_t j = 0; j < inner; ++j) {
          double t = stream.uniform();
          if (nested.sampling == TimeSampling::snapped) {
            const int T = spec.monitoring_count;
            t = static_cast<double>(std::min(static_cast<int>(t * T), T - 1) + 1) / T;
          }
          sum += smoothed_gbm(path, t, params);
        }
        time_average = sum / static_cast<double>(inner);
        out.proposals += inner;
      } else {
        const auto draw = rejection_sample_times(stream, coeffs, inner, envelope, params,
                                                 nested.sampling, spec.monitoring_count);
        out.proposals += draw.proposals;
        if (nested.inner == InnerEstimator::acceptance_rate) {
          // Unbiased for the acceptance probability under inverse sampling.
          time_average = envelope.value * static_cast<double>(inner - 1) /
                         static_cast<double>(draw.proposals - 1);
        } else {
          const WienerPolynomial<double> path(coeffs);
          double sum = 0.0;
          for (double t : draw.times) sum += smoothed_gbm(path, t, params);
          time_average = sum / static_cast<double>(inner);
        }
      }
      out.clamps += envelope.exceed_count;
      out.payoff.add(std::max(time_average - spec.strike, 0.0));
    }
    return out;
  });

  PathOutcome total;
  for (const auto& b : blocks) {
    total.payoff.merge(b.payoff);
    total.proposals += b.proposals;
    total.clamps += b.clamps;
  }
  Estimate e = finish(total.payoff, Method::kl_nested, seed, options);
  e.n_inner = inner;
  e.proposals = total.proposals;
  e.clamp_events = total.clamps;
  e.truncation = truncation;
  return e;
}

int subsample_grid_size(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const double M = std::ceil(1.0 / (epsilon * epsilon) - 1e-9);
  if (M > 1e8) throw std::invalid_argument("sub-sampling grid exceeds 1e8 points");
  return static_cast<int>(M);
}

Estimate price_subsample(const GbmParams& params, const AsianPayoffSpec& spec, double epsilon,
                         std::uint64_t n_paths, std::uint64_t seed, const RunOptions& options) {
  params.validate();
  spec.validate();
  if (!has_uniform_weights(spec))
    throw std::invalid_argument("subsample prices the uniform-weight payoff only");
  if (n_paths < 2) throw std::invalid_argument("subsample needs at least 2 paths");
  const int M = subsample_grid_size(epsilon);
  std::vector<double> pts(static_cast<std::size_t>(M));
  for (int k = 1; k <= M; ++k) pts[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) / M;
  const TimeGrid grid(std::move(pts), TimeGrid::Kind::subsampling);
  const std::uint64_t key = method_key(seed, Method::subsample);
  const Moments m = accumulate_paths(n_paths, options.workers, [&](std::uint64_t p) {
    RandomStream stream(key, p);
    const Eigen::VectorXd path = gbm_path_sequential(stream, grid, params);
    return std::max(average_of(path, spec.average) - spec.strike, 0.0);
  });
  Estimate e = finish(m, Method::subsample, seed, options);
  e.grid_points = M;
  return e;
}

double geometric_asian_closed_form(const GbmParams& params, const TimeGrid& grid, double strike) {
  const auto& t = grid.points();
  const double n = static_cast<double>(t.size());
  double time_sum = 0.0;
  double min_sum = 0.0;  // sum_{i,j} min(t_i, t_j) on the sorted grid
  for (std::size_t k = 0; k < t.size(); ++k) {
    time_sum += t[k];
    min_sum += t[k] * static_cast<double>(2 * (t.size() - 1 - k) + 1);
  }
  const double m = std::log(params.s0) + params.effective_drift() * time_sum / n;
  const double v = params.sigma * params.sigma * min_sum / (n * n);
  if (v <= 0.0 || strike <= 0.0) {
    if (v <= 0.0) return std::max(std::exp(m) - strike, 0.0);
    return std::exp(m + 0.5 * v) - strike;
  }
  const double sd = std::sqrt(v);
  const double log_k = std::log(strike);
  return std::exp(m + 0.5 * v) * normal_cdf((m - log_k + v) / sd) - strike * normal_cdf((m - log_k) / sd);
}

}  // namespace klasian
