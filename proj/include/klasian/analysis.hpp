#pragma once

// Empirical checks of the truncation, smoothness and sub-sampling bounds.
//
// Every comparison between two approximations of the same path couples them
// through shared randomness: common Wiener coefficients for truncation
// probes, Brownian-bridge refinement for grid probes.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "klasian/pricing.hpp"
#include "klasian/report.hpp"

namespace klasian::analysis {

struct ProbeOptions {
  unsigned workers = 0;
};

/// sup_t E[(B_L(t) - B_{L_ref}(t))^2] against 2 / (pi^2 L).
BoundReport truncation_error_sweep(const std::vector<int>& L_values, int L_ref, std::uint64_t n_paths,
                                   const std::vector<double>& t_grid, std::uint64_t seed,
                                   const ProbeOptions& options = {});

/// t_j = j / points, j = 1..points.
std::vector<double> uniform_probe_grid(int points);

/// E[(e^X - e^{X+Z})^2] for X ~ N(mu, sigma^2), Z ~ N(0, eps^2), against
/// exp(sigma^2 + 2 mu) eps^2.
BoundReport verify_mapped_bound(double mu, double sigma, const std::vector<double>& eps_values,
                                std::uint64_t n_samples, std::uint64_t seed,
                                const ProbeOptions& options = {});

/// Closed form of E[(e^X - e^{X+Z})^2].
double mapped_bound_exact(double mu, double sigma, double eps);

/// E[(B_L(t) - B_L(s))^2] on truncated paths, L = truncation_index_bm(eps),
/// against 3 C_M L (t - s)^2 + 6 eps^2 with C_M = 1.
BoundReport smoothness_probe(double epsilon, const std::vector<std::pair<double, double>>& pairs,
                             std::uint64_t n_paths, std::uint64_t seed, const ProbeOptions& options = {});

struct SubsampleProbeConfig {
  GbmParams params{100.0, 0.05, 0.2};
  double strike = 100.0;
  int monitoring_count = 1024;
};

/// Coupled payoff MSE of the rounded-down estimator f(S_{c(t_1)}, ..., S_{c(t_T)})
/// with M = ceil(1/eps^2). The bound is max_i E[(S_{t_i} - S_{c(t_i)})^2],
/// which dominates the payoff MSE for any weights.
BoundReport subsample_error_probe(const std::vector<double>& eps_values, const SubsampleProbeConfig& config,
                                  std::uint64_t n_paths, std::uint64_t seed, const ProbeOptions& options = {});

/// E[(S_t - S_s)^2] for GBM, s <= t.
double gbm_increment_mse(const GbmParams& params, double s, double t);

struct ConvergenceConfig {
  Method method = Method::baseline;
  GbmParams params{100.0, 0.05, 0.2};
  AsianPayoffSpec spec = AsianPayoffSpec::uniform(100.0, 64);
  double epsilon = 0.125;  // subsample grid size; M = T at the default
  double oracle_value = 0.0;
  double oracle_std_error = 0.0;
  int n_seeds = 50;
};

/// RMSE against the oracle over n_seeds replicates per budget, with a
/// log-log slope fit (summary keys: slope, slope_se, slope_ci_low, slope_ci_high).
BoundReport convergence_study(const ConvergenceConfig& config, const std::vector<std::uint64_t>& budgets,
                              std::uint64_t seed, const ProbeOptions& options = {});

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace klasian::analysis
