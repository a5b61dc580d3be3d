#include "klasian/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "klasian/parallel.hpp"

namespace klasian::analysis {

namespace {

using Params = std::vector<std::pair<std::string, double>>;

/// Per-column first and second moments of a squared quantity.
struct ColumnMoments {
  Eigen::ArrayXd sum;
  Eigen::ArrayXd sum_sq;
  std::uint64_t count = 0;

  explicit ColumnMoments(Eigen::Index n = 0) : sum(Eigen::ArrayXd::Zero(n)), sum_sq(Eigen::ArrayXd::Zero(n)) {}

  void merge(const ColumnMoments& other) {
    sum += other.sum;
    sum_sq += other.sum_sq;
    count += other.count;
  }
  double mean(Eigen::Index j) const { return sum(j) / static_cast<double>(count); }
  double std_error(Eigen::Index j) const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double m = sum(j) / n;
    return std::sqrt(std::max(0.0, (sum_sq(j) - n * m * m) / (n - 1.0)) / n);
  }
};

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return fit_line(lx, ly).slope;
}

}  // namespace

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs >= 2 points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x[static_cast<std::size_t>(i)];
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(rhs);
  LineFit fit{beta(1), beta(0), 0.0};
  if (n > 2) {
    const double rss = (design * beta - rhs).squaredNorm();
    const double sigma2 = rss / static_cast<double>(n - 2);
    const Eigen::Matrix2d cov = sigma2 * (design.transpose() * design).inverse();
    fit.slope_se = std::sqrt(cov(1, 1));
  }
  return fit;
}

std::vector<double> uniform_probe_grid(int points) {
  if (points < 1) throw std::invalid_argument("probe grid needs >= 1 point");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int j = 1; j <= points; ++j) grid[static_cast<std::size_t>(j - 1)] = static_cast<double>(j) / points;
  return grid;
}

BoundReport truncation_error_sweep(const std::vector<int>& L_values, int L_ref, std::uint64_t n_paths,
                                   const std::vector<double>& t_grid, std::uint64_t seed,
                                   const ProbeOptions& options) {
  if (L_values.empty() || t_grid.empty()) throw std::invalid_argument("empty truncation sweep");
  if (n_paths < 2) throw std::invalid_argument("truncation sweep needs >= 2 paths");
  std::vector<int> levels = L_values;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.front() < 1 || levels.back() > L_ref)
    throw std::invalid_argument("truncation levels must lie in [1, L_ref]");

  const auto n_times = static_cast<Eigen::Index>(t_grid.size());
  // basis(k-1, j) = (sqrt(2)/pi) sin(k pi t_j) / k
  Eigen::MatrixXd basis(L_ref, n_times);
  for (int k = 1; k <= L_ref; ++k)
    for (Eigen::Index j = 0; j < n_times; ++j)
      basis(k - 1, j) = std::numbers::sqrt2 / std::numbers::pi *
                        boost::math::sin_pi(k * t_grid[static_cast<std::size_t>(j)]) / k;

  const auto n_levels = static_cast<Eigen::Index>(levels.size());
  struct BlockResult {
    std::vector<ColumnMoments> per_level;
  };
  const std::uint64_t n_blocks = (n_paths + kPathBlockSize - 1) / kPathBlockSize;
  const auto blocks = run_blocks<BlockResult>(n_blocks, options.workers, [&](std::uint64_t b) {
    const std::uint64_t begin = b * kPathBlockSize;
    const std::uint64_t end = std::min(n_paths, begin + kPathBlockSize);
    const auto rows = static_cast<Eigen::Index>(end - begin);
    Eigen::MatrixXd coeffs(rows, L_ref);
    for (Eigen::Index r = 0; r < rows; ++r) {
      RandomStream stream(seed, begin + static_cast<std::uint64_t>(r));
      const auto a = sample_coefficients(stream, L_ref);
      coeffs.row(r) = a.a.tail(L_ref).transpose();
    }
    BlockResult result;
    result.per_level.assign(static_cast<std::size_t>(n_levels), ColumnMoments(n_times));
    // Tail above each level, accumulated from the top segment down.
    Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(rows, n_times);
    for (Eigen::Index i = n_levels - 1; i >= 0; --i) {
      const int lo = levels[static_cast<std::size_t>(i)];
      const int hi = i + 1 < n_levels ? levels[static_cast<std::size_t>(i + 1)] : L_ref;
      if (hi > lo) tail.noalias() += coeffs.middleCols(lo, hi - lo) * basis.middleRows(lo, hi - lo);
      const Eigen::ArrayXXd sq = tail.array().square();
      auto& m = result.per_level[static_cast<std::size_t>(i)];
      m.sum = sq.colwise().sum().transpose();
      m.sum_sq = sq.square().colwise().sum().transpose();
      m.count = static_cast<std::uint64_t>(rows);
    }
    return result;
  });

  std::vector<ColumnMoments> totals(static_cast<std::size_t>(n_levels), ColumnMoments(n_times));
  for (const auto& block : blocks)
    for (std::size_t i = 0; i < totals.size(); ++i) totals[i].merge(block.per_level[i]);

  BoundReport report;
  report.bound_name = "truncation";
  report.stat_tolerance = 0.15;
  report.n_samples = n_paths;
  report.seed = seed;
  std::vector<double> xs, ys;
  for (Eigen::Index i = 0; i < n_levels; ++i) {
    const auto& m = totals[static_cast<std::size_t>(i)];
    Eigen::Index worst = 0;
    for (Eigen::Index j = 1; j < n_times; ++j)
      if (m.mean(j) > m.mean(worst)) worst = j;
    const int L = levels[static_cast<std::size_t>(i)];
    const double bound = 2.0 / (std::numbers::pi * std::numbers::pi * L);
    report.add_point({{"L", L}, {"L_ref", L_ref}, {"t_worst", t_grid[static_cast<std::size_t>(worst)]}},
                     m.mean(worst), m.std_error(worst), bound);
    if (L < L_ref) {
      xs.push_back(L);
      ys.push_back(m.mean(worst));
    }
  }
  if (xs.size() >= 2) report.set_summary("slope", log_log_slope(xs, ys));
  if (L_ref < 8 * levels.back()) report.notes.push_back("L_ref below 8 x max(L): tail is under-resolved");
  return report;
}

double mapped_bound_exact(double mu, double sigma, double eps) {
  // E[e^{2X}] E[(1 - e^Z)^2]
  const double e2 = eps * eps;
  return std::exp(2.0 * mu + 2.0 * sigma * sigma) * (1.0 - 2.0 * std::exp(0.5 * e2) + std::exp(2.0 * e2));
}

BoundReport verify_mapped_bound(double mu, double sigma, const std::vector<double>& eps_values,
                                std::uint64_t n_samples, std::uint64_t seed, const ProbeOptions& options) {
  if (n_samples < 2) throw std::invalid_argument("mapped bound needs >= 2 samples");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  BoundReport report;
  report.bound_name = "mapped";
  report.stat_tolerance = 0.10;
  report.n_samples = n_samples;
  report.seed = seed;
  const double c1 = std::exp(sigma * sigma + 2.0 * mu);
  for (double eps : eps_values) {
    if (!(eps >= 0.0 && eps <= 0.5)) throw std::invalid_argument("eps must lie in [0, 0.5]");
    const Moments m = accumulate_paths(n_samples, options.workers, [&](std::uint64_t p) {
      RandomStream stream(seed, p);
      const double x = mu + sigma * stream.normal();
      const double z = eps * stream.normal();
      const double d = std::exp(x) - std::exp(x + z);
      return d * d;
    });
    report.add_point({{"mu", mu}, {"sigma", sigma}, {"eps", eps}, {"exact", mapped_bound_exact(mu, sigma, eps)}},
                     m.mean(), m.std_error(), c1 * eps * eps);
  }
  report.set_summary("C1", c1);
  return report;
}

BoundReport smoothness_probe(double epsilon, const std::vector<std::pair<double, double>>& pairs,
                             std::uint64_t n_paths, std::uint64_t seed, const ProbeOptions& options) {
  if (pairs.empty()) throw std::invalid_argument("smoothness probe needs at least one pair");
  if (n_paths < 2) throw std::invalid_argument("smoothness probe needs >= 2 paths");
  for (const auto& [s, t] : pairs)
    if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0)) throw std::domain_error("pairs must lie in [0,1]^2");
  const int L = truncation_index_bm(epsilon);
  const auto n_pairs = static_cast<Eigen::Index>(pairs.size());

  const std::uint64_t n_blocks = (n_paths + kPathBlockSize - 1) / kPathBlockSize;
  const auto blocks = run_blocks<ColumnMoments>(n_blocks, options.workers, [&](std::uint64_t b) {
    ColumnMoments m(n_pairs);
    const std::uint64_t end = std::min(n_paths, (b + 1) * kPathBlockSize);
    for (std::uint64_t p = b * kPathBlockSize; p < end; ++p) {
      RandomStream stream(seed, p);
      const WienerPolynomial<double> path(sample_coefficients(stream, L));
      for (Eigen::Index i = 0; i < n_pairs; ++i) {
        const auto& [s, t] = pairs[static_cast<std::size_t>(i)];
        const double d = path(t) - path(s);
        m.sum(i) += d * d;
        m.sum_sq(i) += d * d * d * d;
      }
      ++m.count;
    }
    return m;
  });
  ColumnMoments total(n_pairs);
  for (const auto& m : blocks) total.merge(m);

  BoundReport report;
  report.bound_name = "smoothness";
  report.stat_tolerance = 0.15;
  report.n_samples = n_paths;
  report.seed = seed;
  const double c_m_checked = 1.0;
  const double c_m_basis = KlBasis<double>(L).bounded_eigenfunction_constant();
  bool exact_within = true;
  for (Eigen::Index i = 0; i < n_pairs; ++i) {
    const auto& [s, t] = pairs[static_cast<std::size_t>(i)];
    const double d2 = (t - s) * (t - s);
    const double bound = 3.0 * c_m_checked * L * d2 + 6.0 * epsilon * epsilon;
    const double bound_basis = 3.0 * c_m_basis * L * d2 + 6.0 * epsilon * epsilon;
    const double exact = std::abs(t - s);
    exact_within = exact_within && exact <= bound;
    report.add_point({{"s", s}, {"t", t}, {"exact_bm", exact}, {"bound_cm_basis", bound_basis}},
                     total.mean(i), total.std_error(i), bound);
  }
  report.set_summary("epsilon", epsilon);
  report.set_summary("L", L);
  report.set_summary("C_M_checked", c_m_checked);
  report.set_summary("C_M_basis", c_m_basis);
  report.set_summary("exact_bm_within_bound", exact_within ? 1.0 : 0.0);
  return report;
}

double gbm_increment_mse(const GbmParams& params, double s, double t) {
  if (t < s) std::swap(s, t);
  const double drift = params.effective_drift();
  const double var = params.sigma * params.sigma;
  const double d = t - s;
  const double second_moment = params.s0 * params.s0 * std::exp((2.0 * drift + 2.0 * var) * s);
  // E[(R - 1)^2] for R = exp(drift d + sigma W_d); expm1 keeps small d accurate.
  const double e_r2_minus_1 = std::expm1((2.0 * drift + 2.0 * var) * d);
  const double e_r_minus_1 = std::expm1(params.mu * d);
  return second_moment * (e_r2_minus_1 - 2.0 * e_r_minus_1);
}

BoundReport subsample_error_probe(const std::vector<double>& eps_values, const SubsampleProbeConfig& config,
                                  std::uint64_t n_paths, std::uint64_t seed, const ProbeOptions& options) {
  config.params.validate();
  if (eps_values.empty()) throw std::invalid_argument("subsample probe needs eps values");
  if (n_paths < 2) throw std::invalid_argument("subsample probe needs >= 2 paths");
  const int T = config.monitoring_count;
  if (T < 1) throw std::invalid_argument("monitoring count must be >= 1");
  const AsianPayoffSpec spec = AsianPayoffSpec::uniform(config.strike, T);
  const double drift = config.params.effective_drift();
  const double sigma = config.params.sigma;
  const double s0 = config.params.s0;

  std::vector<double> fine_times(static_cast<std::size_t>(T));
  for (int i = 1; i <= T; ++i) fine_times[static_cast<std::size_t>(i - 1)] = static_cast<double>(i) / T;

  BoundReport report;
  report.bound_name = "subsample";
  report.stat_tolerance = 0.15;
  report.n_samples = n_paths;
  report.seed = seed;
  std::vector<double> eps_used, mse_payoff, mse_pointwise;
  for (double eps : eps_values) {
    const int M = subsample_grid_size(eps);
    std::vector<double> coarse_times(static_cast<std::size_t>(M) + 1);
    for (int k = 0; k <= M; ++k) coarse_times[static_cast<std::size_t>(k)] = static_cast<double>(k) / M;
    // c(t_i) = floor(i M / T) / M, exact in integers.
    std::vector<int> rounded(static_cast<std::size_t>(T));
    double bound = 0.0;
    for (int i = 1; i <= T; ++i) {
      const auto k = static_cast<int>((static_cast<long long>(i) * M) / T);
      rounded[static_cast<std::size_t>(i - 1)] = k;
      bound = std::max(bound, gbm_increment_mse(config.params, static_cast<double>(k) / M,
                                                fine_times[static_cast<std::size_t>(i - 1)]));
    }

    const std::uint64_t n_blocks = (n_paths + kPathBlockSize - 1) / kPathBlockSize;
    const auto blocks = run_blocks<ColumnMoments>(n_blocks, options.workers, [&](std::uint64_t b) {
      ColumnMoments m(2);  // 0: payoff difference^2, 1: date-averaged pointwise difference^2
      const std::uint64_t end = std::min(n_paths, (b + 1) * kPathBlockSize);
      Eigen::VectorXd coarse_bm(M + 1), rounded_s(T), fine_s(T);
      for (std::uint64_t p = b * kPathBlockSize; p < end; ++p) {
        RandomStream stream(seed, p);
        coarse_bm(0) = 0.0;
        const double step = std::sqrt(1.0 / M);
        for (int k = 1; k <= M; ++k) coarse_bm(k) = coarse_bm(k - 1) + step * stream.normal();
        const Eigen::VectorXd fine_bm = brownian_bridge_refine(stream, coarse_times, coarse_bm, fine_times);
        double pointwise = 0.0;
        for (int i = 0; i < T; ++i) {
          const int k = rounded[static_cast<std::size_t>(i)];
          const double tc = static_cast<double>(k) / M;
          const double tf = fine_times[static_cast<std::size_t>(i)];
          rounded_s(i) = s0 * std::exp(sigma * coarse_bm(k) + drift * tc);
          fine_s(i) = s0 * std::exp(sigma * fine_bm(i) + drift * tf);
          const double d = rounded_s(i) - fine_s(i);
          pointwise += d * d;
        }
        pointwise /= T;
        const double d = asian_payoff(rounded_s, spec) - asian_payoff(fine_s, spec);
        m.sum(0) += d * d;
        m.sum_sq(0) += d * d * d * d;
        m.sum(1) += pointwise;
        m.sum_sq(1) += pointwise * pointwise;
        ++m.count;
      }
      return m;
    });
    ColumnMoments total(2);
    for (const auto& m : blocks) total.merge(m);

    report.add_point({{"eps", eps},
                      {"M", M},
                      {"T", T},
                      {"pointwise_mse", total.mean(1)},
                      {"fitted_constant", total.mean(0) / (eps * eps)}},
                     total.mean(0), total.std_error(0), bound);
    eps_used.push_back(eps);
    mse_payoff.push_back(total.mean(0));
    mse_pointwise.push_back(total.mean(1));
  }
  if (eps_used.size() >= 2) {
    report.set_summary("payoff_mse_slope_in_eps", log_log_slope(eps_used, mse_payoff));
    report.set_summary("pointwise_mse_slope_in_eps", log_log_slope(eps_used, mse_pointwise));
  }
  double fitted = 0.0;
  for (std::size_t i = 0; i < eps_used.size(); ++i)
    fitted = std::max(fitted, mse_payoff[i] / (eps_used[i] * eps_used[i]));
  report.set_summary("fitted_constant", fitted);
  return report;
}

BoundReport convergence_study(const ConvergenceConfig& config, const std::vector<std::uint64_t>& budgets,
                              std::uint64_t seed, const ProbeOptions& options) {
  if (budgets.size() < 4) throw std::invalid_argument("convergence study needs >= 4 budgets");
  if (config.n_seeds < 2) throw std::invalid_argument("convergence study needs >= 2 seeds");
  BoundReport report;
  report.bound_name = "convergence";
  report.stat_tolerance = 0.15 + 3.0 / std::sqrt(2.0 * config.n_seeds);
  report.seed = seed;
  const RunOptions run{options.workers, 1.0};

  struct BudgetResult {
    double rmse = 0.0;
    double rmse_se = 0.0;
    double payoff_sd = 0.0;
  };
  std::vector<BudgetResult> results;
  std::uint64_t total_samples = 0;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    const std::uint64_t n = budgets[b];
    Moments sq_err;
    Moments sd;
    for (int r = 0; r < config.n_seeds; ++r) {
      const std::uint64_t run_seed = derive_seed(seed, b * static_cast<std::uint64_t>(config.n_seeds) + r);
      Estimate e;
      switch (config.method) {
        case Method::baseline:
          e = price_baseline(config.params, config.spec, n, run_seed, run);
          break;
        case Method::subsample:
          e = price_subsample(config.params, config.spec, config.epsilon, n, run_seed, run);
          break;
        case Method::kl_nested:
          e = price_kl_nested(config.params, config.spec, config.epsilon, n, default_nested_samples(config.epsilon),
                              0, run_seed, {}, run);
          break;
        case Method::geometric_closed_form:
          throw std::invalid_argument("convergence study needs a Monte Carlo method");
      }
      const double err = e.value - config.oracle_value;
      sq_err.add(err * err);
      sd.add(e.std_error * std::sqrt(static_cast<double>(n)));
      total_samples += n;
    }
    BudgetResult res;
    res.rmse = std::sqrt(sq_err.mean());
    res.rmse_se = res.rmse > 0.0 ? sq_err.std_error() / (2.0 * res.rmse) : 0.0;
    res.payoff_sd = sd.mean();
    results.push_back(res);
  }
  report.n_samples = total_samples;

  const double negligible = 1e-10 * std::max(1.0, std::abs(config.oracle_value));
  std::vector<double> lx, ly;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    const double n = static_cast<double>(budgets[b]);
    const double bound = std::sqrt(results[b].payoff_sd * results[b].payoff_sd / n +
                                   config.oracle_std_error * config.oracle_std_error);
    report.add_point({{"budget", n}, {"payoff_sd", results[b].payoff_sd}}, results[b].rmse, results[b].rmse_se,
                     bound);
    if (results[b].rmse > negligible) {
      lx.push_back(std::log(n));
      ly.push_back(std::log(results[b].rmse));
    }
  }
  if (lx.size() >= 3) {
    const LineFit fit = fit_line(lx, ly);
    const boost::math::students_t dist(static_cast<double>(lx.size() - 2));
    const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    report.set_summary("slope", fit.slope);
    report.set_summary("slope_se", fit.slope_se);
    report.set_summary("slope_ci_low", fit.slope - q * fit.slope_se);
    report.set_summary("slope_ci_high", fit.slope + q * fit.slope_se);
  } else {
    report.set_summary("slope", std::numeric_limits<double>::quiet_NaN());
    report.notes.push_back("RMSE at or below machine precision; slope undefined");
  }
  report.set_summary("oracle_value", config.oracle_value);
  report.set_summary("n_seeds", config.n_seeds);
  report.notes.push_back("method=" + std::string(to_string(config.method)));
  return report;
}

}  // namespace klasian::analysis
