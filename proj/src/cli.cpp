#include "klasian/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "klasian/analysis.hpp"
#include "klasian/pricing.hpp"
#include "klasian/qsim.hpp"

namespace klasian::cli {

namespace {

using nlohmann::ordered_json;

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct MarketFlags {
  double s0 = 100.0;
  double mu = 0.05;
  double sigma = 0.2;
  double strike = 100.0;
  int T = 64;
};

struct PriceFlags {
  std::string method = "baseline";
  std::string average = "arithmetic";
  double epsilon = 0.05;
  std::uint64_t paths = 100000;
  std::optional<std::uint64_t> outer;
  std::optional<std::uint64_t> inner;
  int L = 0;
  std::string inner_estimator = "acceptance-rate";
  std::string envelope = "per-path";
  int qsim_n = 2;
  int qsim_M = 2;
  int qsim_bits = 8;
  double qsim_A = 2.0;
  std::string output;
};

struct AnalyzeFlags {
  std::string probe;
  std::vector<int> L_values{8, 32, 128};
  int L_ref = 4096;
  int t_points = 64;
  std::uint64_t paths = 100000;
  std::vector<double> eps_values{0.02, 0.05, 0.1};
  double epsilon = 0.1;
  std::vector<std::string> pairs{"0.1:0.2", "0.3:0.35", "0.5:0.9", "0:1"};
  std::string method = "baseline";
  std::vector<std::uint64_t> budgets{1000, 4000, 16000, 64000};
  int n_seeds = 50;
  std::optional<double> oracle;
  double oracle_se = 0.0;
  std::uint64_t oracle_paths = 1000000;
  std::string output;
};

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
};

std::uint64_t resolve_seed(const CommonFlags& common, std::ostream& err) {
  if (common.seed) return *common.seed;
  std::random_device device;
  const std::uint64_t seed = (std::uint64_t{device()} << 32) | device();
  err << ordered_json{{"notice", "no --seed given"}, {"seed", seed}}.dump() << '\n';
  return seed;
}

GbmParams market_params(const MarketFlags& market) {
  GbmParams params{market.s0, market.mu, market.sigma};
  params.validate();
  return params;
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::baseline, Method::kl_nested, Method::subsample, Method::geometric_closed_form})
    if (to_string(m) == name) return m;
  throw ValidationError("unknown method '" + name + "'");
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  const auto us =
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();
  return static_cast<double>(us) / 1000.0;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text << '\n';
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open output file " + path);
  file << text << '\n';
}

// Exhaustive E_a[(Gbar(a) - K)^+] over the discretised running sum.
double classical_subsample_expectation(const GbmParams& params, int M, double strike, int n, double A) {
  const Eigen::VectorXd amps = qsim::prepare_gaussian_register(n, A);
  const Eigen::VectorXd pmf = amps.cwiseAbs2();
  const std::uint64_t radix = std::uint64_t{1} << n;
  std::uint64_t total = 1;
  for (int m = 0; m < M; ++m) total *= radix;
  double expectation = 0.0;
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t rest = idx;
    double p = 1.0, bm = 0.0, sum = 0.0;
    for (int m = 0; m < M; ++m) {
      const std::uint64_t c = rest % radix;
      rest /= radix;
      p *= pmf(static_cast<Eigen::Index>(c));
      bm += qsim::gaussian_grid_value(c, n, A) / std::sqrt(static_cast<double>(M));
      sum += gbm_from_bm(bm, static_cast<double>(m + 1) / M, params);
    }
    expectation += p * std::max(sum / M - strike, 0.0);
  }
  return expectation;
}

ordered_json run_qsim_check(const GbmParams& params, const MarketFlags& market, const PriceFlags& flags,
                            std::uint64_t seed) {
  const auto layout = qsim::RegisterLayout::quantized_subsample(flags.qsim_n, flags.qsim_M);
  const double gmax =
      params.s0 * std::exp(params.sigma * flags.qsim_A * std::sqrt(static_cast<double>(flags.qsim_M)) +
                           std::max(params.effective_drift(), 0.0));
  auto codec = qsim::FixedPointCodec::covering(flags.qsim_bits, gmax);
  const auto state =
      qsim::build_quantized_subsample_state(layout, params, flags.qsim_M, market.strike, gmax, codec, flags.qsim_A);
  const double quantum = qsim::exact_success_probability(state) * gmax;
  const double classical = classical_subsample_expectation(params, flags.qsim_M, market.strike, flags.qsim_n,
                                                           flags.qsim_A);
  const double slack = 0.5 * codec.scale();
  ordered_json j;
  j["value"] = quantum;
  j["std_error"] = 0.0;
  j["method"] = "qsim-check";
  j["n_outer"] = std::uint64_t{1} << (flags.qsim_n * flags.qsim_M);
  j["n_inner"] = 1;
  j["seed"] = seed;
  j["classical_value"] = classical;
  j["abs_difference"] = std::abs(quantum - classical);
  j["quantization_slack"] = slack;
  j["norm_error"] = std::abs(state.norm() - 1.0);
  j["qubits"] = layout.total_qubits();
  j["gmax"] = gmax;
  j["pass"] = std::abs(quantum - classical) <= slack && std::abs(state.norm() - 1.0) <= 1e-12;
  return j;
}

int run_price(const MarketFlags& market, const PriceFlags& flags, const CommonFlags& common, std::ostream& out,
              std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const GbmParams params = market_params(market);
  const std::uint64_t seed = resolve_seed(common, err);
  RunOptions options;
  options.workers = common.workers;

  ordered_json j;
  j["schema_version"] = 1;
  if (flags.method == "qsim-check") {
    ordered_json body = run_qsim_check(params, market, flags, seed);
    for (auto& [key, value] : body.items()) j[key] = value;
    j["wall_time_ms"] = elapsed_ms(start);
    emit(j.dump(), flags.output, out);
    return j["pass"].get<bool>() ? kExitOk : kExitRuntime;
  }

  const Method method = parse_method(flags.method);
  AverageKind average;
  if (flags.average == "arithmetic")
    average = AverageKind::arithmetic;
  else if (flags.average == "geometric")
    average = AverageKind::geometric;
  else
    throw ValidationError("unknown average '" + flags.average + "'");
  const auto spec = AsianPayoffSpec::uniform(market.strike, market.T, average);
  spec.validate();

  Estimate est;
  switch (method) {
    case Method::baseline:
      est = price_baseline(params, spec, flags.paths, seed, options);
      break;
    case Method::subsample:
      est = price_subsample(params, spec, flags.epsilon, flags.paths, seed, options);
      break;
    case Method::kl_nested: {
      NestedOptions nested;
      if (flags.inner_estimator == "acceptance-rate")
        nested.inner = InnerEstimator::acceptance_rate;
      else if (flags.inner_estimator == "uniform-average")
        nested.inner = InnerEstimator::uniform_average;
      else if (flags.inner_estimator == "rejection-average")
        nested.inner = InnerEstimator::rejection_average;
      else
        throw ValidationError("unknown inner estimator '" + flags.inner_estimator + "'");
      if (flags.envelope == "per-path")
        nested.envelope = EnvelopeKind::per_path;
      else if (flags.envelope == "global")
        nested.envelope = EnvelopeKind::global;
      else
        throw ValidationError("unknown envelope '" + flags.envelope + "'");
      const std::uint64_t outer = flags.outer.value_or(default_nested_samples(flags.epsilon));
      const std::uint64_t inner = flags.inner.value_or(default_nested_samples(flags.epsilon));
      est = price_kl_nested(params, spec, flags.epsilon, outer, inner, flags.L, seed, nested, options);
      break;
    }
    case Method::geometric_closed_form:
      est.value = geometric_asian_closed_form(params, TimeGrid::uniform_monitoring(market.T), market.strike);
      est.std_error = 0.0;
      est.n_outer = 0;
      est.n_inner = 0;
      est.seed = seed;
      est.method = method;
      break;
  }

  j["value"] = est.value;
  j["std_error"] = est.std_error;
  j["method"] = std::string(to_string(est.method));
  j["n_outer"] = est.n_outer;
  j["n_inner"] = est.n_inner;
  j["seed"] = est.seed;
  j["diagnostics"] = {{"truncation", est.truncation},
                      {"grid_points", est.grid_points},
                      {"proposals", est.proposals},
                      {"clamp_events", est.clamp_events}};
  j["wall_time_ms"] = elapsed_ms(start);
  emit(j.dump(), flags.output, out);
  return kExitOk;
}

std::vector<std::pair<double, double>> parse_pairs(const std::vector<std::string>& items) {
  std::vector<std::pair<double, double>> pairs;
  for (const auto& item : items) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("pair '" + item + "' is not s:t");
    try {
      pairs.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
    } catch (const std::logic_error&) {
      throw ValidationError("pair '" + item + "' is not numeric");
    }
  }
  return pairs;
}

int run_analyze(const MarketFlags& market, const AnalyzeFlags& flags, const CommonFlags& common, std::ostream& out,
                std::ostream& err) {
  const std::uint64_t seed = resolve_seed(common, err);
  analysis::ProbeOptions options{common.workers};

  BoundReport report;
  if (flags.probe == "truncation") {
    report = analysis::truncation_error_sweep(flags.L_values, flags.L_ref, flags.paths,
                                              analysis::uniform_probe_grid(flags.t_points), seed, options);
  } else if (flags.probe == "mapped") {
    report = analysis::verify_mapped_bound(market.mu, market.sigma, flags.eps_values, flags.paths, seed, options);
  } else if (flags.probe == "smoothness") {
    report = analysis::smoothness_probe(flags.epsilon, parse_pairs(flags.pairs), flags.paths, seed, options);
  } else if (flags.probe == "subsample") {
    analysis::SubsampleProbeConfig config;
    config.params = market_params(market);
    config.strike = market.strike;
    config.monitoring_count = market.T;
    report = analysis::subsample_error_probe(flags.eps_values, config, flags.paths, seed, options);
  } else if (flags.probe == "convergence") {
    analysis::ConvergenceConfig config;
    config.method = parse_method(flags.method);
    config.params = market_params(market);
    config.spec = AsianPayoffSpec::uniform(market.strike, market.T);
    config.epsilon = flags.epsilon;
    config.n_seeds = flags.n_seeds;
    if (flags.oracle) {
      config.oracle_value = *flags.oracle;
      config.oracle_std_error = flags.oracle_se;
    } else {
      const auto oracle = price_baseline(config.params, config.spec, flags.oracle_paths,
                                         derive_seed(seed, 0x6f7261636c65ULL), RunOptions{common.workers, 1.0});
      config.oracle_value = oracle.value;
      config.oracle_std_error = oracle.std_error;
    }
    report = analysis::convergence_study(config, flags.budgets, seed, options);
  } else {
    throw ValidationError("unknown probe '" + flags.probe + "'");
  }

  const std::string json = report.to_json();
  if (!flags.output.empty()) {
    std::ofstream csv(flags.output + ".csv");
    std::ofstream js(flags.output + ".json");
    if (!csv || !js) throw std::runtime_error("cannot open output prefix " + flags.output);
    report.write_csv(csv);
    js << json << '\n';
  }
  out << json << '\n';
  return report.all_pass() ? kExitOk : kExitRuntime;
}

void error_line(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << ordered_json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
}

void add_market(CLI::App& cmd, MarketFlags& market) {
  cmd.add_option("--s0", market.s0, "Initial price")->capture_default_str();
  cmd.add_option("--mu", market.mu, "Drift")->capture_default_str();
  cmd.add_option("--sigma", market.sigma, "Volatility (> 0)")->capture_default_str();
  cmd.add_option("--strike,-K", market.strike, "Strike")->capture_default_str();
  cmd.add_option("--T", market.T, "Monitoring dates i/T, i = 1..T")->capture_default_str();
}

void add_common(CLI::App& cmd, CommonFlags& common) {
  cmd.add_option("--seed", common.seed, "64-bit seed (default: random, echoed in output)");
  cmd.add_option("--workers", common.workers, "Worker threads; 0 = KLASIAN_WORKERS or all cores")
      ->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Asian option pricing with KL-smoothed paths, sub-sampling and statevector checks", "klasian"};
  app.require_subcommand(1);

  MarketFlags market;
  CommonFlags common;
  PriceFlags price;
  AnalyzeFlags analyze;

  auto* price_cmd = app.add_subcommand("price", "Price the Asian call; writes an Estimate as JSON");
  add_market(*price_cmd, market);
  add_common(*price_cmd, common);
  price_cmd->add_option("--method", price.method, "baseline | kl-nested | subsample | geometric-cf | qsim-check")
      ->capture_default_str();
  price_cmd->add_option("--average", price.average, "arithmetic | geometric (baseline only)")->capture_default_str();
  price_cmd->add_option("--epsilon", price.epsilon, "Target accuracy")->capture_default_str();
  price_cmd->add_option("--paths", price.paths, "Paths for baseline and subsample")->capture_default_str();
  price_cmd->add_option("--outer", price.outer, "kl-nested outer samples (default ceil(4/eps^2))");
  price_cmd->add_option("--inner", price.inner, "kl-nested inner samples (default ceil(4/eps^2))");
  price_cmd->add_option("--L", price.L, "KL truncation; 0 = automatic from epsilon")->capture_default_str();
  price_cmd->add_option("--inner-estimator", price.inner_estimator,
                        "acceptance-rate | uniform-average | rejection-average")
      ->capture_default_str();
  price_cmd->add_option("--envelope", price.envelope, "per-path | global")->capture_default_str();
  price_cmd->add_option("--qsim-n", price.qsim_n, "qsim-check: qubits per coefficient register")
      ->capture_default_str();
  price_cmd->add_option("--qsim-M", price.qsim_M, "qsim-check: grid points")->capture_default_str();
  price_cmd->add_option("--qsim-bits", price.qsim_bits, "qsim-check: codec width")->capture_default_str();
  price_cmd->add_option("--qsim-A", price.qsim_A, "qsim-check: Gaussian grid range")->capture_default_str();
  price_cmd->add_option("--output,-o", price.output, "Write JSON here instead of stdout");

  auto* analyze_cmd = app.add_subcommand("analyze", "Run a bound probe; writes a report as JSON (and CSV)");
  add_market(*analyze_cmd, market);
  add_common(*analyze_cmd, common);
  analyze_cmd->add_option("--probe", analyze.probe, "truncation | mapped | smoothness | subsample | convergence")
      ->required();
  analyze_cmd->add_option("--L", analyze.L_values, "truncation: L values")->delimiter(',')->capture_default_str();
  analyze_cmd->add_option("--L-ref", analyze.L_ref, "truncation: reference L")->capture_default_str();
  analyze_cmd->add_option("--t-points", analyze.t_points, "truncation: probe times j/n")->capture_default_str();
  analyze_cmd->add_option("--paths", analyze.paths, "Samples per point")->capture_default_str();
  analyze_cmd->add_option("--eps", analyze.eps_values, "mapped, subsample: epsilon values")
      ->delimiter(',')
      ->capture_default_str();
  analyze_cmd->add_option("--epsilon", analyze.epsilon, "smoothness: epsilon; convergence: subsample epsilon")
      ->capture_default_str();
  analyze_cmd->add_option("--pairs", analyze.pairs, "smoothness: s:t pairs")->delimiter(',')->capture_default_str();
  analyze_cmd->add_option("--method", analyze.method, "convergence: baseline | subsample | kl-nested")
      ->capture_default_str();
  analyze_cmd->add_option("--budgets", analyze.budgets, "convergence: path budgets")
      ->delimiter(',')
      ->capture_default_str();
  analyze_cmd->add_option("--seeds", analyze.n_seeds, "convergence: replicates per budget")->capture_default_str();
  analyze_cmd->add_option("--oracle", analyze.oracle, "convergence: reference price");
  analyze_cmd->add_option("--oracle-se", analyze.oracle_se, "convergence: reference standard error")
      ->capture_default_str();
  analyze_cmd->add_option("--oracle-paths", analyze.oracle_paths, "convergence: baseline paths when no --oracle")
      ->capture_default_str();
  analyze_cmd->add_option("--output,-o", analyze.output, "Write <prefix>.csv and <prefix>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_line(err, "usage", e.what(), kExitValidation);
    return kExitValidation;
  }

  try {
    if (price_cmd->parsed()) return run_price(market, price, common, out, err);
    return run_analyze(market, analyze, common, out, err);
  } catch (const std::logic_error& e) {
    error_line(err, "validation", e.what(), kExitValidation);
    return kExitValidation;
  } catch (const std::exception& e) {
    error_line(err, "runtime", e.what(), kExitRuntime);
    return kExitRuntime;
  }
}

}  // namespace klasian::cli
