#include "klasian/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/math/tools/minima.hpp>

namespace klasian::qsim {

namespace {

std::uint64_t field(std::uint64_t basis, int offset, int width) noexcept {
  if (width == 0) return 0;
  return (basis >> offset) & ((std::uint64_t{1} << width) - 1);
}

int ceil_log2(int value) {
  int bits = 0;
  while ((1 << bits) < value) ++bits;
  return bits;
}

/// Odometer over all coefficient code tuples.
bool advance(std::vector<std::uint64_t>& codes, std::uint64_t radix) {
  for (auto& c : codes) {
    if (++c < radix) return true;
    c = 0;
  }
  return false;
}

}  // namespace

void RegisterLayout::validate() const {
  if (coeff_qubits < 1 || coeff_qubits > 8) throw std::invalid_argument("coefficient registers need 1..8 qubits");
  if (n_coeff_registers < 1) throw std::invalid_argument("layout needs at least one coefficient register");
  if (time_qubits < 0 || value_qubits < 0 || ancilla_count < 0)
    throw std::invalid_argument("register widths must be nonnegative");
  if (total_qubits() > kMaxQubits)
    throw std::length_error("layout needs " + std::to_string(total_qubits()) + " qubits, limit is " +
                            std::to_string(kMaxQubits));
}

RegisterLayout RegisterLayout::semidigital(int n, int L, int T, int value_bits) {
  if (T < 1) throw std::invalid_argument("monitoring count must be >= 1");
  RegisterLayout layout{n, L + 1, ceil_log2(T), value_bits, 0};
  layout.validate();
  if (value_bits < 1) throw std::invalid_argument("value register needs >= 1 qubit");
  return layout;
}

RegisterLayout RegisterLayout::quantized_subsample(int n, int M) {
  RegisterLayout layout{n, M, 0, 0, 1};
  layout.validate();
  return layout;
}

FixedPointCodec::FixedPointCodec(int bits, double scale, double offset) : bits_(bits), scale_(scale), offset_(offset) {
  if (bits < 1 || bits > 32) throw std::invalid_argument("codec width must be 1..32 bits");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("codec scale must be > 0");
}

FixedPointCodec FixedPointCodec::covering(int bits, double max_value) {
  if (bits < 1 || bits > 32) throw std::invalid_argument("codec width must be 1..32 bits");
  return FixedPointCodec(bits, max_value / static_cast<double>((std::uint64_t{1} << bits) - 1), 0.0);
}

std::uint64_t FixedPointCodec::encode(double value) {
  const double position = std::round((value - offset_) / scale_);
  if (!(position >= 0.0)) {
    ++saturations_;
    return 0;
  }
  if (position > static_cast<double>(max_code())) {
    ++saturations_;
    return max_code();
  }
  return static_cast<std::uint64_t>(position);
}

StateVector::StateVector(RegisterLayout layout, Eigen::VectorXcd amplitudes, std::optional<FixedPointCodec> codec)
    : layout_(layout), amplitudes_(std::move(amplitudes)), codec_(std::move(codec)) {
  layout_.validate();
  if (amplitudes_.size() != (Eigen::Index{1} << layout_.total_qubits()))
    throw std::invalid_argument("amplitude vector length does not match the layout");
}

std::uint64_t StateVector::coeff_code(std::uint64_t basis, int reg) const noexcept {
  return field(basis, layout_.coeff_offset(reg), layout_.coeff_qubits);
}
std::uint64_t StateVector::time_code(std::uint64_t basis) const noexcept {
  return field(basis, layout_.time_offset(), layout_.time_qubits);
}
std::uint64_t StateVector::value_code(std::uint64_t basis) const noexcept {
  return field(basis, layout_.value_offset(), layout_.value_qubits);
}
std::uint64_t StateVector::ancilla_bits(std::uint64_t basis) const noexcept {
  return field(basis, layout_.ancilla_offset(), layout_.ancilla_count);
}

double gaussian_grid_value(std::uint64_t code, int n, double A) {
  const double N = std::ldexp(1.0, n);
  return 2.0 * A * (static_cast<double>(code) - N / 2.0) / N;
}

Eigen::VectorXd prepare_gaussian_register(int n, double A) {
  if (n < 1 || n > 8) throw std::invalid_argument("Gaussian register needs 1..8 qubits");
  if (!(A > 0.0)) throw std::invalid_argument("Gaussian range A must be > 0");
  const Eigen::Index N = Eigen::Index{1} << n;
  Eigen::VectorXd amps(N);
  for (Eigen::Index c = 0; c < N; ++c) {
    const double v = gaussian_grid_value(static_cast<std::uint64_t>(c), n, A);
    amps(c) = std::exp(-0.25 * v * v);
  }
  return amps / amps.norm();
}

StateVector build_semidigital_state(const RegisterLayout& layout, const GbmParams& params, int L, int T,
                                    FixedPointCodec codec, double A) {
  params.validate();
  layout.validate();
  if (layout.n_coeff_registers != L + 1) throw std::invalid_argument("layout must hold L + 1 coefficient registers");
  if (T < 1 || T > (1 << layout.time_qubits)) throw std::invalid_argument("time register too narrow for T");
  if (layout.value_qubits != codec.bits()) throw std::invalid_argument("value register width must match the codec");

  const int n = layout.coeff_qubits;
  const std::uint64_t radix = std::uint64_t{1} << n;
  const Eigen::VectorXd gauss = prepare_gaussian_register(n, A);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(Eigen::Index{1} << layout.total_qubits());

  std::vector<std::uint64_t> codes(static_cast<std::size_t>(L + 1), 0);
  WienerCoefficients<double> coeffs;
  coeffs.clip_bound = A;
  coeffs.a.resize(L + 1);
  const double time_weight = 1.0 / std::sqrt(static_cast<double>(T));
  do {
    double amp = time_weight;
    std::uint64_t coeff_bits = 0;
    for (int r = 0; r <= L; ++r) {
      const auto c = codes[static_cast<std::size_t>(r)];
      amp *= gauss(static_cast<Eigen::Index>(c));
      coeffs.a(r) = gaussian_grid_value(c, n, A);
      coeff_bits |= c << layout.coeff_offset(r);
    }
    for (int j = 0; j < T; ++j) {
      const double t = static_cast<double>(j + 1) / T;
      const double g = gbm_from_bm(wiener_eval_horner(coeffs, t), t, params);
      const std::uint64_t value = codec.encode(g);
      const std::uint64_t index = coeff_bits | (static_cast<std::uint64_t>(j) << layout.time_offset()) |
                                  (value << layout.value_offset());
      amps(static_cast<Eigen::Index>(index)) = amp;
    }
  } while (advance(codes, radix));
  return StateVector(layout, std::move(amps), codec);
}

StateVector attach_value_rotation(const StateVector& state, double gmax) {
  if (!state.codec()) throw std::invalid_argument("state has no value register codec");
  if (!(gmax > 0.0)) throw std::invalid_argument("gmax must be > 0");
  RegisterLayout layout = state.layout();
  const int ancilla_bit = layout.total_qubits();
  layout.ancilla_count += 1;
  layout.validate();
  const Eigen::Index old_size = state.size();
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(2 * old_size);
  const auto& codec = *state.codec();
  for (Eigen::Index i = 0; i < old_size; ++i) {
    const std::complex<double> a = state.amplitudes()(i);
    if (a == std::complex<double>{}) continue;
    const double value = codec.decode(state.value_code(static_cast<std::uint64_t>(i)));
    if (value > gmax * (1.0 + 1e-12))
      throw std::domain_error("value register exceeds gmax; normalisation contract violated");
    const double ratio = std::clamp(value / gmax, 0.0, 1.0);
    amps(i) = a * std::sqrt(ratio);
    amps(i + (Eigen::Index{1} << ancilla_bit)) = a * std::sqrt(1.0 - ratio);
  }
  return StateVector(layout, std::move(amps), state.codec());
}

StateVector build_quantized_subsample_state(const RegisterLayout& layout, const GbmParams& params, int M,
                                            double strike, double gmax, FixedPointCodec codec, double A) {
  params.validate();
  layout.validate();
  if (M < 1 || layout.n_coeff_registers != M) throw std::invalid_argument("layout must hold M coefficient registers");
  if (layout.ancilla_count != 1 || layout.time_qubits != 0 || layout.value_qubits != 0)
    throw std::invalid_argument("quantized sub-sampling layout is coefficients plus one ancilla");
  if (!(gmax > 0.0)) throw std::invalid_argument("gmax must be > 0");

  const int n = layout.coeff_qubits;
  const std::uint64_t radix = std::uint64_t{1} << n;
  const Eigen::VectorXd gauss = prepare_gaussian_register(n, A);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(Eigen::Index{1} << layout.total_qubits());
  const double step = 1.0 / std::sqrt(static_cast<double>(M));
  const double drift = params.effective_drift();
  const Eigen::Index ancilla_one = Eigen::Index{1} << layout.ancilla_offset();

  std::vector<std::uint64_t> codes(static_cast<std::size_t>(M), 0);
  do {
    double amp = 1.0;
    std::uint64_t index = 0;
    double bm = 0.0;
    double running = 0.0;
    for (int m = 0; m < M; ++m) {
      const auto c = codes[static_cast<std::size_t>(m)];
      amp *= gauss(static_cast<Eigen::Index>(c));
      index |= c << layout.coeff_offset(m);
      bm += step * gaussian_grid_value(c, n, A);
      const double t = static_cast<double>(m + 1) / M;
      running += params.s0 * std::exp(params.sigma * bm + drift * t);
    }
    const double payoff = codec.quantize(std::max(running / M - strike, 0.0));
    if (payoff > gmax * (1.0 + 1e-12))
      throw std::domain_error("payoff exceeds gmax; normalisation contract violated");
    const double ratio = std::clamp(payoff / gmax, 0.0, 1.0);
    amps(static_cast<Eigen::Index>(index)) = amp * std::sqrt(ratio);
    amps(static_cast<Eigen::Index>(index) + ancilla_one) = amp * std::sqrt(1.0 - ratio);
  } while (advance(codes, radix));
  return StateVector(layout, std::move(amps), codec);
}

double exact_success_probability(const StateVector& state, AncillaPattern pattern) {
  if (state.layout().ancilla_count < 64 && (pattern.mask >> state.layout().ancilla_count) != 0)
    throw std::invalid_argument("ancilla pattern wider than the ancilla register");
  double total = 0.0;
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    if ((state.ancilla_bits(static_cast<std::uint64_t>(i)) & pattern.mask) == pattern.value)
      total += std::norm(state.amplitudes()(i));
  }
  return total;
}

std::uint64_t oracle_calls(std::uint64_t shots_per_depth, const std::vector<int>& grover_depths) {
  std::uint64_t calls = 0;
  for (int m : grover_depths) calls += shots_per_depth * static_cast<std::uint64_t>(2 * m + 1);
  return calls;
}

double mle_amplitude_estimate(double p_true, std::uint64_t shots_per_depth, const std::vector<int>& grover_depths,
                              RandomStream& stream) {
  if (!(p_true >= 0.0 && p_true <= 1.0)) throw std::invalid_argument("p_true must lie in [0, 1]");
  if (grover_depths.empty()) throw std::invalid_argument("need at least one Grover depth");
  for (int m : grover_depths)
    if (m < 0) throw std::invalid_argument("Grover depths must be nonnegative");

  const double theta_true = std::asin(std::sqrt(p_true));
  std::vector<double> hits(grover_depths.size());
  for (std::size_t d = 0; d < grover_depths.size(); ++d) {
    const double q = std::pow(std::sin((2 * grover_depths[d] + 1) * theta_true), 2);
    std::uint64_t h = 0;
    for (std::uint64_t s = 0; s < shots_per_depth; ++s)
      if (stream.uniform() < q) ++h;
    hits[d] = static_cast<double>(h);
  }

  const double shots = static_cast<double>(shots_per_depth);
  auto neg_log_likelihood = [&](double theta) {
    double nll = 0.0;
    for (std::size_t d = 0; d < grover_depths.size(); ++d) {
      const double angle = (2 * grover_depths[d] + 1) * theta;
      const double s2 = std::pow(std::sin(angle), 2);
      const double c2 = std::pow(std::cos(angle), 2);
      const double miss = shots - hits[d];
      if (hits[d] > 0.0) nll -= hits[d] * (s2 > 0.0 ? std::log(s2) : -1e300);
      if (miss > 0.0) nll -= miss * (c2 > 0.0 ? std::log(c2) : -1e300);
    }
    return nll;
  };

  const double half_pi = 0.5 * std::numbers::pi;
  int max_depth = 0;
  for (int m : grover_depths) max_depth = std::max(max_depth, m);
  // Resolve the narrowest likelihood lobe with ~50 points.
  const int grid = 50 * (2 * max_depth + 1) * 20;
  double best_theta = 0.0;
  double best = neg_log_likelihood(0.0);
  for (int i = 1; i <= grid; ++i) {
    const double theta = half_pi * i / grid;
    const double value = neg_log_likelihood(theta);
    if (value < best) {
      best = value;
      best_theta = theta;
    }
  }
  const double cell = half_pi / grid;
  const double lo = std::max(0.0, best_theta - cell);
  const double hi = std::min(half_pi, best_theta + cell);
  const auto refined = boost::math::tools::brent_find_minima(neg_log_likelihood, lo, hi, 40);
  if (refined.second < best) best_theta = refined.first;
  const double s = std::sin(best_theta);
  return std::clamp(s * s, 0.0, 1.0);
}

void write_probability_csv(const StateVector& state, std::ostream& out) {
  const auto& layout = state.layout();
  out << "basis";
  for (int r = 0; r < layout.n_coeff_registers; ++r) out << ",coeff" << r;
  if (layout.time_qubits > 0) out << ",time";
  if (layout.value_qubits > 0) out << ",value";
  if (layout.ancilla_count > 0) out << ",ancilla";
  out << ",probability\n";
  char buffer[32];
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    const double p = std::norm(state.amplitudes()(i));
    if (p == 0.0) continue;
    const auto basis = static_cast<std::uint64_t>(i);
    out << basis;
    for (int r = 0; r < layout.n_coeff_registers; ++r) out << ',' << state.coeff_code(basis, r);
    if (layout.time_qubits > 0) out << ',' << state.time_code(basis);
    if (layout.value_qubits > 0) out << ',' << state.value_code(basis);
    if (layout.ancilla_count > 0) out << ',' << state.ancilla_bits(basis);
    std::snprintf(buffer, sizeof buffer, "%.17g", p);
    out << ',' << buffer << '\n';
  }
}

}  // namespace klasian::qsim
