#pragma once

// Small-register statevector simulation of the amplitude encodings.
//
// Basis indices pack registers little-endian in this order: coefficient
// registers (register 0 in the lowest bits), time register, value register,
// ancillas. Gaussian registers use offset binary: code c holds x = c - N/2
// and the grid value v = 2 A x / N.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "klasian/process.hpp"
#include "klasian/random.hpp"

namespace klasian::qsim {

inline constexpr int kMaxQubits = 26;

struct RegisterLayout {
  int coeff_qubits = 0;
  int n_coeff_registers = 0;
  int time_qubits = 0;
  int value_qubits = 0;
  int ancilla_count = 0;

  int total_qubits() const noexcept {
    return coeff_qubits * n_coeff_registers + time_qubits + value_qubits + ancilla_count;
  }
  int coeff_offset(int reg) const noexcept { return reg * coeff_qubits; }
  int time_offset() const noexcept { return coeff_qubits * n_coeff_registers; }
  int value_offset() const noexcept { return time_offset() + time_qubits; }
  int ancilla_offset() const noexcept { return value_offset() + value_qubits; }

  /// Throws when over the qubit budget or when a used register has width 0.
  void validate() const;

  /// n qubits per coefficient register, L+1 registers, ceil(log2 T) time qubits.
  static RegisterLayout semidigital(int n, int L, int T, int value_bits);
  /// M coefficient registers and one payoff ancilla.
  static RegisterLayout quantized_subsample(int n, int M);
};

/// Unsigned fixed point: code c represents offset + c * scale.
class FixedPointCodec {
 public:
  FixedPointCodec(int bits, double scale, double offset = 0.0);
  /// Codes 0..2^bits - 1 spanning [0, max_value].
  static FixedPointCodec covering(int bits, double max_value);

  int bits() const noexcept { return bits_; }
  double scale() const noexcept { return scale_; }
  double offset() const noexcept { return offset_; }
  std::uint64_t max_code() const noexcept { return (std::uint64_t{1} << bits_) - 1; }

  /// Round to nearest; out-of-range values saturate and are counted.
  std::uint64_t encode(double value);
  double decode(std::uint64_t code) const noexcept { return offset_ + scale_ * static_cast<double>(code); }
  double quantize(double value) { return decode(encode(value)); }
  std::uint64_t saturation_count() const noexcept { return saturations_; }

 private:
  int bits_;
  double scale_;
  double offset_;
  std::uint64_t saturations_ = 0;
};

class StateVector {
 public:
  StateVector(RegisterLayout layout, Eigen::VectorXcd amplitudes,
              std::optional<FixedPointCodec> codec = std::nullopt);

  const RegisterLayout& layout() const noexcept { return layout_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  const std::optional<FixedPointCodec>& codec() const noexcept { return codec_; }
  Eigen::Index size() const noexcept { return amplitudes_.size(); }

  double norm() const { return amplitudes_.norm(); }
  Eigen::VectorXd probabilities() const { return amplitudes_.cwiseAbs2(); }

  std::uint64_t coeff_code(std::uint64_t basis, int reg) const noexcept;
  std::uint64_t time_code(std::uint64_t basis) const noexcept;
  std::uint64_t value_code(std::uint64_t basis) const noexcept;
  std::uint64_t ancilla_bits(std::uint64_t basis) const noexcept;

 private:
  RegisterLayout layout_;
  Eigen::VectorXcd amplitudes_;
  std::optional<FixedPointCodec> codec_;
};

/// Grid value v(code) = 2 A (code - N/2) / N.
double gaussian_grid_value(std::uint64_t code, int n, double A);

/// Amplitudes over the 2^n codes, proportional to exp(-v^2 / 4), unit norm.
Eigen::VectorXd prepare_gaussian_register(int n, double A);

/// sum_a sqrt(p(a)) |a> (1/sqrt(T)) sum_t |t> |encode(G_L(a', t))>, t_j = (j+1)/T.
StateVector build_semidigital_state(const RegisterLayout& layout, const GbmParams& params, int L, int T,
                                    FixedPointCodec codec, double A);

/// Append one ancilla: |0> amplitude scaled by sqrt(value/gmax).
StateVector attach_value_rotation(const StateVector& state, double gmax);

/// sum_a sqrt(p(a)) |a> (sqrt(q(a)/gmax) |0> + sqrt(1 - q(a)/gmax) |1>) with
/// q(a) the quantized (Gbar(a) - K)^+ of the discretised running sum
/// B(i/M) = M^{-1/2} sum_{m<=i} a'_m.
StateVector build_quantized_subsample_state(const RegisterLayout& layout, const GbmParams& params, int M,
                                            double strike, double gmax, FixedPointCodec codec, double A);

/// Matches ancilla bits b with (b & mask) == value.
struct AncillaPattern {
  std::uint64_t mask = 1;
  std::uint64_t value = 0;
};

double exact_success_probability(const StateVector& state, AncillaPattern pattern = {});

/// Oracle calls consumed by a shot schedule: sum over depths of shots (2m + 1).
std::uint64_t oracle_calls(std::uint64_t shots_per_depth, const std::vector<int>& grover_depths);

/// Maximum-likelihood amplitude estimate from simulated measurements at
/// each Grover depth (success probability sin^2((2m+1) theta)).
double mle_amplitude_estimate(double p_true, std::uint64_t shots_per_depth, const std::vector<int>& grover_depths,
                              RandomStream& stream);

/// basis,coefficient codes...,time,value,ancilla,probability for nonzero entries.
void write_probability_csv(const StateVector& state, std::ostream& out);

}  // namespace klasian::qsim
