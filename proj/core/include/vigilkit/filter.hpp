#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vigilkit::dsp {

/// Normalised second-order section (a0 == 1), transposed direct form II.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;

  std::complex<double> response(double freq_hz, double fs_hz) const;
  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

class SosFilter {
 public:
  SosFilter() = default;
  explicit SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  const std::vector<Biquad>& sections() const { return sections_; }
  std::size_t order() const { return 2 * sections_.size(); }

  /// Single causal pass, zero initial state.
  void apply(std::span<double> x) const;

  /// Forward-backward filtering with odd-reflection padding and steady-state
  /// initial conditions. padlen = 0 selects 3 * (order + 1), clipped to n - 1.
  void filtfilt(std::span<double> x, std::size_t padlen = 0) const;

  /// Magnitude of a single pass at freq_hz.
  double magnitude(double freq_hz, double fs_hz) const;

 private:
  std::vector<Biquad> sections_;
};

/// Butterworth low-pass of even order via the bilinear transform.
SosFilter butterworth_lowpass(int order, double cutoff_hz, double fs_hz);
SosFilter butterworth_highpass(int order, double cutoff_hz, double fs_hz);

/// Cascade of a Butterworth high-pass at lo and low-pass at hi, each of
/// order/2 (order must be a multiple of 4).
SosFilter butterworth_bandpass(int order, double lo_hz, double hi_hz, double fs_hz);

/// Second-order IIR notch with quality factor q (bandwidth f0 / q).
SosFilter iir_notch(double f0_hz, double q, double fs_hz);

}  // namespace vigilkit::dsp
