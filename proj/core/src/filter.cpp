#include "vigilkit/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vigilkit/error.hpp"

namespace vigilkit::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

void check_cutoff(double f, double fs, const char* what) {
  if (!(fs > 0)) throw ArgumentError("sampling rate must be positive");
  if (!(f > 0 && f < fs / 2.0))
    throw ArgumentError(std::string(what) + " frequency " + std::to_string(f) +
                        " Hz must lie strictly between 0 and Nyquist (" +
                        std::to_string(fs / 2.0) + " Hz)");
}

std::vector<double> butterworth_qs(int order) {
  if (order < 2 || order % 2 != 0) throw ArgumentError("Butterworth order must be even and >= 2");
  std::vector<double> qs;
  for (int k = 1; k <= order / 2; ++k)
    qs.push_back(1.0 / (2.0 * std::sin((2.0 * k - 1.0) * kPi / (2.0 * order))));
  return qs;
}

Biquad lowpass_section(double fc, double fs, double q) {
  const double k = std::tan(kPi * fc / fs);
  const double norm = 1.0 / (1.0 + k / q + k * k);
  Biquad s;
  s.b0 = k * k * norm;
  s.b1 = 2.0 * s.b0;
  s.b2 = s.b0;
  s.a1 = 2.0 * (k * k - 1.0) * norm;
  s.a2 = (1.0 - k / q + k * k) * norm;
  return s;
}

Biquad highpass_section(double fc, double fs, double q) {
  const double k = std::tan(kPi * fc / fs);
  const double norm = 1.0 / (1.0 + k / q + k * k);
  Biquad s;
  s.b0 = norm;
  s.b1 = -2.0 * norm;
  s.b2 = norm;
  s.a1 = 2.0 * (k * k - 1.0) * norm;
  s.a2 = (1.0 - k / q + k * k) * norm;
  return s;
}

// Runs the cascade over x in place starting from the supplied states.
void run(const std::vector<Biquad>& sections, std::span<double> x,
         std::vector<std::pair<double, double>>& state) {
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const Biquad& s = sections[k];
    double z1 = state[k].first;
    double z2 = state[k].second;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    state[k] = {z1, z2};
  }
}

// Steady-state states for a constant input x0.
std::vector<std::pair<double, double>> steady_state(const std::vector<Biquad>& sections, double x0) {
  std::vector<std::pair<double, double>> zi(sections.size());
  double level = x0;
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const Biquad& s = sections[k];
    const double g = s.dc_gain();
    const double z2 = (s.b2 - s.a2 * g) * level;
    const double z1 = (s.b1 - s.a1 * g) * level + z2;
    zi[k] = {z1, z2};
    level *= g;
  }
  return zi;
}

}  // namespace

std::complex<double> Biquad::response(double freq_hz, double fs_hz) const {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * kPi * freq_hz / fs_hz);
  const std::complex<double> z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

double SosFilter::magnitude(double freq_hz, double fs_hz) const {
  std::complex<double> h = 1.0;
  for (const auto& s : sections_) h *= s.response(freq_hz, fs_hz);
  return std::abs(h);
}

void SosFilter::apply(std::span<double> x) const {
  std::vector<std::pair<double, double>> state(sections_.size(), {0.0, 0.0});
  run(sections_, x, state);
}

void SosFilter::filtfilt(std::span<double> x, std::size_t padlen) const {
  const std::size_t n = x.size();
  if (n == 0 || sections_.empty()) return;
  if (padlen == 0) padlen = 3 * (order() + 1);
  padlen = std::min(padlen, n - 1);

  std::vector<double> ext(n + 2 * padlen);
  const double first = x[0];
  const double last = x[n - 1];
  for (std::size_t i = 0; i < padlen; ++i) ext[i] = 2.0 * first - x[padlen - i];
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(padlen));
  for (std::size_t i = 0; i < padlen; ++i) ext[padlen + n + i] = 2.0 * last - x[n - 2 - i];

  auto state = steady_state(sections_, ext.front());
  run(sections_, ext, state);
  std::reverse(ext.begin(), ext.end());
  state = steady_state(sections_, ext.front());
  run(sections_, ext, state);
  std::reverse(ext.begin(), ext.end());
  std::copy_n(ext.begin() + static_cast<std::ptrdiff_t>(padlen), n, x.begin());
}

SosFilter butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
  check_cutoff(cutoff_hz, fs_hz, "low-pass cutoff");
  std::vector<Biquad> s;
  for (double q : butterworth_qs(order)) s.push_back(lowpass_section(cutoff_hz, fs_hz, q));
  return SosFilter(std::move(s));
}

SosFilter butterworth_highpass(int order, double cutoff_hz, double fs_hz) {
  check_cutoff(cutoff_hz, fs_hz, "high-pass cutoff");
  std::vector<Biquad> s;
  for (double q : butterworth_qs(order)) s.push_back(highpass_section(cutoff_hz, fs_hz, q));
  return SosFilter(std::move(s));
}

SosFilter butterworth_bandpass(int order, double lo_hz, double hi_hz, double fs_hz) {
  if (order < 4 || order % 4 != 0) throw ArgumentError("band-pass order must be a multiple of 4");
  if (!(lo_hz < hi_hz)) throw ArgumentError("band-pass requires lo < hi");
  check_cutoff(lo_hz, fs_hz, "band-pass low edge");
  check_cutoff(hi_hz, fs_hz, "band-pass high edge");
  auto hp = butterworth_highpass(order / 2, lo_hz, fs_hz).sections();
  const auto lp = butterworth_lowpass(order / 2, hi_hz, fs_hz).sections();
  hp.insert(hp.end(), lp.begin(), lp.end());
  return SosFilter(std::move(hp));
}

SosFilter iir_notch(double f0_hz, double q, double fs_hz) {
  check_cutoff(f0_hz, fs_hz, "notch");
  if (!(q > 0)) throw ArgumentError("notch quality factor must be positive");
  const double w0 = 2.0 * kPi * f0_hz / fs_hz;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * std::cos(w0) / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * std::cos(w0) / a0;
  s.a2 = (1.0 - alpha) / a0;
  return SosFilter({s});
}

}  // namespace vigilkit::dsp
