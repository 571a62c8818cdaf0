#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vigilkit/error.hpp"
#include "vigilkit/filter.hpp"

using namespace vigilkit;

namespace {

std::vector<double> sine(double f, double fs, int n, double phase = 0.0) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = std::sin(2 * std::numbers::pi * f * i / fs + phase);
  return x;
}

double rms(const std::vector<double>& x, std::size_t from, std::size_t to) {
  double s = 0;
  for (std::size_t i = from; i < to; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

}  // namespace

TEST_SUITE("filter") {
  TEST_CASE("Butterworth low-pass magnitude") {
    const auto lp = dsp::butterworth_lowpass(4, 40.0, 256.0);
    CHECK(lp.order() == 4);
    CHECK(lp.magnitude(0.0, 256.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lp.magnitude(40.0, 256.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(lp.magnitude(100.0, 256.0) < 0.01);
  }

  TEST_CASE("Butterworth high-pass magnitude") {
    const auto hp = dsp::butterworth_highpass(2, 1.0, 256.0);
    CHECK(hp.magnitude(1.0, 256.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(hp.magnitude(0.0, 256.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(hp.magnitude(64.0, 256.0) == doctest::Approx(1.0).epsilon(1e-4));
  }

  TEST_CASE("band-pass cascade") {
    const auto bp = dsp::butterworth_bandpass(4, 1.0, 70.0, 512.0);
    CHECK(bp.order() == 4);
    CHECK(bp.magnitude(10.0, 512.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(bp.magnitude(200.0, 512.0) < 0.1);
    CHECK_THROWS_AS(dsp::butterworth_bandpass(6, 1.0, 70.0, 512.0), ArgumentError);
    CHECK_THROWS_AS(dsp::butterworth_bandpass(4, 70.0, 1.0, 512.0), ArgumentError);
  }

  TEST_CASE("notch removes its centre frequency") {
    const auto n = dsp::iir_notch(50.0, 30.0, 512.0);
    CHECK(n.magnitude(50.0, 512.0) < 1e-9);
    CHECK(n.magnitude(10.0, 512.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_THROWS_AS(dsp::iir_notch(50.0, 0.0, 512.0), ArgumentError);
  }

  TEST_CASE("invalid designs") {
    CHECK_THROWS_AS(dsp::butterworth_lowpass(3, 10.0, 256.0), ArgumentError);
    CHECK_THROWS_AS(dsp::butterworth_lowpass(4, 200.0, 256.0), ArgumentError);
    CHECK_THROWS_AS(dsp::butterworth_lowpass(4, 10.0, 0.0), ArgumentError);
  }

  TEST_CASE("filtfilt is zero phase") {
    const double fs = 256.0;
    auto x = sine(5.0, fs, 4096);
    const auto ref = x;
    dsp::butterworth_lowpass(4, 30.0, fs).filtfilt(x);
    // Away from the edges the passband sine comes through unchanged in phase.
    double err = 0;
    for (std::size_t i = 512; i < 3584; ++i) err = std::max(err, std::fabs(x[i] - ref[i]));
    CHECK(err < 1e-3);
  }

  TEST_CASE("filtfilt squares the single-pass magnitude") {
    const double fs = 256.0, f = 35.0;
    const auto lp = dsp::butterworth_lowpass(4, 30.0, fs);
    auto x = sine(f, fs, 8192);
    lp.filtfilt(x);
    const double expected = std::pow(lp.magnitude(f, fs), 2) / std::sqrt(2.0);
    CHECK(rms(x, 2048, 6144) == doctest::Approx(expected).epsilon(1e-3));
  }

  TEST_CASE("filtfilt preserves a constant through a low-pass") {
    std::vector<double> x(500, 3.0);
    dsp::butterworth_lowpass(4, 20.0, 256.0).filtfilt(x);
    for (double v : x) CHECK(v == doctest::Approx(3.0).epsilon(1e-9));
  }

  TEST_CASE("causal apply matches the biquad recurrence") {
    dsp::Biquad b{0.2, 0.3, 0.1, -0.4, 0.1};
    dsp::SosFilter f({b});
    std::vector<double> x{1, 0, 0, 2, -1, 0.5};
    auto y = x;
    f.apply(y);
    std::vector<double> ref(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
      double v = b.b0 * x[n];
      if (n >= 1) v += b.b1 * x[n - 1] - b.a1 * ref[n - 1];
      if (n >= 2) v += b.b2 * x[n - 2] - b.a2 * ref[n - 2];
      ref[n] = v;
    }
    for (std::size_t n = 0; n < x.size(); ++n) CHECK(y[n] == doctest::Approx(ref[n]).epsilon(1e-14));
  }

  TEST_CASE("filtfilt on short input clips the padding") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> x(20);
    for (auto& v : x) v = g(rng);
    CHECK_NOTHROW(dsp::butterworth_lowpass(4, 30.0, 256.0).filtfilt(x));
    for (double v : x) CHECK(std::isfinite(v));
  }
}
