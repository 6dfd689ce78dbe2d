#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "wvamp/errors.hpp"
#include "wvamp/spectral.hpp"

using namespace wvamp;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentConfig config(double omega, double g0, double gamma_cav, double epsilon) {
  return ExperimentConfig::with_detuned_carrier(omega, g0, gamma_cav, epsilon);
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy * sxy / (sxx * syy);
}

}  // namespace

TEST_CASE("Lorentzian amplitude") {
  for (double w : {1e-2, 1.0, 1e2}) {
    const LorentzianAmplitude g{3.0, w};
    CHECK(std::abs(g.norm() - 1.0) < 1e-6);
  }
  CHECK(std::abs(lorentzian(0.0, 0.0, 2.0) - Complex(0.0, -std::sqrt(2.0 / kPi) / 2.0)) < 1e-15);
}

TEST_CASE("frequency grid") {
  const double eps = 1e2;
  const std::vector<double> centers{-1e6, 0.0, 1e6};
  const FrequencyGrid grid = FrequencyGrid::clustered(centers, eps, 1e6, -1e9);
  const auto& x = grid.nodes();
  CHECK(std::adjacent_find(x.begin(), x.end(), [](double a, double b) { return !(a < b); }) == x.end());
  for (double c : centers) {
    const auto count = std::count_if(x.begin(), x.end(), [&](double v) { return v >= c && v < c + eps; });
    CHECK(count >= 200);
    CHECK(std::abs(grid.lorentzian_norm(c) - 1.0) < 1e-9);
  }
  CHECK_NOTHROW(grid.self_test());
  CHECK(grid.lower() == doctest::Approx(-2e6));

  const FrequencyGrid clipped = FrequencyGrid::clustered({0.0}, eps, 1e6, -5e5);
  CHECK(clipped.lower() == doctest::Approx(-5e5));

  const FrequencyGrid coarse = FrequencyGrid::clustered({0.0}, eps, 1e6, -1e9, 8);
  CHECK_THROWS_AS(coarse.self_test(1e-15), GridTooCoarse);
  CHECK_THROWS_AS(FrequencyGrid::clustered({}, eps, 1e6, 0.0), InvalidParameter);

  std::vector<Complex> ones(grid.size(), Complex(1.0, 0.0));
  CHECK(grid.integrate_abs2(ones) == doctest::Approx(grid.upper() - grid.lower()).epsilon(1e-12));
}

TEST_CASE("displaced overlaps") {
  CHECK(displaced_overlap(3, 3, 0.0) == 1.0);
  CHECK(displaced_overlap(3, 2, 0.0) == 0.0);
  CHECK(displaced_overlap(0, 0, 0.07) == doctest::Approx(std::exp(-0.07 * 0.07 / 2.0)).epsilon(1e-15));

  const Index cutoff = 80;
  for (double alpha : {0.01, 0.05, 0.1}) {
    const ComplexMatrix a = oracle::annihilator(cutoff);
    const ComplexMatrix d = oracle::dense_exponential(alpha * (a.adjoint() - a));
    double worst = 0.0;
    for (Index m = 0; m <= 20; ++m) {
      for (Index k = 0; k <= 20; ++k) {
        worst = std::max(worst, std::abs(d(m, k) - displaced_overlap(m, k, alpha)));
      }
    }
    CHECK(worst <= 1e-9);
    for (Index k : {0, 7, 20}) {
      double column = 0.0;
      for (Index m = 0; m < cutoff; ++m) column += std::pow(displaced_overlap(m, k, alpha), 2);
      CHECK(std::abs(column - 1.0) <= 1e-9);
    }
    CHECK_NOTHROW(displaced_overlap_checked(20, 20, alpha));
  }
  CHECK_THROWS_AS(displaced_overlap_checked(5, 5, 0.1, 6), InsufficientCutoff);
  CHECK_THROWS_AS(displaced_overlap(-1, 0, 0.1), InvalidParameter);

  const double g = 5e-4;
  const Index n = 4;
  CHECK(overlap_coefficient(n - 1, n, n, g) == doctest::Approx(-g * std::sqrt(4.0)).epsilon(1e-3));
  CHECK(overlap_coefficient(n + 1, n, n, g) == doctest::Approx(g * std::sqrt(5.0)).epsilon(1e-3));
}

TEST_CASE("cavity resonances") {
  const ExperimentConfig cfg = config(1e6, 5e2, 1e4, 1e2);
  for (Index k = 0; k < 5; ++k) {
    for (Index m = 0; m < 5; ++m) {
      CHECK(cavity_resonance_offset(cfg, k, m) == doctest::Approx(1e6 * double(k - m)));
    }
  }
  ExperimentConfig shifted = cfg;
  shifted.pulse_offset = 3.0;
  CHECK(cavity_resonance_offset(shifted, 2, 1) == doctest::Approx(-3.0 + 1e6 - 0.25));
}

TEST_CASE("full amplitudes") {
  SUBCASE("no coupling: a pure all-pass filter on the carrier") {
    const ExperimentConfig cfg = config(1e6, 0.0, 1e4, 1e2);
    const Index n = 2;
    const FrequencyGrid grid = spectral_grid(cfg, n);
    const AmplitudeSet set = amplitude_full(cfg, n, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      worst = std::max(worst, std::abs(std::abs(set.branch(n)[i]) -
                                       std::abs(lorentzian(grid.nodes()[i], 0.0, cfg.epsilon))));
    }
    CHECK(worst < 1e-12);
    for (Index m = set.m_lo; m <= set.m_hi; ++m) {
      if (m != n) CHECK(grid.integrate_abs2(set.branch(m)) == 0.0);
    }
    std::vector<Complex> pulse(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) pulse[i] = lorentzian(grid.nodes()[i], 0.0, cfg.epsilon);
    CHECK(std::abs(set.total_norm(grid) - grid.integrate_abs2(pulse)) < 1e-12);
    CHECK(std::abs(set.total_norm(grid) - 1.0) < 2e-3);
  }
  SUBCASE("default configuration") {
    const ExperimentConfig cfg = config(1e6, 5e2, 1e4, 1e2);
    const Index n = 3;
    const FrequencyGrid grid = spectral_grid(cfg, n);
    const AmplitudeSet set = amplitude_full(cfg, n, grid);
    CHECK(set.m_lo == 0);
    CHECK(set.m_hi == 6);
    CHECK(std::abs(set.total_norm(grid) - 1.0) < 2e-3);
    CHECK(set.tail_bound < 1e-30);
    for (const auto& a : set.a) CHECK(std::abs(a) == 0.0);

    // The m = n - 1 branch sits within 5 Gamma of +Omega.
    const auto& up = set.branch(n - 1);
    std::vector<Complex> near(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      near[i] = std::abs(grid.nodes()[i] - cfg.omega) <= 5.0 * cfg.gamma_cav ? up[i] : Complex{};
    }
    CHECK(grid.integrate_abs2(near) >= 0.99 * grid.integrate_abs2(up));
  }
}

TEST_CASE("approximation chain") {
  const double omega = 1e6;
  const double g = 5e-4;
  const ExperimentConfig cfg = config(omega, g * omega, omega / 100.0, omega / 1e4);
  const Index n = 2;
  const FrequencyGrid grid = spectral_grid(cfg, n);
  const ApproximationChain chain = amplitude_approx_chain(cfg, n, grid);

  double worst_carrier = 0.0;
  double worst_up = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.nodes()[i];
    const Complex g0 = lorentzian(x, 0.0, cfg.epsilon);
    const Complex gu = lorentzian(x, omega, cfg.epsilon);
    peak = std::max(peak, std::abs(g0));
    worst_carrier = std::max(worst_carrier, std::abs(chain.peak_value.branch(n)[i] + g0));
    worst_up = std::max(worst_up,
                        std::abs(chain.peak_value.branch(n - 1)[i] - 2.0 * g * std::sqrt(2.0) * gu));
  }
  CHECK(worst_carrier < 1e-5 * peak);
  CHECK(worst_up < 1e-3 * 2.0 * g * std::sqrt(2.0) * peak);

  // Only the cavity-lineshape phase separates the last two stages:
  // single-resonance vs peak-value distance = sqrt(4 eps / (eps + Gamma/2)).
  const double b = cfg.gamma_cav / 2.0;
  const double expected = std::sqrt(4.0 * cfg.epsilon / (cfg.epsilon + b));
  CHECK(relative_l2_distance(chain.single_resonance, chain.peak_value, grid) ==
        doctest::Approx(expected).epsilon(2e-3));

  CHECK_THROWS_AS(amplitude_approx_chain(config(omega, g * omega, omega / 2.0, omega / 200.0), n,
                                         spectral_grid(config(omega, g * omega, omega / 2.0, omega / 200.0), n)),
                  RegimeViolation);
}

TEST_CASE("stage errors shrink with the small ratios") {
  const double omega = 1e6;
  const double g0 = 5e2;
  const Index n = 2;
  std::vector<double> resolved;
  for (double ratio : {10.0, 30.0, 100.0}) {
    const ExperimentConfig cfg = config(omega, g0, omega / ratio, omega / ratio / 100.0);
    const FrequencyGrid grid = spectral_grid(cfg, n);
    const auto full = amplitude_full(cfg, n, grid);
    const auto chain = amplitude_approx_chain(cfg, n, grid);
    resolved.push_back(relative_l2_distance(full, chain.single_resonance, grid));
  }
  CHECK(resolved[0] > resolved[1]);
  CHECK(resolved[1] > resolved[2]);

  std::vector<double> mono;
  for (double ratio : {10.0, 30.0, 100.0}) {
    const ExperimentConfig cfg = config(omega, g0, omega / 100.0, omega / 100.0 / ratio);
    const FrequencyGrid grid = spectral_grid(cfg, n);
    const auto chain = amplitude_approx_chain(cfg, n, grid);
    mono.push_back(relative_l2_distance(chain.single_resonance, chain.peak_value, grid));
  }
  CHECK(mono[0] > mono[1]);
  CHECK(mono[1] > mono[2]);
}

TEST_CASE("cross-Lorentzian overlap") {
  const double eps = 1e2;
  const double omega = 1e6;
  const Complex closed = cross_lorentzian_overlap_closed(eps, omega);
  CHECK(std::abs(closed) == doctest::Approx(2.0 * eps / std::sqrt(4.0 * eps * eps + omega * omega)));
  const FrequencyGrid grid = FrequencyGrid::clustered({0.0, omega}, eps, 1e4 * eps, -1e12);
  const Complex numeric = cross_lorentzian_overlap(grid, eps, omega);
  CHECK(std::abs(numeric - closed) <= 1e-4 * std::abs(closed));
  // Identical centers give the unit norm.
  CHECK(std::abs(cross_lorentzian_overlap(grid, eps, 0.0) - 1.0) < 1e-9);
  const FrequencyGrid lonely = FrequencyGrid::clustered({0.0}, eps, 1e4 * eps, -1e12);
  CHECK_THROWS_AS(cross_lorentzian_overlap(lonely, eps, omega), GridTooCoarse);
}

TEST_CASE("tri-mode reduction") {
  const ExperimentConfig cfg = config(1e6, 5e2, 1e4, 1e2);
  SUBCASE("n = 0 has no up branch") {
    const ReductionReport r = validate_tri_mode_reduction(cfg, 0);
    REQUIRE(r.branches.size() == 2);
    CHECK(r.branches[0].label == "carrier");
    CHECK(r.branches[1].label == "down");
    CHECK(r.branches[1].expected.real() == doctest::Approx(2.0 * 5e-4));
    CHECK(r.pass);
  }
  SUBCASE("n = 3 passes") {
    const ReductionReport r = validate_tri_mode_reduction(cfg, 3);
    CHECK(r.regime_ok);
    CHECK(r.pass);
    CHECK(r.max_deviation < 0.05);
    CHECK(std::abs(std::abs(r.global_phase) - kPi) < 1e-3);
    CHECK(std::abs(r.total_norm - 1.0) < 2e-3);
    REQUIRE(r.full_vs_peak.has_value());
  }
  SUBCASE("unresolved sidebands fail") {
    const ReductionReport r = validate_tri_mode_reduction(config(1e6, 5e2, 5e5, 5e3), 2);
    CHECK_FALSE(r.regime_ok);
    CHECK_FALSE(r.pass);
    CHECK(r.max_deviation > 0.05);
    CHECK_FALSE(r.full_vs_peak.has_value());
  }
  SUBCASE("coefficients are linear in g") {
    std::vector<double> gs, down, up;
    for (double g : {2.5e-4, 5e-4, 1e-3}) {
      const ReductionReport r = validate_tri_mode_reduction(config(1e6, g * 1e6, 1e4, 1e2), 2);
      gs.push_back(g);
      up.push_back(std::abs(r.branches[1].measured));
      down.push_back(std::abs(r.branches[2].measured));
    }
    CHECK(r_squared(gs, up) >= 0.999);
    CHECK(r_squared(gs, down) >= 0.999);
  }
}
