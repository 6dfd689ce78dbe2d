#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "wvamp/errors.hpp"
#include "wvamp/optomech.hpp"

using namespace wvamp;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("configuration and couplings") {
  const ExperimentConfig cfg;
  CHECK(cfg.gamma_eff() == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(coupling(cfg, CouplingConvention::Bare) == doctest::Approx(5e-4).epsilon(1e-15));
  CHECK(cfg.detuning() == doctest::Approx(-0.25));
  const ExperimentConfig d = ExperimentConfig::with_detuned_carrier(2e6, 1e3, 1e4, 1e2);
  CHECK(d.pulse_offset == doctest::Approx(-0.5));
  CHECK_THROWS_AS(PostselectionSpec::make(0.0, 0.0), InvalidParameter);
  CHECK_THROWS_AS(PostselectionSpec::make(1.0, 0.0), InvalidParameter);
}

TEST_CASE("postselection ket") {
  const Ket phi = postselection_ket(PostselectionSpec::make(0.6, kPi / 3.0));
  CHECK(std::abs(phi(kDown) - Complex(0.0, -0.8)) < 1e-15);
  CHECK(std::abs(phi(kUp)) == 0.0);
  CHECK(std::abs(std::norm(phi(kCarrier)) - 0.36) < 1e-15);
  CHECK(std::abs(phi.norm() - 1.0) < 1e-15);
  const Ket near_one = postselection_ket(PostselectionSpec::make(1.0 - 1e-12, 0.4));
  CHECK(std::abs(near_one(kCarrier) - std::polar(1.0, 0.4)) < 1e-11);
}

TEST_CASE("closed forms") {
  const ExperimentConfig cfg;
  const PostselectionSpec ps = PostselectionSpec::make(0.1, 0.5);
  CHECK(std::abs(thermal_prediction(cfg, ps, 3.0, ps.theta / cfg.omega, Quadrature::X)) < 1e-15);

  // Peak at N = 1, delta = 0.1: 2 * 2 * (1e-3/0.1) * sqrt(0.99/2).
  const PostselectionSpec p0 = PostselectionSpec::make(0.1, 0.0);
  const double peak = thermal_prediction(cfg, p0, 1.0, kPi / (2.0 * cfg.omega), Quadrature::X);
  CHECK(peak == doctest::Approx(0.0281424945589).epsilon(1e-10));
  CHECK(peak == doctest::Approx(0.02814).epsilon(1e-3));

  // Y lags X by a quarter period.
  for (double t : {0.0, 1e-6, 3.3e-6}) {
    const double x = thermal_prediction(cfg, ps, 2.0, t + kPi / (2.0 * cfg.omega), Quadrature::X);
    const double y = thermal_prediction(cfg, ps, 2.0, t, Quadrature::Y);
    CHECK(std::abs(x - y) < 1e-14);
  }

  // Coherent: free part plus the N-independent oscillation.
  const double c = coherent_prediction(cfg, p0, 1.0, 0.0, 0.0, Quadrature::X);
  CHECK(c == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  const PostselectionSpec p1 = PostselectionSpec::make(0.2, 0.7);
  const double c1 = coherent_prediction(cfg, p1, 1.0, 0.0, 0.0, Quadrature::X);
  const double expected = std::sqrt(2.0) + 2.0 * (1e-3 / 0.2) * std::sqrt(0.96 / 2.0) * std::sin(-0.7);
  CHECK(c1 == doctest::Approx(expected).epsilon(1e-13));
  // Vacuum pointer: pure weak-value oscillation, thermal amplitude / (1 + N).
  for (double t : {0.0, 2e-6}) {
    CHECK(coherent_prediction(cfg, p1, 0.0, 0.0, t, Quadrature::X) ==
          doctest::Approx(thermal_prediction(cfg, p1, 0.0, t, Quadrature::X)));
    CHECK(coherent_prediction(cfg, p1, 4.0, 0.3, t, Quadrature::X) -
              coherent_free_quadrature(4.0, 0.3, cfg.omega * t, Quadrature::X) ==
          doctest::Approx(thermal_prediction(cfg, p1, 4.0, t, Quadrature::X) / 5.0));
  }

  const WeakValue w = closed_form_weak_values(PostselectionSpec::make(0.1, 0.0));
  CHECK(std::abs(std::abs(w.jx) - 7.03562363974) < 1e-10);
  CHECK(std::abs(std::arg(w.jx) - kPi / 2.0) < 1e-14);
  CHECK(std::abs(std::abs(std::arg(w.jy)) - kPi) < 1e-14);
}

TEST_CASE("amplification curves") {
  const ExperimentConfig cfg;
  const auto th = amplification_curve(cfg, 1.0, MirrorKind::Thermal, default_delta_grid(cfg, 1.0));
  REQUIRE(th.size() == 200);
  CHECK(th.front().delta == doctest::Approx(0.1));
  CHECK(th.front().f == doctest::Approx(28.14).epsilon(1e-3));
  CHECK(th.front().ps_probability == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(th.back().delta == doctest::Approx(0.99));

  const auto co = amplification_curve(cfg, 1.0, MirrorKind::Coherent, {0.1});
  CHECK(co.front().f == doctest::Approx(14.07).epsilon(1e-3));
  CHECK(co.front().ps_probability == doctest::Approx(0.0101990).epsilon(1e-5));

  const auto near_one = amplification_curve(cfg, 2.0, MirrorKind::Thermal, {0.999999});
  CHECK(near_one.front().f < 0.1);

  // Below 100 gamma sqrt(N) the point is flagged.
  const auto low = amplification_curve(cfg, 4.0, MirrorKind::Thermal, {0.1, 0.3});
  CHECK_FALSE(low[0].regime_ok);
  CHECK(low[1].regime_ok);

  CHECK(default_delta_grid(cfg, 100.0).empty());
  CHECK_THROWS_AS(amplification_curve(cfg, 1.0, MirrorKind::Thermal, {}), InvalidParameter);
  CHECK_THROWS_AS(amplification_curve(cfg, 1.0, MirrorKind::Fock, {0.1}), InvalidParameter);
}

TEST_CASE("pointer construction") {
  const PointerSpec th = make_pointer(MirrorState::thermal(3.0), 1e6);
  CHECK(th.mean_number() == doctest::Approx(3.0).epsilon(1e-6));
  // Ten empty levels above the populated ones.
  CHECK(th.rho.matrix().bottomRightCorner(10, 10).cwiseAbs().maxCoeff() == 0.0);
  const PointerSpec vac = make_pointer(MirrorState::thermal(0.0), 1e6);
  CHECK(vac.mean_number() == 0.0);
  const PointerSpec coh = make_pointer(MirrorState::coherent(4.0, 0.2), 1e6);
  CHECK(coh.mean_number() == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(coh.dim() == coherent_levels(4.0));
  CHECK(coherent_levels(4.0) == 4 + 20 + 20);
}

TEST_CASE("expansion coefficients") {
  const SystemSpec sys = build_tri_mode();
  SUBCASE("thermal c0 and c2 vanish") {
    const PointerSpec ptr = make_pointer(MirrorState::thermal(3.0), 1.0);
    const PostselectionSpec ps = PostselectionSpec::make(0.2, 0.4);
    for (double t : {0.0, 0.6, 2.0}) {
      const auto cx = expansion_coefficients(ptr, ps, ptr.oscillator.x, t);
      const auto cy = expansion_coefficients(ptr, ps, ptr.oscillator.y, t);
      for (const auto& c : {cx, cy}) {
        CHECK(std::abs(c.c0) <= 1e-9);
        CHECK(std::abs(c.c2) <= 1e-9);
      }
      // First-order term carries the thermal response 2 (N + 1).
      CHECK(std::abs(cx.c1) == doctest::Approx(8.0 * std::abs(std::sin(t - 0.4))).epsilon(1e-6));
      CHECK(std::abs(cy.c1) == doctest::Approx(8.0 * std::abs(std::cos(t - 0.4))).epsilon(1e-6));
    }
  }
  SUBCASE("Taylor coefficients of the exact moment") {
    // Central differences of the exact postselected moment in g.
    const PointerSpec ptr = make_pointer(MirrorState::coherent(4.0, 0.9), 1.0);
    const PostselectionSpec ps = PostselectionSpec::make(0.3, 0.5);
    const Ket phi = postselection_ket(ps);
    const double h = 1e-3;
    const KickedState plus(h, sys, ptr);
    const KickedState minus(-h, sys, ptr);
    const KickedState zero(0.0, sys, ptr);
    for (double t : {0.0, 1.2}) {
      const auto& obs = ptr.oscillator.x;
      const double mp = plus.postselected_moment(phi, obs, t);
      const double mm = minus.postselected_moment(phi, obs, t);
      const double m0 = zero.postselected_moment(phi, obs, t);
      const auto c = expansion_coefficients(ptr, ps, obs, t);
      const double d2 = ps.delta * ps.delta;
      const double half = (1.0 - d2) / 2.0;
      CHECK(std::abs(m0 - d2 * c.c0) < 1e-12);
      CHECK(std::abs((mp - mm) / (2.0 * h) - (-ps.delta * std::sqrt(half) * c.c1)) < 1e-4);
      const double a2 = (mp + mm - 2.0 * m0) / (2.0 * h * h);
      CHECK(std::abs(a2 - (half * c.c2 + d2 * c.c0_shift)) < 1e-3 * std::abs(a2));
      // Scaling with N: |c0| is sqrt(2N) |cos(...)| at most.
      CHECK(std::abs(c.c0) <= std::sqrt(2.0 * 4.0) + 1e-12);
    }
    const double prob2 = second_order_ps_probability(ptr, ps, h);
    CHECK(std::abs(prob2 - plus.postselection_probability(phi)) < 1e-7);
  }
}

TEST_CASE("regime report") {
  const ExperimentConfig cfg;
  const RegimeReport ok = regime_report(cfg, 1.0, 0.1);
  CHECK(ok.regime_ok);
  CHECK(ok.sweep_domain.ok);
  CHECK(ok.resolved_sideband.margin == doctest::Approx(100.0));
  CHECK(ok.quasi_monochromatic.margin == doctest::Approx(100.0));

  const RegimeReport bad = regime_report(cfg, 4.0, cfg.gamma_eff() * 2.0);
  CHECK_FALSE(bad.regime_ok);
  CHECK_FALSE(bad.weak_value.ok);

  ExperimentConfig undetuned = cfg;
  undetuned.pulse_offset = 0.0;  // omega0 = omega_cav
  CHECK_FALSE(regime_report(undetuned, 1.0, 0.1).detuned_carrier.ok);
  CHECK(regime_report(cfg, 1.0, 0.1).conditions().size() == 6);
}

TEST_CASE("oscillation fit") {
  const double omega = 2.0;
  const auto times = period_times(omega, 12);
  REQUIRE(times.size() == 12);
  CHECK(times.back() < 2.0 * kPi / omega);
  std::vector<double> v;
  for (double t : times) v.push_back(0.3 + 1.7 * std::sin(omega * t - 0.4));
  const OscillationFit fit = fit_oscillation(times, v, omega);
  CHECK(fit.amplitude == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(fit.phase == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(fit.offset == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(fit.rms_residual < 1e-12);
  CHECK(std::abs(wrap_phase(3.0 * kPi)) == doctest::Approx(kPi));
}

TEST_CASE("verification against the exact evolution") {
  const ExperimentConfig cfg;
  const auto times = period_times(cfg.omega, 12);
  const auto r = verify_closed_form(cfg, MirrorState::thermal(5.0), PostselectionSpec::make(0.1, 0.0),
                                    times);
  CHECK(r.pass);
  CHECK(r.relative_amplitude_error < r.tolerance);

  const auto y = verify_closed_form(cfg, MirrorState::coherent(2.0, 0.3),
                                    PostselectionSpec::make(0.2, 0.5), times, Quadrature::Y);
  CHECK(y.pass);

  ExperimentConfig off = cfg;
  off.g0 = 0.0;
  const auto free = verify_closed_form(off, MirrorState::coherent(2.0, 0.3),
                                       PostselectionSpec::make(0.1, 0.0), times);
  CHECK(free.max_abs_residual <= 1e-10);
  CHECK(free.pass);

  CHECK_THROWS_AS(verify_closed_form(cfg, MirrorState::thermal(4.0),
                                     PostselectionSpec::make(2.0 * cfg.gamma_eff(), 0.0), times),
                  RegimeViolation);
  CHECK_THROWS_AS(verify_closed_form(cfg, MirrorState::fock(1), PostselectionSpec::make(0.1, 0.0), times),
                  InvalidParameter);
}
