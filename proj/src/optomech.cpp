#include "wvamp/optomech.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RegimeCondition make_condition(std::string name, double margin, double threshold) {
  return RegimeCondition{std::move(name), margin, margin >= threshold};
}

double safe_ratio(double num, double den) {
  return den == 0.0 ? kInf : num / den;
}

double quadrature_wave(double omega_t_minus_theta, Quadrature which) {
  return which == Quadrature::X ? std::sin(omega_t_minus_theta) : std::cos(omega_t_minus_theta);
}

}  // namespace

ExperimentConfig ExperimentConfig::with_detuned_carrier(double omega, double g0,
                                                        double gamma_cav, double epsilon) {
  ExperimentConfig cfg;
  cfg.omega = omega;
  cfg.g0 = g0;
  cfg.gamma_cav = gamma_cav;
  cfg.epsilon = epsilon;
  cfg.pulse_offset = cfg.detuning();
  return cfg;
}

double coupling(const ExperimentConfig& cfg, CouplingConvention convention) {
  return convention == CouplingConvention::Effective ? cfg.gamma_eff() : cfg.bare_coupling();
}

PostselectionSpec PostselectionSpec::make(double delta, double theta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    std::ostringstream msg;
    msg << "postselection delta must lie in (0, 1), got " << delta;
    throw InvalidParameter(msg.str());
  }
  return PostselectionSpec{delta, theta};
}

MirrorState MirrorState::thermal(double mean_number) {
  if (mean_number < 0.0) throw InvalidParameter("thermal state: N must be >= 0");
  return MirrorState{MirrorKind::Thermal, mean_number, 0.0, 0};
}

MirrorState MirrorState::coherent(double mean_number, double beta) {
  if (mean_number < 0.0) throw InvalidParameter("coherent state: N must be >= 0");
  return MirrorState{MirrorKind::Coherent, mean_number, beta, 0};
}

MirrorState MirrorState::fock(Index n) {
  if (n < 0) throw InvalidParameter("Fock state: index must be >= 0");
  return MirrorState{MirrorKind::Fock, static_cast<double>(n), 0.0, n};
}

Complex MirrorState::alpha() const {
  return kind == MirrorKind::Coherent ? std::polar(std::sqrt(mean_number), beta) : Complex{};
}

SystemSpec build_tri_mode() {
  return build_spin_system(2, DensityOperator::pure(fock_ket(3, kCarrier)));
}

Ket postselection_ket(const PostselectionSpec& spec) {
  const PostselectionSpec checked = PostselectionSpec::make(spec.delta, spec.theta);
  Ket phi = Ket::Zero(3);
  phi(kCarrier) = std::polar(checked.delta, checked.theta);
  phi(kDown) = -kI * std::sqrt(1.0 - checked.delta * checked.delta);
  return phi;
}

PointerSpec make_pointer(const MirrorState& mirror, double omega, double tail_tol, Index margin) {
  switch (mirror.kind) {
    case MirrorKind::Thermal: {
      if (mirror.mean_number == 0.0) {
        return make_pointer(MirrorState::fock(0), omega, tail_tol, margin);
      }
      const Index populated = thermal_levels(mirror.mean_number, tail_tol);
      const Index dim = populated + margin;
      return PointerSpec(build_oscillator(dim), thermal_ensemble(dim, mirror.mean_number, populated),
                         omega);
    }
    case MirrorKind::Coherent: {
      const Index dim = coherent_levels(mirror.mean_number);
      return PointerSpec(build_oscillator(dim), StateEnsemble::pure(coherent_ket(dim, mirror.alpha())),
                         omega);
    }
    case MirrorKind::Fock: {
      const Index dim = std::max<Index>(mirror.fock_index + 1 + margin, 2);
      return PointerSpec(build_oscillator(dim), StateEnsemble::pure(fock_ket(dim, mirror.fock_index)),
                         omega);
    }
  }
  throw InvalidParameter("make_pointer: unknown mirror kind");
}

const ComplexMatrix& quadrature(const TruncatedOscillator& osc, Quadrature which) {
  return which == Quadrature::X ? osc.x : osc.y;
}

double weak_value_modulus(double delta) {
  return std::sqrt((1.0 - delta * delta) / 2.0) / delta;
}

WeakValue closed_form_weak_values(const PostselectionSpec& spec) {
  const double modulus = weak_value_modulus(spec.delta);
  return WeakValue{std::polar(modulus, spec.theta + std::numbers::pi / 2.0),
                   std::polar(modulus, spec.theta + std::numbers::pi)};
}

double thermal_prediction(const ExperimentConfig& cfg, const PostselectionSpec& ps,
                          double mean_number, double t, Quadrature which) {
  const double amplitude = 2.0 * (1.0 + mean_number) * cfg.gamma_eff() * weak_value_modulus(ps.delta);
  return amplitude * quadrature_wave(cfg.omega * t - ps.theta, which);
}

double coherent_free_quadrature(double mean_number, double beta, double omega_t, Quadrature which) {
  const Complex alpha = std::polar(std::sqrt(mean_number), beta);
  const double c = std::cos(omega_t);
  const double s = std::sin(omega_t);
  if (which == Quadrature::X) return std::sqrt(2.0) * (c * alpha.real() + s * alpha.imag());
  return std::sqrt(2.0) * (c * alpha.imag() - s * alpha.real());
}

double coherent_prediction(const ExperimentConfig& cfg, const PostselectionSpec& ps,
                           double mean_number, double beta, double t, Quadrature which) {
  const double amplitude = 2.0 * cfg.gamma_eff() * weak_value_modulus(ps.delta);
  return coherent_free_quadrature(mean_number, beta, cfg.omega * t, which) +
         amplitude * quadrature_wave(cfg.omega * t - ps.theta, which);
}

double coherent_ps_probability(double g, double mean_number, double delta, double theta,
                               double beta) {
  return delta * delta - 2.0 * g * delta * std::sqrt(1.0 - delta * delta) *
                             std::sqrt(mean_number) * std::sin(theta - beta);
}

double delta_min(const ExperimentConfig& cfg, double mean_number, CouplingConvention convention) {
  return 100.0 * coupling(cfg, convention) * std::sqrt(mean_number);
}

std::vector<double> default_delta_grid(const ExperimentConfig& cfg, double mean_number, int count,
                                      double upper, CouplingConvention convention) {
  if (count < 2) throw InvalidParameter("default_delta_grid: need at least two points");
  const double lower = delta_min(cfg, mean_number, convention);
  std::vector<double> grid;
  if (!(lower > 0.0) || lower >= upper) return grid;
  grid.reserve(static_cast<std::size_t>(count));
  const double log_lo = std::log(lower);
  const double step = (std::log(upper) - log_lo) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i) grid.push_back(std::exp(log_lo + step * i));
  grid.front() = lower;
  grid.back() = upper;
  return grid;
}

std::vector<AmplificationPoint> amplification_curve(const ExperimentConfig& cfg,
                                                    double mean_number, MirrorKind kind,
                                                    const std::vector<double>& delta_grid,
                                                    double theta, CouplingConvention convention) {
  if (delta_grid.empty()) throw InvalidParameter("amplification_curve: empty delta grid");
  if (kind == MirrorKind::Fock) {
    throw InvalidParameter("amplification_curve: only thermal and coherent curves are defined");
  }
  const double gamma = cfg.gamma_eff();
  const double norm = coupling(cfg, convention);
  const double threshold = delta_min(cfg, mean_number, convention);
  const double beta = theta + std::numbers::pi / 2.0;

  std::vector<AmplificationPoint> curve;
  curve.reserve(delta_grid.size());
  for (double delta : delta_grid) {
    const PostselectionSpec ps = PostselectionSpec::make(delta, theta);
    AmplificationPoint pt;
    pt.delta = delta;
    const double amplitude_over_gamma =
        2.0 * weak_value_modulus(delta) * (kind == MirrorKind::Thermal ? 1.0 + mean_number : 1.0);
    pt.f = norm > 0.0 ? amplitude_over_gamma * gamma / norm : amplitude_over_gamma;
    pt.ps_probability = kind == MirrorKind::Thermal
                            ? delta * delta
                            : coherent_ps_probability(gamma, mean_number, delta, ps.theta, beta);
    pt.regime_ok = delta >= threshold;
    curve.push_back(pt);
  }
  return curve;
}

ExpansionCoefficients expansion_coefficients(const PointerSpec& ptr, const PostselectionSpec& ps,
                                             const ComplexMatrix& obs, double t) {
  const auto& osc = ptr.oscillator;
  const ComplexMatrix m_t = free_observable(ptr, obs, t);
  const auto& rho = ptr.rho;
  const double s = std::sin(ps.theta);
  const double c = std::cos(ps.theta);

  ExpansionCoefficients out;
  out.c0 = hermitian_expectation(m_t, rho);
  const Complex c1 = expectation(anticommutator(osc.x, m_t), rho) * s +
                     kI * expectation(commutator(osc.x, m_t), rho) * c -
                     expectation(anticommutator(osc.y, m_t), rho) * c +
                     kI * expectation(commutator(osc.y, m_t), rho) * s;
  out.c1 = c1.real();
  out.c2 = hermitian_expectation(osc.x * m_t * osc.x, rho) +
           hermitian_expectation(osc.y * m_t * osc.y, rho) +
           2.0 * expectation(osc.x * m_t * osc.y, rho).imag();
  const ComplexMatrix shifted_number = osc.number + 0.5 * identity(osc.dim);
  out.c0_shift = -hermitian_expectation(anticommutator(shifted_number, m_t), rho);
  return out;
}

double second_order_moment(const ExpansionCoefficients& c, double g, double delta,
                           bool include_carrier_shift) {
  const double d2 = delta * delta;
  const double half = (1.0 - d2) / 2.0;
  double moment = d2 * c.c0 - g * delta * std::sqrt(half) * c.c1 + g * g * half * c.c2;
  if (include_carrier_shift) moment += g * g * d2 * c.c0_shift;
  return moment;
}

double second_order_ps_probability(const PointerSpec& ptr, const PostselectionSpec& ps, double g,
                                   bool include_carrier_shift) {
  const double x = hermitian_expectation(ptr.oscillator.x, ptr.rho);
  const double y = hermitian_expectation(ptr.oscillator.y, ptr.rho);
  const double n = ptr.mean_number();
  const double d2 = ps.delta * ps.delta;
  double prob = d2 -
                2.0 * g * ps.delta * std::sqrt((1.0 - d2) / 2.0) *
                    (x * std::sin(ps.theta) - y * std::cos(ps.theta)) +
                g * g * (1.0 - d2) * (n + 1.0);
  if (include_carrier_shift) prob -= g * g * d2 * (2.0 * n + 1.0);
  return prob;
}

std::vector<RegimeCondition> RegimeReport::conditions() const {
  return {resolved_sideband, weak_coupling,  detuned_carrier,
          quasi_monochromatic, weak_value, sweep_domain};
}

RegimeReport regime_report(const ExperimentConfig& cfg, double mean_number, double delta) {
  RegimeReport r;
  const double g = cfg.bare_coupling();
  const double shift = cfg.g0 * cfg.g0 / cfg.omega;
  const double carrier_error = std::abs(cfg.pulse_offset + shift);
  const double gamma_sqrt_n = cfg.gamma_eff() * std::sqrt(mean_number);

  r.resolved_sideband =
      make_condition("resolved_sideband", safe_ratio(cfg.omega, cfg.gamma_cav), kRegimeMargin);
  r.weak_coupling =
      make_condition("weak_coupling", safe_ratio(1.0, g * g * mean_number), kRegimeMargin);
  r.detuned_carrier = make_condition(
      "detuned_carrier", carrier_error == 0.0 ? kInf : shift / carrier_error, kRegimeMargin);
  r.quasi_monochromatic =
      make_condition("quasi_monochromatic", safe_ratio(cfg.gamma_cav, cfg.epsilon), kRegimeMargin);
  r.weak_value = make_condition("weak_value", safe_ratio(delta, gamma_sqrt_n), kRegimeMargin);
  r.sweep_domain = make_condition("sweep_domain", safe_ratio(delta, 100.0 * gamma_sqrt_n), 1.0);
  r.regime_ok = r.resolved_sideband.ok && r.weak_coupling.ok && r.detuned_carrier.ok &&
                r.quasi_monochromatic.ok && r.weak_value.ok;
  return r;
}

OscillationFit fit_oscillation(const std::vector<double>& times, const std::vector<double>& values,
                               double omega) {
  if (times.size() != values.size() || times.size() < 3) {
    throw InvalidParameter("fit_oscillation: need at least three (t, value) pairs");
  }
  const auto n = static_cast<Index>(times.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Index i = 0; i < n; ++i) {
    const double wt = omega * times[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = std::sin(wt);
    design(i, 2) = std::cos(wt);
    rhs(i) = values[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
  // offset + a sin(wt) + b cos(wt) = offset + A sin(wt - phase)
  OscillationFit fit;
  fit.offset = coef(0);
  fit.amplitude = std::hypot(coef(1), coef(2));
  fit.phase = std::atan2(-coef(2), coef(1));
  fit.rms_residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(n));
  return fit;
}

std::vector<double> period_times(double omega, int count) {
  if (count < 1) throw InvalidParameter("period_times: count must be >= 1");
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(count));
  const double period = 2.0 * std::numbers::pi / omega;
  for (int k = 0; k < count; ++k) times.push_back(period * k / count);
  return times;
}

double wrap_phase(double phase) {
  return std::remainder(phase, 2.0 * std::numbers::pi);
}

VerificationResult verify_closed_form(const ExperimentConfig& cfg, const MirrorState& mirror,
                                      const PostselectionSpec& ps, const std::vector<double>& times,
                                      Quadrature which) {
  if (mirror.kind == MirrorKind::Fock) {
    throw InvalidParameter("verify_closed_form: closed forms exist for thermal and coherent mirrors");
  }
  const double gamma = cfg.gamma_eff();
  const double n_mean = mirror.mean_number;
  const double sqrt_n = std::sqrt(std::max(n_mean, 1.0));
  if (ps.delta < kRegimeMargin * gamma * std::sqrt(n_mean)) {
    std::ostringstream msg;
    msg << "delta = " << ps.delta << " is below 10 gamma sqrt(N) = "
        << kRegimeMargin * gamma * std::sqrt(n_mean) << "; first-order theory does not apply";
    throw RegimeViolation(msg.str());
  }

  const SystemSpec sys = build_tri_mode();
  const PointerSpec ptr = make_pointer(mirror, cfg.omega);
  const KickedState kicked(gamma, sys, ptr);
  const Ket phi = postselection_ket(ps);
  const ComplexMatrix& obs = quadrature(ptr.oscillator, which);

  VerificationResult out;
  out.ps_probability = kicked.postselection_probability(phi);
  std::vector<double> signal;
  signal.reserve(times.size());
  for (double t : times) {
    VerificationRow row;
    row.t = t;
    row.exact = kicked.conditional_expectation(phi, obs, t).expectation;
    row.analytic = mirror.kind == MirrorKind::Thermal
                       ? thermal_prediction(cfg, ps, n_mean, t, which)
                       : coherent_prediction(cfg, ps, n_mean, mirror.beta, t, which);
    row.residual = row.exact - row.analytic;
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(row.residual));
    signal.push_back(row.exact - hermitian_expectation(free_observable(ptr, obs, t), ptr.rho));
    out.rows.push_back(row);
  }

  const double prefactor = mirror.kind == MirrorKind::Thermal ? 2.0 * (1.0 + n_mean) : 2.0;
  out.analytic_amplitude = prefactor * gamma * weak_value_modulus(ps.delta);
  // X follows sin(wt - theta); Y follows cos(wt - theta) = sin(wt - (theta - pi/2)).
  out.analytic_phase =
      wrap_phase(which == Quadrature::X ? ps.theta : ps.theta - std::numbers::pi / 2.0);
  out.tolerance = 5.0 * gamma * sqrt_n / ps.delta;

  if (out.analytic_amplitude == 0.0) {
    out.pass = out.max_abs_residual <= 1e-10;
    return out;
  }
  out.fit = fit_oscillation(times, signal, cfg.omega);
  out.relative_amplitude_error =
      std::abs(out.fit.amplitude - out.analytic_amplitude) / out.analytic_amplitude;
  out.phase_error = std::abs(wrap_phase(out.fit.phase - out.analytic_phase));
  out.pass = out.relative_amplitude_error <= out.tolerance && out.phase_error <= 0.05;
  return out;
}

}  // namespace wvamp
