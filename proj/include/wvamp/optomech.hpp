#pragma once

// Single-photon optomechanics: the three-mode photon space {|u>, |psi>, |d>},
// the dark-port postselection state, closed-form quadrature predictions for
// thermal and coherent mirrors, amplification curves and regime checks.
//
// Coupling convention: the dimensionless coupling of the effective kick is
// gamma = 2 g0 / Omega. Everything that multiplies Jx Y + Jy X uses gamma;
// the bare ratio g0 / Omega only appears in the regime check for g^2 n << 1
// and in the spectral module.

#include <string>
#include <vector>

#include "wvamp/hilbert.hpp"
#include "wvamp/weakmeas.hpp"

namespace wvamp {

struct ExperimentConfig {
  double omega = 1e6;        // mechanical frequency, rad/s
  double g0 = 5e2;           // vacuum optomechanical coupling, rad/s
  double gamma_cav = 1e4;    // cavity decay rate, rad/s
  double epsilon = 1e2;      // pulse half-width, rad/s
  double omega_cav = 1.2e15; // cavity frequency, rad/s
  // Pulse median minus cavity frequency. Stored as an offset because
  // omega_cav - g0^2/Omega is not representable at optical frequencies.
  double pulse_offset = -0.25;

  /// Defaults with the carrier detuned by -g0^2/Omega.
  static ExperimentConfig with_detuned_carrier(double omega, double g0, double gamma_cav,
                                               double epsilon);

  double gamma_eff() const { return 2.0 * g0 / omega; }
  double bare_coupling() const { return g0 / omega; }
  double detuning() const { return -g0 * g0 / omega; }
  double omega0() const { return omega_cav + pulse_offset; }
};

enum class CouplingConvention {
  Effective,  // gamma = 2 g0 / Omega, the coupling of the kick operator
  Bare,       // g0 / Omega
};

double coupling(const ExperimentConfig& cfg, CouplingConvention convention);

struct PostselectionSpec {
  double delta = 0.1;
  double theta = 0.0;

  /// Throws InvalidParameter unless 0 < delta < 1.
  static PostselectionSpec make(double delta, double theta);
};

enum class MirrorKind { Thermal, Coherent, Fock };

struct MirrorState {
  MirrorKind kind = MirrorKind::Thermal;
  double mean_number = 0.0;  // N
  double beta = 0.0;         // coherent phase
  Index fock_index = 0;

  static MirrorState thermal(double mean_number);
  static MirrorState coherent(double mean_number, double beta);
  static MirrorState fock(Index n);

  Complex alpha() const;
};

enum class Quadrature { X, Y };

// Photon basis indices of the three-mode space.
inline constexpr Index kUp = 0;
inline constexpr Index kCarrier = 1;
inline constexpr Index kDown = 2;

/// Spin-1 ladder structure on {|u>, |psi>, |d>} with rho_S = |psi><psi|.
SystemSpec build_tri_mode();

/// delta e^{i theta}|psi> - i sqrt(1 - delta^2)|d>.
Ket postselection_ket(const PostselectionSpec& spec);

/// Truncated pointer for a mirror state. Thermal cutoffs keep the tail mass
/// below tail_tol and add `margin` empty levels above the populated ones so
/// the kick does not run into the truncation edge.
PointerSpec make_pointer(const MirrorState& mirror, double omega, double tail_tol = 1e-8,
                         Index margin = 10);

const ComplexMatrix& quadrature(const TruncatedOscillator& osc, Quadrature which);

/// sqrt((1 - delta^2)/2) / delta, the modulus of both weak values.
double weak_value_modulus(double delta);

/// Closed-form weak values of Jx and Jy for the dark-port state.
WeakValue closed_form_weak_values(const PostselectionSpec& spec);

/// 2 (1 + N) (gamma/delta) sqrt((1-delta^2)/2) times sin(Omega t - theta) for X
/// or cos(Omega t - theta) for Y.
double thermal_prediction(const ExperimentConfig& cfg, const PostselectionSpec& ps,
                          double mean_number, double t, Quadrature which);

/// Free evolution of the coherent state plus 2 (gamma/delta) sqrt((1-delta^2)/2)
/// times the same sinusoid.
double coherent_prediction(const ExperimentConfig& cfg, const PostselectionSpec& ps,
                           double mean_number, double beta, double t, Quadrature which);

/// <X(t)> or <Y(t)> of the coherent state sqrt(N) e^{i beta}.
double coherent_free_quadrature(double mean_number, double beta, double omega_t, Quadrature which);

/// delta^2 - 2 g delta sqrt(1-delta^2) sqrt(N) sin(theta - beta).
double coherent_ps_probability(double g, double mean_number, double delta, double theta,
                               double beta);

struct AmplificationPoint {
  double delta = 0.0;
  double ps_probability = 0.0;
  double f = 0.0;  // oscillation amplitude over the coupling
  bool regime_ok = false;
};

/// 100 g sqrt(N).
double delta_min(const ExperimentConfig& cfg, double mean_number,
                 CouplingConvention convention = CouplingConvention::Effective);

/// `count` log-spaced points from delta_min up to `upper`. Empty when
/// delta_min >= upper.
std::vector<double> default_delta_grid(const ExperimentConfig& cfg, double mean_number,
                                      int count = 200, double upper = 0.99,
                                      CouplingConvention convention = CouplingConvention::Effective);

/// Amplification factor and postselection probability over a delta grid.
/// Coherent curves use beta = theta + pi/2. Throws InvalidParameter for an
/// empty grid or a delta outside (0, 1).
std::vector<AmplificationPoint> amplification_curve(
    const ExperimentConfig& cfg, double mean_number, MirrorKind kind,
    const std::vector<double>& delta_grid, double theta = 0.0,
    CouplingConvention convention = CouplingConvention::Effective);

/// Second-order expansion of the postselected moment Tr[(P_phi (x) M(t)) rho_f]
///   delta^2 c0 - g delta sqrt((1-delta^2)/2) c1 + g^2 ((1-delta^2)/2) c2
///   + g^2 delta^2 c0_shift.
/// c0_shift = -<{c^dag c + 1/2, M(t)}> is the second-order depletion of the
/// unshifted branch; it is left out when include_carrier_shift is false.
struct ExpansionCoefficients {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c0_shift = 0.0;
};

ExpansionCoefficients expansion_coefficients(const PointerSpec& ptr, const PostselectionSpec& ps,
                                             const ComplexMatrix& obs, double t);

double second_order_moment(const ExpansionCoefficients& c, double g, double delta,
                           bool include_carrier_shift = true);

/// delta^2 - 2 g delta sqrt((1-delta^2)/2) [<X> sin(theta) - <Y> cos(theta)]
///   + g^2 (1 - delta^2)(N + 1) [- g^2 delta^2 (2N + 1)].
double second_order_ps_probability(const PointerSpec& ptr, const PostselectionSpec& ps, double g,
                                   bool include_carrier_shift = true);

struct RegimeCondition {
  std::string name;
  double margin = 0.0;  // >= 10 passes
  bool ok = false;
};

struct RegimeReport {
  RegimeCondition resolved_sideband;     // Omega / Gamma
  RegimeCondition weak_coupling;         // 1 / (g^2 N), g = g0/Omega
  RegimeCondition detuned_carrier;       // (g0^2/Omega) / |omega0 - (omega_cav - g0^2/Omega)|
  RegimeCondition quasi_monochromatic;   // Gamma / epsilon
  RegimeCondition weak_value;            // delta / (gamma sqrt(N))
  RegimeCondition sweep_domain;         // delta / (100 gamma sqrt(N)), passes at >= 1
  bool regime_ok = false;                // all but sweep_domain

  std::vector<RegimeCondition> conditions() const;
};

inline constexpr double kRegimeMargin = 10.0;

RegimeReport regime_report(const ExperimentConfig& cfg, double mean_number, double delta);

/// Least-squares fit of offset + A sin(Omega t - phase).
struct OscillationFit {
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double rms_residual = 0.0;
};

OscillationFit fit_oscillation(const std::vector<double>& times, const std::vector<double>& values,
                               double omega);

/// `count` evenly spaced times covering one mechanical period, endpoint excluded.
std::vector<double> period_times(double omega, int count);

double wrap_phase(double phase);

struct VerificationRow {
  double t = 0.0;
  double exact = 0.0;
  double analytic = 0.0;
  double residual = 0.0;
};

struct VerificationResult {
  std::vector<VerificationRow> rows;
  OscillationFit fit;              // of exact minus free evolution
  double analytic_amplitude = 0.0;
  double analytic_phase = 0.0;
  double relative_amplitude_error = 0.0;
  double phase_error = 0.0;
  double tolerance = 0.0;          // 5 gamma sqrt(max(N,1)) / delta
  double max_abs_residual = 0.0;
  double ps_probability = 0.0;     // exact, at the kick
  bool pass = false;
};

/// Exact conditional quadrature (all orders, truncated Fock space) against
/// the closed forms. Throws RegimeViolation when delta < 10 gamma sqrt(N).
VerificationResult verify_closed_form(const ExperimentConfig& cfg, const MirrorState& mirror,
                                      const PostselectionSpec& ps, const std::vector<double>& times,
                                      Quadrature which = Quadrature::X);

}  // namespace wvamp
