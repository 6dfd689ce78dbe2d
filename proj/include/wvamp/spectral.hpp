#pragma once

// Long-time single-photon amplitudes scattered off the optomechanical cavity,
// and their reduction to the three-mode photon space.
//
// All frequencies in this module are offsets from the pulse median omega0
// (x = omega - omega0). The amplitudes depend only on such differences, and
// absolute optical frequencies would throw away the sub-Hz structure in
// double precision.

#include <optional>
#include <string>
#include <vector>

#include "wvamp/hilbert.hpp"
#include "wvamp/optomech.hpp"

namespace wvamp {

/// sqrt(w/pi) / (x - center + i w): unit-norm Lorentzian amplitude with
/// half-width at half-maximum w.
Complex lorentzian(double x, double center, double half_width);

struct LorentzianAmplitude {
  double center = 0.0;
  double half_width = 1.0;

  Complex operator()(double x) const { return lorentzian(x, center, half_width); }

  /// Integral of |G|^2 by adaptive Gauss-Kronrod over center +- 1e4 w, plus
  /// the closed-form mass of the two tails outside that window.
  double norm() const;
};

/// Composite Gauss-Legendre nodes on panels clustered around a set of
/// centers: uniform panels with `points_per_half_width` nodes per half-width
/// out to 20 half-widths, then geometrically growing panels out to `span`.
class FrequencyGrid {
 public:
  static FrequencyGrid clustered(const std::vector<double>& centers, double half_width,
                                 double span, double lower_limit, int points_per_half_width = 200);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return nodes_.size(); }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double half_width() const { return half_width_; }
  const std::vector<double>& centers() const { return centers_; }

  /// Integral of |G(x; c, w)|^2 over the grid plus the analytic tail mass
  /// outside it. Equals 1 for a grid that resolves the center c.
  double lorentzian_norm(double center) const;

  /// Throws GridTooCoarse unless lorentzian_norm is within tol of 1 for every center.
  void self_test(double tol = 1e-6) const;

  double integrate_abs2(const std::vector<Complex>& values) const;
  Complex inner(const std::vector<Complex>& bra, const std::vector<Complex>& ket) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> centers_;
  double lower_ = 0.0;
  double upper_ = 0.0;
  double half_width_ = 0.0;
};

/// Grid for a pulse scattered by Fock state n: clusters at every branch
/// center (n - m) Omega for m in [max(0, n-3), n+3], span 1e4 eps around
/// each, and no node below omega0/2.
FrequencyGrid spectral_grid(const ExperimentConfig& cfg, Index n);

/// <m| exp[alpha (c^dag - c)] |k> for real alpha, by the associated
/// Laguerre closed form.
double displaced_overlap(Index m, Index k, double alpha);

/// Closed form cross-checked against the truncated series exponential on
/// `cutoff` levels (0 selects m + k + 40). Throws InsufficientCutoff when
/// the column loses more than 1e-9 of its norm to truncation or the two
/// routes disagree by more than 1e-9.
double displaced_overlap_checked(Index m, Index k, double alpha, Index cutoff = 0);

/// C_m(k) = <m|k~><k~|n> with |k~> = D(alpha)|k>.
double overlap_coefficient(Index m, Index k, Index n, double alpha);

/// Delta_{k,m} = omega_cav + Omega (k - m) - g0^2/Omega, as an offset from omega0.
double cavity_resonance_offset(const ExperimentConfig& cfg, Index k, Index m);

struct AmplitudeSet {
  Index n = 0;
  Index m_lo = 0;
  Index m_hi = 0;
  Index k_max = 0;
  // b[m - m_lo][i]: amplitude of the photon at grid node i with the mirror in |m>.
  std::vector<std::vector<Complex>> b;
  // Cavity amplitudes A_m; identically zero in the long-time solution.
  std::vector<Complex> a;
  // c(m - m_lo, k) = C_m(k).
  Eigen::MatrixXd c;
  // Largest |C_m(k)| over the first 10 dropped k values.
  double tail_bound = 0.0;

  const std::vector<Complex>& branch(Index m) const;
  bool has_branch(Index m) const { return m >= m_lo && m <= m_hi; }
  double total_norm(const FrequencyGrid& grid) const;
};

/// Full long-time amplitudes, k-sum truncated at k <= n + 10. Throws
/// GridTooCoarse if the grid fails its self-test.
AmplitudeSet amplitude_full(const ExperimentConfig& cfg, Index n, const FrequencyGrid& grid);

struct ApproximationChain {
  AmplitudeSet single_resonance;  // only the k = n term kept
  AmplitudeSet peak_value;        // cavity Lorentzian replaced by its peak value
};

/// Throws RegimeViolation unless resolved sideband, weak coupling, detuned
/// carrier and quasi-monochromatic conditions all hold.
ApproximationChain amplitude_approx_chain(const ExperimentConfig& cfg, Index n,
                                          const FrequencyGrid& grid);

/// sqrt(sum_m int |a_m - b_m|^2) / sqrt(sum_m int |a_m|^2), over common branches.
double relative_l2_distance(const AmplitudeSet& a, const AmplitudeSet& b, const FrequencyGrid& grid);

/// int G*(x; 0, eps) G(x; separation, eps) dx by residues: 2 i eps / (2 i eps - separation).
Complex cross_lorentzian_overlap_closed(double half_width, double separation);

/// Same integral on the grid, with the tails beyond the grid added in closed form.
Complex cross_lorentzian_overlap(const FrequencyGrid& grid, double half_width, double separation);

struct ReductionBranch {
  std::string label;   // "carrier", "up", "down"
  Index m = 0;         // mirror Fock index of the branch
  Complex measured;    // <G(x; (n-m) Omega, eps) | B_m>
  Complex expected;    // 1, -2 g sqrt(n), 2 g sqrt(n+1)
  double deviation = 0.0;  // |measured e^{-i phase} - expected| / |expected|
  double leakage = 0.0;    // branch norm outside its tri-mode state, as a fraction
};

struct ReductionReport {
  Index n = 0;
  double g = 0.0;  // g0 / Omega
  double tolerance = 0.05;
  std::vector<ReductionBranch> branches;
  double global_phase = 0.0;
  double total_norm = 0.0;
  double leakage = 0.0;   // norm outside the tri-mode subspace
  double max_deviation = 0.0;
  RegimeReport regime;
  bool regime_ok = false;
  std::optional<double> full_vs_single;       // full -> single resonance
  std::optional<double> single_vs_peak;       // single resonance -> peak value
  std::optional<double> full_vs_peak;         // full -> peak value
  Complex cross_overlap;
  Complex cross_overlap_closed;
  double tail_bound = 0.0;
  bool pass = false;
};

/// Projects the full amplitudes onto the three-mode states and compares the
/// coefficients with {1, -2 g sqrt(n), 2 g sqrt(n+1)} up to a global phase.
/// Passes when every deviation is within `tolerance` and the regime holds.
/// Outside the regime the report is still produced, with pass = false and
/// no approximation-stage errors.
ReductionReport validate_tri_mode_reduction(const ExperimentConfig& cfg, Index n,
                                            double tolerance = 0.05);

}  // namespace wvamp
