#pragma once

// Weak measurement of a spin-like system by an oscillator pointer through the
// impulsive coupling H = g delta(t) (Jx Y + Jy X), with and without
// postselection of the system.

#include "wvamp/hilbert.hpp"

namespace wvamp {

struct SystemSpec {
  Index dim = 0;
  ComplexMatrix jx;
  ComplexMatrix jy;
  ComplexMatrix jplus;
  ComplexMatrix jminus;
  ComplexMatrix jsq;
  DensityOperator rho;

  /// Same operators, different initial system state.
  SystemSpec with_state(DensityOperator state) const;
};

/// Spin-j operators in the basis |j, m = j>, ..., |j, m = -j>.
SystemSpec build_spin_system(int twice_j, DensityOperator rho);

struct PointerSpec {
  TruncatedOscillator oscillator;
  StateEnsemble state;
  DensityOperator rho;
  double omega = 0.0;  // rad/s, free rotation frequency

  PointerSpec(TruncatedOscillator osc, StateEnsemble ensemble, double omega);

  Index dim() const { return oscillator.dim; }
  double mean_number() const;
};

struct WeakValue {
  Complex jx;
  Complex jy;
};

enum class Order { Exact, First, Second };

struct ConditionalResult {
  double expectation = 0.0;
  double ps_probability = 0.0;
  Order order = Order::First;
  // False when <P_phi> is not comfortably above the second-order terms
  // (first order) or the postselection probability is tiny (exact).
  bool regime_ok = true;
};

struct PostselectionProbability {
  double value = 0.0;
  bool regime_ok = true;
};

/// -i g (Jx (x) Y + Jy (x) X).
AntiHermitianGenerator interaction_generator(double g, const SystemSpec& sys,
                                             const PointerSpec& ptr);

/// M(t) for the pointer's free rotation.
ComplexMatrix free_observable(const PointerSpec& ptr, const ComplexMatrix& obs, double t);

/// <M(t)> + i g <Jx><[Y, M(t)]> + i g <Jy><[X, M(t)]>.
double shift_without_postselection(double g, const SystemSpec& sys, const PointerSpec& ptr,
                                   const ComplexMatrix& obs, double t);

/// Same expression with the system moments supplied directly. Lets callers
/// evaluate formal baselines such as <Jx> = <Jy> = 1, which no spin-1 state
/// attains.
double shift_without_postselection(double g, double jx_mean, double jy_mean,
                                   const PointerSpec& ptr, const ComplexMatrix& obs, double t);

/// <P> + i g <[Jx,P]><Y> + i g <[Jy,P]><X>. regime_ok is cleared when
/// <P> < 100 g^2 (N + 1).
PostselectionProbability postselection_probability_first_order(double g, const SystemSpec& sys,
                                                               const PointerSpec& ptr,
                                                               const Ket& phi);

/// First-order conditional expectation E(M|f) built from the weak values
/// of Jx, Jy (commutator/anticommutator form) and the pointer covariances
/// Cov(A,B) = <{A,B}>/2 - <A><B>. Throws DegeneratePostselection if <P> = 0.
ConditionalResult conditional_expectation_first_order(double g, const SystemSpec& sys,
                                                      const PointerSpec& ptr, const Ket& phi,
                                                      const ComplexMatrix& obs, double t);

/// Joint state right after the impulsive kick, kept as an ensemble of kets.
/// Independent of the postselection state and of the observation time, so
/// one evolution serves a whole (delta, theta, t) grid.
class KickedState {
 public:
  KickedState(double g, const SystemSpec& sys, const PointerSpec& ptr,
              const SeriesOptions& options = {});

  double coupling() const { return g_; }
  const StateEnsemble& joint() const { return joint_; }
  const PointerSpec& pointer() const { return pointer_; }

  /// Tr[(P_phi (x) I) U rho U^dag].
  double postselection_probability(const Ket& phi) const;

  /// Tr[(P_phi (x) M(t)) U rho U^dag] / Tr[(P_phi (x) I) U rho U^dag].
  /// Throws DegeneratePostselection when the denominator is <= 1e-12.
  ConditionalResult conditional_expectation(const Ket& phi, const ComplexMatrix& obs,
                                            double t) const;

  /// Unnormalized numerator Tr[(P_phi (x) M(t)) U rho U^dag].
  double postselected_moment(const Ket& phi, const ComplexMatrix& obs, double t) const;

 private:
  double g_;
  PointerSpec pointer_;
  Index system_dim_;
  StateEnsemble joint_;
};

/// All-orders conditional expectation: kick first, then free rotation for t.
ConditionalResult conditional_expectation_exact(double g, const SystemSpec& sys,
                                                const PointerSpec& ptr, const Ket& phi,
                                                const ComplexMatrix& obs, double t);

/// <phi|J|psi> / <phi|psi>. Throws UndefinedWeakValue when <phi|psi> = 0.
WeakValue weak_values(const Ket& psi, const Ket& phi, const SystemSpec& sys);

/// Re J_w = <{J,P}>/(2<P>), Im J_w = -<[J,P]>/(2i<P>), valid for mixed rho_S.
WeakValue weak_values_mixed(const DensityOperator& rho, const Ket& phi, const SystemSpec& sys);

}  // namespace wvamp
