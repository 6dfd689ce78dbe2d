#pragma once

// Dense complex linear algebra on the truncated oscillator space, the
// three-level photon space, and their tensor product.
//
// Tensor ordering is fixed everywhere: the photon index is the slow (outer)
// index and the oscillator index is the fast (inner) one. Use kron() and
// the photon_block helpers rather than indexing joint vectors by hand.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace wvamp {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using Ket = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Hermitian, square, positive semidefinite matrix. Construction checks
/// hermiticity only; call validate() for the trace and spectrum checks.
class DensityOperator {
 public:
  explicit DensityOperator(ComplexMatrix matrix);

  static DensityOperator pure(const Ket& ket);

  const ComplexMatrix& matrix() const { return matrix_; }
  Index dim() const { return matrix_.rows(); }
  double trace() const { return matrix_.trace().real(); }

  /// Throws InvalidParameter unless |trace - trace_target| <= trace_tol and
  /// every eigenvalue is >= -1e-10.
  void validate(double trace_target = 1.0, double trace_tol = 1e-9) const;

 private:
  ComplexMatrix matrix_;
};

/// A state given as a weighted mixture of kets. Thermal and Fock states are
/// diagonal ensembles, coherent states a single ket. Evolution acts on each
/// member, which is much cheaper than evolving a dense density matrix.
struct WeightedKet {
  double weight;
  Ket ket;
};

class StateEnsemble {
 public:
  StateEnsemble() = default;
  explicit StateEnsemble(std::vector<WeightedKet> members);

  static StateEnsemble pure(Ket ket);

  const std::vector<WeightedKet>& members() const { return members_; }
  Index dim() const;
  double total_weight() const;
  DensityOperator density() const;

 private:
  std::vector<WeightedKet> members_;
};

/// Fock-basis ladder and quadrature operators truncated to `dim` levels
/// (indices 0 .. dim-1).
struct TruncatedOscillator {
  Index dim = 0;
  ComplexMatrix annihilator;
  ComplexMatrix creator;
  ComplexMatrix x;       // (c^dag + c)/sqrt(2)
  ComplexMatrix y;       // i (c^dag - c)/sqrt(2)
  ComplexMatrix number;  // c^dag c
};

/// Throws InvalidDimension for dim < 2.
TruncatedOscillator build_oscillator(Index dim);

ComplexMatrix identity(Index dim);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
Ket kron(const Ket& a, const Ket& b);

double max_abs(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double tol = 1e-12);
bool is_anti_hermitian(const ComplexMatrix& m, double tol = 1e-12);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Validated anti-Hermitian generator G, so exp(G) is unitary.
class AntiHermitianGenerator {
 public:
  /// Throws InvalidParameter if ||G + G^dag||_max > tol.
  explicit AntiHermitianGenerator(ComplexMatrix generator, double tol = 1e-10);

  const ComplexMatrix& matrix() const { return generator_; }
  Index dim() const { return generator_.rows(); }

 private:
  ComplexMatrix generator_;
};

struct SeriesOptions {
  double tol = 1e-15;
  int max_terms = 64;
};

/// exp(G) v by a Taylor series applied to the vector. Stops once the next
/// term's norm is <= tol * ||result||; throws SeriesDivergence when the
/// term budget runs out first.
Ket apply_unitary_series(const AntiHermitianGenerator& generator, const Ket& state,
                         const SeriesOptions& options = {});

/// exp(G) rho exp(G)^dag, column by column.
DensityOperator apply_unitary_series(const AntiHermitianGenerator& generator,
                                     const DensityOperator& state,
                                     const SeriesOptions& options = {});

StateEnsemble apply_unitary_series(const AntiHermitianGenerator& generator,
                                   const StateEnsemble& state,
                                   const SeriesOptions& options = {});

/// <v|A|v> and Tr(A rho). Throw DimensionMismatch on shape errors.
Complex expectation(const ComplexMatrix& obs, const Ket& state);
Complex expectation(const ComplexMatrix& obs, const DensityOperator& state);
Complex expectation(const ComplexMatrix& obs, const StateEnsemble& state);

/// Real part of the expectation of a Hermitian observable.
template <typename State>
double hermitian_expectation(const ComplexMatrix& obs, const State& state) {
  return expectation(obs, state).real();
}

/// Heisenberg picture free rotation exp(i w N) M exp(-i w N) with w = Omega t.
/// Entry (j, k) picks up the phase exp(i w (j - k)), exact on the truncated
/// space. For the quadratures this gives X(t) = cos(w) X + sin(w) Y and
/// Y(t) = cos(w) Y - sin(w) X.
ComplexMatrix rotate_free(const ComplexMatrix& obs, double phase);

Ket fock_ket(Index dim, Index n);

/// Poisson amplitudes exp(-|a|^2/2) a^n / sqrt(n!) on `dim` levels.
Ket coherent_ket(Index dim, Complex alpha);

/// Geometric populations N^n/(N+1)^(n+1) for n < levels. Not renormalized:
/// the missing tail mass is (N/(N+1))^levels.
std::vector<double> thermal_populations(double mean_number, Index levels);

/// Smallest level count with thermal tail mass (N/(N+1))^levels <= tail_tol.
Index thermal_levels(double mean_number, double tail_tol = 1e-8);

/// N + 10 sqrt(N) + 20, rounded up.
Index coherent_levels(double mean_number);

StateEnsemble thermal_ensemble(Index dim, double mean_number, Index populated_levels);

}  // namespace wvamp
