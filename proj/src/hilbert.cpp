#include "wvamp/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionMismatch(msg.str());
  }
}

void require_dims(Index a, Index b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

DensityOperator::DensityOperator(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  require_square(matrix_, "DensityOperator");
  const double scale = std::max(1.0, max_abs(matrix_));
  if (!is_hermitian(matrix_, 1e-12 * scale)) {
    throw InvalidParameter("DensityOperator: matrix is not Hermitian");
  }
}

DensityOperator DensityOperator::pure(const Ket& ket) {
  return DensityOperator(ket * ket.adjoint());
}

void DensityOperator::validate(double trace_target, double trace_tol) const {
  if (std::abs(trace() - trace_target) > trace_tol) {
    std::ostringstream msg;
    msg << "DensityOperator: trace " << trace() << " differs from " << trace_target;
    throw InvalidParameter(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-10) {
    throw InvalidParameter("DensityOperator: negative eigenvalue");
  }
}

StateEnsemble::StateEnsemble(std::vector<WeightedKet> members) : members_(std::move(members)) {
  for (const auto& m : members_) {
    if (m.weight < 0.0) throw InvalidParameter("StateEnsemble: negative weight");
    require_dims(m.ket.size(), members_.front().ket.size(), "StateEnsemble");
  }
}

StateEnsemble StateEnsemble::pure(Ket ket) {
  std::vector<WeightedKet> members;
  members.push_back({1.0, std::move(ket)});
  return StateEnsemble(std::move(members));
}

Index StateEnsemble::dim() const {
  return members_.empty() ? 0 : members_.front().ket.size();
}

double StateEnsemble::total_weight() const {
  double sum = 0.0;
  for (const auto& m : members_) sum += m.weight * m.ket.squaredNorm();
  return sum;
}

DensityOperator StateEnsemble::density() const {
  ComplexMatrix rho = ComplexMatrix::Zero(dim(), dim());
  for (const auto& m : members_) rho.noalias() += m.weight * (m.ket * m.ket.adjoint());
  // Remove rounding asymmetry so the Hermitian check is exact.
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityOperator(std::move(rho));
}

TruncatedOscillator build_oscillator(Index dim) {
  if (dim < 2) {
    throw InvalidDimension("build_oscillator: cutoff must be >= 2");
  }
  TruncatedOscillator osc;
  osc.dim = dim;
  osc.annihilator = ComplexMatrix::Zero(dim, dim);
  for (Index n = 1; n < dim; ++n) {
    osc.annihilator(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  osc.creator = osc.annihilator.adjoint();
  const double s = 1.0 / std::sqrt(2.0);
  osc.x = s * (osc.creator + osc.annihilator);
  osc.y = kI * s * (osc.creator - osc.annihilator);
  osc.number = osc.creator * osc.annihilator;
  return osc;
}

ComplexMatrix identity(Index dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Ket kron(const Ket& a, const Ket& b) {
  Ket out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

bool is_anti_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m + m.adjoint()) <= tol;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b + b * a;
}

AntiHermitianGenerator::AntiHermitianGenerator(ComplexMatrix generator, double tol)
    : generator_(std::move(generator)) {
  require_square(generator_, "AntiHermitianGenerator");
  if (!is_anti_hermitian(generator_, tol)) {
    throw InvalidParameter("AntiHermitianGenerator: matrix is not anti-Hermitian");
  }
}

Ket apply_unitary_series(const AntiHermitianGenerator& generator, const Ket& state,
                         const SeriesOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidParameter("apply_unitary_series: tol must be > 0");
  require_dims(generator.dim(), state.size(), "apply_unitary_series");

  Ket result = state;
  Ket term = state;
  const double scale = std::max(state.norm(), 1e-300);
  for (int k = 1; k <= options.max_terms; ++k) {
    term = (generator.matrix() * term) / static_cast<double>(k);
    result += term;
    if (term.norm() <= options.tol * std::max(result.norm(), scale)) return result;
  }
  std::ostringstream msg;
  msg << "apply_unitary_series: no convergence after " << options.max_terms
      << " terms (||G v|| too large; reduce the coupling or raise the cutoff)";
  throw SeriesDivergence(msg.str());
}

DensityOperator apply_unitary_series(const AntiHermitianGenerator& generator,
                                     const DensityOperator& state,
                                     const SeriesOptions& options) {
  require_dims(generator.dim(), state.dim(), "apply_unitary_series");
  const Index d = state.dim();
  // U rho U^dag = (U (U rho)^dag)^dag for Hermitian rho.
  ComplexMatrix u_rho(d, d);
  for (Index j = 0; j < d; ++j) {
    u_rho.col(j) = apply_unitary_series(generator, Ket(state.matrix().col(j)), options);
  }
  ComplexMatrix u_rho_adj = u_rho.adjoint();
  ComplexMatrix out(d, d);
  for (Index j = 0; j < d; ++j) {
    out.col(j) = apply_unitary_series(generator, Ket(u_rho_adj.col(j)), options);
  }
  out.adjointInPlace();
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityOperator(std::move(out));
}

StateEnsemble apply_unitary_series(const AntiHermitianGenerator& generator,
                                   const StateEnsemble& state, const SeriesOptions& options) {
  std::vector<WeightedKet> out;
  out.reserve(state.members().size());
  for (const auto& m : state.members()) {
    out.push_back({m.weight, apply_unitary_series(generator, m.ket, options)});
  }
  return StateEnsemble(std::move(out));
}

Complex expectation(const ComplexMatrix& obs, const Ket& state) {
  require_square(obs, "expectation");
  require_dims(obs.cols(), state.size(), "expectation");
  return state.dot(obs * state);
}

Complex expectation(const ComplexMatrix& obs, const DensityOperator& state) {
  require_square(obs, "expectation");
  require_dims(obs.cols(), state.dim(), "expectation");
  // Tr(A rho) = sum_ij A_ij rho_ji
  return (obs.array() * state.matrix().transpose().array()).sum();
}

Complex expectation(const ComplexMatrix& obs, const StateEnsemble& state) {
  Complex sum{0.0, 0.0};
  for (const auto& m : state.members()) sum += m.weight * expectation(obs, m.ket);
  return sum;
}

ComplexMatrix rotate_free(const ComplexMatrix& obs, double phase) {
  require_square(obs, "rotate_free");
  ComplexMatrix out(obs.rows(), obs.cols());
  for (Index k = 0; k < obs.cols(); ++k) {
    for (Index j = 0; j < obs.rows(); ++j) {
      out(j, k) = obs(j, k) * std::polar(1.0, phase * static_cast<double>(j - k));
    }
  }
  return out;
}

Ket fock_ket(Index dim, Index n) {
  if (n < 0 || n >= dim) throw InvalidDimension("fock_ket: index outside the truncated space");
  Ket v = Ket::Zero(dim);
  v(n) = 1.0;
  return v;
}

Ket coherent_ket(Index dim, Complex alpha) {
  if (dim < 1) throw InvalidDimension("coherent_ket: dim must be >= 1");
  Ket v(dim);
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (Index n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return v;
}

std::vector<double> thermal_populations(double mean_number, Index levels) {
  if (mean_number < 0.0) throw InvalidParameter("thermal_populations: N must be >= 0");
  std::vector<double> p(static_cast<std::size_t>(levels));
  const double ratio = mean_number / (mean_number + 1.0);
  double value = 1.0 / (mean_number + 1.0);
  for (auto& pn : p) {
    pn = value;
    value *= ratio;
  }
  return p;
}

Index thermal_levels(double mean_number, double tail_tol) {
  if (mean_number < 0.0) throw InvalidParameter("thermal_levels: N must be >= 0");
  if (mean_number == 0.0) return 1;
  const double ratio = mean_number / (mean_number + 1.0);
  auto levels = static_cast<Index>(std::ceil(std::log(tail_tol) / std::log(ratio)));
  // Guard against rounding in the logarithms.
  while (levels > 1 && std::pow(ratio, static_cast<double>(levels - 1)) <= tail_tol) --levels;
  while (std::pow(ratio, static_cast<double>(levels)) > tail_tol) ++levels;
  return levels;
}

Index coherent_levels(double mean_number) {
  if (mean_number < 0.0) throw InvalidParameter("coherent_levels: N must be >= 0");
  return static_cast<Index>(std::ceil(mean_number + 10.0 * std::sqrt(mean_number) + 20.0));
}

StateEnsemble thermal_ensemble(Index dim, double mean_number, Index populated_levels) {
  if (populated_levels > dim) {
    throw InvalidDimension("thermal_ensemble: populated levels exceed the cutoff");
  }
  const auto p = thermal_populations(mean_number, populated_levels);
  std::vector<WeightedKet> members;
  members.reserve(p.size());
  for (Index n = 0; n < populated_levels; ++n) {
    members.push_back({p[static_cast<std::size_t>(n)], fock_ket(dim, n)});
  }
  return StateEnsemble(std::move(members));
}

}  // namespace wvamp
