#include "wvamp/weakmeas.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Eigenvalues>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

constexpr double kDegenerateProbability = 1e-12;

struct SystemMoments {
  double p = 0.0;     // <P>
  Complex jx_anti;    // <{Jx, P}>
  Complex jx_comm;    // <[Jx, P]>
  Complex jy_anti;
  Complex jy_comm;
};

SystemMoments system_moments(const SystemSpec& sys, const DensityOperator& rho, const Ket& phi) {
  if (phi.size() != sys.dim) throw DimensionMismatch("postselection ket has the wrong dimension");
  const ComplexMatrix proj = phi * phi.adjoint();
  SystemMoments m;
  m.p = hermitian_expectation(proj, rho);
  m.jx_anti = expectation(anticommutator(sys.jx, proj), rho);
  m.jx_comm = expectation(commutator(sys.jx, proj), rho);
  m.jy_anti = expectation(anticommutator(sys.jy, proj), rho);
  m.jy_comm = expectation(commutator(sys.jy, proj), rho);
  return m;
}

double covariance(const ComplexMatrix& a, const ComplexMatrix& b, const DensityOperator& rho) {
  return 0.5 * hermitian_expectation(anticommutator(a, b), rho) -
         hermitian_expectation(a, rho) * hermitian_expectation(b, rho);
}

// <phi| (x) I applied to a joint ket: the pointer ket conditioned on phi.
Ket project_system(const Ket& joint, const Ket& phi, Index pointer_dim) {
  Ket out = Ket::Zero(pointer_dim);
  for (Index a = 0; a < phi.size(); ++a) {
    out += std::conj(phi(a)) * joint.segment(a * pointer_dim, pointer_dim);
  }
  return out;
}

}  // namespace

SystemSpec SystemSpec::with_state(DensityOperator state) const {
  if (state.dim() != dim) throw DimensionMismatch("SystemSpec::with_state: wrong dimension");
  SystemSpec out = *this;
  out.rho = std::move(state);
  return out;
}

SystemSpec build_spin_system(int twice_j, DensityOperator rho) {
  if (twice_j < 1) throw InvalidDimension("build_spin_system: j must be >= 1/2");
  const Index dim = twice_j + 1;
  if (rho.dim() != dim) throw DimensionMismatch("build_spin_system: rho has the wrong dimension");
  const double j = 0.5 * twice_j;

  ComplexMatrix jplus = ComplexMatrix::Zero(dim, dim);
  for (Index i = 1; i < dim; ++i) {
    const double m = j - static_cast<double>(i);  // basis index i holds m = j - i
    jplus(i - 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  ComplexMatrix jminus = jplus.adjoint();
  ComplexMatrix jx = 0.5 * (jplus + jminus);
  ComplexMatrix jy = (jplus - jminus) / (2.0 * kI);
  ComplexMatrix jz = ComplexMatrix::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i) jz(i, i) = j - static_cast<double>(i);
  ComplexMatrix jsq = jx * jx + jy * jy + jz * jz;
  return SystemSpec{dim, jx, jy, jplus, jminus, jsq, std::move(rho)};
}

PointerSpec::PointerSpec(TruncatedOscillator osc, StateEnsemble ensemble, double omega_)
    : oscillator(std::move(osc)),
      state(std::move(ensemble)),
      rho(state.density()),
      omega(omega_) {
  if (state.dim() != oscillator.dim) {
    throw DimensionMismatch("PointerSpec: state dimension differs from the oscillator cutoff");
  }
}

double PointerSpec::mean_number() const { return hermitian_expectation(oscillator.number, rho); }

AntiHermitianGenerator interaction_generator(double g, const SystemSpec& sys,
                                             const PointerSpec& ptr) {
  ComplexMatrix h = kron(sys.jx, ptr.oscillator.y) + kron(sys.jy, ptr.oscillator.x);
  return AntiHermitianGenerator(Complex(0.0, -g) * h);
}

ComplexMatrix free_observable(const PointerSpec& ptr, const ComplexMatrix& obs, double t) {
  return rotate_free(obs, ptr.omega * t);
}

double shift_without_postselection(double g, double jx_mean, double jy_mean,
                                   const PointerSpec& ptr, const ComplexMatrix& obs, double t) {
  const ComplexMatrix m_t = free_observable(ptr, obs, t);
  const auto& osc = ptr.oscillator;
  const Complex shift = expectation(m_t, ptr.rho) +
                        kI * g * jx_mean * expectation(commutator(osc.y, m_t), ptr.rho) +
                        kI * g * jy_mean * expectation(commutator(osc.x, m_t), ptr.rho);
  return shift.real();
}

double shift_without_postselection(double g, const SystemSpec& sys, const PointerSpec& ptr,
                                   const ComplexMatrix& obs, double t) {
  return shift_without_postselection(g, hermitian_expectation(sys.jx, sys.rho),
                                     hermitian_expectation(sys.jy, sys.rho), ptr, obs, t);
}

PostselectionProbability postselection_probability_first_order(double g, const SystemSpec& sys,
                                                               const PointerSpec& ptr,
                                                               const Ket& phi) {
  const SystemMoments s = system_moments(sys, sys.rho, phi);
  const double x_mean = hermitian_expectation(ptr.oscillator.x, ptr.rho);
  const double y_mean = hermitian_expectation(ptr.oscillator.y, ptr.rho);
  const Complex value = s.p + kI * g * s.jx_comm * y_mean + kI * g * s.jy_comm * x_mean;
  PostselectionProbability out;
  out.value = value.real();
  out.regime_ok = s.p >= 100.0 * g * g * (ptr.mean_number() + 1.0);
  return out;
}

ConditionalResult conditional_expectation_first_order(double g, const SystemSpec& sys,
                                                      const PointerSpec& ptr, const Ket& phi,
                                                      const ComplexMatrix& obs, double t) {
  const SystemMoments s = system_moments(sys, sys.rho, phi);
  if (s.p <= 0.0) {
    throw DegeneratePostselection("conditional expectation: <P_phi> vanishes on rho_S");
  }
  const auto& osc = ptr.oscillator;
  const ComplexMatrix m_t = free_observable(ptr, obs, t);

  const Complex comm_y = expectation(commutator(osc.y, m_t), ptr.rho);
  const Complex comm_x = expectation(commutator(osc.x, m_t), ptr.rho);
  const double cov_y = covariance(osc.y, m_t, ptr.rho);
  const double cov_x = covariance(osc.x, m_t, ptr.rho);

  const Complex value = expectation(m_t, ptr.rho) +
                        kI * g * s.jx_anti / (2.0 * s.p) * comm_y -
                        g * s.jx_comm / (kI * s.p) * cov_y +
                        kI * g * s.jy_anti / (2.0 * s.p) * comm_x -
                        g * s.jy_comm / (kI * s.p) * cov_x;

  const PostselectionProbability ps = postselection_probability_first_order(g, sys, ptr, phi);
  ConditionalResult out;
  out.expectation = value.real();
  out.ps_probability = ps.value;
  out.order = Order::First;
  out.regime_ok = ps.regime_ok;
  return out;
}

KickedState::KickedState(double g, const SystemSpec& sys, const PointerSpec& ptr,
                         const SeriesOptions& options)
    : g_(g), pointer_(ptr), system_dim_(sys.dim) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sys.rho.matrix());
  std::vector<WeightedKet> members;
  for (Index k = 0; k < sys.dim; ++k) {
    const double lambda = solver.eigenvalues()(k);
    if (lambda <= 1e-14) continue;
    const Ket sys_ket = solver.eigenvectors().col(k);
    for (const auto& p : ptr.state.members()) {
      members.push_back({lambda * p.weight, kron(sys_ket, p.ket)});
    }
  }
  const AntiHermitianGenerator generator = interaction_generator(g, sys, ptr);
  joint_ = apply_unitary_series(generator, StateEnsemble(std::move(members)), options);
}

double KickedState::postselection_probability(const Ket& phi) const {
  if (phi.size() != system_dim_) throw DimensionMismatch("postselection ket has the wrong dimension");
  double prob = 0.0;
  for (const auto& m : joint_.members()) {
    prob += m.weight * project_system(m.ket, phi, pointer_.dim()).squaredNorm();
  }
  return prob;
}

double KickedState::postselected_moment(const Ket& phi, const ComplexMatrix& obs, double t) const {
  if (phi.size() != system_dim_) throw DimensionMismatch("postselection ket has the wrong dimension");
  const ComplexMatrix m_t = free_observable(pointer_, obs, t);
  double moment = 0.0;
  for (const auto& m : joint_.members()) {
    const Ket u = project_system(m.ket, phi, pointer_.dim());
    moment += m.weight * u.dot(m_t * u).real();
  }
  return moment;
}

ConditionalResult KickedState::conditional_expectation(const Ket& phi, const ComplexMatrix& obs,
                                                       double t) const {
  if (phi.size() != system_dim_) throw DimensionMismatch("postselection ket has the wrong dimension");
  const ComplexMatrix m_t = free_observable(pointer_, obs, t);
  double numerator = 0.0;
  double denominator = 0.0;
  for (const auto& m : joint_.members()) {
    const Ket u = project_system(m.ket, phi, pointer_.dim());
    numerator += m.weight * u.dot(m_t * u).real();
    denominator += m.weight * u.squaredNorm();
  }
  if (denominator <= kDegenerateProbability) {
    throw DegeneratePostselection("exact conditional expectation: postselection probability vanishes");
  }
  ConditionalResult out;
  out.expectation = numerator / denominator;
  out.ps_probability = denominator;
  out.order = Order::Exact;
  return out;
}

ConditionalResult conditional_expectation_exact(double g, const SystemSpec& sys,
                                                const PointerSpec& ptr, const Ket& phi,
                                                const ComplexMatrix& obs, double t) {
  return KickedState(g, sys, ptr).conditional_expectation(phi, obs, t);
}

WeakValue weak_values(const Ket& psi, const Ket& phi, const SystemSpec& sys) {
  if (psi.size() != sys.dim || phi.size() != sys.dim) {
    throw DimensionMismatch("weak_values: kets have the wrong dimension");
  }
  const Complex overlap = phi.dot(psi);
  if (std::abs(overlap) <= 1e-14) {
    throw UndefinedWeakValue("weak_values: pre- and postselected states are orthogonal");
  }
  return WeakValue{phi.dot(sys.jx * psi) / overlap, phi.dot(sys.jy * psi) / overlap};
}

WeakValue weak_values_mixed(const DensityOperator& rho, const Ket& phi, const SystemSpec& sys) {
  const SystemMoments s = system_moments(sys, rho, phi);
  if (s.p <= 1e-28) {
    throw UndefinedWeakValue("weak_values_mixed: <P_phi> vanishes");
  }
  const auto assemble = [&](Complex anti, Complex comm) {
    const double re = (anti / (2.0 * s.p)).real();
    const double im = (-comm / (2.0 * kI * s.p)).real();
    return Complex(re, im);
  };
  return WeakValue{assemble(s.jx_anti, s.jx_comm), assemble(s.jy_anti, s.jy_comm)};
}

}  // namespace wvamp
