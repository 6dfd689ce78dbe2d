#include "wvamp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kBranchHalfRange = 3;  // m in [n-3, n+3]
constexpr int kExtraK = 10;          // k <= n + 10
constexpr double kNearRegion = 20.0; // half-widths of uniform panels
constexpr double kGrowth = 1.15;     // geometric panel growth beyond it
constexpr double kSpanHalfWidths = 1e4;

// Lorentzian mass of |G(x; c, w)|^2 outside [lo, hi].
double lorentzian_tail_mass(double center, double half_width, double lo, double hi) {
  const double inside =
      (std::atan((hi - center) / half_width) - std::atan((lo - center) / half_width)) / kPi;
  return 1.0 - inside;
}

struct BranchRange {
  Index lo;
  Index hi;
};

BranchRange branch_range(Index n) {
  return {std::max<Index>(0, n - kBranchHalfRange), n + kBranchHalfRange};
}

double branch_center(const ExperimentConfig& cfg, Index n, Index m) {
  return static_cast<double>(n - m) * cfg.omega;
}

bool spectral_regime_ok(const RegimeReport& r) {
  return r.resolved_sideband.ok && r.weak_coupling.ok && r.detuned_carrier.ok &&
         r.quasi_monochromatic.ok;
}

AmplitudeSet empty_set(const ExperimentConfig& cfg, Index n, const FrequencyGrid& grid) {
  const BranchRange range = branch_range(n);
  AmplitudeSet set;
  set.n = n;
  set.m_lo = range.lo;
  set.m_hi = range.hi;
  set.k_max = n + kExtraK;
  const Index branches = range.hi - range.lo + 1;
  set.b.assign(static_cast<std::size_t>(branches), std::vector<Complex>(grid.size()));
  set.a.assign(static_cast<std::size_t>(branches), Complex{});
  set.c = Eigen::MatrixXd(branches, set.k_max + 1);
  const double alpha = cfg.bare_coupling();
  for (Index m = range.lo; m <= range.hi; ++m) {
    for (Index k = 0; k <= set.k_max; ++k) {
      set.c(m - range.lo, k) = overlap_coefficient(m, k, n, alpha);
    }
  }
  for (Index m = range.lo; m <= range.hi; ++m) {
    for (Index k = set.k_max + 1; k <= set.k_max + 10; ++k) {
      set.tail_bound = std::max(set.tail_bound, std::abs(overlap_coefficient(m, k, n, alpha)));
    }
  }
  return set;
}

}  // namespace

Complex lorentzian(double x, double center, double half_width) {
  return std::sqrt(half_width / kPi) / Complex(x - center, half_width);
}

double LorentzianAmplitude::norm() const {
  using boost::math::quadrature::gauss_kronrod;
  const double window = kSpanHalfWidths * half_width;
  auto density = [this](double x) { return std::norm((*this)(x)); };
  double inside = 0.0;
  // Split at the peak so the adaptive refinement starts on each flank.
  inside += gauss_kronrod<double, 31>::integrate(density, center - window, center, 30, 1e-14);
  inside += gauss_kronrod<double, 31>::integrate(density, center, center + window, 30, 1e-14);
  return inside + lorentzian_tail_mass(center, half_width, center - window, center + window);
}

FrequencyGrid FrequencyGrid::clustered(const std::vector<double>& centers, double half_width,
                                       double span, double lower_limit,
                                       int points_per_half_width) {
  if (centers.empty()) throw InvalidParameter("FrequencyGrid: no centers");
  if (!(half_width > 0.0) || !(span > 0.0)) {
    throw InvalidParameter("FrequencyGrid: half-width and span must be positive");
  }
  if (points_per_half_width < 8) throw InvalidParameter("FrequencyGrid: too few points");

  using Rule = boost::math::quadrature::gauss<double, 8>;
  constexpr int kRuleSize = 8;

  FrequencyGrid grid;
  grid.centers_ = centers;
  std::sort(grid.centers_.begin(), grid.centers_.end());
  grid.half_width_ = half_width;
  grid.lower_ = std::max(grid.centers_.front() - span, lower_limit);
  grid.upper_ = grid.centers_.back() + span;

  const double fine = half_width * kRuleSize / points_per_half_width;
  std::vector<double> breaks{grid.lower_, grid.upper_};
  for (double c : grid.centers_) {
    for (double d = 0.0; d <= kNearRegion * half_width + 0.5 * fine; d += fine) {
      breaks.push_back(c + d);
      breaks.push_back(c - d);
    }
    for (double d = kNearRegion * half_width * kGrowth; d < span; d *= kGrowth) {
      breaks.push_back(c + d);
      breaks.push_back(c - d);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> panels;
  for (double b : breaks) {
    if (b < grid.lower_ || b > grid.upper_) continue;
    if (!panels.empty() && b - panels.back() <= 1e-9 * half_width) continue;
    panels.push_back(b);
  }

  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  grid.nodes_.reserve(panels.size() * kRuleSize);
  grid.weights_.reserve(panels.size() * kRuleSize);
  for (std::size_t p = 0; p + 1 < panels.size(); ++p) {
    const double mid = 0.5 * (panels[p] + panels[p + 1]);
    const double half = 0.5 * (panels[p + 1] - panels[p]);
    for (std::size_t i = abscissa.size(); i-- > 0;) {
      grid.nodes_.push_back(mid - half * abscissa[i]);
      grid.weights_.push_back(half * weights[i]);
    }
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      grid.nodes_.push_back(mid + half * abscissa[i]);
      grid.weights_.push_back(half * weights[i]);
    }
  }
  return grid;
}

double FrequencyGrid::lorentzian_norm(double center) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    sum += weights_[i] * std::norm(lorentzian(nodes_[i], center, half_width_));
  }
  return sum + lorentzian_tail_mass(center, half_width_, lower_, upper_);
}

void FrequencyGrid::self_test(double tol) const {
  for (double c : centers_) {
    const double norm = lorentzian_norm(c);
    if (std::abs(norm - 1.0) > tol) {
      std::ostringstream msg;
      msg << "frequency grid does not resolve the Lorentzian at offset " << c
          << " (norm " << norm << ")";
      throw GridTooCoarse(msg.str());
    }
  }
}

double FrequencyGrid::integrate_abs2(const std::vector<Complex>& values) const {
  if (values.size() != nodes_.size()) throw DimensionMismatch("integrate_abs2: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * std::norm(values[i]);
  return sum;
}

Complex FrequencyGrid::inner(const std::vector<Complex>& bra,
                             const std::vector<Complex>& ket) const {
  if (bra.size() != nodes_.size() || ket.size() != nodes_.size()) {
    throw DimensionMismatch("inner: size mismatch");
  }
  Complex sum{};
  for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * std::conj(bra[i]) * ket[i];
  return sum;
}

FrequencyGrid spectral_grid(const ExperimentConfig& cfg, Index n) {
  const BranchRange range = branch_range(n);
  std::vector<double> centers;
  for (Index m = range.lo; m <= range.hi; ++m) centers.push_back(branch_center(cfg, n, m));
  const double span = kSpanHalfWidths * cfg.epsilon;
  const double lower = -0.5 * cfg.omega0();  // keeps omega >= omega0/2
  return FrequencyGrid::clustered(centers, cfg.epsilon, span, lower);
}

double displaced_overlap(Index m, Index k, double alpha) {
  if (m < 0 || k < 0) throw InvalidParameter("displaced_overlap: indices must be >= 0");
  if (alpha == 0.0) return m == k ? 1.0 : 0.0;
  // <m|D(a)|k> = sqrt(k!/m!) a^(m-k) e^(-a^2/2) L_k^(m-k)(a^2)    for m >= k
  //            = sqrt(m!/k!) (-a)^(k-m) e^(-a^2/2) L_m^(k-m)(a^2) for m <  k
  const Index lo = std::min(m, k);
  const Index hi = std::max(m, k);
  const double base = m >= k ? alpha : -alpha;
  const auto diff = static_cast<double>(hi - lo);
  const double log_mag = 0.5 * (std::lgamma(static_cast<double>(lo) + 1.0) -
                                std::lgamma(static_cast<double>(hi) + 1.0)) +
                         diff * std::log(std::abs(base)) - 0.5 * alpha * alpha;
  const double sign = (base < 0.0 && (hi - lo) % 2 == 1) ? -1.0 : 1.0;
  const double laguerre = std::assoc_laguerre(static_cast<unsigned>(lo),
                                              static_cast<unsigned>(hi - lo), alpha * alpha);
  return sign * std::exp(log_mag) * laguerre;
}

double displaced_overlap_checked(Index m, Index k, double alpha, Index cutoff) {
  const double closed = displaced_overlap(m, k, alpha);
  if (cutoff == 0) cutoff = m + k + 40;
  if (cutoff <= std::max(m, k)) throw InsufficientCutoff("displaced_overlap_checked: cutoff too small");

  double kept = 0.0;
  for (Index j = 0; j < cutoff; ++j) kept += std::pow(displaced_overlap(j, k, alpha), 2);
  if (1.0 - kept > 1e-9) {
    std::ostringstream msg;
    msg << "displaced_overlap_checked: cutoff " << cutoff << " loses " << 1.0 - kept
        << " of the displaced state's norm";
    throw InsufficientCutoff(msg.str());
  }

  const TruncatedOscillator osc = build_oscillator(cutoff);
  const AntiHermitianGenerator generator(alpha * (osc.creator - osc.annihilator));
  const Ket column = apply_unitary_series(generator, fock_ket(cutoff, k));
  if (std::abs(column(m) - closed) > 1e-9) {
    std::ostringstream msg;
    msg << "displaced_overlap_checked: closed form " << closed << " and series "
        << column(m).real() << " disagree at cutoff " << cutoff;
    throw InsufficientCutoff(msg.str());
  }
  return closed;
}

double overlap_coefficient(Index m, Index k, Index n, double alpha) {
  // <m|D|k> <k|D^dag|n>, with D real for real alpha.
  return displaced_overlap(m, k, alpha) * displaced_overlap(n, k, alpha);
}

double cavity_resonance_offset(const ExperimentConfig& cfg, Index k, Index m) {
  return -cfg.pulse_offset + cfg.omega * static_cast<double>(k - m) - cfg.g0 * cfg.g0 / cfg.omega;
}

const std::vector<Complex>& AmplitudeSet::branch(Index m) const {
  if (!has_branch(m)) throw InvalidParameter("AmplitudeSet: no branch for this mirror index");
  return b[static_cast<std::size_t>(m - m_lo)];
}

double AmplitudeSet::total_norm(const FrequencyGrid& grid) const {
  double sum = 0.0;
  for (const auto& branch_values : b) sum += grid.integrate_abs2(branch_values);
  return sum;
}

AmplitudeSet amplitude_full(const ExperimentConfig& cfg, Index n, const FrequencyGrid& grid) {
  if (n < 0) throw InvalidParameter("amplitude_full: n must be >= 0");
  grid.self_test();
  AmplitudeSet set = empty_set(cfg, n, grid);
  const double cavity_width = cfg.gamma_cav / 2.0;
  const Complex coupling = Complex(0.0, -std::sqrt(2.0 * kPi * cfg.gamma_cav));
  const auto& x = grid.nodes();

  for (Index m = set.m_lo; m <= set.m_hi; ++m) {
    auto& out = set.b[static_cast<std::size_t>(m - set.m_lo)];
    const double center = branch_center(cfg, n, m);
    std::vector<double> resonances;
    for (Index k = 0; k <= set.k_max; ++k) resonances.push_back(cavity_resonance_offset(cfg, k, m));
    for (std::size_t i = 0; i < x.size(); ++i) {
      Complex sum{};
      for (Index k = 0; k <= set.k_max; ++k) {
        sum += set.c(m - set.m_lo, k) *
               lorentzian(x[i], resonances[static_cast<std::size_t>(k)], cavity_width);
      }
      Complex value = coupling * lorentzian(x[i], center, cfg.epsilon) * sum;
      if (m == n) value += lorentzian(x[i], 0.0, cfg.epsilon);
      out[i] = value;
    }
  }
  return set;
}

ApproximationChain amplitude_approx_chain(const ExperimentConfig& cfg, Index n,
                                          const FrequencyGrid& grid) {
  const RegimeReport regime = regime_report(cfg, static_cast<double>(n), 1.0);
  if (!spectral_regime_ok(regime)) {
    std::ostringstream msg;
    msg << "approximation chain requires the resolved-sideband, weak-coupling, detuned-carrier "
           "and quasi-monochromatic regime; margins:";
    for (const auto& c : {regime.resolved_sideband, regime.weak_coupling, regime.detuned_carrier,
                          regime.quasi_monochromatic}) {
      msg << ' ' << c.name << '=' << c.margin;
    }
    throw RegimeViolation(msg.str());
  }
  grid.self_test();

  ApproximationChain chain{empty_set(cfg, n, grid), empty_set(cfg, n, grid)};
  const double cavity_width = cfg.gamma_cav / 2.0;
  const Complex coupling = Complex(0.0, -std::sqrt(2.0 * kPi * cfg.gamma_cav));
  const auto& x = grid.nodes();
  for (Index m = chain.single_resonance.m_lo; m <= chain.single_resonance.m_hi; ++m) {
    const auto row = static_cast<std::size_t>(m - chain.single_resonance.m_lo);
    const double c_mn = chain.single_resonance.c(m - chain.single_resonance.m_lo, n);
    const double center = branch_center(cfg, n, m);
    const double resonance = cavity_resonance_offset(cfg, n, m);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Complex pulse = lorentzian(x[i], center, cfg.epsilon);
      const Complex carrier = m == n ? lorentzian(x[i], 0.0, cfg.epsilon) : Complex{};
      chain.single_resonance.b[row][i] =
          carrier + coupling * c_mn * pulse * lorentzian(x[i], resonance, cavity_width);
      // coupling * G(resonance; resonance, Gamma/2) = -2
      chain.peak_value.b[row][i] = carrier - 2.0 * c_mn * pulse;
    }
  }
  return chain;
}

double relative_l2_distance(const AmplitudeSet& a, const AmplitudeSet& b, const FrequencyGrid& grid) {
  double diff = 0.0;
  double ref = 0.0;
  for (Index m = a.m_lo; m <= a.m_hi; ++m) {
    const auto& av = a.branch(m);
    ref += grid.integrate_abs2(av);
    if (!b.has_branch(m)) {
      diff += grid.integrate_abs2(av);
      continue;
    }
    const auto& bv = b.branch(m);
    std::vector<Complex> d(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) d[i] = av[i] - bv[i];
    diff += grid.integrate_abs2(d);
  }
  return std::sqrt(diff / ref);
}

Complex cross_lorentzian_overlap_closed(double half_width, double separation) {
  return Complex(0.0, 2.0 * half_width) / Complex(-separation, 2.0 * half_width);
}

Complex cross_lorentzian_overlap(const FrequencyGrid& grid, double half_width, double separation) {
  if (std::abs(grid.lorentzian_norm(separation) - 1.0) > 1e-6 ||
      std::abs(grid.lorentzian_norm(0.0) - 1.0) > 1e-6) {
    throw GridTooCoarse("cross_lorentzian_overlap: grid does not resolve both Lorentzians");
  }
  Complex sum{};
  const auto& x = grid.nodes();
  const auto& w = grid.weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += w[i] * std::conj(lorentzian(x[i], 0.0, half_width)) *
           lorentzian(x[i], separation, half_width);
  }
  // (eps/pi) / ((x - p)(x - q)), p = i eps, q = s - i eps, has the
  // antiderivative (eps/pi) log((x - p)/(x - q)) / (p - q), zero at +-inf.
  const Complex p(0.0, half_width);
  const Complex q(separation, -half_width);
  const auto antiderivative = [&](double xv) {
    return (half_width / kPi) * std::log((xv - p) / (xv - q)) / (p - q);
  };
  return sum + antiderivative(grid.lower()) - antiderivative(grid.upper());
}

ReductionReport validate_tri_mode_reduction(const ExperimentConfig& cfg, Index n, double tolerance) {
  if (n < 0) throw InvalidParameter("validate_tri_mode_reduction: n must be >= 0");
  ReductionReport report;
  report.n = n;
  report.g = cfg.bare_coupling();
  report.tolerance = tolerance;
  report.regime = regime_report(cfg, static_cast<double>(n), 1.0);
  report.regime_ok = spectral_regime_ok(report.regime);

  const FrequencyGrid grid = spectral_grid(cfg, n);
  const AmplitudeSet full = amplitude_full(cfg, n, grid);
  report.total_norm = full.total_norm(grid);
  report.tail_bound = full.tail_bound;

  const double g = report.g;
  struct Target {
    const char* label;
    Index m;
    Complex expected;
  };
  std::vector<Target> targets{{"carrier", n, Complex(1.0, 0.0)}};
  if (n >= 1) targets.push_back({"up", n - 1, Complex(-2.0 * g * std::sqrt(double(n)), 0.0)});
  targets.push_back({"down", n + 1, Complex(2.0 * g * std::sqrt(double(n + 1)), 0.0)});

  double captured = 0.0;
  for (const auto& t : targets) {
    std::vector<Complex> mode(grid.size());
    const double center = branch_center(cfg, n, t.m);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      mode[i] = lorentzian(grid.nodes()[i], center, cfg.epsilon);
    }
    ReductionBranch b;
    b.label = t.label;
    b.m = t.m;
    b.expected = t.expected;
    b.measured = grid.inner(mode, full.branch(t.m));
    const double branch_norm = grid.integrate_abs2(full.branch(t.m));
    b.leakage = branch_norm > 0.0 ? 1.0 - std::norm(b.measured) / branch_norm : 0.0;
    captured += std::norm(b.measured);
    report.branches.push_back(b);
  }
  report.leakage = report.total_norm - captured;

  const Complex carrier_ratio = report.branches.front().measured / report.branches.front().expected;
  report.global_phase = std::arg(carrier_ratio);
  const Complex unphase = std::polar(1.0, -report.global_phase);
  for (auto& b : report.branches) {
    b.deviation = std::abs(b.measured * unphase - b.expected) / std::abs(b.expected);
    report.max_deviation = std::max(report.max_deviation, b.deviation);
  }

  // Carrier against the down branch, which every n has on its grid.
  report.cross_overlap = cross_lorentzian_overlap(grid, cfg.epsilon, -cfg.omega);
  report.cross_overlap_closed = cross_lorentzian_overlap_closed(cfg.epsilon, -cfg.omega);

  if (report.regime_ok) {
    const ApproximationChain chain = amplitude_approx_chain(cfg, n, grid);
    report.full_vs_single = relative_l2_distance(full, chain.single_resonance, grid);
    report.single_vs_peak = relative_l2_distance(chain.single_resonance, chain.peak_value, grid);
    report.full_vs_peak = relative_l2_distance(full, chain.peak_value, grid);
  }
  report.pass = report.regime_ok && report.max_deviation <= tolerance;
  return report;
}

}  // namespace wvamp
