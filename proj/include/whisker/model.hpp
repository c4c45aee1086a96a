#pragma once

#include <boost/numeric/odeint.hpp>

#include "whisker/fourier.hpp"

namespace whisker {

/// One perturbation term c * cos(j*phi + q.psi + chi). A phase chi that is
/// not a multiple of pi breaks the evenness f(phi,psi) = f(-phi,-psi); the
/// default model uses chi = 0 throughout, nonzero phases exist for the odd-f
/// negative control and for translation-covariance tests.
struct PerturbationTerm {
  int j = 0;
  Mode q;
  double c = 0.0;
  double chi = 0.0;
};

struct Perturbation {
  std::vector<PerturbationTerm> terms;

  /// Trigonometric degree in psi: max |q|_1 over terms.
  int degree_psi() const {
    int n = 0;
    for (const auto& t : terms)
      if (t.c != 0.0) n = std::max(n, l1_norm(t.q));
    return n;
  }

  bool is_even(double tol = 1e-14) const {
    for (const auto& t : terms) {
      double r = std::remainder(t.chi, PI);
      if (std::abs(r) > tol) return false;
    }
    return true;
  }

  /// f translated in psi by beta: cos(j phi + q.(psi+beta) + chi).
  Perturbation translated(const std::vector<double>& beta) const {
    Perturbation out = *this;
    for (auto& t : out.terms) {
      double shift = 0.0;
      for (std::size_t r = 0; r < beta.size(); ++r) shift += t.q[r] * beta[r];
      t.chi += shift;
    }
    return out;
  }

  template <typename S1, typename S2>
  Complex angle(const PerturbationTerm& t, S1 phi, const std::vector<S2>& psi) const {
    Complex a = Complex(double(t.j)) * Complex(phi) + Complex(t.chi);
    for (std::size_t r = 0; r < psi.size(); ++r) a += Complex(double(t.q[r])) * Complex(psi[r]);
    return a;
  }
};

template <typename S1, typename S2>
Complex f_eval(const Perturbation& p, S1 phi, const std::vector<S2>& psi) {
  Complex s(0.0, 0.0);
  for (const auto& t : p.terms) s += t.c * std::cos(p.angle(t, phi, psi));
  return s;
}

/// (d_phi f, d_psi f) at a (possibly complex) phase point.
template <typename S1, typename S2>
std::vector<Complex> grad_f(const Perturbation& p, S1 phi, const std::vector<S2>& psi) {
  std::vector<Complex> g(1 + psi.size(), Complex(0.0, 0.0));
  for (const auto& t : p.terms) {
    Complex s = -t.c * std::sin(p.angle(t, phi, psi));
    g[0] += double(t.j) * s;
    for (std::size_t r = 0; r < psi.size(); ++r) g[1 + r] += double(t.q[r]) * s;
  }
  return g;
}

/// Full (1+d)x(1+d) Hessian of f; index 0 is phi.
template <typename S1, typename S2>
std::vector<std::vector<Complex>> hess_f(const Perturbation& p, S1 phi,
                                         const std::vector<S2>& psi) {
  int n = 1 + static_cast<int>(psi.size());
  std::vector<std::vector<Complex>> h(n, std::vector<Complex>(n, Complex(0.0, 0.0)));
  for (const auto& t : p.terms) {
    Complex cterm = -t.c * std::cos(p.angle(t, phi, psi));
    std::vector<double> k(n);
    k[0] = t.j;
    for (std::size_t r = 0; r < psi.size(); ++r) k[1 + r] = t.q[r];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) h[a][b] += k[a] * k[b] * cterm;
  }
  return h;
}

/// Model parameters and numerical knobs. lambda = eps * g^2 throughout.
struct ModelConfig {
  double g = 1.0;
  FrequencyVector omega;
  Complex eps = Complex(0.0, 0.0);
  Perturbation f;

  int kmax = 12;        // Fourier truncation |q|_1 <= kmax
  int k_rg = 0;         // RG mode truncation; 0 = same as kmax
  int ntheta = 0;       // collocation points per dimension; 0 = 4*kmax+1
  int nz = 96;          // Chebyshev z-nodes
  double z_max = 3.0;   // real z-domain half-width
  double tau = 0.1;     // complex strip half-width (kernel-bound diagnostics)

  double tol_torus = 1e-12;
  double tol_lin = 1e-13;
  double tol_Z = 1e-12;
  double tol_ode = 1e-12;
  double tol_delta = 0.0;  // 0 = auto scale with |eps|
  int max_iter_fp = 200;
  int max_iter_newton = 40;
  int max_iter_Z = 60;

  int quad_points = 32;       // Gauss-Legendre nodes per panel
  double quad_w0 = 0.2;       // first panel width (units of 1/g)
  double quad_ratio = 1.6;    // geometric panel growth away from s=0
  double quad_tail_tol = 1e-13;

  double cauchy_radius = 0.25;  // Taylor-extraction circle at z=0
  double eta_strip = 2.0;       // certified |Im Phi| excursion budget
  int n_levels = 0;             // RG depth; 0 = auto
  double aleph = 0.0;           // RG scale; 0 = min(1/8,(g/3)^2)
  int q_check = 50;
  int expand_order = 3;
  unsigned long seed = 20240101UL;

  int dim() const { return omega.dim(); }
  Complex lambda() const { return eps * g * g; }
  int ntheta_eff() const { return ntheta > 0 ? ntheta : 4 * kmax + 1; }
  int k_rg_eff() const { return k_rg > 0 ? k_rg : kmax; }
  double aleph_eff() const {
    if (aleph > 0.0) return aleph;
    double b = g / 3.0;
    return std::min(0.125, b * b);
  }
  double tol_delta_eff() const {
    if (tol_delta > 0.0) return tol_delta;
    return std::max(1e-18, 1e-10 * std::abs(eps) * g);
  }
  /// Largest n >= 1 with min |omega.q| < aleph^{n-1} over retained modes;
  /// beyond it no retained denominator reaches scale n.
  int n_levels_eff() const {
    if (n_levels > 0) return n_levels;
    double md = min_small_denominator(omega, k_rg_eff());
    double al = aleph_eff();
    int n = 1;
    while (n < 8 && md < std::pow(al, n)) ++n;
    return n;
  }
  ThetaGrid grid() const { return ThetaGrid(dim(), ntheta_eff()); }
};

/// Standard desk-scale configuration: d=1 golden-mean frequency,
/// f = cos(phi) cos(psi_1) written as half-sum of two cos terms.
inline ModelConfig default_config_d1() {
  ModelConfig cfg;
  cfg.g = 1.0;
  cfg.omega.omega = {(1.0 + std::sqrt(5.0)) / 2.0};
  cfg.omega.nu = 1.0;
  cfg.eps = 1e-3;
  cfg.f.terms = {{1, {1}, 0.5, 0.0}, {1, {-1}, 0.5, 0.0}};
  cfg.kmax = 12;
  return cfg;
}

inline ModelConfig default_config_d2() {
  ModelConfig cfg;
  cfg.g = 1.0;
  cfg.omega.omega = {1.0, std::sqrt(2.0)};
  cfg.omega.nu = 1.2;
  cfg.eps = 1e-3;
  cfg.f.terms = {{1, {1, 0}, 0.5, 0.0}, {1, {-1, 0}, 0.5, 0.0}};
  cfg.kmax = 8;
  cfg.k_rg = 8;
  cfg.n_levels = 2;
  return cfg;
}

/// Vector field Omega(X)(theta) = (g^2 sin Phi, 0) + lambda * grad f(X + (0,theta)).
inline std::vector<Complex> Omega_eval(const ModelConfig& cfg,
                                       const std::vector<Complex>& X,
                                       const std::vector<Complex>& theta) {
  int d = cfg.dim();
  std::vector<Complex> psi(d);
  for (int r = 0; r < d; ++r) psi[r] = X[1 + r] + theta[r];
  std::vector<Complex> out = grad_f(cfg.f, X[0], psi);
  Complex lam = cfg.lambda();
  for (auto& v : out) v *= lam;
  out[0] += cfg.g * cfg.g * std::sin(X[0]);
  return out;
}

/// Phase-space state of the pendulum + rotators (angles kept as lifts).
struct PhaseState {
  double phi = 0.0;
  std::vector<double> psi;
  double I = 0.0;
  std::vector<double> A;

  static PhaseState zero(int d) {
    PhaseState s;
    s.psi.assign(d, 0.0);
    s.A.assign(d, 0.0);
    return s;
  }

  std::vector<double> pack() const {
    std::vector<double> v;
    v.reserve(2 + 2 * psi.size());
    v.push_back(phi);
    v.insert(v.end(), psi.begin(), psi.end());
    v.push_back(I);
    v.insert(v.end(), A.begin(), A.end());
    return v;
  }

  static PhaseState unpack(const std::vector<double>& v, int d) {
    PhaseState s;
    s.phi = v[0];
    s.psi.assign(v.begin() + 1, v.begin() + 1 + d);
    s.I = v[1 + d];
    s.A.assign(v.begin() + 2 + d, v.begin() + 2 + 2 * d);
    return s;
  }
};

/// Equations of motion: phidot = I, psidot = A, Idot = g^2 sin phi + lambda f_phi,
/// Adot = lambda f_psi. Requires real eps.
inline PhaseState eom_rhs(const ModelConfig& cfg, const PhaseState& s) {
  if (std::abs(cfg.eps.imag()) > 0.0)
    throw std::invalid_argument("eom_rhs: real eps required for time integration");
  int d = cfg.dim();
  std::vector<double> psi(s.psi);
  auto gf = grad_f(cfg.f, s.phi, psi);
  double lam = cfg.lambda().real();
  PhaseState out = PhaseState::zero(d);
  out.phi = s.I;
  out.psi = s.A;
  out.I = cfg.g * cfg.g * std::sin(s.phi) + lam * gf[0].real();
  for (int r = 0; r < d; ++r) out.A[r] = lam * gf[1 + r].real();
  return out;
}

/// H = I^2/2 + g^2 cos phi + |A|^2/2 - lambda f(phi, psi).
inline double energy(const ModelConfig& cfg, const PhaseState& s) {
  double a2 = 0.0;
  for (double a : s.A) a2 += a * a;
  return 0.5 * s.I * s.I + cfg.g * cfg.g * std::cos(s.phi) + 0.5 * a2 -
         cfg.lambda().real() * f_eval(cfg.f, s.phi, s.psi).real();
}

struct Trajectory {
  std::vector<double> t;
  std::vector<PhaseState> states;
};

/// Adaptive RKF78 reference integration sampled at n_samples uniform times.
/// Used as ground truth in shadowing tests, not for long-time structure.
inline Trajectory integrate_orbit(const ModelConfig& cfg, const PhaseState& s0,
                                  double t0, double t1, double tol, int n_samples = 64) {
  if (!(t1 != t0)) throw std::invalid_argument("integrate_orbit: empty time span");
  namespace ode = boost::numeric::odeint;
  using state_type = std::vector<double>;
  int d = cfg.dim();

  auto sys = [&](const state_type& x, state_type& dxdt, double) {
    PhaseState s = PhaseState::unpack(x, d);
    dxdt = eom_rhs(cfg, s).pack();
  };

  std::vector<double> times(n_samples);
  for (int i = 0; i < n_samples; ++i)
    times[i] = t0 + (t1 - t0) * double(i) / double(n_samples - 1);

  Trajectory traj;
  auto obs = [&](const state_type& x, double t) {
    traj.t.push_back(t);
    traj.states.push_back(PhaseState::unpack(x, d));
  };

  state_type x = s0.pack();
  auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_fehlberg78<state_type>());
  double dt0 = (t1 - t0) / 256.0;
  ode::integrate_times(stepper, sys, x, times.begin(), times.end(), dt0, obs);

  // energy drift guard for the reference-oracle contract
  double h0 = energy(cfg, traj.states.front());
  double drift = 0.0;
  for (const auto& s : traj.states) drift = std::max(drift, std::abs(energy(cfg, s) - h0));
  if (drift > 1e4 * tol)
    throw std::runtime_error("integrate_orbit: energy drift exceeds budget");
  return traj;
}

}  // namespace whisker
