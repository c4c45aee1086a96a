#pragma once

#include <functional>
#include <memory>

#include "whisker/fourier.hpp"

namespace whisker {

// ---------------------------------------------------------------------------
// Unperturbed separatrix and time reversal
// ---------------------------------------------------------------------------

/// Phi^0(z) = 4 arctan z, principal branch; odd, real on the real axis,
/// singular at z = +-i. Satisfies Phi^0(z) + Phi^0(1/z) = 2 pi for Re z > 0.
inline Complex phi0(Complex z) {
  return 4.0 * std::atan(z);
}

/// d/dz Phi^0 = 4/(1+z^2).
inline Complex dphi0(Complex z) {
  return 4.0 / (1.0 + z * z);
}

inline Complex sin_phi0(Complex z) {
  // sin(4 arctan z) = 4z(1-z^2)/(1+z^2)^2, pole-free off z = +-i
  Complex z2 = z * z;
  Complex b = 1.0 + z2;
  return 4.0 * z * (1.0 - z2) / (b * b);
}

inline Complex cos_phi0(Complex z) {
  // cos(4 arctan z) = (z^4 - 6z^2 + 1)/(1+z^2)^2
  Complex z2 = z * z;
  Complex b = 1.0 + z2;
  return (z2 * z2 - 6.0 * z2 + 1.0) / (b * b);
}

/// T(z, theta) = (1/z, -theta); involution fixing (1, 0).
inline std::pair<Complex, std::vector<double>> time_reversal(Complex z,
                                                             const std::vector<double>& theta) {
  if (z == Complex(0.0, 0.0)) throw std::domain_error("time_reversal: z = 0");
  std::vector<double> th(theta);
  for (auto& t : th) t = -t;
  return {1.0 / z, th};
}

// ---------------------------------------------------------------------------
// Wronskian pair of L_t = d^2/dt^2 - gamma^2 cos Phi^0(e^{gamma t})
// ---------------------------------------------------------------------------

inline Complex wr_P(Complex z) { return z / (z * z + 1.0); }
inline Complex wr_Q(Complex z) { return (z * z - 1.0) / z; }

/// The two zero modes and their z-realizations:
///   u1(t) = 1/cosh(gamma t) = W_Phi1(e^{gamma t}),   W_Phi1 = 2 P
///   u2(t) = t/(2 cosh gamma t) + sinh(gamma t)/(2 gamma)
///         = W_Phi2(e^{gamma t}),   W_Phi2 = gamma^{-1} P ln + gamma^{-1} Q / 4
/// det of the fundamental matrix (u1, u2) is 1.
struct WronskianFuncs {
  Complex gamma;

  Complex P(Complex z) const { return wr_P(z); }
  Complex Q(Complex z) const { return wr_Q(z); }
  Complex W_phi1(Complex z) const { return 2.0 * wr_P(z); }
  Complex W_phi2(Complex z) const {
    return (wr_P(z) * std::log(z) + 0.25 * wr_Q(z)) / gamma;
  }
  Complex u1(Complex t) const { return 1.0 / std::cosh(gamma * t); }
  Complex u2(Complex t) const {
    return t / (2.0 * std::cosh(gamma * t)) + std::sinh(gamma * t) / (2.0 * gamma);
  }
};

/// K_Phi(s; z) = W_Phi2(z) W_Phi1(z e^{gamma s}) - W_Phi1(z) W_Phi2(z e^{gamma s}).
/// The logarithms cancel along the characteristic, leaving the rational form
///   -2s P(z) P(zw) + (2 gamma)^{-1} [Q(z) P(zw) - P(z) Q(zw)],  w = e^{gamma s},
/// with the 1/z of Q combined so the only singularities are z in {+-i, +-i/w}.
inline Complex K_phi_kernel(Complex gamma, double s, Complex z) {
  Complex w = std::exp(gamma * s);
  Complex z2 = z * z;
  Complex A = z2 * w * w + 1.0;  // (zw)^2 + 1
  Complex B = z2 + 1.0;
  if (std::abs(A) < 1e-6 || std::abs(B) < 1e-6)
    throw std::domain_error("K_phi_kernel: evaluation too close to a kernel pole");
  Complex first = -2.0 * s * z2 * w / (B * A);
  Complex second = ((z2 - 1.0) * w / A - (z2 * w * w - 1.0) / (B * w)) / (2.0 * gamma);
  return first + second;
}

/// Rotator kernel K_Psi(s; z) = -s.
inline Complex K_psi_kernel(double s, Complex /*z*/) { return Complex(-s, 0.0); }

/// K_Phi(s;z) e^{2 gamma s}, the form used when the z^2 factor of an A_1
/// integrand has been pulled out; bounded as s -> -infinity.
inline Complex K_phi_kernel_pulled(Complex gamma, double s, Complex z) {
  Complex w = std::exp(gamma * s);
  Complex z2 = z * z;
  Complex A = z2 * w * w + 1.0;
  Complex B = z2 + 1.0;
  if (std::abs(A) < 1e-6 || std::abs(B) < 1e-6)
    throw std::domain_error("K_phi_kernel_pulled: evaluation too close to a kernel pole");
  Complex w3 = w * w * w;
  Complex first = -2.0 * s * z2 * w3 / (B * A);
  Complex second = ((z2 - 1.0) * w3 / A - w * (z2 * w * w - 1.0) / B) / (2.0 * gamma);
  return first + second;
}

inline Complex K_psi_kernel_pulled(Complex gamma, double s, Complex /*z*/) {
  Complex w2 = std::exp(2.0 * gamma * s);
  return -s * w2;
}

// ---------------------------------------------------------------------------
// Chebyshev grid, barycentric interpolation, Taylor extraction
// ---------------------------------------------------------------------------

/// Chebyshev-Lobatto nodes on [-a, a] with barycentric weights.
struct ChebGrid {
  int n = 0;
  double a = 1.0;
  std::vector<double> x;     // nodes, decreasing from a to -a
  std::vector<double> wb;    // barycentric weights

  ChebGrid() = default;
  ChebGrid(int n_, double a_) : n(n_), a(a_) {
    if (n < 2) throw std::invalid_argument("ChebGrid: need at least 2 nodes");
    x.resize(n);
    wb.resize(n);
    for (int j = 0; j < n; ++j) {
      x[j] = a * std::cos(PI * j / (n - 1));
      wb[j] = (j % 2 == 0) ? 1.0 : -1.0;
    }
    wb[0] *= 0.5;
    wb[n - 1] *= 0.5;
  }

  /// Barycentric evaluation of the interpolant through (x_j, v_j) at zeta.
  Complex interp(const std::vector<Complex>& v, Complex zeta) const {
    Complex num(0.0, 0.0), den(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      Complex diff = zeta - x[j];
      if (std::abs(diff) < 1e-300) return v[j];
      Complex t = wb[j] / diff;
      num += t * v[j];
      den += t;
    }
    return num / den;
  }

  /// Differentiation matrix for Lobatto nodes (rows act on node values).
  std::vector<std::vector<double>> diff_matrix() const {
    std::vector<std::vector<double>> D(n, std::vector<double>(n, 0.0));
    std::vector<double> c(n, 1.0);
    c[0] = 2.0;
    c[n - 1] = 2.0;
    for (int i = 0; i < n; ++i) {
      double rowsum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        double sgn = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        D[i][j] = (c[i] / c[j]) * sgn / (x[i] - x[j]);
        rowsum += D[i][j];
      }
      D[i][i] = -rowsum;  // negative row-sum trick for the diagonal
    }
    return D;
  }
};

/// Taylor coefficients c_0..c_K of the interpolant at z = 0, by discrete
/// Cauchy integrals on a circle of radius r (64 nodes by default).
inline std::vector<Complex> cauchy_taylor(const ChebGrid& grid,
                                          const std::vector<Complex>& values, double r,
                                          int K, int m = 64) {
  std::vector<Complex> circ(m);
  for (int j = 0; j < m; ++j) {
    Complex zeta = r * std::exp(Complex(0.0, 2.0 * PI * j / m));
    circ[j] = grid.interp(values, zeta);
  }
  std::vector<Complex> c(K + 1, Complex(0.0, 0.0));
  for (int k = 0; k <= K; ++k) {
    Complex s(0.0, 0.0);
    for (int j = 0; j < m; ++j)
      s += circ[j] * std::exp(Complex(0.0, -2.0 * PI * j * k / m));
    c[k] = s / (double(m) * std::pow(r, k));
  }
  return c;
}

/// Stable evaluation of h~(u) = (h(u) - c0 - c1 u)/u^2 given Taylor data
/// c_0..c_8; for small |u| the direct division is replaced by the Taylor tail.
struct PulledProfile {
  const ChebGrid* grid;
  std::vector<Complex> values;   // h at the nodes
  std::vector<Complex> taylor;   // c_0..c_8 at z = 0
  double guard = 0.02;

  Complex eval_tilde(Complex u) const {
    if (std::abs(u) < guard) {
      // c2 + c3 u + ... + c8 u^6
      Complex acc(0.0, 0.0);
      for (int k = static_cast<int>(taylor.size()) - 1; k >= 2; --k)
        acc = acc * u + taylor[k];
      return acc;
    }
    Complex h = grid->interp(values, u);
    return (h - taylor[0] - taylor[1] * u) / (u * u);
  }

  /// delta_2 h at u: h(u) - c0 - c1 u, evaluated through the pulled form.
  Complex eval_delta2(Complex u) const { return u * u * eval_tilde(u); }
};

// ---------------------------------------------------------------------------
// Grid functions on [-z_max, z_max] x T^d
// ---------------------------------------------------------------------------

/// (1+d)-vector field sampled on a Chebyshev z-grid, Fourier in theta.
/// Mode-major storage: per mode q, per component, a z-profile. Immutable by
/// convention once assembled; all evaluators are const.
struct GridFunction {
  std::shared_ptr<const ChebGrid> zgrid;
  int d = 1;
  int arity = 2;
  std::map<Mode, std::vector<std::vector<Complex>>> profiles;  // q -> [comp][node]

  GridFunction() = default;
  GridFunction(std::shared_ptr<const ChebGrid> zg, int d_)
      : zgrid(std::move(zg)), d(d_), arity(1 + d_) {}

  std::vector<std::vector<Complex>>& profile(const Mode& q) {
    auto it = profiles.find(q);
    if (it == profiles.end()) {
      auto& p = profiles[q];
      p.assign(arity, std::vector<Complex>(zgrid->n, Complex(0.0, 0.0)));
      return p;
    }
    return it->second;
  }

  bool has_mode(const Mode& q) const { return profiles.count(q) > 0; }

  /// Component value at complex z and real theta.
  Complex eval_comp(int comp, Complex z, const std::vector<double>& theta) const {
    Complex s(0.0, 0.0);
    for (const auto& [q, p] : profiles) {
      double ph = 0.0;
      for (int r = 0; r < d; ++r) ph += q[r] * theta[r];
      s += zgrid->interp(p[comp], z) * std::exp(Complex(0.0, ph));
    }
    return s;
  }

  std::vector<Complex> eval(Complex z, const std::vector<double>& theta) const {
    std::vector<Complex> out(arity, Complex(0.0, 0.0));
    for (const auto& [q, p] : profiles) {
      double ph = 0.0;
      for (int r = 0; r < d; ++r) ph += q[r] * theta[r];
      Complex e = std::exp(Complex(0.0, ph));
      for (int c = 0; c < arity; ++c) out[c] += zgrid->interp(p[c], z) * e;
    }
    return out;
  }

  /// XPoly of theta at one z-node.
  XPoly at_node(int i) const {
    XPoly x(d);
    for (const auto& [q, p] : profiles) {
      if (std::abs(p[0][i]) > 0.0) x.phi.set(q, p[0][i]);
      for (int r = 0; r < d; ++r)
        if (std::abs(p[1 + r][i]) > 0.0) x.psi[r].set(q, p[1 + r][i]);
    }
    return x;
  }

  /// Sup over z-nodes of sum_q |coeff| (bounds the true sup norm on the grid).
  double sup_norm() const {
    if (!zgrid) return 0.0;
    double worst = 0.0;
    for (int i = 0; i < zgrid->n; ++i) {
      std::vector<double> acc(arity, 0.0);
      for (const auto& [q, p] : profiles)
        for (int c = 0; c < arity; ++c) acc[c] += std::abs(p[c][i]);
      for (int c = 0; c < arity; ++c) worst = std::max(worst, acc[c]);
    }
    return worst;
  }

  double max_abs_diff(const GridFunction& o) const {
    double worst = 0.0;
    auto scan = [&](const GridFunction& a, const GridFunction& b) {
      for (const auto& [q, p] : a.profiles)
        for (int c = 0; c < arity; ++c)
          for (int i = 0; i < zgrid->n; ++i) {
            Complex other = b.has_mode(q) ? b.profiles.at(q)[c][i] : Complex(0.0, 0.0);
            worst = std::max(worst, std::abs(p[c][i] - other));
          }
    };
    scan(*this, o);
    scan(o, *this);
    return worst;
  }

  /// Max of |value| and |d/dz| at z = 0 over all modes and components;
  /// membership defect for the space A_1.
  double a1_defect(double cauchy_radius = 0.25) const {
    double worst = 0.0;
    for (const auto& [q, p] : profiles)
      for (int c = 0; c < arity; ++c) {
        auto tc = cauchy_taylor(*zgrid, p[c], cauchy_radius, 1);
        worst = std::max({worst, std::abs(tc[0]), std::abs(tc[1])});
      }
    return worst;
  }

  int theta_degree_above(double thresh) const {
    int deg = 0;
    for (const auto& [q, p] : profiles)
      for (int c = 0; c < arity; ++c)
        for (int i = 0; i < zgrid->n; ++i)
          if (std::abs(p[c][i]) > thresh) deg = std::max(deg, l1_norm(q));
    return deg;
  }
};

// ---------------------------------------------------------------------------
// Quadrature over the characteristic history s in (-inf, 0]
// ---------------------------------------------------------------------------

/// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n / 2 + n % 2; ++i) {
    double t = std::cos(PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * t * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (t * p0 - p1) / (t * t - 1.0);
      double dt = -p0 / pp;
      t += dt;
      if (std::abs(dt) < 1e-15) break;
    }
    nodes[i] = -t;
    nodes[n - 1 - i] = t;
    weights[i] = 2.0 / ((1.0 - t * t) * pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

struct SQuadrature {
  std::vector<double> s;
  std::vector<double> w;
  double s_min = 0.0;
};

/// Composite Gauss-Legendre panels on [s_min, 0], widths growing geometrically
/// away from s = 0 but capped so the e^{i omega.q s} phases stay resolved.
inline SQuadrature build_s_quadrature(double gamma_re, double max_freq, double tail_tol,
                                      int panel_points, double w0_units, double ratio,
                                      double panel_scale = 1.0) {
  SQuadrature quad;
  quad.s_min = std::log(tail_tol) / gamma_re;
  std::vector<double> gl_x, gl_w;
  gauss_legendre(panel_points, gl_x, gl_w);
  double w_cap = std::min(4.0 / gamma_re, 40.0 / (1.0 + max_freq));
  double width = std::min(w0_units / gamma_re, w_cap) * panel_scale;
  w_cap *= panel_scale;
  double hi = 0.0;
  while (hi > quad.s_min) {
    double lo = std::max(hi - width, quad.s_min);
    double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
    for (int k = 0; k < panel_points; ++k) {
      quad.s.push_back(mid + half * gl_x[k]);
      quad.w.push_back(half * gl_w[k]);
    }
    hi = lo;
    width = std::min(width * ratio, w_cap);
  }
  return quad;
}

// ---------------------------------------------------------------------------
// The inverse kernel K^{-1} on A_1
// ---------------------------------------------------------------------------

struct KernelParams {
  Complex gamma;
  FrequencyVector omega;
  double tau = 0.1;
  int panel_points = 32;
  double w0 = 0.2;
  double ratio = 1.6;
  double tail_tol = 1e-13;
  double cauchy_radius = 0.25;
  double panel_scale = 1.0;  // halve to check quadrature convergence
};

/// (K^{-1} delta_2 h)(z, theta) = int_{-inf}^0 K(s; z) (delta_2 h)(z e^{gamma s},
/// theta + omega s) ds, computed mode by mode with the z^2 factor of the
/// A_1 integrand pulled out analytically. The result vanishes to second order
/// at z = 0 by construction.
inline GridFunction K_inverse_apply(const KernelParams& par, const GridFunction& h) {
  const ChebGrid& zg = *h.zgrid;
  GridFunction out(h.zgrid, h.d);

  double max_freq = 0.0;
  for (const auto& [q, p] : h.profiles) max_freq = std::max(max_freq, std::abs(par.omega.dot(q)));
  SQuadrature quad = build_s_quadrature(par.gamma.real(), max_freq, par.tail_tol,
                                        par.panel_points, par.w0, par.ratio,
                                        par.panel_scale);
  const int ns = static_cast<int>(quad.s.size());

  // kernel tables: [component 0] pendulum, [1..] rotator, per (s, z-node)
  std::vector<std::vector<Complex>> kphi(ns, std::vector<Complex>(zg.n));
  std::vector<Complex> kpsi(ns);
  for (int k = 0; k < ns; ++k) {
    kpsi[k] = K_psi_kernel_pulled(par.gamma, quad.s[k], 0.0);
    for (int i = 0; i < zg.n; ++i)
      kphi[k][i] = K_phi_kernel_pulled(par.gamma, quad.s[k], zg.x[i]);
  }

  for (const auto& [q, prof] : h.profiles) {
    double wq = par.omega.dot(q);
    std::vector<Complex> phase(ns);
    for (int k = 0; k < ns; ++k)
      phase[k] = std::exp(Complex(0.0, wq * quad.s[k])) * quad.w[k];

    auto& oprof = out.profile(q);
    for (int c = 0; c < h.arity; ++c) {
      PulledProfile pulled{&zg, prof[c], cauchy_taylor(zg, prof[c], par.cauchy_radius, 8)};
      for (int i = 0; i < zg.n; ++i) {
        Complex zi = zg.x[i];
        Complex acc(0.0, 0.0);
        for (int k = 0; k < ns; ++k) {
          Complex u = zi * std::exp(par.gamma * quad.s[k]);
          Complex ker = (c == 0) ? kphi[k][i] : kpsi[k];
          acc += phase[k] * ker * pulled.eval_tilde(u);
        }
        oprof[c][i] = zi * zi * acc;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Characteristic residuals
// ---------------------------------------------------------------------------

using FieldEvaluator =
    std::function<std::vector<Complex>(Complex, const std::vector<double>&)>;

/// L^2 F at (z, theta) by a 5-point second derivative of
/// t -> F(z e^{gamma t}, theta + omega t).
inline std::vector<Complex> L2_along_characteristic(const FrequencyVector& om, Complex gamma,
                                                    const FieldEvaluator& F, Complex z,
                                                    const std::vector<double>& theta,
                                                    double h) {
  auto shifted = [&](double t) {
    std::vector<double> th(theta);
    for (int r = 0; r < om.dim(); ++r) th[r] += om.omega[r] * t;
    return F(z * std::exp(gamma * t), th);
  };
  auto fm2 = shifted(-2 * h), fm1 = shifted(-h), f0 = shifted(0.0), fp1 = shifted(h),
       fp2 = shifted(2 * h);
  std::vector<Complex> out(f0.size());
  for (std::size_t c = 0; c < f0.size(); ++c)
    out[c] = (-fm2[c] + 16.0 * fm1[c] - 30.0 * f0[c] + 16.0 * fp1[c] - fp2[c]) /
             (12.0 * h * h);
  return out;
}

/// First derivative along the characteristic: (L F)(z, theta).
inline std::vector<Complex> L_along_characteristic(const FrequencyVector& om, Complex gamma,
                                                   const FieldEvaluator& F, Complex z,
                                                   const std::vector<double>& theta,
                                                   double h) {
  auto shifted = [&](double t) {
    std::vector<double> th(theta);
    for (int r = 0; r < om.dim(); ++r) th[r] += om.omega[r] * t;
    return F(z * std::exp(gamma * t), th);
  };
  auto fm2 = shifted(-2 * h), fm1 = shifted(-h), fp1 = shifted(h), fp2 = shifted(2 * h);
  std::vector<Complex> out(fm1.size());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = (fm2[c] - 8.0 * fm1[c] + 8.0 * fp1[c] - fp2[c]) / (12.0 * h);
  return out;
}

/// sup over the samples of |L^2 F - rhs|.
inline double residual_characteristic(const FrequencyVector& om, Complex gamma,
                                      const FieldEvaluator& F, const FieldEvaluator& rhs,
                                      const std::vector<std::pair<Complex, std::vector<double>>>& samples,
                                      double h) {
  double worst = 0.0;
  for (const auto& [z, th] : samples) {
    auto lhs = L2_along_characteristic(om, gamma, F, z, th, h);
    auto r = rhs(z, th);
    for (std::size_t c = 0; c < lhs.size(); ++c)
      worst = std::max(worst, std::abs(lhs[c] - r[c]));
  }
  return worst;
}

}  // namespace whisker
