#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "whisker/model.hpp"
#include "whisker/separatrix.hpp"

using namespace whisker;

namespace {

FrequencyVector golden() {
  FrequencyVector om;
  om.omega = {(1.0 + std::sqrt(5.0)) / 2.0};
  om.nu = 1.0;
  return om;
}

std::shared_ptr<ChebGrid> make_zgrid(int n = 72, double a = 3.0) {
  return std::make_shared<ChebGrid>(n, a);
}

KernelParams make_params(Complex gamma) {
  KernelParams par;
  par.gamma = gamma;
  par.omega = golden();
  return par;
}

// Fill a grid function from closed-form component functions of (z, q).
template <typename Fn>
GridFunction make_grid_function(std::shared_ptr<ChebGrid> zg, int d,
                                const std::vector<Mode>& modes, Fn&& fn) {
  GridFunction h(zg, d);
  for (const auto& q : modes) {
    auto& p = h.profile(q);
    for (int c = 0; c < h.arity; ++c)
      for (int i = 0; i < zg->n; ++i) p[c][i] = fn(c, q, Complex(zg->x[i]));
  }
  return h;
}

}  // namespace

TEST_CASE("phi0 closed-form identities") {
  REQUIRE(std::abs(phi0(Complex(0.0))) == 0.0);
  REQUIRE(std::abs(phi0(Complex(1.0)) - Complex(PI)) < 1e-15);
  REQUIRE(std::abs(phi0(Complex(2.0)) + phi0(Complex(0.5)) - Complex(2.0 * PI)) < 1e-14);

  // odd
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    Complex z(u(rng), 0.3 * u(rng));
    REQUIRE(std::abs(phi0(-z) + phi0(z)) < 1e-13);
    // sin/cos rational forms agree with the transcendental ones
    REQUIRE(std::abs(sin_phi0(z) - std::sin(phi0(z))) < 1e-12);
    REQUIRE(std::abs(cos_phi0(z) - std::cos(phi0(z))) < 1e-12);
    REQUIRE(std::abs(dphi0(z) - 4.0 / (1.0 + z * z)) < 1e-14);
  }
}

TEST_CASE("time reversal") {
  auto [z1, th1] = time_reversal(Complex(1.0), {0.0});
  REQUIRE(z1 == Complex(1.0));
  REQUIRE(th1[0] == 0.0);

  auto [z2, th2] = time_reversal(Complex(2.0), {0.7});
  REQUIRE(std::abs(z2 - Complex(0.5)) < 1e-15);
  REQUIRE(th2[0] == -0.7);

  auto [z3, th3] = time_reversal(z2, th2);
  REQUIRE(std::abs(z3 - Complex(2.0)) < 1e-15);
  REQUIRE(th3[0] == 0.7);

  REQUIRE_THROWS_AS(time_reversal(Complex(0.0), {0.0}), std::domain_error);
}

TEST_CASE("wronskian functions") {
  WronskianFuncs wf{Complex(0.8, 0.0)};
  double gamma = 0.8;

  REQUIRE(std::abs(wf.u1(0.0) - Complex(1.0)) < 1e-15);
  REQUIRE(std::abs(wf.u2(0.0)) < 1e-15);

  // W_{Phi j}(e^{gamma t}) == u_j(t)
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 20; ++t) {
    double tt = u(rng);
    Complex z = std::exp(gamma * tt);
    REQUIRE(std::abs(wf.W_phi1(z) - wf.u1(tt)) < 1e-13);
    REQUIRE(std::abs(wf.W_phi2(z) - wf.u2(tt)) < 1e-13);
  }

  // Wronskian u1 u2' - u1' u2 = 1 at 20 random times (det w = 1)
  double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    double tt = u(rng);
    Complex du1 = (wf.u1(tt + h) - wf.u1(tt - h)) / (2.0 * h);
    Complex du2 = (wf.u2(tt + h) - wf.u2(tt - h)) / (2.0 * h);
    REQUIRE(std::abs(wf.u1(tt) * du2 - du1 * wf.u2(tt) - 1.0) < 1e-8);
  }

  // both are zero modes of L_t = d^2/dt^2 - gamma^2 cos Phi0(e^{gamma t});
  // uses cos Phi0(e^{gamma t}) = 2 tanh^2(gamma t) - 1
  double hh = 1e-4;
  for (int t = 0; t < 20; ++t) {
    double tt = u(rng);
    double pot = gamma * gamma * (2.0 * std::pow(std::tanh(gamma * tt), 2) - 1.0);
    REQUIRE(std::abs(2.0 * std::pow(std::tanh(gamma * tt), 2) - 1.0 -
                     cos_phi0(std::exp(gamma * tt)).real()) < 1e-12);
    Complex l1 = oracle::second_diff([&](double x) { return wf.u1(x); }, tt, hh) -
                 pot * wf.u1(tt);
    Complex l2 = oracle::second_diff([&](double x) { return wf.u2(x); }, tt, hh) -
                 pot * wf.u2(tt);
    REQUIRE(std::abs(l1) < 1e-6);
    REQUIRE(std::abs(l2) < 1e-6);
  }
}

TEST_CASE("kernels") {
  Complex gamma(1.0, 0.0);

  // K_Psi(s; z) = -s
  REQUIRE(std::abs(K_psi_kernel(-1.0, Complex(0.3)) - Complex(1.0)) < 1e-15);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-2.5, 2.5);

  // antisymmetric combination vanishes at s = 0
  for (int t = 0; t < 10; ++t)
    REQUIRE(std::abs(K_phi_kernel(gamma, 0.0, Complex(u(rng), 0.1 * u(rng)))) < 1e-13);

  // rational form matches the Wronskian form (real z > 0, principal log)
  WronskianFuncs wf{gamma};
  for (int t = 0; t < 30; ++t) {
    double s = -2.4 * (t % 7 + 1) / 7.0;
    Complex z = std::exp(u(rng) * 0.5);  // positive real
    Complex w = std::exp(gamma * s);
    Complex ref = wf.W_phi2(z) * wf.W_phi1(z * w) - wf.W_phi1(z) * wf.W_phi2(z * w);
    REQUIRE(std::abs(K_phi_kernel(gamma, s, z) - ref) < 1e-12);
  }

  // finite at z = 0: K_Phi(s; 0) = -sinh(gamma s)/gamma
  for (double s : {-0.3, -1.0, -2.7})
    REQUIRE(std::abs(K_phi_kernel(gamma, s, Complex(0.0)) + std::sinh(gamma * s) / gamma) <
            1e-13);

  // bound |K_Phi(s;z)| <= C (1 - tau^2)^{-2} gamma^{-1} e^{gamma |s|} on the strip
  double tau = 0.3;
  double C_fit = 0.0;
  for (int is = 0; is < 24; ++is)
    for (int iz = 0; iz < 40; ++iz) {
      double s = -6.0 * (is + 1) / 24.0;
      Complex z(-1.3 + 2.6 * iz / 39.0, tau);
      double bound = std::exp(std::abs(gamma) * std::abs(s)) /
                     (std::abs(gamma) * std::pow(1.0 - tau * tau, 2));
      C_fit = std::max(C_fit, std::abs(K_phi_kernel(gamma, s, z)) / bound);
    }
  REQUIRE(C_fit < 10.0);  // finite, O(1) constant

  // pulled kernels are the plain kernels times e^{2 gamma s}
  for (int t = 0; t < 20; ++t) {
    double s = -3.0 * (t + 1) / 20.0;
    Complex z(u(rng), 0.0);
    Complex w2 = std::exp(2.0 * gamma * s);
    REQUIRE(std::abs(K_phi_kernel_pulled(gamma, s, z) - w2 * K_phi_kernel(gamma, s, z)) <
            1e-12);
    REQUIRE(std::abs(K_psi_kernel_pulled(gamma, s, z) - w2 * K_psi_kernel(s, z)) < 1e-15);
  }
}

TEST_CASE("chebyshev interpolation and taylor extraction") {
  ChebGrid zg(64, 3.0);
  // interpolate an analytic function with poles at +-i
  std::vector<Complex> vals(zg.n);
  auto fn = [](Complex z) { return z * z / (1.0 + 0.1 * z * z) + std::exp(0.2 * z); };
  for (int i = 0; i < zg.n; ++i) vals[i] = fn(Complex(zg.x[i]));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.9, 2.9);
  for (int t = 0; t < 30; ++t) {
    Complex z(u(rng), 0.0);
    REQUIRE(std::abs(zg.interp(vals, z) - fn(z)) < 1e-12);
  }
  // node hit
  REQUIRE(std::abs(zg.interp(vals, Complex(zg.x[5])) - vals[5]) < 1e-15);

  // Taylor coefficients at 0: f = z^2/(1+0.1z^2) + e^{0.2 z}
  // c0 = 1, c1 = 0.2, c2 = 1 + 0.02, c3 = 0.2^3/6 - 0.1... just check against
  // high-accuracy series of the two parts.
  auto tc = cauchy_taylor(zg, vals, 0.25, 8);
  REQUIRE(std::abs(tc[0] - Complex(1.0)) < 1e-12);
  REQUIRE(std::abs(tc[1] - Complex(0.2)) < 1e-12);
  REQUIRE(std::abs(tc[2] - Complex(1.0 + 0.02)) < 1e-11);

  // differentiation matrix: exact on polynomials
  auto D = zg.diff_matrix();
  std::vector<Complex> poly(zg.n), dpoly(zg.n);
  for (int i = 0; i < zg.n; ++i) {
    double x = zg.x[i];
    poly[i] = Complex(1.0 + x * (2.0 + x * (3.0 + 0.5 * x)));
    dpoly[i] = Complex(2.0 + 6.0 * x + 1.5 * x * x);
  }
  for (int i = 0; i < zg.n; ++i) {
    Complex acc(0.0, 0.0);
    for (int j = 0; j < zg.n; ++j) acc += D[i][j] * poly[j];
    REQUIRE(std::abs(acc - dpoly[i]) < 1e-10);
  }
}

TEST_CASE("pulled profile evaluation") {
  ChebGrid zg(64, 3.0);
  // h = z^2 * htilde with htilde = 1/(1 + z^2/9) analytic on the grid
  std::vector<Complex> vals(zg.n);
  for (int i = 0; i < zg.n; ++i) {
    Complex z(zg.x[i]);
    vals[i] = z * z / (1.0 + z * z / 9.0);
  }
  PulledProfile p{&zg, vals, cauchy_taylor(zg, vals, 0.25, 8)};
  for (double uu : {1e-10, 1e-6, 1e-3, 0.019, 0.021, 0.3, 1.5}) {
    Complex expect = 1.0 / (1.0 + uu * uu / 9.0);
    REQUIRE(std::abs(p.eval_tilde(Complex(uu)) - expect) < 1e-11);
  }
}

TEST_CASE("K_inverse_apply on closed forms") {
  auto zg = make_zgrid();
  Complex gamma(1.0, 0.0);
  auto par = make_params(gamma);

  // h = 0 -> 0
  GridFunction zero(zg, 1);
  auto out0 = K_inverse_apply(par, zero);
  REQUIRE(out0.sup_norm() == 0.0);

  // theta-independent h = z^2 in the Psi block: (gamma z d/dz)^2 f = z^2
  // has the A_1 solution f = z^2/(4 gamma^2).
  auto h = make_grid_function(zg, 1, {Mode{0}}, [&](int c, const Mode&, Complex z) {
    return c == 1 ? z * z : Complex(0.0);
  });
  auto f = K_inverse_apply(par, h);
  for (int i = 0; i < zg->n; ++i) {
    Complex z(zg->x[i]);
    REQUIRE(std::abs(f.profiles.at(Mode{0})[1][i] - z * z / (4.0 * gamma * gamma)) < 1e-10);
    REQUIRE(std::abs(f.profiles.at(Mode{0})[0][i]) < 1e-10);  // Phi block untouched
  }
}

TEST_CASE("K_inverse round trip against the finite-difference operator") {
  auto zg = make_zgrid();
  Complex gamma(1.0, 0.0);
  auto par = make_params(gamma);
  auto om = golden();

  // random-ish A_1 input, exact z^2 factor, smooth theta dependence
  std::vector<Mode> modes = {{0}, {1}, {-1}, {2}, {-2}};
  auto h = make_grid_function(zg, 1, modes, [&](int c, const Mode& q, Complex z) {
    double a = 0.3 + 0.2 * c + 0.1 * q[0];
    double b = 0.1 - 0.05 * q[0] + 0.07 * c;
    return z * z * (a + b * z) / (1.0 + z * z / 16.0);
  });

  auto f = K_inverse_apply(par, h);
  REQUIRE(f.a1_defect() < 1e-10);

  // K f = (L^2 f - gamma^2 cos(Phi0) f , L^2 f) should reproduce h
  FieldEvaluator F = [&](Complex z, const std::vector<double>& th) { return f.eval(z, th); };
  FieldEvaluator target = [&](Complex z, const std::vector<double>& th) {
    auto v = h.eval(z, th);
    auto fv = f.eval(z, th);
    v[0] += gamma * gamma * cos_phi0(z) * fv[0];  // move potential term over
    return v;
  };
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uz(-2.0, 2.0), ut(0.0, 2.0 * PI);
  std::vector<std::pair<Complex, std::vector<double>>> samples;
  for (int t = 0; t < 40; ++t) samples.emplace_back(Complex(uz(rng)), std::vector<double>{ut(rng)});
  double resid = residual_characteristic(om, gamma, F, target, samples, 1e-3);
  REQUIRE(resid < 1e-8);

  // halving panel widths moves the answer by less than 10x the tail tolerance
  auto par_half = par;
  par_half.panel_scale = 0.5;
  auto f2 = K_inverse_apply(par_half, h);
  REQUIRE(f.max_abs_diff(f2) < 10.0 * par.tail_tol);
}

TEST_CASE("A_1 preservation on random inputs") {
  auto zg = make_zgrid();
  auto par = make_params(Complex(0.9, 0.0));
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Mode> modes = {{0}, {1}, {-1}, {3}};
  auto h = make_grid_function(zg, 1, modes, [&](int c, const Mode& q, Complex z) {
    double a = u(rng), b = u(rng);
    (void)c;
    (void)q;
    return z * z * (a + b * z / 3.0);
  });
  auto f = K_inverse_apply(par, h);
  REQUIRE(f.a1_defect() < 1e-10);
}

TEST_CASE("residual_characteristic closed forms") {
  auto om = golden();
  double g = 1.0;
  Complex gamma(g, 0.0);

  // F = X0 = (Phi0, 0), rhs = (g^2 sin Phi0, 0): L^2 X0 = (g^2 sin Phi0, 0)
  FieldEvaluator X0 = [&](Complex z, const std::vector<double>&) {
    return std::vector<Complex>{phi0(z), Complex(0.0)};
  };
  FieldEvaluator rhs0 = [&](Complex z, const std::vector<double>&) {
    return std::vector<Complex>{g * g * sin_phi0(z), Complex(0.0)};
  };
  std::vector<std::pair<Complex, std::vector<double>>> samples;
  for (int i = 0; i < 30; ++i)
    samples.emplace_back(Complex(-2.0 + 4.0 * i / 29.0), std::vector<double>{0.4 * i});
  REQUIRE(residual_characteristic(om, gamma, X0, rhs0, samples, 1e-3) < 1e-7);

  // constants are annihilated
  FieldEvaluator cst = [](Complex, const std::vector<double>&) {
    return std::vector<Complex>{Complex(2.0, 1.0), Complex(-0.5)};
  };
  FieldEvaluator zero = [](Complex, const std::vector<double>&) {
    return std::vector<Complex>{Complex(0.0), Complex(0.0)};
  };
  REQUIRE(residual_characteristic(om, gamma, cst, zero, samples, 1e-3) < 1e-9);

  // eigenfunction z e^{i theta}: L^2 F = (i omega + gamma)^2 F
  Complex lam = Complex(0.0, om.omega[0]) + gamma;
  FieldEvaluator eig = [&](Complex z, const std::vector<double>& th) {
    Complex v = z * std::exp(Complex(0.0, th[0]));
    return std::vector<Complex>{v, Complex(0.0)};
  };
  FieldEvaluator eigr = [&](Complex z, const std::vector<double>& th) {
    Complex v = z * std::exp(Complex(0.0, th[0]));
    return std::vector<Complex>{lam * lam * v, Complex(0.0)};
  };
  REQUIRE(residual_characteristic(om, gamma, eig, eigr, samples, 1e-4) < 1e-8);
}

TEST_CASE("time reversal intertwines with L") {
  // L(F o T) = -(L F) o T for a closed-form F, checked through the
  // characteristic stencils on points where both z and 1/z are comfortable.
  auto om = golden();
  Complex gamma(1.0, 0.0);
  auto F = [&](Complex z, const std::vector<double>& th) {
    return std::vector<Complex>{z * std::exp(Complex(0.0, th[0])) + z * z * 0.3,
                                std::cos(th[0]) / (1.0 + z * z * 0.1)};
  };
  FieldEvaluator FoT = [&](Complex z, const std::vector<double>& th) {
    auto [zi, thi] = time_reversal(z, th);
    return F(zi, thi);
  };
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> uz(0.5, 2.0), ut(0.0, 2.0 * PI);
  for (int t = 0; t < 20; ++t) {
    Complex z(uz(rng));
    std::vector<double> th{ut(rng)};
    auto lhs = L_along_characteristic(om, gamma, FoT, z, th, 1e-4);
    auto [zi, thi] = time_reversal(z, th);
    auto rhs = L_along_characteristic(om, gamma, F, zi, thi, 1e-4);
    for (int c = 0; c < 2; ++c) REQUIRE(std::abs(lhs[c] + rhs[c]) < 1e-7);
  }
}
