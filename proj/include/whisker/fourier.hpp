#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace whisker {

using Complex = std::complex<double>;

inline constexpr double PI = 3.14159265358979323846;

/// Fourier mode index q in Z^d.
using Mode = std::vector<int>;

inline int l1_norm(const Mode& q) {
  int s = 0;
  for (int qi : q) s += std::abs(qi);
  return s;
}

inline Mode negate(const Mode& q) {
  Mode m(q);
  for (int& qi : m) qi = -qi;
  return m;
}

/// Finitely supported Fourier series on T^d (scalar-valued).
///
/// Coefficients live in an ordered map so that iteration order, and hence
/// every downstream serialization, is deterministic. A series flagged as
/// representing a real-valued function satisfies coeff(-q) == conj(coeff(q));
/// that property is checked, not stored.
class FourierPoly {
 public:
  FourierPoly() : dim_(1) {}
  explicit FourierPoly(int dim) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("FourierPoly: dim must be >= 1");
  }

  int dim() const { return dim_; }
  bool empty() const { return coeffs_.empty(); }
  std::size_t support_size() const { return coeffs_.size(); }

  const std::map<Mode, Complex>& coeffs() const { return coeffs_; }

  Complex coeff(const Mode& q) const {
    auto it = coeffs_.find(q);
    return it == coeffs_.end() ? Complex(0.0, 0.0) : it->second;
  }

  void set(const Mode& q, Complex c) {
    if (static_cast<int>(q.size()) != dim_)
      throw std::invalid_argument("FourierPoly::set: mode dimension mismatch");
    if (c == Complex(0.0, 0.0))
      coeffs_.erase(q);
    else
      coeffs_[q] = c;
  }

  void add(const Mode& q, Complex c) { set(q, coeff(q) + c); }

  /// Trigonometric degree: max l1-norm over the support, 0 for the zero series.
  int degree() const {
    int deg = 0;
    for (const auto& [q, c] : coeffs_) deg = std::max(deg, l1_norm(q));
    return deg;
  }

  /// Degree counting only coefficients above a magnitude threshold.
  int degree_above(double thresh) const {
    int deg = 0;
    for (const auto& [q, c] : coeffs_)
      if (std::abs(c) > thresh) deg = std::max(deg, l1_norm(q));
    return deg;
  }

  Complex mean() const { return coeff(Mode(dim_, 0)); }

  void drop_small(double thresh) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
      if (std::abs(it->second) < thresh)
        it = coeffs_.erase(it);
      else
        ++it;
    }
  }

  void truncate_degree(int kmax) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
      if (l1_norm(it->first) > kmax)
        it = coeffs_.erase(it);
      else
        ++it;
    }
  }

  /// Pointwise evaluation sum_q c_q e^{i q.theta} (theta may be complex).
  template <typename Scalar>
  Complex eval(const std::vector<Scalar>& theta) const {
    if (static_cast<int>(theta.size()) != dim_)
      throw std::invalid_argument("FourierPoly::eval: theta dimension mismatch");
    Complex s(0.0, 0.0);
    for (const auto& [q, c] : coeffs_) {
      Complex phase(0.0, 0.0);
      for (int r = 0; r < dim_; ++r) phase += Complex(q[r]) * Complex(theta[r]);
      s += c * std::exp(Complex(0.0, 1.0) * phase);
    }
    return s;
  }

  /// Max deviation from the conjugate symmetry of a real-valued function.
  double reality_defect() const {
    double worst = 0.0;
    for (const auto& [q, c] : coeffs_)
      worst = std::max(worst, std::abs(c - std::conj(coeff(negate(q)))));
    return worst;
  }

  bool conj_symmetric(double tol = 1e-12) const { return reality_defect() <= tol; }

  FourierPoly& operator+=(const FourierPoly& other) {
    check_same_dim(other);
    for (const auto& [q, c] : other.coeffs_) add(q, c);
    return *this;
  }

  FourierPoly& operator-=(const FourierPoly& other) {
    check_same_dim(other);
    for (const auto& [q, c] : other.coeffs_) add(q, -c);
    return *this;
  }

  FourierPoly& operator*=(Complex a) {
    if (a == Complex(0.0, 0.0)) {
      coeffs_.clear();
    } else {
      for (auto& [q, c] : coeffs_) c *= a;
    }
    return *this;
  }

  friend FourierPoly operator+(FourierPoly a, const FourierPoly& b) { return a += b; }
  friend FourierPoly operator-(FourierPoly a, const FourierPoly& b) { return a -= b; }
  friend FourierPoly operator*(Complex a, FourierPoly f) { return f *= a; }

 private:
  void check_same_dim(const FourierPoly& other) const {
    if (dim_ != other.dim_)
      throw std::invalid_argument("FourierPoly: dimension mismatch");
  }

  int dim_;
  std::map<Mode, Complex> coeffs_;
};

inline FourierPoly fp_add(const FourierPoly& a, const FourierPoly& b) { return a + b; }

/// Coefficient-map convolution; degree is subadditive under this product.
inline FourierPoly fp_mul(const FourierPoly& a, const FourierPoly& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fp_mul: dimension mismatch");
  FourierPoly out(a.dim());
  Mode q(a.dim());
  for (const auto& [qa, ca] : a.coeffs())
    for (const auto& [qb, cb] : b.coeffs()) {
      for (int r = 0; r < a.dim(); ++r) q[r] = qa[r] + qb[r];
      out.add(q, ca * cb);
    }
  return out;
}

/// Weighted l1 norm sum_q |c_q| e^{sigma |q|_1}; nondecreasing in sigma.
inline double norm_sigma(const FourierPoly& f, double sigma = 0.0) {
  double s = 0.0;
  for (const auto& [q, c] : f.coeffs()) s += std::abs(c) * std::exp(sigma * l1_norm(q));
  return s;
}

inline double norm_l1(const FourierPoly& f) { return norm_sigma(f, 0.0); }

inline double norm_sup_coeff(const FourierPoly& f) {
  double s = 0.0;
  for (const auto& [q, c] : f.coeffs()) s = std::max(s, std::abs(c));
  return s;
}

/// Frequency vector omega with Diophantine exponent nu:
/// |omega.q| > |q|_1^{-nu} for all 0 < |q|_1 <= q_check.
struct FrequencyVector {
  std::vector<double> omega;
  double nu = 1.0;

  int dim() const { return static_cast<int>(omega.size()); }

  double dot(const Mode& q) const {
    double s = 0.0;
    for (int r = 0; r < dim(); ++r) s += omega[r] * q[r];
    return s;
  }
};

namespace detail {
inline void enumerate_modes_rec(int d, int kmax, Mode& cur, int depth, int used,
                                std::vector<Mode>& out) {
  if (depth == d) {
    out.push_back(cur);
    return;
  }
  for (int q = -(kmax - used); q <= kmax - used; ++q) {
    cur[depth] = q;
    enumerate_modes_rec(d, kmax, cur, depth + 1, used + std::abs(q), out);
  }
}
}  // namespace detail

/// All q in Z^d with |q|_1 <= kmax, in deterministic (lexicographic-ish) order.
inline std::vector<Mode> enumerate_modes(int d, int kmax) {
  std::vector<Mode> out;
  Mode cur(d, 0);
  detail::enumerate_modes_rec(d, kmax, cur, 0, 0, out);
  std::sort(out.begin(), out.end());
  return out;
}

/// Smallest |omega.q| over 0 < |q|_1 <= kmax (the worst retained denominator).
inline double min_small_denominator(const FrequencyVector& om, int kmax) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : enumerate_modes(om.dim(), kmax))
    if (l1_norm(q) > 0) best = std::min(best, std::abs(om.dot(q)));
  return best;
}

/// Verifies |omega.q| * |q|_1^nu > 1 up to |q|_1 <= q_check.
/// Returns the worst margin min |omega.q| |q|^nu; > 1 means the check passed.
inline double diophantine_margin(const FrequencyVector& om, int q_check) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& q : enumerate_modes(om.dim(), q_check)) {
    int n1 = l1_norm(q);
    if (n1 == 0) continue;
    worst = std::min(worst, std::abs(om.dot(q)) * std::pow(double(n1), om.nu));
  }
  return worst;
}

inline bool diophantine_ok(const FrequencyVector& om, int q_check) {
  return diophantine_margin(om, q_check) > 1.0;
}

// ---------------------------------------------------------------------------
// Diagonal operator calculus
// ---------------------------------------------------------------------------

/// D = omega . d/dtheta : mode q scaled by i(omega.q).
inline FourierPoly op_D(const FrequencyVector& om, const FourierPoly& f) {
  FourierPoly out(f.dim());
  for (const auto& [q, c] : f.coeffs()) {
    double wq = om.dot(q);
    if (wq != 0.0) out.set(q, Complex(0.0, wq) * c);
  }
  return out;
}

/// (D^2 - g^2)^{-1}: mode q divided by -(omega.q)^2 - g^2 (denominator >= g^2).
inline FourierPoly op_inv_D2_minus_g2(const FrequencyVector& om, double g,
                                      const FourierPoly& f) {
  if (!(g > 0.0)) throw std::invalid_argument("op_inv_D2_minus_g2: g must be positive");
  FourierPoly out(f.dim());
  for (const auto& [q, c] : f.coeffs()) {
    double wq = om.dot(q);
    out.set(q, c / Complex(-wq * wq - g * g));
  }
  return out;
}

/// (D + gamma)^{-2}: mode q divided by (i omega.q + gamma)^2.
inline FourierPoly op_inv_shifted_sq(const FrequencyVector& om, Complex gamma,
                                     const FourierPoly& f) {
  FourierPoly out(f.dim());
  for (const auto& [q, c] : f.coeffs()) {
    Complex den = Complex(0.0, om.dot(q)) + gamma;
    if (std::abs(den) < 1e-12)
      throw std::domain_error("op_inv_shifted_sq: divisor below 1e-12 at a mode");
    out.set(q, c / (den * den));
  }
  return out;
}

/// Translation tau_beta: coeff(q) -> e^{i q.beta} coeff(q); realizes
/// theta -> theta + beta for real beta.
inline FourierPoly op_translate(const std::vector<Complex>& beta, const FourierPoly& f) {
  if (static_cast<int>(beta.size()) != f.dim())
    throw std::invalid_argument("op_translate: beta dimension mismatch");
  FourierPoly out(f.dim());
  for (const auto& [q, c] : f.coeffs()) {
    Complex phase(0.0, 0.0);
    for (int r = 0; r < f.dim(); ++r) phase += Complex(q[r]) * beta[r];
    out.set(q, c * std::exp(Complex(0.0, 1.0) * phase));
  }
  return out;
}

inline FourierPoly op_translate_real(const std::vector<double>& beta, const FourierPoly& f) {
  std::vector<Complex> b(beta.begin(), beta.end());
  return op_translate(b, f);
}

// ---------------------------------------------------------------------------
// Collocation grid on T^d
// ---------------------------------------------------------------------------

/// Uniform product grid with n points per dimension, plus the dense DFT pair.
/// n must exceed twice the degree of whatever is transformed, or aliasing
/// corrupts the result; nonlinear_compose enforces that.
class ThetaGrid {
 public:
  ThetaGrid(int d, int n) : d_(d), n_(n) {
    if (n < 1) throw std::invalid_argument("ThetaGrid: n must be positive");
    total_ = 1;
    for (int r = 0; r < d; ++r) total_ *= n;
    // per-dimension twiddle table e^{i k 2pi/n}
    twiddle_.resize(n);
    for (int k = 0; k < n; ++k)
      twiddle_[k] = std::exp(Complex(0.0, 2.0 * PI * k / n));
  }

  int dim() const { return d_; }
  int points_per_dim() const { return n_; }
  long total() const { return total_; }

  std::vector<double> point(long j) const {
    std::vector<double> th(d_);
    for (int r = 0; r < d_; ++r) {
      th[r] = 2.0 * PI * (j % n_) / n_;
      j /= n_;
    }
    return th;
  }

  /// Values of f on the grid.
  std::vector<Complex> eval(const FourierPoly& f) const {
    std::vector<Complex> v(total_, Complex(0.0, 0.0));
    for (const auto& [q, c] : f.coeffs()) {
      for (long j = 0; j < total_; ++j) v[j] += c * mode_factor(q, j);
    }
    return v;
  }

  /// DFT of grid values, truncated to |q|_1 <= kmax.
  FourierPoly transform(const std::vector<Complex>& values, int kmax) const {
    if (static_cast<long>(values.size()) != total_)
      throw std::invalid_argument("ThetaGrid::transform: value count mismatch");
    FourierPoly out(d_);
    for (const auto& q : enumerate_modes(d_, kmax)) {
      Complex s(0.0, 0.0);
      for (long j = 0; j < total_; ++j) s += values[j] * std::conj(mode_factor(q, j));
      s /= double(total_);
      if (std::abs(s) > 0.0) out.set(q, s);
    }
    return out;
  }

  Complex mode_factor(const Mode& q, long j) const {
    Complex f(1.0, 0.0);
    for (int r = 0; r < d_; ++r) {
      int idx = static_cast<int>(j % n_);
      long e = (static_cast<long>(q[r]) * idx) % n_;
      if (e < 0) e += n_;
      f *= twiddle_[e];
      j /= n_;
    }
    return f;
  }

 private:
  int d_;
  int n_;
  long total_;
  std::vector<Complex> twiddle_;
};

/// Composition with an entire scalar function by collocation: evaluate F on
/// the grid, apply fn pointwise, transform back, truncate to kmax and drop
/// coefficients below drop_tol. Exact (up to rounding) when the result is a
/// trig polynomial resolved by the grid.
template <typename Fn>
FourierPoly nonlinear_compose(Fn&& fn, const FourierPoly& f, const ThetaGrid& grid,
                              int kmax, double drop_tol = 1e-16,
                              int expected_degree = -1) {
  if (grid.dim() != f.dim())
    throw std::invalid_argument("nonlinear_compose: grid dimension mismatch");
  if (expected_degree >= 0 && grid.points_per_dim() < 2 * expected_degree + 1)
    throw std::domain_error("nonlinear_compose: grid too coarse, aliasing");
  std::vector<Complex> v = grid.eval(f);
  for (auto& x : v) x = fn(x);
  FourierPoly out = grid.transform(v, kmax);
  out.drop_small(drop_tol);
  return out;
}

// ---------------------------------------------------------------------------
// (1+d)-component blocks X = (Phi, Psi)
// ---------------------------------------------------------------------------

/// Pair of a scalar pendulum component and a d-vector rotator component,
/// each a Fourier series on T^d.
struct XPoly {
  FourierPoly phi;
  std::vector<FourierPoly> psi;

  XPoly() = default;
  explicit XPoly(int d) : phi(d), psi(d, FourierPoly(d)) {}

  int dim() const { return phi.dim(); }
  int arity() const { return 1 + static_cast<int>(psi.size()); }

  const FourierPoly& comp(int c) const { return c == 0 ? phi : psi[c - 1]; }
  FourierPoly& comp(int c) { return c == 0 ? phi : psi[c - 1]; }

  XPoly& operator+=(const XPoly& o) {
    phi += o.phi;
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += o.psi[i];
    return *this;
  }
  XPoly& operator-=(const XPoly& o) {
    phi -= o.phi;
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] -= o.psi[i];
    return *this;
  }
  XPoly& operator*=(Complex a) {
    phi *= a;
    for (auto& p : psi) p *= a;
    return *this;
  }
  friend XPoly operator+(XPoly a, const XPoly& b) { return a += b; }
  friend XPoly operator-(XPoly a, const XPoly& b) { return a -= b; }
  friend XPoly operator*(Complex a, XPoly x) { return x *= a; }

  double norm_l1() const {
    double s = whisker::norm_l1(phi);
    for (const auto& p : psi) s += whisker::norm_l1(p);
    return s;
  }

  void drop_small(double thresh) {
    phi.drop_small(thresh);
    for (auto& p : psi) p.drop_small(thresh);
  }

  /// Pointwise value (Phi(theta), Psi(theta)).
  template <typename Scalar>
  std::vector<Complex> eval(const std::vector<Scalar>& theta) const {
    std::vector<Complex> v(arity());
    v[0] = phi.eval(theta);
    for (std::size_t i = 0; i < psi.size(); ++i) v[1 + i] = psi[i].eval(theta);
    return v;
  }
};

}  // namespace whisker
