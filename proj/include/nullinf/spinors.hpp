// Minkowski vectors, 2-spinors, null tetrads and Dirac matrices.
//
// Metric signature (+,-,-,-). Vectors are stored with contravariant
// components. A vector v corresponds to the Hermitian mixed spinor
//
//   V^{AA'} = [[(v0+v3)/2, (v1+i v2)/sqrt2], [(v1-i v2)/sqrt2, v0-v3]]
//
// so that null_vector_of((1,0)) = (1,0,0,1) and v.w = eps_AB eps_A'B' V W.
// eps_01 = +1 and indices are lowered from the left: a_A = a^B eps_BA.
#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "nullinf/errors.hpp"

namespace nullinf {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Tensor2 = Eigen::Matrix4d;  // contravariant components M^{ab}

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

template <class T>
struct Vec4 {
  std::array<T, 4> c{};

  constexpr T& operator[](std::size_t i) { return c[i]; }
  constexpr const T& operator[](std::size_t i) const { return c[i]; }

  friend constexpr Vec4 operator+(Vec4 a, const Vec4& b) {
    for (std::size_t i = 0; i < 4; ++i) a.c[i] += b.c[i];
    return a;
  }
  friend constexpr Vec4 operator-(Vec4 a, const Vec4& b) {
    for (std::size_t i = 0; i < 4; ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend constexpr Vec4 operator-(Vec4 a) {
    for (auto& x : a.c) x = -x;
    return a;
  }
  template <class S>
  friend constexpr Vec4 operator*(S s, Vec4 a) {
    for (auto& x : a.c) x *= T(s);
    return a;
  }
  template <class S>
  friend constexpr Vec4 operator/(Vec4 a, S s) {
    for (auto& x : a.c) x /= T(s);
    return a;
  }
  constexpr Vec4& operator+=(const Vec4& b) { return *this = *this + b; }
  constexpr Vec4& operator-=(const Vec4& b) { return *this = *this - b; }
};

using FourVector = Vec4<double>;
using CFourVector = Vec4<cplx>;

template <class T, class U>
constexpr auto dot(const Vec4<T>& a, const Vec4<U>& b) {
  return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

// Covariant components v_a.
template <class T>
constexpr Vec4<T> lowered(Vec4<T> v) {
  v[1] = -v[1];
  v[2] = -v[2];
  v[3] = -v[3];
  return v;
}

inline FourVector real_part(const CFourVector& v) {
  return {{v[0].real(), v[1].real(), v[2].real(), v[3].real()}};
}
inline FourVector imag_part(const CFourVector& v) {
  return {{v[0].imag(), v[1].imag(), v[2].imag(), v[3].imag()}};
}
inline CFourVector complexify(const FourVector& v) {
  return {{v[0], v[1], v[2], v[3]}};
}
double euclidean_norm(const FourVector& v);
double euclidean_norm(const CFourVector& v);

// Unit timelike future-pointing vector with rapidity along a spatial axis.
FourVector boosted_time(double rapidity, const std::array<double, 3>& axis);
// Throws DomainError unless v.v = 1 within tol and v0 > 0.
void require_unit_timelike(const FourVector& v, double tol = 1e-10);

// Two complex components. Index position is part of the name at call sites.
struct Spinor {
  cplx c0{}, c1{};
  constexpr cplx& operator[](int A) { return A == 0 ? c0 : c1; }
  constexpr const cplx& operator[](int A) const { return A == 0 ? c0 : c1; }
  friend constexpr Spinor operator+(Spinor a, const Spinor& b) { return {a.c0 + b.c0, a.c1 + b.c1}; }
  friend constexpr Spinor operator-(Spinor a, const Spinor& b) { return {a.c0 - b.c0, a.c1 - b.c1}; }
  friend constexpr Spinor operator*(cplx s, const Spinor& a) { return {s * a.c0, s * a.c1}; }
  constexpr Spinor& operator+=(const Spinor& b) { return *this = *this + b; }
  Eigen::Vector2cd vec() const { return {c0, c1}; }
  static Spinor from(const Eigen::Vector2cd& v) { return {v(0), v(1)}; }
};

inline Spinor conj(const Spinor& a) { return {std::conj(a.c0), std::conj(a.c1)}; }
inline double norm2(const Spinor& a) { return std::norm(a.c0) + std::norm(a.c1); }
// a_A from a^A.
inline Spinor lower(const Spinor& up) { return {-up.c1, up.c0}; }
// a^A from a_A.
inline Spinor raise(const Spinor& dn) { return {dn.c1, -dn.c0}; }
// <a,b> = a_A b^A for two upper-index spinors; antisymmetric.
inline cplx pair(const Spinor& a, const Spinor& b) { return a.c0 * b.c1 - a.c1 * b.c0; }
// a^A b_A contraction with b given by lower components.
inline cplx contract(const Spinor& up, const Spinor& dn) { return up.c0 * dn.c0 + up.c1 * dn.c1; }

// V^{AA'} of a (possibly complex) vector, and its inverse.
Mat2 mixed(const FourVector& v);
Mat2 mixed(const CFourVector& v);
CFourVector vector_of(const Mat2& upper);
// V_{AA'} with both indices lowered.
Mat2 mixed_lower(const FourVector& v);

// l^a = o^A obar^A'.
FourVector null_vector_of(const Spinor& o);

struct Tetrad {
  Spinor iota;
  FourVector l, n;
  CFourVector m;  // m^{AA'} = o^A iotabar^A'
};
// iota^A = t^{AA'} obar_A' / (t.l), so <o,iota> = 1.
Tetrad tetrad_from(const Spinor& o, const FourVector& t);
Spinor iota_of(const Spinor& o, const FourVector& t);

// Spin frame (o_t, iota_t) with <o_t,iota_t> = 1 and t = n + l/2, plus the
// orthonormal spatial triad X, Y, Z of the (theta, phi) parametrization.
struct SpinFrame {
  FourVector t;
  Spinor o, iota;
  FourVector X, Y, Z;
};
SpinFrame spin_frame(const FourVector& t);
// xi = cos(theta/2) o + sqrt2 sin(theta/2) e^{-i phi} iota, in t-gauge.
Spinor direction_spinor(const SpinFrame& f, double theta, double phi);
// Spinor in t-gauge for a unit spatial direction n (components along X,Y,Z).
Spinor direction_spinor(const SpinFrame& f, const std::array<double, 3>& n);

// Symmetric spinor phi_AB (lower indices) <-> real antisymmetric tensor
// F_ab = phi_AB eps_A'B' + conj.  Tensors use contravariant components.
struct SymSpinor {
  Mat2 m = Mat2::Zero();
  friend SymSpinor operator+(SymSpinor a, const SymSpinor& b) { a.m += b.m; return a; }
  friend SymSpinor operator-(SymSpinor a, const SymSpinor& b) { a.m -= b.m; return a; }
  friend SymSpinor operator*(cplx s, SymSpinor a) { a.m *= s; return a; }
  SymSpinor& operator+=(const SymSpinor& b) { m += b.m; return *this; }
};
// a_(A b_B) for lower-index spinors.
SymSpinor symmetrized(const Spinor& a_dn, const Spinor& b_dn);
Tensor2 tensor_of(const SymSpinor& phi);
SymSpinor spinor_of(const Tensor2& F);
// Hodge dual with *F <-> -i phi, so that ** = -1.
Tensor2 dual(const Tensor2& F);
// a^a b^b - a^b b^a.
Tensor2 wedge(const FourVector& a, const FourVector& b);
double max_abs(const Tensor2& F);
double max_abs(const SymSpinor& s);

// Dirac matrices, standard representation (gamma^0 diagonal).
struct DiracSet {
  std::array<Mat4, 4> gamma;  // gamma^a
};
const DiracSet& dirac();
// gamma.v = gamma^a v_a.
Mat4 slash(const FourVector& v);
struct DiracAlgebra {
  Mat4 gv, plus, minus;
};
DiracAlgebra dirac_algebra(const FourVector& v, double tol = 1e-10);
// psibar = psi^dagger gamma^0.
Eigen::RowVector4cd bar(const Eigen::Vector4cd& psi);
// sigma^{ab} = (i/4)[gamma^a, gamma^b].
Mat4 spin_generator(int a, int b);

}  // namespace nullinf
