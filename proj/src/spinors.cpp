#include "nullinf/spinors.hpp"

#include <algorithm>
#include <cmath>

namespace nullinf {

namespace {

const double rt2 = std::sqrt(2.0);

Mat2 eps_matrix() {
  Mat2 e;
  e << 0.0, 1.0, -1.0, 0.0;
  return e;
}

FourVector basis(int mu) {
  FourVector e;
  e[static_cast<std::size_t>(mu)] = 1.0;
  return e;
}

constexpr std::array<std::array<int, 2>, 6> pairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// Real-linear map (Re mu00, Im mu00, Re mu01, Im mu01, Re mu11, Im mu11)
// -> (M^{01}, M^{02}, M^{03}, M^{12}, M^{13}, M^{23}).
Eigen::Matrix<double, 6, 6> spinor_to_tensor_matrix() {
  Eigen::Matrix<double, 6, 6> A;
  for (int k = 0; k < 6; ++k) {
    SymSpinor s;
    const cplx val = (k % 2 == 0) ? cplx{1.0} : I;
    const int comp = k / 2;
    if (comp == 0) s.m(0, 0) = val;
    if (comp == 1) s.m(0, 1) = s.m(1, 0) = val;
    if (comp == 2) s.m(1, 1) = val;
    const Tensor2 F = tensor_of(s);
    for (int r = 0; r < 6; ++r) A(r, k) = F(pairs[r][0], pairs[r][1]);
  }
  return A;
}

}  // namespace

double euclidean_norm(const FourVector& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
}

double euclidean_norm(const CFourVector& v) {
  return std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]) + std::norm(v[3]));
}

FourVector boosted_time(double rapidity, const std::array<double, 3>& axis) {
  const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (n == 0.0) return {{1.0, 0.0, 0.0, 0.0}};
  const double s = std::sinh(rapidity) / n;
  return {{std::cosh(rapidity), s * axis[0], s * axis[1], s * axis[2]}};
}

void require_unit_timelike(const FourVector& v, double tol) {
  if (!(v[0] > 0.0) || std::abs(dot(v, v) - 1.0) > tol)
    throw DomainError("vector is not unit timelike future-pointing");
}

Mat2 mixed(const FourVector& v) { return mixed(complexify(v)); }

Mat2 mixed(const CFourVector& v) {
  Mat2 m;
  m << (v[0] + v[3]) / 2.0, (v[1] + I * v[2]) / rt2, (v[1] - I * v[2]) / rt2, v[0] - v[3];
  return m;
}

CFourVector vector_of(const Mat2& m) {
  const cplx a = m(0, 0), b = m(1, 1);
  const cplx c = m(0, 1), d = m(1, 0);
  // c = (v1 + i v2)/sqrt2, d = (v1 - i v2)/sqrt2
  return {{a + b / 2.0, (c + d) / rt2, (c - d) / (rt2 * I), a - b / 2.0}};
}

Mat2 mixed_lower(const FourVector& v) {
  const Mat2 e = eps_matrix();
  return e.transpose() * mixed(v) * e;
}

FourVector null_vector_of(const Spinor& o) {
  const Eigen::Vector2cd ov = o.vec();
  return real_part(vector_of(ov * ov.adjoint()));
}

Spinor iota_of(const Spinor& o, const FourVector& t) {
  const double tl = dot(t, null_vector_of(o));
  return Spinor::from(mixed(t) * lower(conj(o)).vec() / tl);
}

Tetrad tetrad_from(const Spinor& o, const FourVector& t) {
  require_unit_timelike(t);
  if (norm2(o) == 0.0) throw DomainError("tetrad_from: zero spinor");
  Tetrad tt;
  tt.iota = iota_of(o, t);
  tt.l = null_vector_of(o);
  tt.n = null_vector_of(tt.iota);
  tt.m = vector_of(o.vec() * tt.iota.vec().adjoint());
  return tt;
}

SpinFrame spin_frame(const FourVector& t) {
  require_unit_timelike(t);
  SpinFrame f;
  f.t = t;
  const Eigen::LLT<Mat2> llt(mixed(t));
  const Mat2 L = llt.matrixL();
  f.o = Spinor::from(L.col(0) * rt2);
  f.iota = Spinor::from(L.col(1));
  const Eigen::Vector2cd o = f.o.vec(), io = f.iota.vec();
  f.X = real_part(vector_of((o * io.adjoint() + io * o.adjoint()) / rt2));
  f.Y = real_part(vector_of(I * (o * io.adjoint() - io * o.adjoint()) / rt2));
  f.Z = null_vector_of(f.o) - t;
  return f;
}

Spinor direction_spinor(const SpinFrame& f, double theta, double phi) {
  const cplx a = std::cos(theta / 2.0);
  const cplx b = rt2 * std::sin(theta / 2.0) * std::exp(-I * phi);
  return a * f.o + b * f.iota;
}

Spinor direction_spinor(const SpinFrame& f, const std::array<double, 3>& n) {
  const double z = std::clamp(n[2], -1.0, 1.0);
  return direction_spinor(f, std::acos(z), std::atan2(n[1], n[0]));
}

SymSpinor symmetrized(const Spinor& a, const Spinor& b) {
  const Eigen::Vector2cd av = a.vec(), bv = b.vec();
  SymSpinor s;
  s.m = (av * bv.transpose() + bv * av.transpose()) / 2.0;
  return s;
}

Tensor2 tensor_of(const SymSpinor& phi) {
  static const auto E = [] {
    std::array<Mat2, 4> e;
    for (int mu = 0; mu < 4; ++mu) e[static_cast<std::size_t>(mu)] = mixed(basis(mu));
    return e;
  }();
  const Mat2 eps = eps_matrix();
  Tensor2 F;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Mat2 k = E[static_cast<std::size_t>(a)] * eps * E[static_cast<std::size_t>(b)].transpose();
      const double cov = 2.0 * (phi.m.cwiseProduct(k)).sum().real();
      const double sa = a == 0 ? 1.0 : -1.0, sb = b == 0 ? 1.0 : -1.0;
      F(a, b) = sa * sb * cov;
    }
  return F;
}

SymSpinor spinor_of(const Tensor2& F) {
  static const Eigen::Matrix<double, 6, 6> inv = spinor_to_tensor_matrix().inverse();
  Eigen::Matrix<double, 6, 1> f;
  for (int r = 0; r < 6; ++r) f(r) = F(pairs[r][0], pairs[r][1]);
  const Eigen::Matrix<double, 6, 1> x = inv * f;
  SymSpinor s;
  s.m(0, 0) = cplx{x(0), x(1)};
  s.m(0, 1) = s.m(1, 0) = cplx{x(2), x(3)};
  s.m(1, 1) = cplx{x(4), x(5)};
  return s;
}

Tensor2 dual(const Tensor2& F) { return tensor_of(-I * spinor_of(F)); }

Tensor2 wedge(const FourVector& a, const FourVector& b) {
  Tensor2 W;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      W(i, j) = a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)] -
                a[static_cast<std::size_t>(j)] * b[static_cast<std::size_t>(i)];
  return W;
}

double max_abs(const Tensor2& F) { return F.cwiseAbs().maxCoeff(); }
double max_abs(const SymSpinor& s) { return s.m.cwiseAbs().maxCoeff(); }

const DiracSet& dirac() {
  static const DiracSet set = [] {
    DiracSet d;
    Mat2 s1, s2, s3, id;
    s1 << 0, 1, 1, 0;
    s2 << 0, -I, I, 0;
    s3 << 1, 0, 0, -1;
    id = Mat2::Identity();
    d.gamma[0].setZero();
    d.gamma[0].block<2, 2>(0, 0) = id;
    d.gamma[0].block<2, 2>(2, 2) = -id;
    const std::array<Mat2, 3> sig{s1, s2, s3};
    for (std::size_t k = 0; k < 3; ++k) {
      d.gamma[k + 1].setZero();
      d.gamma[k + 1].block<2, 2>(0, 2) = sig[k];
      d.gamma[k + 1].block<2, 2>(2, 0) = -sig[k];
    }
    return d;
  }();
  return set;
}

Mat4 slash(const FourVector& v) {
  const auto& g = dirac().gamma;
  return g[0] * v[0] - g[1] * v[1] - g[2] * v[2] - g[3] * v[3];
}

DiracAlgebra dirac_algebra(const FourVector& v, double tol) {
  require_unit_timelike(v, tol);
  DiracAlgebra d;
  d.gv = slash(v);
  d.plus = (Mat4::Identity() + d.gv) / 2.0;
  d.minus = (Mat4::Identity() - d.gv) / 2.0;
  return d;
}

Eigen::RowVector4cd bar(const Eigen::Vector4cd& psi) { return psi.adjoint() * dirac().gamma[0]; }

Mat4 spin_generator(int a, int b) {
  const auto& g = dirac().gamma;
  const Mat4& ga = g[static_cast<std::size_t>(a)];
  const Mat4& gb = g[static_cast<std::size_t>(b)];
  return (I / 4.0) * (ga * gb - gb * ga);
}

}  // namespace nullinf
