// Invariant measure over future null directions.
//
// Integrals of type {-2,-2} functions are evaluated in the t-gauge (t.l = 1),
// where the invariant measure is the round measure dOmega_t. Nodes are
// Gauss-Legendre in cos(theta) times a uniform trapezoid in phi.
#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <functional>
#include <span>
#include <vector>

#include "nullinf/parallel.hpp"
#include "nullinf/spinors.hpp"

namespace nullinf {

// Gauss-Legendre nodes and weights on [a, b], ascending.
std::vector<std::array<double, 2>> gauss_legendre(int n, double a = -1.0, double b = 1.0);

struct GridNode {
  Spinor o;  // t-gauge spinor
  FourVector l;
  double theta = 0.0, phi = 0.0, weight = 0.0;
};

class NullDirectionGrid {
 public:
  NullDirectionGrid(const FourVector& t, int n_theta, int n_phi);

  const SpinFrame& frame() const { return frame_; }
  const FourVector& gauge() const { return frame_.t; }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  const std::vector<GridNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  // sum_i w_i f(node_i) with a fixed reduction tree.
  template <class F>
  auto integrate_nodes(F&& f) const {
    auto terms = parallel_map(nodes_.size(), [&](std::size_t i) {
      using T = std::decay_t<decltype(f(nodes_[i]))>;
      const T v = f(nodes_[i]);
      return T(nodes_[i].weight * v);
    });
    return pairwise_sum(terms);
  }

  // f(node_i) for every node, in node order.
  template <class F>
  auto sample(F&& f) const {
    return parallel_map(nodes_.size(), [&](std::size_t i) { return f(nodes_[i]); });
  }

 private:
  SpinFrame frame_;
  int n_theta_, n_phi_;
  std::vector<GridNode> nodes_;
};

NullDirectionGrid build_grid(const FourVector& t, int n_theta, int n_phi);

struct HomogeneityType {
  int p = 0, q = 0;
  friend auto operator<=>(const HomogeneityType&, const HomogeneityType&) = default;
};

// f(alpha o, conj(alpha) obar) = alpha^p conj(alpha)^q f(o, obar).
struct HomogeneousFn {
  std::function<cplx(const Spinor&)> eval;
  HomogeneityType type;
  cplx operator()(const Spinor& o) const { return eval(o); }
};

struct SpinorFn {
  std::function<Spinor(const Spinor&)> eval;  // lower-index components
  HomogeneityType type;
  Spinor operator()(const Spinor& o) const { return eval(o); }
};

// Integral against the invariant measure; f must be of type {-2,-2}.
cplx integrate(const NullDirectionGrid& grid, const HomogeneousFn& f);

// Max relative rescaling residual over the samples and a fixed set of alphas.
double homogeneity_residual(const HomogeneousFn& f, std::span<const Spinor> samples);

// --- delta(y.l) line integrals -------------------------------------------

struct LineGeometry {
  double y0 = 0.0, radius = 0.0;   // y = y0 t + Y, radius = |Y|
  std::array<double, 3> axis{};    // unit Y along the frame triad
  std::array<double, 3> e1{}, e2{};
};
// Throws DomainError unless y is spacelike.
LineGeometry line_geometry(const SpinFrame& f, const FourVector& y);
std::array<double, 3> on_cone(const LineGeometry& g, double cos_alpha, double phi);

// int delta(y.l) f dl for f of type {-1,-1}, using n points on the circle.
template <class F>
auto delta_line(const SpinFrame& frame, const FourVector& y, F&& f, int n) {
  const LineGeometry g = line_geometry(frame, y);
  const double c0 = g.y0 / g.radius;
  auto terms = parallel_map(static_cast<std::size_t>(n), [&](std::size_t k) {
    const double ph = 2.0 * pi * static_cast<double>(k) / n;
    return f(direction_spinor(frame, on_cone(g, c0, ph)));
  });
  return (2.0 * pi / (n * g.radius)) * pairwise_sum(terms);
}

cplx integrate_delta_line(const NullDirectionGrid& grid, const FourVector& y, const HomogeneousFn& f);

// int delta'(y.l) f dl for f of type {0,0}; derivative along y -> y + lambda t.
template <class F>
auto delta_prime_line(const SpinFrame& frame, const FourVector& y, F&& f, int n, double rel_step = 1e-3) {
  const double h = rel_step * euclidean_norm(y);
  auto at = [&](double lam) { return delta_line(frame, y + lam * frame.t, f, n); };
  return (1.0 / (12.0 * h)) * (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h)));
}

// int sgn(y.l) g dl for g of type {-2,-2}: Gauss-Legendre caps on both sides
// of the circle y.l = 0.
template <class F>
auto sgn_integral(const SpinFrame& frame, const FourVector& y, F&& g, int n_gl, int n_phi) {
  const LineGeometry geo = line_geometry(frame, y);
  const double c0 = geo.y0 / geo.radius;
  const auto lo = gauss_legendre(n_gl, -1.0, c0);
  const auto hi = gauss_legendre(n_gl, c0, 1.0);
  const std::size_t per = static_cast<std::size_t>(n_gl) * static_cast<std::size_t>(n_phi);
  auto terms = parallel_map(2 * per, [&](std::size_t idx) {
    const bool upper = idx >= per;
    const std::size_t r = idx % per;
    const auto& node = upper ? hi[r / static_cast<std::size_t>(n_phi)] : lo[r / static_cast<std::size_t>(n_phi)];
    const double ph = 2.0 * pi * static_cast<double>(r % static_cast<std::size_t>(n_phi)) / n_phi;
    const double w = node[1] * 2.0 * pi / n_phi * (upper ? -1.0 : 1.0);
    return w * g(direction_spinor(frame, on_cone(geo, node[0], ph)));
  });
  return pairwise_sum(terms);
}

// --- spin derivatives ----------------------------------------------------

enum class SpinIndex { unprimed, primed };

// Wirtinger derivative d/do^A (unprimed) or d/dobar^A' (primed) of an
// evaluator, by 4th-order central differences. Returns both components.
template <class F>
auto spin_gradient(F&& f, const Spinor& o, SpinIndex which, double rel_step = 1e-3) {
  using T = std::decay_t<decltype(f(o))>;
  const double h = rel_step * std::sqrt(norm2(o));
  std::array<T, 2> out;
  for (int A = 0; A < 2; ++A) {
    auto shifted = [&](cplx d) {
      Spinor p = o;
      p[A] += d;
      return f(p);
    };
    auto central = [&](cplx dir) {
      return (1.0 / (12.0 * h)) *
             (8.0 * (shifted(h * dir) - shifted(-h * dir)) - (shifted(2.0 * h * dir) - shifted(-2.0 * h * dir)));
    };
    const T dx = central(1.0);
    const T dy = central(I);
    const cplx s = which == SpinIndex::unprimed ? -I : I;
    out[static_cast<std::size_t>(A)] = 0.5 * (dx + s * dy);
  }
  return out;
}

inline Spinor as_spinor(const std::array<cplx, 2>& a) { return {a[0], a[1]}; }

// d_A d_A' f: entry [A] holds the primed components.
template <class F>
std::array<Spinor, 2> mixed_second_derivative(F&& f, const Spinor& o, double rel_step = 2e-3) {
  auto primed = [&](const Spinor& p) { return as_spinor(spin_gradient(f, p, SpinIndex::primed, rel_step)); };
  return spin_gradient(primed, o, SpinIndex::unprimed, rel_step);
}

// d_A f or d_A' f as a spinor-valued function, after checking the Euler
// identity o^A d_A f = p f on the grid (relative residual <= tol).
SpinorFn spin_derivative(const NullDirectionGrid& grid, const HomogeneousFn& f, SpinIndex which,
                         double tol = 1e-6);
double euler_residual(const NullDirectionGrid& grid, const HomogeneousFn& f, SpinIndex which);

// --- spherical harmonics -------------------------------------------------

// Real orthonormal spherical harmonics on the t-frame sphere, index
// l*l + l + m with m < 0 the sine and m > 0 the cosine family.
class HarmonicExpansion {
 public:
  HarmonicExpansion() = default;
  // Projects t-gauge node values onto l <= lmax.
  static HarmonicExpansion fit(const NullDirectionGrid& grid, std::span<const cplx> values, int lmax);

  int lmax() const { return lmax_; }
  const std::vector<cplx>& coefficients() const { return coef_; }
  const SpinFrame& frame() const { return frame_; }

  cplx at(double theta, double phi) const;
  // Degree-0 extension: value at the direction of o.
  cplx operator()(const Spinor& o) const;
  // Root-sum-square of the coefficients with l >= l_from.
  double tail_norm(int l_from) const;
  // Coefficient-wise map c_lm -> factor(l) c_lm.
  HarmonicExpansion scaled(const std::function<cplx(int)>& factor) const;

 private:
  SpinFrame frame_{};
  int lmax_ = 0;
  std::vector<cplx> coef_;
};

// Real spherical harmonic values for l <= lmax at (theta, phi).
std::vector<double> real_harmonics(int lmax, double theta, double phi);
// Angles of the direction of o relative to the frame.
std::array<double, 2> direction_angles(const SpinFrame& f, const Spinor& o);

}  // namespace nullinf
