// Unit velocity hyperboloid {v.v = 1, v0 > 0} with the invariant measure
// dmu(v) = d^3v / v0, free Dirac packets on it and the timelike-outgoing
// charges of the matter field.
#pragma once

#include <functional>
#include <vector>

#include "nullinf/sphere.hpp"

namespace nullinf {

using DiracSpinor = Eigen::Vector4cd;

// Radial variable of the grid: Gauss-Legendre in tanh(rapidity) suits
// integrands decaying like powers of v0; linear suits compact profiles.
enum class RadialRule { tanh, linear };

struct HyperboloidNode {
  FourVector v;
  double weight = 0.0;
  double rapidity = 0.0;  // distance from the grid center
};

struct HyperboloidSpec {
  int n_rap = 48, n_theta = 24, n_phi = 48;
  double rap_max = 12.0;
  RadialRule rule = RadialRule::tanh;
  // When in (0, pi): theta is split into Gauss-Legendre panels [0, focus] and
  // [focus, pi], resolving integrands peaked about the pole.
  double polar_focus = 0.0;
};

// Spherical rapidity coordinates about `center`; the polar axis points
// towards `pole` when it is not parallel to center.
class HyperboloidGrid {
 public:
  HyperboloidGrid(const FourVector& center, HyperboloidSpec spec, const FourVector& pole = {});

  const FourVector& center() const { return frame_[0]; }
  const HyperboloidSpec& spec() const { return spec_; }
  const std::vector<HyperboloidNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  // Point at rapidity eta in direction (theta, phi) of the grid frame.
  FourVector point(double eta, double theta, double phi) const;

  template <class F>
  auto integrate_nodes(F&& f) const {
    auto terms = parallel_map(nodes_.size(), [&](std::size_t i) {
      using T = std::decay_t<decltype(f(nodes_[i].v))>;
      const T v = f(nodes_[i].v);
      return T(nodes_[i].weight * v);
    });
    return pairwise_sum(terms);
  }

 private:
  HyperboloidSpec spec_;
  std::array<FourVector, 4> frame_;
  std::vector<HyperboloidNode> nodes_;
};

// Orthonormal frame (z, e1, e2, e3) with e3 along the part of `pole` orthogonal to z.
std::array<FourVector, 4> adapted_frame(const FourVector& z, const FourVector& pole);

// int g dmu. ConvergenceError when the shell integral at the cutoff exceeds
// 1e-8 of the total (tail estimate).
cplx integrate_hyperboloid(const HyperboloidGrid& grid, const std::function<cplx(const FourVector&)>& g);

// --- Dirac profiles ------------------------------------------------------

struct DiracProfile {
  std::function<DiracSpinor(const FourVector&)> f;
  double mass = 1.0, coupling = 1.0;
  FourVector center{{1.0, 0.0, 0.0, 0.0}};
  double support = 3.0;  // rapidity radius beyond which f is negligible
};

enum class Branch { plus, minus };

// exp(-d^2/(2 w^2)) P(v) u with d the hyperbolic distance from v0 and P the
// projector of the branch.
DiracProfile gaussian_bump(const FourVector& v0, double width, const DiracSpinor& u, Branch branch, double mass,
                           double coupling);
// Sum of two profiles; support covers both.
DiracProfile two_bump(const DiracProfile& a, const DiracProfile& b);
// Profile rescaled to (f, f) = 1 on the given grid.
DiracProfile normalized(const DiracProfile& p, const HyperboloidGrid& grid);
// Grid adapted to a profile.
HyperboloidGrid profile_grid(const DiracProfile& p, int n_rap = 40, int n_theta = 24, int n_phi = 48);

// fbar gamma.v f (real).
double dirac_density(const DiracProfile& p, const FourVector& v);
// (g, f) = int gbar gamma.z f dmu.
cplx scalar_product(const HyperboloidGrid& grid, const DiracProfile& g, const DiracProfile& f);

// psi(x) = (m/2pi)^{3/2} int exp(-i m x.v gamma.v) gamma.v f(v) dmu(v).
// DomainError when m * |x| exceeds the oscillation budget.
DiracSpinor dirac_packet(const DiracProfile& p, const HyperboloidGrid& grid, const FourVector& x,
                         double budget = 50.0);
// -i exp(-i (m lambda + pi/4) gamma.z) f(z), the lambda^{3/2}-scaled leading term.
DiracSpinor packet_asymptote(const DiracProfile& p, const FourVector& z, double lambda);

// Tangential derivative delta_a f(z) (covariant index a) through the
// degree-0 extension f(x / sqrt(x^2)).
std::array<DiracSpinor, 4> tangential_derivative(const std::function<DiracSpinor(const FourVector&)>& f,
                                                 const FourVector& z, double h = 1e-3);
// max |delta_a z^b - h_a^b| over a few sample points, using the same stencil.
double tangency_residual(double h = 1e-3);

struct TimelikeCharges {
  FourVector P;       // contravariant
  Tensor2 M;          // contravariant, real part
  Tensor2 M_orbital;  // z^a i delta^b - z^b i delta^a part
  Tensor2 M_spin;     // (i/4)[gamma^a, gamma^b] part
  double imag_residual = 0.0;  // max |Im M| before taking the real part
};

// P^a = m int z^a fbar f dmu, M^{ab} = int fbar gamma.z (z^a i delta^b - z^b i delta^a
// + (i/4)[gamma^a, gamma^b]) f dmu. InvariantError if the stencil fails the
// tangency identity beyond 1e-6.
TimelikeCharges timelike_out_charges(const DiracProfile& p, const HyperboloidGrid& grid);

// --- Coulomb potential and phase -----------------------------------------

struct GaugedPotential {
  FourVector a;          // a^b(z)
  double z_dot_a = 0.0;  // z.a(z)
  FourVector grad_za;    // delta^b (z.a(z))
  FourVector A_tr;       // lambda A_tr^b(lambda z) = a_T^b - ln(lambda) delta^b(z.a)
  Tensor2 f;             // f^{ab}(z)
};

// rho(v) = e fbar gamma.v f; quadrature on a grid centered at z.
GaugedPotential coulomb_gauge_potential(const DiracProfile& p, const FourVector& z, double lambda,
                                        HyperboloidSpec spec = {40, 24, 48, 0.0, RadialRule::linear});

// int dmu(v) / ( sqrt((z.v)^2-1)^beta (z.v + sqrt((z.v)^2-1))^gamma (t.v)^{alpha+1} ).
// The polar focus of spec is set from the distance between z and t.
double kernel_bound_integral(double beta, double gamma, double alpha, const FourVector& z, const FourVector& t,
                             HyperboloidSpec spec = {64, 32, 32, 14.0, RadialRule::linear});

// H(z) = (e/4pi) int Phi(l) dl / (z.l)^2.
double phase_field(const NullDirectionGrid& grid, const std::function<double(const Spinor&)>& Phi, double e,
                   const FourVector& z);

// g = exp(iH) f with H evaluated pointwise through a cached sphere grid.
DiracProfile phase_dressing(const DiracProfile& p, const NullDirectionGrid& grid,
                            const std::function<double(const Spinor&)>& Phi);

// -2e (f, z_[a (a_b] - ln(lambda) delta_b](z.a)) f) as the double integral over
// the grid; vanishes by antisymmetry.
Tensor2 coulomb_cross_term(const DiracProfile& p, const HyperboloidGrid& grid, double lambda);

}  // namespace nullinf
