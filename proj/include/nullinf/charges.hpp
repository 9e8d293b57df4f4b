// Energy-momentum and angular momentum carried through null infinity, the
// long-range split of the angular momentum and the trajectory shift.
#pragma once

#include <optional>

#include "nullinf/em.hpp"

namespace nullinf {

enum class Flow { out, in };

// mu_AB together with its tensor M^{ab} = mu_AB eps_A'B' + conj.
struct AngularMomentum {
  SymSpinor mu;
  Tensor2 M = Tensor2::Zero();
  FourVector origin{};
  static AngularMomentum from_spinor(const SymSpinor& mu, const FourVector& origin = {});
  static AngularMomentum from_tensor(const Tensor2& M, const FourVector& origin = {});
};

struct ChargeOptions {
  int panels = 8, nodes_per_panel = 12;  // s quadrature per node
  double max_half_width = 1e4;
};

// P^a = (1/2pi) int l^a |zetadot|^2 ds dl (contravariant), from zeta (out) or
// zeta' (in). InvariantError when int zetadot ds misses the change of zeta
// across the s-window, or the jump of the limits when there is no news.
FourVector radiated_momentum(const EMAsymptoticData& d, Flow flow, const NullDirectionGrid& grid,
                             ChargeOptions opt = {});

// mu_AB = -(1/2pi) int nubar_(A zetadot_B) ds dl about the origin a.
AngularMomentum radiated_angular_momentum(const EMAsymptoticData& d, Flow flow, const NullDirectionGrid& grid,
                                          const FourVector& origin = {}, ChargeOptions opt = {});

// M^{ab}(a) from M^{ab}(0) for a radiated P: M(0) - (a^a P^b - a^b P^a).
Tensor2 shift_origin(const Tensor2& M0, const FourVector& P, const FourVector& a);

struct AngularMomentumSplit {
  AngularMomentum total, free, mixing;  // total = free + mixing
  double split_residual = 0.0;           // |total - free - mixing(q, Phi)|
  double by_parts_residual = 0.0;        // |mixing(q, Phi) + (1/2pi) int Phi o_(A d_B) q|
};

// mixing: Delta mu = (1/2pi) int q o_(A d_B) Phi dl; free: the zeta_out part of
// the integrand. InvariantError when q has an imaginary part beyond 1e-8.
AngularMomentumSplit angular_momentum_split(const EMAsymptoticData& d, const LongRangeVars& vars,
                                            const NullDirectionGrid& grid, ChargeOptions opt = {});

// (1/2pi) int q o_(A d_B) Phi dl from evaluators.
SymSpinor mixing_term(const NullDirectionGrid& grid, const ScalarOnSphere& q, const ScalarOnSphere& Phi);

// (1/4pi) int nubar_(A zeta_B)(-inf) dl; vanishes iff the total angular momentum exists.
SymSpinor existence_defect(const EMAsymptoticData& d, const NullDirectionGrid& grid);

struct TrajectoryShift {
  FourVector dy_raw;  // (Q/(pi m)) int l^a Phi / (v.l)^3 dl
  FourVector dy;      // representative orthogonal to v
  double delta = 0.0;  // -(Q/2pi) int Phi / (v.l)^2 dl
};
// Sphere quadrature on a grid in the v-gauge.
TrajectoryShift trajectory_shift(double Q, double m, const FourVector& v, const ScalarOnSphere& Phi,
                                 int n_theta = 64, int n_phi = 128);

struct CauchyCharges {
  FourVector P;  // contravariant
  Tensor2 M;     // about the origin
};
struct BallRule {
  int n_r = 6, n_theta = 12, n_phi = 24;  // n_r per radial panel
  SliceRule slice{};
};
// int over the ball |x_perp| < r of the hyperplane t.x = c of the Maxwell
// energy-momentum density, fields from free_field_sliced in the t-gauge.
CauchyCharges cauchy_surface_charges(const EMAsymptoticData& d, const FourVector& t, double c, double r,
                                     BallRule rule = {});
// The same for ascending radii, each shell integrated once.
std::vector<CauchyCharges> cauchy_surface_ladder(const EMAsymptoticData& d, const FourVector& t, double c,
                                                 std::span<const double> radii, BallRule rule = {});

struct RadiationBudget {
  FourVector P_out_n, P_in_n, P_out_t, P_in_t;
  AngularMomentum mu_out_n, mu_in_n, mu_out_t, mu_in_t;
  FourVector P_out, P_in;  // totals
  Tensor2 M_out = Tensor2::Zero(), M_in = Tensor2::Zero();
  double P_defect = 0.0, M_defect = 0.0;  // |out - in|
  double existence = 0.0;                 // |existence_defect|
};
// Timelike blocks default to zero (pure electromagnetic scenarios).
RadiationBudget radiation_budget(const EMAsymptoticData& d, const NullDirectionGrid& grid,
                                 std::optional<TimelikeCharges> out_t = {}, std::optional<TimelikeCharges> in_t = {},
                                 ChargeOptions opt = {});

}  // namespace nullinf
