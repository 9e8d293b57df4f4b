// Electromagnetic characteristic data at null infinity.
//
// A profile zeta_A(s, o) (lower index) satisfies zeta_A(|a|^2 s, a o) = a^-1 zeta_A(s, o)
// and zeta^A o_A = Q. The future free field is phi_AB = -(1/2pi) int o_(A zetaddot_B) dl.
// The past profile zeta'_A matches by zeta(-inf) = zeta'(+inf).
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "nullinf/hyperboloid.hpp"
#include "nullinf/scalar.hpp"

namespace nullinf {

using SpinorProfile = std::function<Spinor(double s, const Spinor& o)>;
using SpinorLimit = std::function<Spinor(const Spinor& o)>;

struct EMAsymptoticData {
  SpinorProfile zeta, zeta_dot, zeta_ddot;  // future
  SpinorProfile past, past_dot;             // zeta'
  SpinorLimit zeta_minus, zeta_plus;        // zeta(-inf), zeta(+inf)
  SpinorLimit past_minus, past_plus;        // zeta'(-inf), zeta'(+inf)
  cplx Q{};
  FourVector gauge{{1.0, 0.0, 0.0, 0.0}};
  double epsilon = 1.0;
  double s_scale = 1.0;  // width of the radiative part, seeds the s-window
  std::function<double(const Spinor&)> s_scale_at;  // per direction, overrides s_scale
  // s values where zeta_dot has kinks or jumps along o; unset when smooth.
  std::function<std::vector<double>(const Spinor&)> s_breaks;
};

// C_A(v, o) = (v^{AA'} obar_A')_lowered / (v.l): the characteristic of a unit
// charge with velocity v; C^A o_A = 1.
Spinor velocity_characteristic(const FourVector& v, const Spinor& o);
// y_A^{C'} k_{BC'} for lower-index mixed spinors.
Mat2 primed_contraction(const Mat2& y_dn, const Mat2& k_dn);
// Both indices lowered, complex vector.
Mat2 mixed_lower(const CFourVector& v);

// nu_A'(s) = iota^A d_A' zeta_A at fixed s (t-gauge iota).
Spinor nu(const EMAsymptoticData& d, double s, const Spinor& o);
// nu_A' of a limit profile.
Spinor nu_limit(const SpinorLimit& z, const FourVector& t, const Spinor& o);
// zeta - zeta(+inf) = o_A zeta_out; zeta' - zeta'(-inf) = o_A zeta'_in.
cplx zeta_out(const EMAsymptoticData& d, double s, const Spinor& o);
cplx zeta_in(const EMAsymptoticData& d, double s, const Spinor& o);

struct DataResiduals {
  double charge = 0.0;       // max |zeta^A o_A - Q|
  double homogeneity = 0.0;  // max relative rescaling residual
  double matching = 0.0;     // max |zeta(-inf) - zeta'(+inf)|
  double past_charge = 0.0;  // max |zeta'^A o_A - Q|
};
DataResiduals data_residuals(const EMAsymptoticData& d, const NullDirectionGrid& grid,
                             std::span<const double> s_samples);
// InvariantError unless charge and matching residuals are below 1e-9.
void require_consistent(const EMAsymptoticData& d, const NullDirectionGrid& grid);

// --- builders ------------------------------------------------------------

// Static Coulomb data, zeta = Q C(t, o).
EMAsymptoticData coulomb_data(cplx Q, const FourVector& t);
// Free outgoing field with zeta_A = h(s / t.l) D_A(o), h = erfc / 2 of width w,
// D = sum_k c_k (C(u_k, o) - C(t, o)); Q = 0 and zeta' = zeta(-inf) - zeta.
EMAsymptoticData smooth_news(const FourVector& t, std::span<const FourVector> u, std::span<const cplx> c,
                             double width = 1.0);
// zeta = o_A g(s/(width t.l)) w(o)/(t.l) with g = exp(-s^2), |w| = 1,
// w = conj<a,o>/<a,o>. |zetadot| is isotropic in the t-gauge; singular at the
// single direction <a,o> = 0. P.t = 2 sqrt(pi/2) / width.
EMAsymptoticData isotropic_gaussian_news(const FourVector& t, const Spinor& a, double width = 1.0);
// Sourceless field alpha^A' alpha^B' d_AA' d_BB' (1/(x - ib)^2), b future timelike,
// alpha an upper primed spinor: closed form 8 (Z alpha)_A (Z alpha)_B / (z^2)^3
// with z = x - ib, and zeta_A = -o_A beta^2 / (2 (s - i b.l)^2), beta = alpha^A' obar_A'.
struct HertzField {
  FourVector b;
  Spinor alpha;
  SymSpinor field(const FourVector& x) const;
  EMAsymptoticData data() const;
};
// Sum of two data sets (charges add).
EMAsymptoticData superpose(const EMAsymptoticData& a, const EMAsymptoticData& b);

// --- currents ------------------------------------------------------------

struct PointCharges {
  std::vector<PointSource> sources;
};
struct DiracCurrent {
  DiracProfile profile;
  HyperboloidSpec spec{24, 12, 24, 0.0, RadialRule::linear};  // rap_max 0: profile support
};
struct StaticCoulomb {
  cplx Q{};
  FourVector t{{1.0, 0.0, 0.0, 0.0}};
  FourVector a{};
};
using CurrentModel = std::variant<PointCharges, DiracCurrent, StaticCoulomb>;

struct Characteristic {
  Spinor c;  // lower index
  cplx Q;
};
// c_A(s, o) and Q = c^A o_A.
Characteristic current_characteristic(const CurrentModel& m, double s, const Spinor& o);
// Retarded data of the model: zeta = c, zeta' = c(-inf).
EMAsymptoticData current_data(const CurrentModel& m, const FourVector& gauge = {{1.0, 0.0, 0.0, 0.0}});
// max over s of |c^A o_A - Q| on the grid.
double charge_conservation_defect(const CurrentModel& m, const NullDirectionGrid& grid,
                                  std::span<const double> s_samples);

// --- long-range variables ------------------------------------------------

using ScalarOnSphere = std::function<cplx(const Spinor&)>;

struct PhiSolution {
  HarmonicExpansion expansion;  // degree-0 extension evaluates Phi
  double tail_norm = 0.0;       // sigma coefficients with l = lmax
};
// Solves d_A d_A' Phi = l_a sigma with zero mean from t-gauge node values of sigma.
// DomainError when the sigma mean exceeds 1e-6.
PhiSolution phi_from_sigma(const NullDirectionGrid& grid, std::span<const cplx> sigma_nodes, int lmax = -1);
// max |d_A Phi + o_A zeta_out(-inf)| over the grid.
double phi_residual(const NullDirectionGrid& grid, const PhiSolution& phi, const EMAsymptoticData& d);

struct LongRangeDefects {
  double q_mean = 0.0, qp_mean = 0.0;  // |(1/2pi) int q - Q|, same for q'
  double sigma_mean = 0.0;
  double constraint = 0.0;             // max |q + sigma - q' - sigma'|
  double transverse = 0.0;             // worst non-l part of the spin gradients
};

struct LongRangeVars {
  std::vector<cplx> q, qp, sigma, sigmap;  // t-gauge node values
  PhiSolution Phi, Phip;
  cplx Q{};
  FourVector gauge;
  LongRangeDefects defects;
  // Type {-2,-2} evaluators built from harmonic fits of the node values.
  ScalarOnSphere q_fn, sigma_fn, qp_fn, sigmap_fn;
};

// From the spin gradients of the limits. InvariantError when a gradient is not
// proportional to l_a within 1e-6.
LongRangeVars longrange_vars(const EMAsymptoticData& d, const NullDirectionGrid& grid);
// Closed forms for current models: q = sum Q_i / (2 (v_i(+inf).l)^2), q' with
// v(-inf); Dirac q = q' = e int rho / (2 (v.l)^2) dmu. Retarded field only, so
// sigma' = 0 and sigma = q' - q.
LongRangeVars longrange_vars(const CurrentModel& m, const NullDirectionGrid& grid);
ScalarOnSphere q_closed_form(const CurrentModel& m, bool future);
// zeta_A(+inf) rebuilt from (Q, q) through the t-gauge iota decomposition
// Q iota_A - (iota^B d_B Psi) o_A, d_A d_A' Psi = l_a (q - Q / (2 (t.l)^2)).
SpinorLimit zeta_plus_from_q(const NullDirectionGrid& grid, std::span<const cplx> q_nodes, cplx Q);

// --- fields --------------------------------------------------------------

struct FreeField {
  SymSpinor phi;  // phi_AB
  Mat2 phihat;    // phihat_AA'
};
// phi_AB = -(1/2pi) int o_(A zetaddot_B) dl, phihat_AA' = -(1/2pi) int d_A' zetadot_A dl.
FreeField free_field_from_zeta(const EMAsymptoticData& d, const NullDirectionGrid& grid, const FourVector& x);
// phi_AB at x from slices x.l = u (t.l) of the same integral: Gauss-Legendre
// in u = s_scale sinh(v) over the slice range, n_circle points per slice.
// Stays resolved where zetaddot(x.l) is too narrow for a fixed grid.
struct SliceRule {
  int panels = 6, nodes_per_panel = 8, n_circle = 48;
};
SymSpinor free_field_sliced(const EMAsymptoticData& d, const FourVector& x, SliceRule rule = {});
// phi_AB x^B_A'.
Mat2 contract_position(const SymSpinor& phi, const FourVector& x);

// Q t^{C'}_(A (x-a)_B)C' / (((x-a).t)^2 - (x-a)^2)^{3/2}; DomainError on the axis.
SymSpinor coulomb_field(cplx Q, const FourVector& t, const FourVector& a, const FourVector& x);
// Its spacelike limit lim R^2 phi(a + R y).
SymSpinor coulomb_spacelike_limit(cplx Q, const FourVector& t, const FourVector& y);

// (1/2pi) int delta'(y.l) o_(A zeta_B)(-inf) dl.
SymSpinor spacelike_limit_formula(const EMAsymptoticData& d, const FourVector& y, int n = 256);

// Richardson limits of R phi(x + R d) and R^2 phi(a + R y).
struct SpinorAsymptote {
  SymSpinor value;
  double error = 0.0;
};
SpinorAsymptote spinor_limit(const std::function<SymSpinor(const FourVector&)>& phi, const FourVector& base,
                             const FourVector& dir, int power, Ladder ladder = {});

struct LongRangeField {
  CFourVector K;          // covariant K_a
  Tensor2 F, F_E, F_M;    // contravariant
  SymSpinor phi;          // y^{C'}_(A K_B)C'
};
struct LongRangeOptions {
  int n_gl = 48, n_phi = 96;
  double rel_step = 1e-4;
};
// K_a = (1/(2 pi y^2)) d_a int sgn(y.l) (q + sigma) dl; F_E = ReK ^ y, *F_M = ImK ^ y.
// DomainError when y is within 1e-6 of the light cone.
LongRangeField longrange_field(const LongRangeVars& vars, const FourVector& y, LongRangeOptions opt = {});

// Radial electric and magnetic components F^{a b} y_b and *F^{ab} y_b.
FourVector radial_electric(const Tensor2& F, const FourVector& y);
FourVector radial_magnetic(const Tensor2& F, const FourVector& y);

// --- s integration -------------------------------------------------------

// int f(s) ds over the real line: the window grows from the scale until
// |f| < 1e-10 of the sampled peak at both ends, then Gauss-Legendre panels in
// u with s = center + scale sinh(u), split at the breaks.
// ConvergenceError when the window exceeds max_half_width.
struct SWindow {
  double center = 0.0, scale = 1.0, max_half_width = 1e4;
  int panels = 16, nodes_per_panel = 16;
  std::vector<double> breaks;
};
// Half width H of the window [center - H, center + H] chosen for |f|.
double s_half_width(const std::function<double(double)>& magnitude, const SWindow& w);
template <class T>
T integrate_s(const std::function<T(double)>& f, const SWindow& w, double half);
template <class T>
T integrate_s(const std::function<T(double)>& f, const SWindow& w);

}  // namespace nullinf
