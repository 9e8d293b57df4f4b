// Scalar wave fields and their characteristic data at null infinity.
//
// A profile chi(s, l) is homogeneous of degree -1 under (s, l) -> (k s, k l),
// i.e. chi(|a|^2 s, a o) = |a|^-2 chi(s, o). The future field it defines is
// A(x) = -(1/2pi) int chi'(x.l, l) dl.
#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <optional>
#include <vector>

#include "nullinf/sphere.hpp"

namespace nullinf {

enum class Direction { future, past };

struct AsymptoticProfile {
  std::function<cplx(double s, const Spinor& o)> chi, chi_dot;
  std::function<cplx(const Spinor& o)> chi_minus, chi_plus;  // limits at s = -inf, +inf
  double epsilon = 1.0;
  FourVector gauge{{1.0, 0.0, 0.0, 0.0}};
  Direction direction = Direction::future;
};

// Past profile of the same sourceless field: chi'(s) = chi(-inf) - chi(s).
AsymptoticProfile past_from_future(const AsymptoticProfile& future);

// max over samples of |chi(s)| s^eps (s > s_t) and |chi(s) - chi(-inf)| |s|^eps (s < -s_t).
double falloff_constant(const AsymptoticProfile& p, const NullDirectionGrid& grid, double s_t,
                        std::span<const double> s_samples);

// Data on the future light cone of the origin: eta(p, l), p = 2 x.u / x^2.
struct ConeData {
  std::function<cplx(double p, const Spinor& o)> eta_dot;
};

struct RefinementCheck {
  bool enabled = false;
  double rel_tol = 1e-6;
};

// A(x) = -(1/(pi x^2)) int eta'(2 x.u / x^2, u) d^2u. With the check enabled the
// value is recomputed on a doubled grid and ConvergenceError is thrown on mismatch.
cplx kirchhoff_evaluate(const ConeData& eta, const NullDirectionGrid& grid, const FourVector& x,
                        RefinementCheck check = {});

// Future: -(1/2pi) int chi'(x.l) dl. Past: +(1/2pi) int chi'(x.l) dl.
cplx field_from_asymptotic(const AsymptoticProfile& p, const NullDirectionGrid& grid, const FourVector& x);

using ScalarField = std::function<cplx(const FourVector&)>;

// |Box A| at x from a 4th-order stencil with step h.
double wave_residual(const ScalarField& A, const FourVector& x, double h = 1e-2);

enum class LimitMode { future, past, spacelike };

struct Ladder {
  double r0 = 8.0, ratio = 2.0;
  int rungs = 6;
};

struct AsymptoteEstimate {
  cplx value;
  double error = 0.0;
  double epsilon_fit = 0.0;  // empirical exponent of |g_k - g_{k-1}| ~ R^-eps
  bool diverged = false;     // successive extrapolants grow
  bool oscillating = false;  // epsilon_fit <= 0
  std::vector<cplx> samples;  // R A along the ladder
};

// Richardson limit of R A(x + R d) (future, spacelike) or R A(x - R d) (past).
AsymptoteEstimate null_asymptote(const ScalarField& A, const FourVector& x, const FourVector& d, LimitMode mode,
                                 Ladder ladder = {});

// Richardson table on a geometric ladder with error model sum_j c_j R^-j.
AsymptoteEstimate richardson(std::vector<cplx> samples, double ratio);

// Timelike worldline: straight with velocity v_in for tau < 0, uniform proper
// acceleration in the (v_in, v_out) plane for 0 <= tau <= T, straight with
// v_out afterwards. z(0) = z0.
class Worldline {
 public:
  Worldline(const FourVector& z0, const FourVector& v_in, const FourVector& v_out, double accel_time);
  static Worldline inertial(const FourVector& z0, const FourVector& v) { return {z0, v, v, 0.0}; }

  FourVector position(double tau) const;
  FourVector velocity(double tau) const;
  // Zero outside [0, T]; an instantaneous kink (T = 0) has none to report.
  FourVector acceleration(double tau) const;
  const FourVector& v_in() const { return v_in_; }
  const FourVector& v_out() const { return v_out_; }
  double accel_time() const { return T_; }
  // Proper time at which l.z(tau) = s.
  double retarded_parameter(const FourVector& l, double s) const;

 private:
  FourVector z0_, v_in_, v_out_, e1_{};
  double rapidity_ = 0.0, T_ = 0.0;
};

struct PointSource {
  Worldline path;
  cplx charge;
};

// c(s, l) = sum_i Q_i / (v_i.l) at the parameter with s = z_i.l.
cplx source_characteristic(std::span<const PointSource> sources, double s, const Spinor& o);
// Limits s -> +inf and s -> -inf.
cplx source_characteristic_limit(std::span<const PointSource> sources, const Spinor& o, bool future);

// c(s, l) for a sampled density J(y), supported in |y^k| < half_width in the
// t-frame: (1/t.l) int J(y0(s, y), y) d^3y with l.y = s.
cplx source_characteristic_sampled(const std::function<cplx(const FourVector&)>& J, const FourVector& t,
                                   double half_width, int n_gl, double s, const Spinor& o);

// Node-tabulated profile. Text layout, '#' lines are headers:
//   # gauge t0 t1 t2 t3
//   # epsilon e
//   # grid n_theta n_phi
//   node s re im        (one row per sample, s ascending within a node)
class TabulatedProfile {
 public:
  static TabulatedProfile read(std::istream& in);
  static TabulatedProfile load(const std::string& path);

  const NullDirectionGrid& grid() const { return grid_; }
  double epsilon() const { return epsilon_; }
  cplx value(std::size_t node, double s) const;
  cplx derivative(std::size_t node, double s) const;
  // Future field; ConvergenceError if |chi'| at a table end exceeds 1e-8 of its peak.
  cplx field(const FourVector& x) const;

 private:
  struct Series;
  TabulatedProfile(NullDirectionGrid g, double eps, std::vector<std::shared_ptr<const Series>> series);

  NullDirectionGrid grid_;
  double epsilon_;
  std::vector<std::shared_ptr<const Series>> series_;
  std::optional<std::string> truncation_;
};

}  // namespace nullinf
