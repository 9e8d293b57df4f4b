#include "nullinf/hyperboloid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nullinf {

namespace {

FourVector unit_axis(int k) {
  FourVector e{};
  e[static_cast<std::size_t>(k)] = 1.0;
  return e;
}

std::array<double, 3> angular_direction(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

std::vector<std::array<double, 3>> angular_rule(int n_theta, int n_phi, double focus) {
  std::vector<std::array<double, 2>> polar;  // theta, weight
  if (focus > 0.0 && focus < pi) {
    const int n1 = n_theta / 2;
    for (const auto& [th, w] : gauss_legendre(n1, 0.0, focus)) polar.push_back({th, w * std::sin(th)});
    for (const auto& [th, w] : gauss_legendre(n_theta - n1, focus, pi)) polar.push_back({th, w * std::sin(th)});
  } else {
    for (const auto& [x, w] : gauss_legendre(n_theta)) polar.push_back({std::acos(x), w});
  }
  std::vector<std::array<double, 3>> out;  // theta, phi, weight
  for (const auto& [th, w] : polar)
    for (int j = 0; j < n_phi; ++j) out.push_back({th, 2.0 * pi * j / n_phi, w * 2.0 * pi / n_phi});
  return out;
}

double hyperbolic_distance(const FourVector& a, const FourVector& b) {
  return std::acosh(std::max(1.0, dot(a, b)));
}

// exp(-i m x.v gamma.v) gamma.v f = exp(-i m x.v) P+ f - exp(i m x.v) P- f.
DiracSpinor packet_integrand(const DiracSpinor& f, const FourVector& v, double phase) {
  const Mat4 gv = slash(v);
  const DiracSpinor plus = 0.5 * (f + gv * f);
  const DiracSpinor minus = 0.5 * (f - gv * f);
  return std::exp(-I * phase) * plus - std::exp(I * phase) * minus;
}

struct ChargeTerms {
  Vec4<cplx> P;
  Eigen::Matrix4cd orb = Eigen::Matrix4cd::Zero(), spin = Eigen::Matrix4cd::Zero();
  ChargeTerms operator+(const ChargeTerms& o) const { return {P + o.P, orb + o.orb, spin + o.spin}; }
  friend ChargeTerms operator*(double w, const ChargeTerms& t) { return {w * t.P, w * t.orb, w * t.spin}; }
};

struct PotentialTerms {
  FourVector a, grad;
  Tensor2 f = Tensor2::Zero();
  PotentialTerms operator+(const PotentialTerms& o) const { return {a + o.a, grad + o.grad, f + o.f}; }
  friend PotentialTerms operator*(double w, const PotentialTerms& t) { return {w * t.a, w * t.grad, w * t.f}; }
};

}  // namespace

std::array<FourVector, 4> adapted_frame(const FourVector& z, const FourVector& pole) {
  require_unit_timelike(z);
  std::array<FourVector, 4> e{z, {}, {}, {}};
  std::vector<FourVector> seeds;
  if (euclidean_norm(pole) > 0.0) seeds.push_back(pole);
  for (int k = 3; k >= 1; --k) seeds.push_back(unit_axis(k));
  std::vector<FourVector> spatial;
  for (const FourVector& s : seeds) {
    if (spatial.size() == 3) break;
    FourVector w = s - dot(s, z) * z;
    for (const FourVector& ek : spatial) w = w + dot(w, ek) * ek;
    const double n2 = -dot(w, w);
    if (n2 < 1e-12) continue;
    spatial.push_back(w / std::sqrt(n2));
  }
  // Polar axis first in the seed order, so e3 follows the pole.
  e[3] = spatial[0];
  e[1] = spatial[1];
  e[2] = spatial[2];
  return e;
}

HyperboloidGrid::HyperboloidGrid(const FourVector& center, HyperboloidSpec spec, const FourVector& pole)
    : spec_(spec), frame_(adapted_frame(center, pole)) {
  if (spec.n_rap < 2 || spec.n_theta < 2 || spec.n_phi < 4 || !(spec.rap_max > 0.0))
    throw DomainError("hyperboloid grid: need n_rap, n_theta >= 2, n_phi >= 4, rap_max > 0");
  const auto ang = angular_rule(spec.n_theta, spec.n_phi, spec.polar_focus);
  const auto radial = spec.rule == RadialRule::tanh ? gauss_legendre(spec.n_rap, 0.0, std::tanh(spec.rap_max))
                                                    : gauss_legendre(spec.n_rap, 0.0, spec.rap_max);
  nodes_.reserve(radial.size() * ang.size());
  for (const auto& [r, wr] : radial) {
    const double eta = spec.rule == RadialRule::tanh ? std::atanh(r) : r;
    const double sh = std::sinh(eta), ch = std::cosh(eta);
    const double jac = spec.rule == RadialRule::tanh ? sh * sh * ch * ch : sh * sh;
    for (const auto& [th, ph, wa] : ang) nodes_.push_back({point(eta, th, ph), wr * jac * wa, eta});
  }
}

FourVector HyperboloidGrid::point(double eta, double theta, double phi) const {
  const auto n = angular_direction(theta, phi);
  const double sh = std::sinh(eta);
  return std::cosh(eta) * frame_[0] + (sh * n[0]) * frame_[1] + (sh * n[1]) * frame_[2] + (sh * n[2]) * frame_[3];
}

cplx integrate_hyperboloid(const HyperboloidGrid& grid, const std::function<cplx(const FourVector&)>& g) {
  const cplx total = grid.integrate_nodes([&](const FourVector& v) { return g(v); });
  const auto& s = grid.spec();
  const double sh = std::sinh(s.rap_max);
  cplx shell{};
  for (const auto& [th, ph, w] : angular_rule(s.n_theta, s.n_phi, s.polar_focus)) shell += w * g(grid.point(s.rap_max, th, ph));
  const double tail = std::abs(shell) * sh * sh;
  if (tail > 1e-8 * std::max(std::abs(total), 1e-300) && tail > 1e-300)
    throw ConvergenceError("hyperboloid integral: tail at rapidity " + std::to_string(s.rap_max) +
                           " is not negligible");
  return total;
}

DiracProfile gaussian_bump(const FourVector& v0, double width, const DiracSpinor& u, Branch branch, double mass,
                           double coupling) {
  require_unit_timelike(v0);
  if (!(width > 0.0) || !(mass > 0.0)) throw DomainError("gaussian_bump: width and mass must be positive");
  const double sign = branch == Branch::plus ? 1.0 : -1.0;
  DiracProfile p;
  p.f = [v0, width, u, sign](const FourVector& v) -> DiracSpinor {
    const double d = hyperbolic_distance(v, v0);
    const DiracSpinor proj = 0.5 * (u + sign * (slash(v) * u));
    return std::exp(-d * d / (2.0 * width * width)) * proj;
  };
  p.mass = mass;
  p.coupling = coupling;
  p.center = v0;
  p.support = 7.0 * width;
  return p;
}

DiracProfile two_bump(const DiracProfile& a, const DiracProfile& b) {
  if (a.mass != b.mass || a.coupling != b.coupling) throw DomainError("two_bump: mass and coupling must agree");
  DiracProfile p = a;
  p.f = [fa = a.f, fb = b.f](const FourVector& v) -> DiracSpinor { return fa(v) + fb(v); };
  p.support = std::max(a.support, hyperbolic_distance(a.center, b.center) + b.support);
  return p;
}

double dirac_density(const DiracProfile& p, const FourVector& v) {
  const DiracSpinor f = p.f(v);
  return (bar(f) * slash(v) * f).value().real();
}

cplx scalar_product(const HyperboloidGrid& grid, const DiracProfile& g, const DiracProfile& f) {
  return grid.integrate_nodes([&](const FourVector& v) { return (bar(g.f(v)) * slash(v) * f.f(v)).value(); });
}

DiracProfile normalized(const DiracProfile& p, const HyperboloidGrid& grid) {
  const double n = scalar_product(grid, p, p).real();
  if (!(n > 0.0)) throw DomainError("normalized: profile has zero norm");
  DiracProfile q = p;
  const double s = 1.0 / std::sqrt(n);
  q.f = [f = p.f, s](const FourVector& v) -> DiracSpinor { return s * f(v); };
  return q;
}

HyperboloidGrid profile_grid(const DiracProfile& p, int n_rap, int n_theta, int n_phi) {
  return HyperboloidGrid(p.center, {n_rap, n_theta, n_phi, p.support, RadialRule::linear});
}

DiracSpinor dirac_packet(const DiracProfile& p, const HyperboloidGrid& grid, const FourVector& x, double budget) {
  if (p.mass * euclidean_norm(x) > budget)
    throw DomainError("dirac_packet: m|x| = " + std::to_string(p.mass * euclidean_norm(x)) +
                      " exceeds the oscillation budget");
  const DiracSpinor sum = grid.integrate_nodes(
      [&](const FourVector& v) -> DiracSpinor { return packet_integrand(p.f(v), v, p.mass * dot(x, v)); });
  return std::pow(p.mass / (2.0 * pi), 1.5) * sum;
}

DiracSpinor packet_asymptote(const DiracProfile& p, const FourVector& z, double lambda) {
  const DiracSpinor f = p.f(z);
  const double ph = p.mass * lambda + pi / 4.0;
  const Mat4 gz = slash(z);
  const DiracSpinor plus = 0.5 * (f + gz * f), minus = 0.5 * (f - gz * f);
  return -I * (std::exp(-I * ph) * plus + std::exp(I * ph) * minus);
}

std::array<DiracSpinor, 4> tangential_derivative(const std::function<DiracSpinor(const FourVector&)>& f,
                                                 const FourVector& z, double h) {
  auto ext = [&](const FourVector& x) { return f(x / std::sqrt(dot(x, x))); };
  // x.x must stay positive along the stencil
  h /= euclidean_norm(z);
  std::array<DiracSpinor, 4> d;
  for (int a = 0; a < 4; ++a) {
    const FourVector e = unit_axis(a);
    d[static_cast<std::size_t>(a)] =
        (8.0 * (ext(z + h * e) - ext(z - h * e)) - (ext(z + 2.0 * h * e) - ext(z - 2.0 * h * e))) / (12.0 * h);
  }
  return d;
}

double tangency_residual(double h) {
  static const std::array<FourVector, 3> samples{FourVector{{1.0, 0.0, 0.0, 0.0}},
                                                 boosted_time(0.7, {1.0, -2.0, 0.5}),
                                                 boosted_time(2.5, {0.0, 1.0, 1.0})};
  double worst = 0.0;
  for (const FourVector& z : samples) {
    for (int b = 0; b < 4; ++b) {
      auto comp = [b](const FourVector& v) -> DiracSpinor {
        DiracSpinor s = DiracSpinor::Zero();
        s(0) = v[static_cast<std::size_t>(b)];
        return s;
      };
      const auto d = tangential_derivative(comp, z, h);
      const FourVector zl = lowered(z);
      for (int a = 0; a < 4; ++a) {
        const double expect = (a == b ? 1.0 : 0.0) - zl[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(b)];
        const double scale = std::max(1.0, std::abs(z[static_cast<std::size_t>(b)] * zl[static_cast<std::size_t>(a)]));
        worst = std::max(worst, std::abs(d[static_cast<std::size_t>(a)](0).real() - expect) / scale);
      }
    }
  }
  return worst;
}

TimelikeCharges timelike_out_charges(const DiracProfile& p, const HyperboloidGrid& grid) {
  const double h = 1e-3;
  if (const double r = tangency_residual(h); r > 1e-6)
    throw InvariantError("timelike_out_charges: tangential stencil residual " + std::to_string(r));
  std::array<std::array<Mat4, 4>, 4> sigma;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) sigma[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = spin_generator(a, b);

  const ChargeTerms sum = grid.integrate_nodes([&](const FourVector& z) -> ChargeTerms {
    const DiracSpinor f = p.f(z);
    const auto d = tangential_derivative(p.f, z, h);
    const Eigen::RowVector4cd fb = bar(f);
    const Eigen::RowVector4cd fbg = fb * slash(z);
    ChargeTerms t;
    const cplx ff = (fb * f).value();
    for (std::size_t a = 0; a < 4; ++a) t.P[a] = p.mass * z[a] * ff;
    std::array<cplx, 4> up;  // fbar gamma.z i delta^b f
    for (std::size_t b = 0; b < 4; ++b) up[b] = (b == 0 ? 1.0 : -1.0) * I * (fbg * d[b]).value();
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) {
        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        t.orb(ia, ib) = z[a] * up[b] - z[b] * up[a];
        t.spin(ia, ib) = (fbg * sigma[a][b] * f).value();
      }
    return t;
  });
  TimelikeCharges out;
  for (std::size_t a = 0; a < 4; ++a) out.P[a] = sum.P[a].real();
  out.M_orbital = sum.orb.real();
  out.M_spin = sum.spin.real();
  out.M = out.M_orbital + out.M_spin;
  out.imag_residual = (sum.orb + sum.spin).imag().cwiseAbs().maxCoeff();
  return out;
}

GaugedPotential coulomb_gauge_potential(const DiracProfile& p, const FourVector& z, double lambda,
                                        HyperboloidSpec spec) {
  require_unit_timelike(z);
  if (!(lambda > 0.0)) throw DomainError("coulomb_gauge_potential: lambda must be positive");
  // Outside the support the integrand is smooth on the profile grid; inside,
  // polar coordinates about z absorb the 1/sinh singularity.
  const double dist = hyperbolic_distance(z, p.center);
  const bool outside = dist > p.support;
  if (!(spec.rap_max > 0.0)) spec.rap_max = outside ? p.support : dist + p.support;
  const HyperboloidGrid grid = outside ? HyperboloidGrid(p.center, spec) : HyperboloidGrid(z, spec, p.center);

  const PotentialTerms sum = grid.integrate_nodes([&](const FourVector& v) -> PotentialTerms {
    const double rho = p.coupling * dirac_density(p, v);
    const double c = dot(z, v);
    const double s2 = c * c - 1.0, s = std::sqrt(s2);
    PotentialTerms t;
    t.a = (rho / s) * v;
    t.grad = (-rho / (s * s2)) * (v - c * z);
    t.f = (rho / (s * s2)) * wedge(z, v);
    return t;
  });
  GaugedPotential out;
  out.a = sum.a;
  out.z_dot_a = dot(z, sum.a);
  out.grad_za = sum.grad;
  out.f = sum.f;
  const FourVector aT = sum.a - out.z_dot_a * z;
  out.A_tr = aT - std::log(lambda) * sum.grad;
  return out;
}

double kernel_bound_integral(double beta, double gamma, double alpha, const FourVector& z, const FourVector& t,
                             HyperboloidSpec spec) {
  require_unit_timelike(t);
  // (t.v)^-(alpha+1) seen from z is peaked within ~1/sinh(d(z,t)) of the pole
  spec.polar_focus = 8.0 / std::sinh(std::max(hyperbolic_distance(z, t), 1e-3));
  const HyperboloidGrid grid(z, spec, t);
  return grid.integrate_nodes([&](const FourVector& v) {
    const double c = dot(z, v);
    const double s = std::sqrt(std::max(c * c - 1.0, 0.0));
    return 1.0 / (std::pow(s, beta) * std::pow(c + s, gamma) * std::pow(dot(t, v), alpha + 1.0));
  });
}

double phase_field(const NullDirectionGrid& grid, const std::function<double(const Spinor&)>& Phi, double e,
                   const FourVector& z) {
  require_unit_timelike(z, 1e-8);
  const double sum = grid.integrate_nodes([&](const GridNode& n) {
    const double zl = dot(z, n.l);
    return Phi(n.o) / (zl * zl);
  });
  return e / (4.0 * pi) * sum;
}

DiracProfile phase_dressing(const DiracProfile& p, const NullDirectionGrid& grid,
                            const std::function<double(const Spinor&)>& Phi) {
  std::vector<double> values;
  values.reserve(grid.size());
  for (const GridNode& n : grid.nodes()) values.push_back(Phi(n.o));
  DiracProfile g = p;
  g.f = [f = p.f, grid, values = std::move(values), e = p.coupling](const FourVector& v) -> DiracSpinor {
    double sum = 0.0;
    const auto& nodes = grid.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double vl = dot(v, nodes[i].l);
      sum += nodes[i].weight * values[i] / (vl * vl);
    }
    return std::exp(I * (e / (4.0 * pi) * sum)) * f(v);
  };
  return g;
}

Tensor2 coulomb_cross_term(const DiracProfile& p, const HyperboloidGrid& grid, double lambda) {
  const auto& nodes = grid.nodes();
  const auto rho = parallel_map(nodes.size(), [&](std::size_t i) {
    return nodes[i].weight * p.coupling * dirac_density(p, nodes[i].v);
  });
  const double ln = std::log(lambda);
  const auto rows = parallel_map(nodes.size(), [&](std::size_t i) {
    Tensor2 acc = Tensor2::Zero();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j == i) continue;
      const double c = dot(nodes[i].v, nodes[j].v);
      const double s2 = c * c - 1.0;
      if (s2 <= 0.0) continue;
      acc += (rho[i] * rho[j] * (1.0 + ln / s2) / std::sqrt(s2)) * wedge(nodes[i].v, nodes[j].v);
    }
    return acc;
  });
  return -2.0 * pairwise_sum(rows);
}

}  // namespace nullinf
