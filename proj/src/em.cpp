#include "nullinf/em.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nullinf {

namespace {

double magnitude(cplx z) { return std::abs(z); }
double magnitude(const Spinor& s) { return std::sqrt(norm2(s)); }
double magnitude(const SymSpinor& s) { return s.m.norm(); }

// s-independent profile from a limit.
SpinorProfile constant_profile(SpinorLimit f) {
  return [f = std::move(f)](double, const Spinor& o) { return f(o); };
}
SpinorProfile zero_profile() {
  return [](double, const Spinor&) { return Spinor{}; };
}
SpinorLimit zero_limit() {
  return [](const Spinor&) { return Spinor{}; };
}

// N(x) = (x^{AA'} obar_A')_lowered, linear in x.
Spinor numerator(const FourVector& x, const Spinor& o) {
  const Eigen::Vector2cd ob = lower(conj(o)).vec();
  return lower(Spinor::from(mixed(x) * ob));
}

// d_A' f_A as a matrix [A][A'].
Mat2 primed_gradient(const SpinorLimit& f, const Spinor& o) {
  const auto g = spin_gradient(f, o, SpinIndex::primed);
  Mat2 m;
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap) m(A, Ap) = g[static_cast<std::size_t>(Ap)][A];
  return m;
}

// Best q with D = -l q, and the relative size of the remainder.
std::pair<cplx, double> extract_l_coefficient(const Mat2& D, const Spinor& o) {
  const Eigen::Vector2cd lo = lower(o).vec();
  const Mat2 L = lo * lo.conjugate().transpose();
  const cplx q = -(L.conjugate().cwiseProduct(D)).sum() / L.squaredNorm();
  const double resid = (D + q * L).norm() / (L.norm() * std::max(1.0, std::abs(q)));
  return {q, resid};
}

int default_lmax(const NullDirectionGrid& g) { return std::min(g.n_theta() - 1, (g.n_phi() - 1) / 2); }

ScalarOnSphere type22_evaluator(const HarmonicExpansion& e, const FourVector& t) {
  return [e, t](const Spinor& o) {
    const double tl = dot(t, null_vector_of(o));
    return e(o) / (tl * tl);
  };
}

cplx sphere_mean(const NullDirectionGrid& grid, std::span<const cplx> values) {
  std::vector<cplx> terms(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) terms[i] = grid.nodes()[i].weight * values[i];
  return pairwise_sum(terms) / (2.0 * pi);
}

// Density samples e rho(v) w(v) of a Dirac current on its grid.
struct DiracSamples {
  std::vector<FourVector> v;
  std::vector<double> w;
  cplx charge() const {
    double s = 0.0;
    for (double x : w) s += x;
    return s;
  }
  Spinor characteristic(const Spinor& o) const {
    std::vector<Spinor> terms(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) terms[i] = w[i] * velocity_characteristic(v[i], o);
    return pairwise_sum(terms);
  }
  cplx q(const Spinor& o) const {
    const FourVector l = null_vector_of(o);
    std::vector<double> terms(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double vl = dot(v[i], l);
      terms[i] = w[i] / (2.0 * vl * vl);
    }
    return pairwise_sum(terms);
  }
};

std::shared_ptr<const DiracSamples> dirac_samples(const DiracCurrent& d) {
  HyperboloidSpec spec = d.spec;
  if (!(spec.rap_max > 0.0)) spec.rap_max = d.profile.support;
  const HyperboloidGrid grid(d.profile.center, spec);
  auto out = std::make_shared<DiracSamples>();
  for (const auto& n : grid.nodes()) {
    out->v.push_back(n.v);
    out->w.push_back(n.weight * d.profile.coupling * dirac_density(d.profile, n.v));
  }
  return out;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Spinor point_characteristic(const std::vector<PointSource>& src, double s, const Spinor& o) {
  const FourVector l = null_vector_of(o);
  Spinor c{};
  for (const auto& p : src) c += p.charge * velocity_characteristic(p.path.velocity(p.path.retarded_parameter(l, s)), o);
  return c;
}

Spinor point_limit(const std::vector<PointSource>& src, const Spinor& o, bool future) {
  Spinor c{};
  for (const auto& p : src) c += p.charge * velocity_characteristic(future ? p.path.v_out() : p.path.v_in(), o);
  return c;
}

}  // namespace

Spinor velocity_characteristic(const FourVector& v, const Spinor& o) {
  return (1.0 / dot(v, null_vector_of(o))) * numerator(v, o);
}

Mat2 mixed_lower(const CFourVector& v) {
  Mat2 eps;
  eps << 0.0, 1.0, -1.0, 0.0;
  return eps.transpose() * mixed(v) * eps;
}

Mat2 primed_contraction(const Mat2& y, const Mat2& k) {
  // y_A^{C'} = eps^{C'D'} y_{AD'}, eps^{01} = 1
  Mat2 out = Mat2::Zero();
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B) out(A, B) = y(A, 1) * k(B, 0) - y(A, 0) * k(B, 1);
  return out;
}

Spinor nu(const EMAsymptoticData& d, double s, const Spinor& o) {
  return nu_limit([&](const Spinor& p) { return d.zeta(s, p); }, d.gauge, o);
}

Spinor nu_limit(const SpinorLimit& z, const FourVector& t, const Spinor& o) {
  const Spinor iota = iota_of(o, t);
  const Mat2 D = primed_gradient(z, o);
  const Eigen::Vector2cd n = D.transpose() * iota.vec();
  return Spinor::from(n);
}

cplx zeta_out(const EMAsymptoticData& d, double s, const Spinor& o) {
  return contract(iota_of(o, d.gauge), d.zeta(s, o) - d.zeta_plus(o));
}

cplx zeta_in(const EMAsymptoticData& d, double s, const Spinor& o) {
  return contract(iota_of(o, d.gauge), d.past(s, o) - d.past_minus(o));
}

DataResiduals data_residuals(const EMAsymptoticData& d, const NullDirectionGrid& grid,
                             std::span<const double> s_samples) {
  static const std::array<cplx, 3> alphas{cplx{1.7, 0.4}, cplx{-0.6, 0.9}, cplx{0.3, -1.2}};
  DataResiduals r;
  auto charge_of = [](const Spinor& z, const Spinor& o) { return -contract(o, z); };
  for (const GridNode& n : grid.nodes()) {
    for (double s : s_samples) {
      r.charge = std::max(r.charge, std::abs(charge_of(d.zeta(s, n.o), n.o) - d.Q));
      r.past_charge = std::max(r.past_charge, std::abs(charge_of(d.past(s, n.o), n.o) - d.Q));
    }
    r.matching = std::max(r.matching, std::sqrt(norm2(d.zeta_minus(n.o) - d.past_plus(n.o))));
  }
  // homogeneity on a handful of nodes
  const std::size_t stride = std::max<std::size_t>(1, grid.size() / 7);
  for (std::size_t i = 0; i < grid.size(); i += stride) {
    const Spinor& o = grid.nodes()[i].o;
    for (double s : s_samples) {
      const Spinor base = d.zeta(s, o);
      const double scale = std::max(std::sqrt(norm2(base)), 1e-12);
      for (cplx a : alphas) {
        const Spinor got = d.zeta(std::norm(a) * s, a * o);
        r.homogeneity = std::max(r.homogeneity, std::sqrt(norm2(got - (1.0 / a) * base)) / scale);
      }
    }
  }
  return r;
}

void require_consistent(const EMAsymptoticData& d, const NullDirectionGrid& grid) {
  const std::array<double, 5> s{-3.0, -0.7, 0.0, 0.9, 4.0};
  const auto r = data_residuals(d, grid, s);
  if (r.charge > 1e-9 || r.past_charge > 1e-9)
    throw InvariantError("EM data: zeta^A o_A differs from Q by " + std::to_string(std::max(r.charge, r.past_charge)));
  if (r.matching > 1e-9) throw InvariantError("EM data: zeta(-inf) != zeta'(+inf), residual " + std::to_string(r.matching));
}

EMAsymptoticData coulomb_data(cplx Q, const FourVector& t) {
  require_unit_timelike(t);
  EMAsymptoticData d;
  SpinorLimit c = [Q, t](const Spinor& o) { return Q * velocity_characteristic(t, o); };
  d.zeta = constant_profile(c);
  d.zeta_dot = zero_profile();
  d.zeta_ddot = zero_profile();
  d.past = constant_profile(c);
  d.past_dot = zero_profile();
  d.zeta_minus = d.zeta_plus = d.past_minus = d.past_plus = c;
  d.Q = Q;
  d.gauge = t;
  return d;
}

EMAsymptoticData smooth_news(const FourVector& t, std::span<const FourVector> u, std::span<const cplx> c,
                             double width) {
  require_unit_timelike(t);
  if (u.size() != c.size() || u.empty()) throw DomainError("smooth_news: need matching nonempty velocity and weight lists");
  if (!(width > 0.0)) throw DomainError("smooth_news: width must be positive");
  for (const auto& v : u) require_unit_timelike(v, 1e-9);
  std::vector<FourVector> us(u.begin(), u.end());
  std::vector<cplx> cs(c.begin(), c.end());
  SpinorLimit D = [t, us, cs](const Spinor& o) {
    Spinor acc{};
    const Spinor ct = velocity_characteristic(t, o);
    for (std::size_t k = 0; k < us.size(); ++k) acc += cs[k] * (velocity_characteristic(us[k], o) - ct);
    return acc;
  };
  auto arg = [t, width](double s, const Spinor& o) { return s / (width * dot(t, null_vector_of(o))); };
  auto tlw = [t, width](const Spinor& o) { return width * dot(t, null_vector_of(o)); };
  const double rpi = std::sqrt(pi);
  EMAsymptoticData d;
  d.zeta = [=](double s, const Spinor& o) { return (0.5 * std::erfc(arg(s, o))) * D(o); };
  d.zeta_dot = [=](double s, const Spinor& o) {
    const double x = arg(s, o);
    return (-std::exp(-x * x) / (rpi * tlw(o))) * D(o);
  };
  d.zeta_ddot = [=](double s, const Spinor& o) {
    const double x = arg(s, o), k = tlw(o);
    return (2.0 * x * std::exp(-x * x) / (rpi * k * k)) * D(o);
  };
  d.past = [=](double s, const Spinor& o) { return (1.0 - 0.5 * std::erfc(arg(s, o))) * D(o); };
  d.past_dot = [=](double s, const Spinor& o) {
    const double x = arg(s, o);
    return (std::exp(-x * x) / (rpi * tlw(o))) * D(o);
  };
  d.zeta_minus = D;
  d.zeta_plus = zero_limit();
  d.past_minus = zero_limit();
  d.past_plus = D;
  d.Q = 0.0;
  d.gauge = t;
  d.s_scale = width;
  d.s_scale_at = tlw;
  return d;
}

EMAsymptoticData isotropic_gaussian_news(const FourVector& t, const Spinor& a, double width) {
  require_unit_timelike(t);
  if (!(width > 0.0)) throw DomainError("isotropic_gaussian_news: width must be positive");
  auto w = [a](const Spinor& o) {
    const cplx p = pair(a, o);
    return std::conj(p) / p;
  };
  auto tl = [t](const Spinor& o) { return dot(t, null_vector_of(o)); };
  EMAsymptoticData d;
  d.zeta = [=](double s, const Spinor& o) {
    const double k = tl(o), x = s / (width * k);
    return (std::exp(-x * x) * w(o) / k) * lower(o);
  };
  d.zeta_dot = [=](double s, const Spinor& o) {
    const double k = tl(o), x = s / (width * k);
    return (-2.0 * x * std::exp(-x * x) * w(o) / (width * k * k)) * lower(o);
  };
  d.zeta_ddot = [=](double s, const Spinor& o) {
    const double k = tl(o), x = s / (width * k);
    return ((4.0 * x * x - 2.0) * std::exp(-x * x) * w(o) / (width * width * k * k * k)) * lower(o);
  };
  d.past = [z = d.zeta](double s, const Spinor& o) { return cplx{-1.0} * z(s, o); };
  d.past_dot = [z = d.zeta_dot](double s, const Spinor& o) { return cplx{-1.0} * z(s, o); };
  d.zeta_minus = zero_limit();
  d.zeta_plus = zero_limit();
  d.past_minus = zero_limit();
  d.past_plus = zero_limit();
  d.Q = 0.0;
  d.gauge = t;
  d.s_scale = width;
  d.s_scale_at = [tl, width](const Spinor& o) { return width * tl(o); };
  return d;
}

SymSpinor HertzField::field(const FourVector& x) const {
  const CFourVector z = complexify(x) - I * complexify(b);
  const Eigen::Vector2cd za = mixed_lower(z) * alpha.vec();
  const cplx zz = dot(z, z);
  SymSpinor s;
  s.m = (8.0 / (zz * zz * zz)) * (za * za.transpose());
  return s;
}

EMAsymptoticData HertzField::data() const {
  require_unit_timelike((1.0 / std::sqrt(dot(b, b))) * b, 1e-9);
  auto coef = [b = b, a = alpha](double s, const Spinor& o) {
    const cplx beta = contract(a, lower(conj(o)));
    return std::pair{beta * beta, s - I * dot(b, null_vector_of(o))};
  };
  EMAsymptoticData d;
  d.zeta = [coef](double s, const Spinor& o) {
    const auto [c, k] = coef(s, o);
    return (-c / (2.0 * k * k)) * lower(o);
  };
  d.zeta_dot = [coef](double s, const Spinor& o) {
    const auto [c, k] = coef(s, o);
    return (c / (k * k * k)) * lower(o);
  };
  d.zeta_ddot = [coef](double s, const Spinor& o) {
    const auto [c, k] = coef(s, o);
    return (-3.0 * c / (k * k * k * k)) * lower(o);
  };
  // past data: zeta' = zeta(-inf) + zeta(+inf) - zeta
  d.past = [z = d.zeta](double s, const Spinor& o) { return cplx{-1.0} * z(s, o); };
  d.past_dot = [z = d.zeta_dot](double s, const Spinor& o) { return cplx{-1.0} * z(s, o); };
  d.zeta_minus = d.zeta_plus = d.past_minus = d.past_plus = zero_limit();
  d.s_scale = std::sqrt(dot(b, b));
  d.s_scale_at = [b = b](const Spinor& o) { return dot(b, null_vector_of(o)); };
  return d;
}

EMAsymptoticData superpose(const EMAsymptoticData& a, const EMAsymptoticData& b) {
  auto add_p = [](SpinorProfile f, SpinorProfile g) -> SpinorProfile {
    return [f, g](double s, const Spinor& o) { return f(s, o) + g(s, o); };
  };
  auto add_l = [](SpinorLimit f, SpinorLimit g) -> SpinorLimit {
    return [f, g](const Spinor& o) { return f(o) + g(o); };
  };
  EMAsymptoticData d;
  d.zeta = add_p(a.zeta, b.zeta);
  d.zeta_dot = add_p(a.zeta_dot, b.zeta_dot);
  d.zeta_ddot = add_p(a.zeta_ddot, b.zeta_ddot);
  d.past = add_p(a.past, b.past);
  d.past_dot = add_p(a.past_dot, b.past_dot);
  d.zeta_minus = add_l(a.zeta_minus, b.zeta_minus);
  d.zeta_plus = add_l(a.zeta_plus, b.zeta_plus);
  d.past_minus = add_l(a.past_minus, b.past_minus);
  d.past_plus = add_l(a.past_plus, b.past_plus);
  d.Q = a.Q + b.Q;
  d.gauge = a.gauge;
  d.epsilon = std::min(a.epsilon, b.epsilon);
  d.s_scale = std::max(a.s_scale, b.s_scale);
  if (a.s_scale_at || b.s_scale_at)
    d.s_scale_at = [a, b](const Spinor& o) {
      return std::min(a.s_scale_at ? a.s_scale_at(o) : a.s_scale, b.s_scale_at ? b.s_scale_at(o) : b.s_scale);
    };
  if (a.s_breaks || b.s_breaks)
    d.s_breaks = [fa = a.s_breaks, fb = b.s_breaks](const Spinor& o) {
      std::vector<double> out = fa ? fa(o) : std::vector<double>{};
      if (fb) {
        const auto more = fb(o);
        out.insert(out.end(), more.begin(), more.end());
      }
      return out;
    };
  return d;
}

Characteristic current_characteristic(const CurrentModel& m, double s, const Spinor& o) {
  const Spinor c = std::visit(
      overloaded{[&](const PointCharges& p) { return point_characteristic(p.sources, s, o); },
                 [&](const DiracCurrent& d) { return dirac_samples(d)->characteristic(o); },
                 [&](const StaticCoulomb& c) { return c.Q * velocity_characteristic(c.t, o); }},
      m);
  return {c, -contract(o, c)};
}

EMAsymptoticData current_data(const CurrentModel& m, const FourVector& gauge) {
  return std::visit(
      overloaded{
          [&](const PointCharges& p) {
            for (const auto& src : p.sources) {
              require_unit_timelike(src.path.v_in(), 1e-9);
              require_unit_timelike(src.path.v_out(), 1e-9);
            }
            EMAsymptoticData d;
            const auto src = p.sources;
            d.zeta = [src](double s, const Spinor& o) { return point_characteristic(src, s, o); };
            d.zeta_dot = [src](double s, const Spinor& o) {
              const FourVector l = null_vector_of(o);
              Spinor acc{};
              for (const auto& p : src) {
                const double tau = p.path.retarded_parameter(l, s);
                const FourVector v = p.path.velocity(tau), a = p.path.acceleration(tau);
                const double vl = dot(v, l);
                // dC/ds = (dC/dtau) / (v.l)
                acc += (p.charge / (vl * vl)) * (numerator(a, o) - (dot(a, l) / vl) * numerator(v, o));
              }
              return acc;
            };
            double T = 1.0;
            for (const auto& s : src) T = std::max(T, s.path.accel_time());
            d.s_scale = T;
            d.s_breaks = [src](const Spinor& o) {
              const FourVector l = null_vector_of(o);
              std::vector<double> out;
              for (const auto& p : src)
                if (p.path.accel_time() > 0.0) {
                  out.push_back(dot(p.path.position(0.0), l));
                  out.push_back(dot(p.path.position(p.path.accel_time()), l));
                }
              return out;
            };
            d.zeta_ddot = [zd = d.zeta_dot, h = 1e-3 * T](double s, const Spinor& o) {
              const double k = dot(FourVector{{1.0, 0.0, 0.0, 0.0}}, null_vector_of(o));
              const double hs = h * k;
              return (1.0 / (12.0 * hs)) *
                     (8.0 * (zd(s + hs, o) - zd(s - hs, o)) - (zd(s + 2.0 * hs, o) - zd(s - 2.0 * hs, o)));
            };
            SpinorLimit minus = [src](const Spinor& o) { return point_limit(src, o, false); };
            d.zeta_minus = minus;
            d.zeta_plus = [src](const Spinor& o) { return point_limit(src, o, true); };
            d.past = constant_profile(minus);
            d.past_dot = zero_profile();
            d.past_minus = d.past_plus = minus;
            cplx Q = 0.0;
            for (const auto& s : src) Q += s.charge;
            d.Q = Q;
            d.gauge = gauge;
            return d;
          },
          [&](const DiracCurrent& dc) {
            const auto samples = dirac_samples(dc);
            SpinorLimit c = [samples](const Spinor& o) { return samples->characteristic(o); };
            EMAsymptoticData d;
            d.zeta = d.past = constant_profile(c);
            d.zeta_dot = d.zeta_ddot = d.past_dot = zero_profile();
            d.zeta_minus = d.zeta_plus = d.past_minus = d.past_plus = c;
            d.Q = samples->charge();
            d.gauge = gauge;
            return d;
          },
          [&](const StaticCoulomb& c) {
            EMAsymptoticData d = coulomb_data(c.Q, c.t);
            d.gauge = gauge;
            return d;
          }},
      m);
}

double charge_conservation_defect(const CurrentModel& m, const NullDirectionGrid& grid,
                                  std::span<const double> s_samples) {
  const EMAsymptoticData d = current_data(m, grid.gauge());
  double worst = 0.0;
  for (const GridNode& n : grid.nodes())
    for (double s : s_samples) worst = std::max(worst, std::abs(-contract(n.o, d.zeta(s, n.o)) - d.Q));
  return worst;
}

PhiSolution phi_from_sigma(const NullDirectionGrid& grid, std::span<const cplx> sigma, int lmax) {
  if (sigma.size() != grid.size()) throw DomainError("phi_from_sigma: node count mismatch");
  const cplx mean = sphere_mean(grid, sigma);
  if (std::abs(mean) > 1e-6)
    throw DomainError("phi_from_sigma: sigma has nonzero mean " + std::to_string(std::abs(mean)) + ", no solution exists");
  if (lmax < 0) lmax = default_lmax(grid);
  const auto fit = HarmonicExpansion::fit(grid, sigma, lmax);
  PhiSolution out;
  out.expansion = fit.scaled([](int l) { return l == 0 ? cplx{} : cplx{-2.0 / (l * (l + 1.0))}; });
  out.tail_norm = fit.tail_norm(lmax);
  return out;
}

double phi_residual(const NullDirectionGrid& grid, const PhiSolution& phi, const EMAsymptoticData& d) {
  const auto res = grid.sample([&](const GridNode& n) {
    const auto g = spin_gradient([&](const Spinor& p) { return phi.expansion(p); }, n.o, SpinIndex::unprimed);
    const cplx zo = contract(iota_of(n.o, d.gauge), d.zeta_minus(n.o) - d.zeta_plus(n.o));
    const Spinor r = as_spinor(g) + zo * lower(n.o);
    return std::sqrt(norm2(r));
  });
  return *std::max_element(res.begin(), res.end());
}

namespace {

LongRangeVars assemble(const NullDirectionGrid& grid, LongRangeVars v) {
  const FourVector t = grid.gauge();
  const int lmax = default_lmax(grid);
  auto& df = v.defects;
  df.q_mean = std::abs(sphere_mean(grid, v.q) - v.Q);
  df.qp_mean = std::abs(sphere_mean(grid, v.qp) - v.Q);
  df.sigma_mean = std::abs(sphere_mean(grid, v.sigma));
  for (std::size_t i = 0; i < grid.size(); ++i)
    df.constraint = std::max(df.constraint, std::abs(v.q[i] + v.sigma[i] - v.qp[i] - v.sigmap[i]));
  v.Phi = phi_from_sigma(grid, v.sigma, lmax);
  v.Phip = phi_from_sigma(grid, v.sigmap, lmax);
  if (!v.sigma_fn) v.sigma_fn = type22_evaluator(HarmonicExpansion::fit(grid, v.sigma, lmax), t);
  if (!v.sigmap_fn) v.sigmap_fn = type22_evaluator(HarmonicExpansion::fit(grid, v.sigmap, lmax), t);
  if (!v.q_fn) v.q_fn = type22_evaluator(HarmonicExpansion::fit(grid, v.q, lmax), t);
  if (!v.qp_fn) v.qp_fn = type22_evaluator(HarmonicExpansion::fit(grid, v.qp, lmax), t);
  v.gauge = t;
  return v;
}

}  // namespace

LongRangeVars longrange_vars(const EMAsymptoticData& d, const NullDirectionGrid& grid) {
  struct NodeVars {
    cplx q, qp, sigma, sigmap;
    double resid;
  };
  const auto per = grid.sample([&](const GridNode& n) {
    auto diff = [](SpinorLimit f, SpinorLimit g) -> SpinorLimit {
      return [f, g](const Spinor& o) { return f(o) - g(o); };
    };
    const auto [q, r1] = extract_l_coefficient(primed_gradient(d.zeta_plus, n.o), n.o);
    const auto [qp, r2] = extract_l_coefficient(primed_gradient(d.past_minus, n.o), n.o);
    const auto [sg, r3] = extract_l_coefficient(primed_gradient(diff(d.zeta_minus, d.zeta_plus), n.o), n.o);
    const auto [sgp, r4] = extract_l_coefficient(primed_gradient(diff(d.past_plus, d.past_minus), n.o), n.o);
    return NodeVars{q, qp, sg, sgp, std::max({r1, r2, r3, r4})};
  });
  LongRangeVars v;
  v.Q = d.Q;
  for (const auto& p : per) {
    v.q.push_back(p.q);
    v.qp.push_back(p.qp);
    v.sigma.push_back(p.sigma);
    v.sigmap.push_back(p.sigmap);
    v.defects.transverse = std::max(v.defects.transverse, p.resid);
  }
  if (v.defects.transverse > 1e-6)
    throw InvariantError("longrange_vars: spin gradient not proportional to l_a, residual " +
                         std::to_string(v.defects.transverse));
  return assemble(grid, std::move(v));
}

ScalarOnSphere q_closed_form(const CurrentModel& m, bool future) {
  return std::visit(
      overloaded{[&](const PointCharges& p) -> ScalarOnSphere {
                   return [src = p.sources, future](const Spinor& o) {
                     const FourVector l = null_vector_of(o);
                     cplx q = 0.0;
                     for (const auto& s : src) {
                       const double vl = dot(future ? s.path.v_out() : s.path.v_in(), l);
                       q += s.charge / (2.0 * vl * vl);
                     }
                     return q;
                   };
                 },
                 [&](const DiracCurrent& d) -> ScalarOnSphere {
                   return [samples = dirac_samples(d)](const Spinor& o) { return samples->q(o); };
                 },
                 [&](const StaticCoulomb& c) -> ScalarOnSphere {
                   return [c](const Spinor& o) {
                     const double vl = dot(c.t, null_vector_of(o));
                     return c.Q / (2.0 * vl * vl);
                   };
                 }},
      m);
}

SpinorLimit zeta_plus_from_q(const NullDirectionGrid& grid, std::span<const cplx> q, cplx Q) {
  if (q.size() != grid.size()) throw DomainError("zeta_plus_from_q: node count mismatch");
  const FourVector t = grid.gauge();
  std::vector<cplx> g(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double tl = dot(t, grid.nodes()[i].l);
    g[i] = q[i] - Q / (2.0 * tl * tl);
  }
  const PhiSolution psi = phi_from_sigma(grid, g);
  return [psi, t, Q](const Spinor& o) {
    const auto d = spin_gradient([&](const Spinor& p) { return psi.expansion(p); }, o, SpinIndex::unprimed);
    const cplx beta = -contract(iota_of(o, t), as_spinor(d));
    return Q * velocity_characteristic(t, o) + beta * lower(o);
  };
}

LongRangeVars longrange_vars(const CurrentModel& m, const NullDirectionGrid& grid) {
  LongRangeVars v;
  v.q_fn = q_closed_form(m, true);
  v.qp_fn = q_closed_form(m, false);
  v.sigma_fn = [q = v.q_fn, qp = v.qp_fn](const Spinor& o) { return qp(o) - q(o); };
  v.sigmap_fn = [](const Spinor&) { return cplx{}; };
  for (const GridNode& n : grid.nodes()) {
    v.q.push_back(v.q_fn(n.o));
    v.qp.push_back(v.qp_fn(n.o));
    v.sigma.push_back(v.qp.back() - v.q.back());
    v.sigmap.push_back(0.0);
  }
  v.Q = std::visit(overloaded{[](const PointCharges& p) {
                                cplx Q = 0.0;
                                for (const auto& s : p.sources) Q += s.charge;
                                return Q;
                              },
                              [](const DiracCurrent& d) { return dirac_samples(d)->charge(); },
                              [](const StaticCoulomb& c) { return c.Q; }},
                   m);
  return assemble(grid, std::move(v));
}

FreeField free_field_from_zeta(const EMAsymptoticData& d, const NullDirectionGrid& grid, const FourVector& x) {
  struct Terms {
    SymSpinor phi;
    Mat2 hat = Mat2::Zero();
    Terms operator+(const Terms& o) const { return {phi + o.phi, hat + o.hat}; }
  };
  const auto terms = parallel_map(grid.size(), [&](std::size_t i) {
    const GridNode& n = grid.nodes()[i];
    const double s = dot(x, n.l);
    const Mat2 D = primed_gradient([&](const Spinor& p) { return d.zeta_dot(s, p); }, n.o);
    return Terms{cplx{n.weight} * symmetrized(lower(n.o), d.zeta_ddot(s, n.o)), n.weight * D};
  });
  const Terms sum = pairwise_sum(terms);
  return {cplx{-1.0 / (2.0 * pi)} * sum.phi, (-1.0 / (2.0 * pi)) * sum.hat};
}

SymSpinor free_field_sliced(const EMAsymptoticData& d, const FourVector& x, SliceRule rule) {
  const FourVector& t = d.gauge;
  const double c = dot(x, t);
  const double rho = std::sqrt(std::max(0.0, c * c - dot(x, x)));
  if (!(rho > 1e-12 * std::max(1.0, std::abs(c))))
    throw DomainError("free_field_sliced: x lies on the axis of the gauge vector");
  const SpinFrame frame = spin_frame(t);
  // slices (x - u t).l = 0, u in (c - rho, c + rho), u = scale sinh(v)
  const double sc = d.s_scale;
  const double v0 = std::asinh((c - rho) / sc), v1 = std::asinh((c + rho) / sc);
  const double len = (v1 - v0) / rule.panels;
  std::vector<SymSpinor> terms;
  for (int p = 0; p < rule.panels; ++p)
    for (const auto& [v, w] : gauss_legendre(rule.nodes_per_panel, v0 + p * len, v0 + (p + 1) * len)) {
      const double u = sc * std::sinh(v);
      auto g = [&](const Spinor& o) { return symmetrized(lower(o), d.zeta_ddot(u * dot(t, null_vector_of(o)), o)); };
      terms.push_back(cplx{w * sc * std::cosh(v)} * delta_line(frame, x - u * t, g, rule.n_circle));
    }
  return cplx{-1.0 / (2.0 * pi)} * pairwise_sum(terms);
}

Mat2 contract_position(const SymSpinor& phi, const FourVector& x) {
  Mat2 eps;
  eps << 0.0, 1.0, -1.0, 0.0;
  return phi.m * mixed(x) * eps;
}

SymSpinor coulomb_field(cplx Q, const FourVector& t, const FourVector& a, const FourVector& x) {
  const FourVector w = x - a;
  const double wt = dot(w, t);
  const double den = wt * wt - dot(w, w);
  if (den <= 1e-12 * std::max(1.0, euclidean_norm(w) * euclidean_norm(w)))
    throw DomainError("coulomb_field: x lies on the worldline of the charge");
  const Mat2 M = primed_contraction(mixed_lower(complexify(t)), mixed_lower(complexify(w)));
  SymSpinor s;
  s.m = (Q / std::pow(den, 1.5)) * 0.5 * (M + M.transpose());
  return s;
}

SymSpinor coulomb_spacelike_limit(cplx Q, const FourVector& t, const FourVector& y) {
  return coulomb_field(Q, t, FourVector{}, y);
}

SymSpinor spacelike_limit_formula(const EMAsymptoticData& d, const FourVector& y, int n) {
  const SpinFrame frame = spin_frame(d.gauge);
  auto g = [&](const Spinor& o) { return symmetrized(lower(o), d.zeta_minus(o)); };
  return cplx{1.0 / (2.0 * pi)} * delta_prime_line(frame, y, g, n);
}

SpinorAsymptote spinor_limit(const std::function<SymSpinor(const FourVector&)>& phi, const FourVector& base,
                             const FourVector& dir, int power, Ladder ladder) {
  std::array<std::vector<cplx>, 3> comp;
  double R = ladder.r0;
  for (int k = 0; k < ladder.rungs; ++k, R *= ladder.ratio) {
    const SymSpinor v = phi(base + R * dir);
    const double f = std::pow(R, power);
    comp[0].push_back(f * v.m(0, 0));
    comp[1].push_back(f * v.m(0, 1));
    comp[2].push_back(f * v.m(1, 1));
  }
  SpinorAsymptote out;
  std::array<cplx, 3> val;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto est = richardson(comp[c], ladder.ratio);
    val[c] = est.value;
    out.error = std::max(out.error, est.error);
  }
  out.value.m << val[0], val[1], val[1], val[2];
  return out;
}

LongRangeField longrange_field(const LongRangeVars& vars, const FourVector& y, LongRangeOptions opt) {
  const double yy = dot(y, y);
  const double ey = euclidean_norm(y);
  if (!(yy < -1e-6 * ey * ey)) throw DomainError("longrange_field: y must be spacelike and off the light cone");
  const SpinFrame frame = spin_frame(vars.gauge);
  auto g = [&](const Spinor& o) { return vars.q_fn(o) + vars.sigma_fn(o); };
  auto G = [&](const FourVector& p) { return sgn_integral(frame, p, g, opt.n_gl, opt.n_phi); };
  const double h = opt.rel_step * ey;
  CFourVector K;  // covariant
  for (std::size_t a = 0; a < 4; ++a) {
    FourVector e{};
    e[a] = h;
    const cplx dG = (8.0 * (G(y + e) - G(y - e)) - (G(y + 2.0 * e) - G(y - 2.0 * e))) / (12.0 * h);
    K[a] = dG / (2.0 * pi * yy);
  }
  LongRangeField out;
  out.K = K;
  const CFourVector Kup = lowered(K);
  out.F_E = wedge(real_part(Kup), y);
  out.F_M = -dual(wedge(imag_part(Kup), y));
  out.F = out.F_E + out.F_M;
  const Mat2 M = primed_contraction(mixed_lower(complexify(y)), mixed_lower(Kup));
  out.phi.m = 0.5 * (M + M.transpose());
  return out;
}

FourVector radial_electric(const Tensor2& F, const FourVector& y) {
  const FourVector yl = lowered(y);
  FourVector out{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out[static_cast<std::size_t>(a)] += F(a, b) * yl[static_cast<std::size_t>(b)];
  return out;
}

FourVector radial_magnetic(const Tensor2& F, const FourVector& y) { return radial_electric(dual(F), y); }

double s_half_width(const std::function<double(double)>& magnitude, const SWindow& w) {
  const int probes = 64;
  double peak = 0.0, half = 4.0 * w.scale;
  auto probe = [&](double s) {
    const double m = magnitude(s);
    peak = std::max(peak, m);
    return m;
  };
  // core sampled once, then only the edges of each doubled window
  const double u0 = std::asinh(half / w.scale);
  for (int k = 0; k <= probes; ++k) probe(w.center + w.scale * std::sinh(-u0 + 2.0 * u0 * k / probes));
  for (double b : w.breaks)
    if (std::abs(b - w.center) < half) probe(b);
  for (;; half *= 2.0) {
    if (half > w.max_half_width)
      throw ConvergenceError("integrate_s: integrand not negligible within |s - c| < " + std::to_string(w.max_half_width));
    const double umax = std::asinh(half / w.scale), du = 2.0 * umax / probes;
    double edge = 0.0;
    for (double u : {-umax, -umax + du, umax - du, umax})
      edge = std::max(edge, probe(w.center + w.scale * std::sinh(u)));
    if (peak == 0.0) return 0.0;
    if (edge < 1e-10 * peak) return half;
  }
}

template <class T>
T integrate_s(const std::function<T(double)>& f, const SWindow& w, double half) {
  if (half <= 0.0) return T{};
  // s = c + scale sinh(u) resolves both the core and algebraic tails
  const double umax = std::asinh(half / w.scale), len = 2.0 * umax / w.panels;
  std::vector<double> cuts;
  for (int p = 0; p <= w.panels; ++p) cuts.push_back(-umax + p * len);
  for (double b : w.breaks) {
    const double u = std::asinh((b - w.center) / w.scale);
    if (std::abs(u) < umax) cuts.push_back(u);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<T> terms;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    if (cuts[p + 1] - cuts[p] < 1e-14 * umax) continue;
    for (const auto& [u, wt] : gauss_legendre(w.nodes_per_panel, cuts[p], cuts[p + 1]))
      terms.push_back(cplx{wt * w.scale * std::cosh(u)} * f(w.center + w.scale * std::sinh(u)));
  }
  return pairwise_sum(terms);
}

template <class T>
T integrate_s(const std::function<T(double)>& f, const SWindow& w) {
  return integrate_s<T>(f, w, s_half_width([&](double s) { return magnitude(f(s)); }, w));
}

template cplx integrate_s<cplx>(const std::function<cplx(double)>&, const SWindow&, double);
template Spinor integrate_s<Spinor>(const std::function<Spinor(double)>&, const SWindow&, double);
template SymSpinor integrate_s<SymSpinor>(const std::function<SymSpinor(double)>&, const SWindow&, double);
template cplx integrate_s<cplx>(const std::function<cplx(double)>&, const SWindow&);
template Spinor integrate_s<Spinor>(const std::function<Spinor(double)>&, const SWindow&);
template SymSpinor integrate_s<SymSpinor>(const std::function<SymSpinor(double)>&, const SWindow&);

}  // namespace nullinf
