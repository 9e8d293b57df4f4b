#include "nullinf/charges.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nullinf {

namespace {

// Window for profiles evaluated at s + shift along o.
SWindow window_for(const EMAsymptoticData& d, const Spinor& o, double shift, const ChargeOptions& opt) {
  SWindow w{-shift, d.s_scale_at ? d.s_scale_at(o) : d.s_scale, opt.max_half_width, opt.panels,
            opt.nodes_per_panel, {}};
  if (d.s_breaks)
    for (double b : d.s_breaks(o)) w.breaks.push_back(b - shift);
  return w;
}

const SpinorProfile& profile_of(const EMAsymptoticData& d, Flow f) { return f == Flow::out ? d.zeta : d.past; }
const SpinorProfile& news_of(const EMAsymptoticData& d, Flow f) { return f == Flow::out ? d.zeta_dot : d.past_dot; }

Spinor jump_of(const EMAsymptoticData& d, Flow f, const Spinor& o) {
  return f == Flow::out ? d.zeta_plus(o) - d.zeta_minus(o) : d.past_plus(o) - d.past_minus(o);
}

double spinor_norm(const Spinor& s) { return std::sqrt(norm2(s)); }

Tensor2 eta() { return Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal(); }

// int nubar_(A zetadot_B) ds along one direction; the window follows
// |zetadot|^2 and nu is skipped where the news vanishes.
SymSpinor nu_news_integral(const std::function<Spinor(double)>& zdot, const std::function<Spinor(double)>& nu,
                           const SWindow& w) {
  const double half = s_half_width([&](double s) { return norm2(zdot(s)); }, w);
  const std::function<SymSpinor(double)> integrand = [&](double s) {
    const Spinor z = zdot(s);
    if (norm2(z) == 0.0) return SymSpinor{};
    return symmetrized(conj(nu(s)), z);
  };
  return integrate_s<SymSpinor>(integrand, w, half);
}

struct ShiftTerms {
  FourVector y;
  double d = 0.0;
  friend ShiftTerms operator+(const ShiftTerms& a, const ShiftTerms& b) { return {a.y + b.y, a.d + b.d}; }
  friend ShiftTerms operator*(double w, const ShiftTerms& a) { return {w * a.y, w * a.d}; }
};

}  // namespace

AngularMomentum AngularMomentum::from_spinor(const SymSpinor& mu, const FourVector& origin) {
  return {mu, tensor_of(mu), origin};
}

AngularMomentum AngularMomentum::from_tensor(const Tensor2& M, const FourVector& origin) {
  return {spinor_of(M), M, origin};
}

FourVector radiated_momentum(const EMAsymptoticData& d, Flow flow, const NullDirectionGrid& grid, ChargeOptions opt) {
  const SpinorProfile& prof = profile_of(d, flow);
  const SpinorProfile& news = news_of(d, flow);
  struct NodeResult {
    double energy;
    double jump_error;
  };
  const auto per = grid.sample([&](const GridNode& n) {
    const Spinor iota = iota_of(n.o, grid.gauge());
    const SWindow w = window_for(d, n.o, 0.0, opt);
    const std::function<cplx(double)> density = [&](double s) {
      return cplx{std::norm(contract(iota, news(s, n.o)))};
    };
    const double half = s_half_width([&](double s) { return density(s).real(); }, w);
    const double e = integrate_s<cplx>(density, w, half).real();
    // int zetadot ds against zeta(H) - zeta(-H) on the same window
    const Spinor J = integrate_s<Spinor>([&](double s) { return news(s, n.o); }, w, half);
    const Spinor jump = half > 0.0 ? prof(half, n.o) - prof(-half, n.o) : jump_of(d, flow, n.o);
    return NodeResult{e, spinor_norm(J - jump) / std::max(1.0, spinor_norm(jump))};
  });
  FourVector P{};
  std::vector<FourVector> terms(grid.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    terms[i] = (grid.nodes()[i].weight * per[i].energy / (2.0 * pi)) * grid.nodes()[i].l;
    worst = std::max(worst, per[i].jump_error);
  }
  if (worst > 1e-6)
    throw InvariantError("radiated_momentum: int zetadot ds misses the jump of the limits by " + std::to_string(worst));
  P = pairwise_sum(terms);
  return P;
}

AngularMomentum radiated_angular_momentum(const EMAsymptoticData& d, Flow flow, const NullDirectionGrid& grid,
                                          const FourVector& origin, ChargeOptions opt) {
  const SpinorProfile& prof = profile_of(d, flow);
  const SpinorProfile& news = news_of(d, flow);
  const FourVector t = grid.gauge();
  const SymSpinor sum = grid.integrate_nodes([&](const GridNode& n) {
    const double shift = dot(origin, n.l);
    // profiles about the origin: zeta(s + a.l, o)
    return nu_news_integral(
        [&](double s) { return news(s + shift, n.o); },
        [&](double s) {
          return nu_limit([&](const Spinor& p) { return prof(s + dot(origin, null_vector_of(p)), p); }, t, n.o);
        },
        window_for(d, n.o, shift, opt));
  });
  return AngularMomentum::from_spinor(cplx{-1.0 / (2.0 * pi)} * sum, origin);
}

Tensor2 shift_origin(const Tensor2& M0, const FourVector& P, const FourVector& a) { return M0 - wedge(a, P); }

SymSpinor mixing_term(const NullDirectionGrid& grid, const ScalarOnSphere& q, const ScalarOnSphere& Phi) {
  const SymSpinor s = grid.integrate_nodes([&](const GridNode& n) {
    const auto dPhi = spin_gradient(Phi, n.o, SpinIndex::unprimed);
    return q(n.o) * symmetrized(lower(n.o), as_spinor(dPhi));
  });
  return cplx{1.0 / (2.0 * pi)} * s;
}

AngularMomentumSplit angular_momentum_split(const EMAsymptoticData& d, const LongRangeVars& vars,
                                            const NullDirectionGrid& grid, ChargeOptions opt) {
  double imag = 0.0;
  for (const GridNode& n : grid.nodes()) imag = std::max(imag, std::abs(vars.q_fn(n.o).imag()));
  if (imag > 1e-8)
    throw InvariantError("angular_momentum_split: q has an imaginary part " + std::to_string(imag) +
                         " (magnetic-type long-range field)");
  const FourVector t = grid.gauge();
  AngularMomentumSplit out;
  out.total = radiated_angular_momentum(d, Flow::out, grid, {}, opt);
  const SymSpinor free = grid.integrate_nodes([&](const GridNode& n) {
    const Spinor obar = lower(conj(n.o));
    const cplx q = vars.q_fn(n.o);
    return nu_news_integral(
        [&](double s) { return d.zeta_dot(s, n.o); },
        [&](double s) { return nu_limit([&](const Spinor& p) { return d.zeta(s, p); }, t, n.o) + q * obar; },
        window_for(d, n.o, 0.0, opt));
  });
  out.free = AngularMomentum::from_spinor(cplx{-1.0 / (2.0 * pi)} * free);
  auto Phi = [&](const Spinor& o) { return vars.Phi.expansion(o); };
  const SymSpinor mix = mixing_term(grid, vars.q_fn, Phi);
  out.mixing = AngularMomentum::from_spinor(mix);
  out.split_residual = max_abs(out.total.mu - out.free.mu - mix);
  const SymSpinor parts = grid.integrate_nodes([&](const GridNode& n) {
    const auto dq = spin_gradient(vars.q_fn, n.o, SpinIndex::unprimed);
    return Phi(n.o) * symmetrized(lower(n.o), as_spinor(dq));
  });
  out.by_parts_residual = max_abs(mix + cplx{1.0 / (2.0 * pi)} * parts);
  return out;
}

SymSpinor existence_defect(const EMAsymptoticData& d, const NullDirectionGrid& grid) {
  const SymSpinor s = grid.integrate_nodes([&](const GridNode& n) {
    const Spinor nu = nu_limit(d.zeta_minus, grid.gauge(), n.o);
    return symmetrized(conj(nu), d.zeta_minus(n.o));
  });
  return cplx{1.0 / (4.0 * pi)} * s;
}

TrajectoryShift trajectory_shift(double Q, double m, const FourVector& v, const ScalarOnSphere& Phi, int n_theta,
                                 int n_phi) {
  require_unit_timelike(v, 1e-9);
  if (!(m > 0.0)) throw DomainError("trajectory_shift: mass must be positive");
  const NullDirectionGrid grid(v, n_theta, n_phi);
  // v-gauge nodes: v.l = 1
  const ShiftTerms s = grid.integrate_nodes([&](const GridNode& n) {
    const double f = Phi(n.o).real();
    return ShiftTerms{f * n.l, f};
  });
  TrajectoryShift out;
  out.dy_raw = (Q / (pi * m)) * s.y;
  out.dy = out.dy_raw - dot(out.dy_raw, v) * v;
  out.delta = -Q * s.d / (2.0 * pi);
  return out;
}

std::vector<CauchyCharges> cauchy_surface_ladder(const EMAsymptoticData& d, const FourVector& t, double c,
                                                 std::span<const double> radii, BallRule rule) {
  require_unit_timelike(t, 1e-9);
  if (radii.empty() || !(radii.front() > 0.0) || !std::is_sorted(radii.begin(), radii.end()))
    throw DomainError("cauchy_surface_ladder: radii must be positive and ascending");
  const auto frame = adapted_frame(t, FourVector{{0.0, 0.0, 0.0, 1.0}});
  const EMAsymptoticData dt = [&] {
    EMAsymptoticData e = d;
    e.gauge = t;
    return e;
  }();
  // radial panels [0,1], [1,2], [2,4], ... cut at every rung
  std::vector<double> cuts{0.0};
  for (double b = 1.0; b < radii.back(); b *= 2.0) cuts.push_back(b);
  cuts.insert(cuts.end(), radii.begin(), radii.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const auto ct = gauss_legendre(rule.n_theta, -1.0, 1.0);
  const Tensor2 g = eta();
  const FourVector tl = lowered(t);
  struct Terms {
    FourVector P;
    Tensor2 M = Tensor2::Zero();
    Terms operator+(const Terms& o) const { return {P + o.P, M + o.M}; }
  };
  auto shell = [&](double lo, double hi) {
    struct Point {
      FourVector x;
      double w;
    };
    std::vector<Point> pts;
    for (const auto& [rho, wr] : gauss_legendre(rule.n_r, lo, hi))
      for (const auto& [cth, wt] : ct)
        for (int k = 0; k < rule.n_phi; ++k) {
          const double ph = 2.0 * pi * k / rule.n_phi, sth = std::sqrt(1.0 - cth * cth);
          const FourVector n = (sth * std::cos(ph)) * frame[1] + (sth * std::sin(ph)) * frame[2] + cth * frame[3];
          pts.push_back({c * t + rho * n, wr * wt * (2.0 * pi / rule.n_phi) * rho * rho});
        }
    const auto terms = parallel_map(pts.size(), [&](std::size_t i) {
      const Point& p = pts[i];
      const Tensor2 F = tensor_of(free_field_sliced(dt, p.x, rule.slice));
      const Tensor2 Fl = F * g;  // F^a_c
      const double inv = (F.cwiseProduct(g * F * g)).sum();
      const Tensor2 T = (0.25 * inv * g - Fl * F.transpose()) / (4.0 * pi);
      FourVector Tt{};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) Tt[static_cast<std::size_t>(a)] += T(a, b) * tl[static_cast<std::size_t>(b)];
      return Terms{p.w * Tt, p.w * wedge(p.x, Tt)};
    });
    return pairwise_sum(terms);
  };
  std::vector<CauchyCharges> out;
  Terms acc;
  std::size_t next = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    acc = acc + shell(cuts[i], cuts[i + 1]);
    while (next < radii.size() && radii[next] == cuts[i + 1]) {
      out.push_back({acc.P, acc.M});
      ++next;
    }
  }
  return out;
}

CauchyCharges cauchy_surface_charges(const EMAsymptoticData& d, const FourVector& t, double c, double r,
                                     BallRule rule) {
  if (!(r > 0.0)) throw DomainError("cauchy_surface_charges: radius must be positive");
  const std::array<double, 1> radii{r};
  return cauchy_surface_ladder(d, t, c, radii, rule).front();
}

RadiationBudget radiation_budget(const EMAsymptoticData& d, const NullDirectionGrid& grid,
                                 std::optional<TimelikeCharges> out_t, std::optional<TimelikeCharges> in_t,
                                 ChargeOptions opt) {
  RadiationBudget b;
  b.P_out_n = radiated_momentum(d, Flow::out, grid, opt);
  b.P_in_n = radiated_momentum(d, Flow::in, grid, opt);
  b.mu_out_n = radiated_angular_momentum(d, Flow::out, grid, {}, opt);
  b.mu_in_n = radiated_angular_momentum(d, Flow::in, grid, {}, opt);
  if (out_t) {
    b.P_out_t = out_t->P;
    b.mu_out_t = AngularMomentum::from_tensor(out_t->M);
  }
  if (in_t) {
    b.P_in_t = in_t->P;
    b.mu_in_t = AngularMomentum::from_tensor(in_t->M);
  }
  b.P_out = b.P_out_n + b.P_out_t;
  b.P_in = b.P_in_n + b.P_in_t;
  b.M_out = b.mu_out_n.M + b.mu_out_t.M;
  b.M_in = b.mu_in_n.M + b.mu_in_t.M;
  b.P_defect = euclidean_norm(b.P_out - b.P_in);
  b.M_defect = (b.M_out - b.M_in).cwiseAbs().maxCoeff();
  b.existence = max_abs(existence_defect(d, grid));
  return b;
}

}  // namespace nullinf
