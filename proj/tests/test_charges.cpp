#include <doctest.h>

#include <random>

#include "nullinf/charges.hpp"

using namespace nullinf;

namespace {

const FourVector t0{{1.0, 0.0, 0.0, 0.0}};

template <class Derived>
double mx(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}
double mx(const FourVector& v) {
  double m = 0.0;
  for (double x : v.c) m = std::max(m, std::abs(x));
  return m;
}

Spinor random_spinor(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {cplx{g(rng), g(rng)}, cplx{g(rng), g(rng)}};
}

FourVector random_boost(std::mt19937_64& rng, double max_rap) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> r(0.0, max_rap);
  return boosted_time(r(rng), {u(rng), u(rng), u(rng) + 1e-3});
}

// SL(2,C) element and its Lorentz matrix.
struct Lorentz {
  Mat2 S;
  Tensor2 L;
  FourVector operator()(const FourVector& v) const {
    FourVector w{};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) w[static_cast<std::size_t>(a)] += L(a, b) * v[static_cast<std::size_t>(b)];
    return w;
  }
};

Lorentz random_lorentz(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.4);
  Mat2 S;
  S << cplx{1.0 + g(rng), g(rng)}, cplx{g(rng), g(rng)}, cplx{g(rng), g(rng)}, cplx{1.0 + g(rng), g(rng)};
  S /= std::sqrt(S.determinant());
  Tensor2 L;
  for (int b = 0; b < 4; ++b) {
    FourVector e{};
    e[static_cast<std::size_t>(b)] = 1.0;
    const FourVector col = real_part(vector_of(S * mixed(e) * S.adjoint()));
    for (int a = 0; a < 4; ++a) L(a, b) = col[static_cast<std::size_t>(a)];
  }
  return {S, L};
}

PointSource kink(const FourVector& u1, const FourVector& u2, double T, cplx Q) {
  return {Worldline(FourVector{}, u1, u2, T), Q};
}

EMAsymptoticData random_news(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::array<FourVector, 2> vel{random_boost(rng, 1.0), random_boost(rng, 1.0)};
  const std::array<cplx, 2> c{cplx{u(rng), u(rng)}, cplx{u(rng), u(rng)}};
  return smooth_news(t0, vel, c, 0.5 + 0.5 * std::abs(u(rng)));
}

}  // namespace

TEST_CASE("angular momentum spinor and tensor round trip") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    SymSpinor mu;
    const Spinor a = random_spinor(rng), b = random_spinor(rng);
    mu = symmetrized(a, b);
    const auto am = AngularMomentum::from_spinor(mu);
    CHECK(mx(am.M + am.M.transpose()) < 1e-14);
    CHECK(mx(AngularMomentum::from_tensor(am.M).mu.m - mu.m) < 1e-12);
  }
}

TEST_CASE("isotropic Gaussian news: P.t = 2 sqrt(pi/2) and mu = 0") {
  const NullDirectionGrid grid(t0, 24, 48);
  const auto iso = isotropic_gaussian_news(t0, direction_spinor(grid.frame(), 0.0, 0.0));
  const FourVector P = radiated_momentum(iso, Flow::out, grid);
  CHECK(std::abs(dot(P, t0) - 2.0 * std::sqrt(pi / 2.0)) < 1e-6);
  CHECK(std::sqrt(P[1] * P[1] + P[2] * P[2] + P[3] * P[3]) < 1e-10);
  const auto mu = radiated_angular_momentum(iso, Flow::out, grid);
  CHECK(mx(mu.mu.m) < 1e-8);
  // refined s quadrature agrees
  const FourVector Pf = radiated_momentum(iso, Flow::out, grid, {32, 24, 1e4});
  CHECK(std::abs(dot(Pf - P, t0)) < 1e-12);
}

TEST_CASE("Coulomb data radiates nothing") {
  const NullDirectionGrid grid(t0, 8, 16);
  const auto cd = coulomb_data(1.0, boosted_time(0.5, {1.0, 0.0, 0.0}));
  CHECK(mx(radiated_momentum(cd, Flow::out, grid)) == 0.0);
  CHECK(mx(radiated_angular_momentum(cd, Flow::out, grid).mu.m) == 0.0);
}

TEST_CASE("radiated momentum is future causal and conserved for sourceless data") {
  std::mt19937_64 rng(7);
  const NullDirectionGrid grid(t0, 16, 32);
  for (int k = 0; k < 10; ++k) {
    const auto d = random_news(rng);
    const FourVector P = radiated_momentum(d, Flow::out, grid);
    CHECK(P[0] > 0.0);
    CHECK(P[0] >= std::sqrt(P[1] * P[1] + P[2] * P[2] + P[3] * P[3]) - 1e-10);
    CHECK(euclidean_norm(P - radiated_momentum(d, Flow::in, grid)) < 1e-7);
  }
  const NullDirectionGrid fine(t0, 32, 64);
  for (int k = 0; k < 10; ++k) {
    const HertzField h{1.4 * random_boost(rng, 0.6), random_spinor(rng)};
    const FourVector P = radiated_momentum(h.data(), Flow::out, fine);
    CHECK(P[0] >= std::sqrt(P[1] * P[1] + P[2] * P[2] + P[3] * P[3]) - 1e-10);
    CHECK(euclidean_norm(P - radiated_momentum(h.data(), Flow::in, fine)) < 1e-7);
  }
}

TEST_CASE("news that misses the jump is rejected") {
  const NullDirectionGrid grid(t0, 6, 12);
  const FourVector u1 = boosted_time(0.4, {1.0, 0.0, 0.0});
  const auto d = current_data(PointCharges{{kink(t0, u1, 0.0, 1.0)}});
  CHECK_THROWS_AS(radiated_momentum(d, Flow::out, grid), InvariantError);
  const auto smooth = current_data(PointCharges{{kink(t0, u1, 1.0, 1.0)}});
  CHECK_NOTHROW(radiated_momentum(smooth, Flow::out, grid));
}

TEST_CASE("Cauchy-surface charges converge to the radiated charges") {
  const HertzField h{FourVector{{1.3, 0.2, -0.1, 0.3}}, Spinor{cplx{0.8, 0.2}, cplx{-0.3, 0.5}}};
  const auto d = h.data();
  const NullDirectionGrid grid(t0, 32, 64);
  const FourVector P = radiated_momentum(d, Flow::out, grid);
  const auto mu_out = radiated_angular_momentum(d, Flow::out, grid);
  const auto mu_in = radiated_angular_momentum(d, Flow::in, grid);
  const Tensor2 M = 0.5 * (mu_out.M + mu_in.M);

  // sliced field against the closed form far out
  for (double r : {0.5, 6.0, 20.0}) {
    const FourVector x{{0.7, 0.3 * r, -0.5 * r, std::sqrt(0.66) * r}};
    CHECK(mx(free_field_sliced(d, x).m - h.field(x).m) < 1e-4 * mx(h.field(x).m));
  }

  const std::array<double, 4> radii{2.0, 4.0, 8.0, 16.0};
  const auto ladder = cauchy_surface_ladder(d, t0, 0.0, radii);
  double prev = 1e300;
  for (const auto& rung : ladder) {
    const double defect = std::max(euclidean_norm(rung.P - P), mx(Tensor2(rung.M - M)));
    CHECK(defect < prev);
    prev = defect;
  }
  CHECK(prev < 1e-4);
  const auto& last = ladder.back();
  const auto shifted = cauchy_surface_charges(d, t0, 0.7, 16.0);
  CHECK(euclidean_norm(shifted.P - last.P) < 1e-5);
  CHECK(mx(Tensor2(shifted.M - last.M)) < 1e-5);

  // origin translation: both sides about a
  const FourVector a{{0.3, -0.4, 0.2, 0.5}};
  const auto mu_a = radiated_angular_momentum(d, Flow::out, grid, a);
  CHECK(mx(Tensor2(mu_a.M - shift_origin(mu_out.M, P, a))) < 1e-6);
  const auto mu_a_in = radiated_angular_momentum(d, Flow::in, grid, a);
  CHECK(mx(Tensor2(shift_origin(last.M, last.P, a) - 0.5 * (mu_a.M + mu_a_in.M))) < 1e-4);
}

TEST_CASE("angular momentum split with a smooth kink") {
  const NullDirectionGrid grid(t0, 24, 48);
  const FourVector u1 = boosted_time(0.3, {1.0, 0.0, 0.2}), u2 = boosted_time(0.5, {0.0, 1.0, -0.4});
  const PointCharges pc{{kink(u1, u2, 1.2, 1.0)}};
  const auto d = current_data(pc);
  const auto v = longrange_vars(pc, grid);
  const auto split = angular_momentum_split(d, v, grid);
  CHECK(split.split_residual < 1e-6);
  CHECK(split.by_parts_residual < 1e-7);
  CHECK(mx(split.mixing.mu.m) > 1e-3);
  CHECK(mx(split.total.M - split.free.M - split.mixing.M) < 1e-6);

  // constant Phi gives no mixing
  CHECK(mx(mixing_term(grid, v.q_fn, [](const Spinor&) { return cplx{2.5}; }).m) < 1e-10);

  // complex q is rejected
  const auto mag = longrange_vars(PointCharges{{kink(u1, u2, 1.2, cplx{1.0, 0.3})}}, grid);
  CHECK_THROWS_AS(angular_momentum_split(current_data(PointCharges{{kink(u1, u2, 1.2, cplx{1.0, 0.3})}}), mag, grid),
                  InvariantError);
}

TEST_CASE("mixing term equals the shift tensor") {
  const NullDirectionGrid grid(t0, 32, 64);
  const double xi = 1.0, Q = 0.7, Q0 = 1.3, m = 2.0;
  const FourVector u1 = boosted_time(xi / 2, {1.0, 0.0, 0.0}), u2 = boosted_time(xi / 2, {-1.0, 0.0, 0.0});
  const FourVector v = boosted_time(0.4, {0.3, 1.0, 0.0});
  const ScalarOnSphere Phi = [&](const Spinor& o) {
    const FourVector l = null_vector_of(o);
    return cplx{Q0 * std::log(dot(u1, l) / dot(u2, l))};
  };
  const ScalarOnSphere q = [&](const Spinor& o) {
    const double vl = dot(v, null_vector_of(o));
    return cplx{Q / (2.0 * vl * vl)};
  };
  const SymSpinor dmu = mixing_term(grid, q, Phi);
  const auto shift = trajectory_shift(Q, m, v, Phi);
  CHECK(mx(Tensor2(tensor_of(dmu) + 0.5 * m * wedge(shift.dy, v))) < 1e-8);
}

TEST_CASE("existence condition") {
  const NullDirectionGrid grid(t0, 16, 32);
  const FourVector v1 = boosted_time(0.5, {1.0, 0.0, 0.0}), v2 = boosted_time(0.7, {0.0, 1.0, 1.0});
  const std::array<FourVector, 2> u{v1, v2};
  const std::array<cplx, 2> c{0.6, -0.9};
  const auto electric = superpose(coulomb_data(1.0, t0), smooth_news(t0, u, c));
  CHECK(mx(existence_defect(electric, grid).m) < 1e-8);
  CHECK(mx(existence_defect(current_data(PointCharges{{kink(v1, v2, 1.0, 1.0)}}), grid).m) < 1e-8);

  auto pair = [&](cplx a, cplx b) {
    return current_data(PointCharges{{kink(v1, v1, 0.0, a), kink(v2, v2, 0.0, b)}});
  };
  CHECK(mx(existence_defect(pair(1.0, I), grid).m) > 1e-2);
  const cplx ph = std::polar(1.0, 0.8);
  CHECK(mx(existence_defect(pair(ph, 2.0 * ph), grid).m) < 1e-8);
}

TEST_CASE("trajectory shift") {
  const FourVector v = boosted_time(0.6, {0.0, 1.0, 1.0});
  const auto cst = trajectory_shift(1.5, 2.0, v, [](const Spinor&) { return cplx{0.4}; });
  CHECK(mx(cst.dy) < 1e-12);
  CHECK(std::abs(cst.delta + 2.0 * 1.5 * 0.4) < 1e-12);

  // kink Phi: the direct quadrature of the shift integral
  const double xi = 1.0;
  const FourVector u1 = boosted_time(xi, {1.0, 0.0, 0.0}), u2 = boosted_time(xi, {-1.0, 0.0, 0.0});
  const ScalarOnSphere Phi = [&](const Spinor& o) {
    const FourVector l = null_vector_of(o);
    return cplx{std::log(dot(u1, l) / dot(u2, l))};
  };
  const auto s = trajectory_shift(1.0, 1.0, t0, Phi);
  const double sh = std::sinh(xi), ch = std::cosh(xi);
  CHECK(std::abs(euclidean_norm(s.dy) - 4.0 * (sh * ch - xi) / (sh * sh)) < 1e-8);

  // gradient link: tangential d delta / d v^a = m dy_a
  const double m = 1.7, Q = 0.8;
  const FourVector w = boosted_time(0.5, {0.2, 0.4, 1.0});
  const auto base = trajectory_shift(Q, m, w, Phi);
  const double h = 1e-4;
  FourVector grad{};
  for (std::size_t a = 0; a < 4; ++a) {
    auto at = [&](double e) {
      FourVector p = w;
      p[a] += e;
      const double n = std::sqrt(dot(p, p));
      // delta is homogeneous of degree -2 in v
      return trajectory_shift(Q, m, (1.0 / n) * p, Phi).delta / (n * n);
    };
    grad[a] = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
  }
  const FourVector g_up = lowered(grad);
  const FourVector g_perp = g_up - dot(g_up, w) * w;
  CHECK(euclidean_norm(g_perp - m * base.dy) < 1e-5);
}

TEST_CASE("frame covariance of radiated charges") {
  std::mt19937_64 rng(17);
  const NullDirectionGrid grid(t0, 32, 64);
  const HertzField h{FourVector{{1.4, 0.1, 0.2, -0.2}}, Spinor{cplx{0.6, -0.1}, cplx{0.4, 0.3}}};
  const FourVector P = radiated_momentum(h.data(), Flow::out, grid);
  const Tensor2 M = radiated_angular_momentum(h.data(), Flow::out, grid).M;
  for (int k = 0; k < 3; ++k) {
    const Lorentz L = random_lorentz(rng);
    const HertzField hb{L(h.b), Spinor::from(L.S.conjugate() * h.alpha.vec())};
    const NullDirectionGrid g2(t0, 40, 80);
    const FourVector Pb = radiated_momentum(hb.data(), Flow::out, g2);
    const Tensor2 Mb = radiated_angular_momentum(hb.data(), Flow::out, g2).M;
    CHECK(euclidean_norm(Pb - L(P)) < 1e-6 * std::max(1.0, euclidean_norm(Pb)));
    CHECK(mx(Tensor2(Mb - L.L * M * L.L.transpose())) < 1e-6 * std::max(1.0, mx(Mb)));
  }
}

TEST_CASE("radiation budget of sourceless data closes") {
  const NullDirectionGrid grid(t0, 24, 48);
  const HertzField h{FourVector{{1.2, 0.0, 0.3, 0.1}}, Spinor{cplx{1.0, 0.0}, cplx{0.2, 0.4}}};
  const auto b = radiation_budget(h.data(), grid);
  CHECK(b.P_defect < 1e-7);
  CHECK(b.M_defect < 1e-7);
  CHECK(b.existence < 1e-12);
  CHECK(mx(b.P_out_t) == 0.0);
}

TEST_CASE("phase dressing of a packet transfers the mixing term") {
  const NullDirectionGrid sph(t0, 24, 48);
  DiracSpinor u;
  u << cplx{0.8, 0.1}, cplx{-0.3, 0.4}, cplx{0.2, -0.5}, cplx{0.1, 0.3};
  DiracProfile f = gaussian_bump(boosted_time(0.3, {0.0, 1.0, 0.0}), 0.35, u, Branch::plus, 1.0, 0.8);
  const HyperboloidGrid grid = profile_grid(f, 32, 16, 32);
  f = normalized(f, grid);
  const FourVector u1 = boosted_time(1.0, {1.0, 0.0, 0.0}), u2 = boosted_time(1.0, {-1.0, 0.0, 0.0});
  auto Phi = [&](const Spinor& o) {
    const FourVector l = null_vector_of(o);
    return 0.9 * std::log(dot(u1, l) / dot(u2, l));
  };
  const DiracProfile g = phase_dressing(f, sph, Phi);
  const Tensor2 dM = timelike_out_charges(g, grid).M - timelike_out_charges(f, grid).M;
  const auto q = q_closed_form(DiracCurrent{f}, true);
  const Tensor2 mix = tensor_of(mixing_term(sph, q, [&](const Spinor& o) { return cplx{Phi(o)}; }));
  CHECK(mx(Tensor2(dM - mix)) < 1e-8);
  CHECK(mx(mix) > 0.1);
}
