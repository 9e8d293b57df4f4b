#include <random>

#include "doctest.h"
#include "nullinf/sphere.hpp"

using namespace nullinf;

namespace {

const FourVector t0{{1, 0, 0, 0}};

HomogeneousFn inverse_square(const FourVector& v) {
  return {[v](const Spinor& o) { return cplx{1.0 / std::pow(dot(v, null_vector_of(o)), 2)}; }, {-2, -2}};
}

Spinor random_spinor(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return {cplx{n(rng), n(rng)}, cplx{n(rng), n(rng)}};
}

FourVector random_boost(std::mt19937_64& rng, double max_rap = 1.2) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> r(0.0, max_rap);
  return boosted_time(r(rng), {n(rng), n(rng), n(rng)});
}

}  // namespace

TEST_CASE("build_grid weights and gauge") {
  const auto g = build_grid(t0, 8, 16);
  CHECK(g.size() == 128);
  double sum = 0.0;
  for (const auto& n : g.nodes()) sum += n.weight;
  CHECK(std::abs(sum - 4.0 * pi) < 1e-12);
  const auto gb = build_grid(boosted_time(1.0, {1, 2, 3}), 8, 16);
  for (const auto& n : gb.nodes()) CHECK(std::abs(dot(gb.gauge(), n.l) - 1.0) < 1e-13);
  CHECK_THROWS_AS(build_grid({{0, 1, 0, 0}}, 8, 16), DomainError);
  CHECK_THROWS_AS(build_grid(t0, 1, 16), DomainError);
}

TEST_CASE("integrate: invariant measure") {
  const auto g = build_grid(t0, 8, 16);
  CHECK(std::abs(integrate(g, inverse_square(t0)) - 4.0 * pi) < 1e-12);
  const auto gb = build_grid(boosted_time(1.0, {0, 1, 1}), 32, 64);
  CHECK(std::abs(integrate(gb, inverse_square(t0)) - 4.0 * pi) < 1e-10);
  const auto g32 = build_grid(t0, 32, 64);
  CHECK(std::abs(integrate(g32, inverse_square(boosted_time(1.0, {1, 0, 0}))) - 4.0 * pi) < 1e-10);
  const HomogeneousFn q{[](const Spinor& o) { return cplx{0.5 / std::pow(dot(t0, null_vector_of(o)), 2)}; }, {-2, -2}};
  CHECK(std::abs(integrate(g, q) / (2.0 * pi) - 1.0) < 1e-13);
  CHECK_THROWS_AS(integrate(g, HomogeneousFn{[](const Spinor&) { return cplx{1.0}; }, {0, 0}}), DomainError);
}

TEST_CASE("integrate: spectral convergence and gauge independence") {
  const HomogeneousFn f = inverse_square(boosted_time(1.0, {0.3, 0.4, 1.0}));
  double prev = -1.0;
  for (int n : {4, 8, 16, 32}) {
    const double err = std::abs(integrate(build_grid(t0, n, 2 * n), f) - 4.0 * pi);
    if (prev > 1e-10) CHECK(err < std::max(prev / 100.0, 1e-12));
    prev = err;
  }
  std::mt19937_64 rng(21);
  const FourVector v1 = random_boost(rng), v2 = random_boost(rng);
  const HomogeneousFn h{[&](const Spinor& o) {
                          const FourVector l = null_vector_of(o);
                          return cplx{1.0 / (dot(v1, l) * dot(v2, l))};
                        },
                        {-2, -2}};
  const cplx a = integrate(build_grid(t0, 40, 80), h);
  const cplx b = integrate(build_grid(boosted_time(0.7, {1, -1, 0}), 40, 80), h);
  CHECK(std::abs(a - b) < 1e-9);
}

TEST_CASE("integrate_delta_line identity") {
  const auto g = build_grid(t0, 16, 32);
  const HomogeneousFn f{[](const Spinor& o) { return cplx{1.0 / dot(t0, null_vector_of(o))}; }, {-1, -1}};
  CHECK(std::abs(integrate_delta_line(g, {{0, 0, 0, 1}}, f) - 2.0 * pi) < 1e-13);
  CHECK(std::abs(integrate_delta_line(g, {{0, 0, 0, 2}}, f) - pi) < 1e-13);
  // y.t = 1, y.y = -1 in a boosted frame
  const auto gb = build_grid(boosted_time(0.9, {1, 0, 0}), 16, 32);
  const FourVector tb = gb.gauge();
  const FourVector y = tb + std::sqrt(2.0) * FourVector{{0, 0, 1, 0}};
  const HomogeneousFn fb{[tb](const Spinor& o) { return cplx{1.0 / dot(tb, null_vector_of(o))}; }, {-1, -1}};
  CHECK(std::abs(integrate_delta_line(gb, y, fb) - 2.0 * pi / std::sqrt(2.0)) < 1e-8);
  // a non-gauge weight: 1/(v.l) against the frame-t grid equals 2pi/sqrt((y.v)^2 - y^2)
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int k = 0; k < 20; ++k) {
    const FourVector v = random_boost(rng);
    FourVector yy{{n(rng), 2.0 + n(rng), n(rng), n(rng)}};
    if (dot(yy, yy) >= -0.1) continue;
    const HomogeneousFn fv{[v](const Spinor& o) { return cplx{1.0 / dot(v, null_vector_of(o))}; }, {-1, -1}};
    const double expect = 2.0 * pi / std::sqrt(dot(yy, v) * dot(yy, v) - dot(yy, yy));
    CHECK(std::abs(integrate_delta_line(build_grid(t0, 16, 64), yy, fv) - expect) < 1e-8);
  }
  CHECK_THROWS_AS(integrate_delta_line(g, {{1, 0, 0, 0}}, f), DomainError);
}

TEST_CASE("sgn integral of a constant-density charge") {
  // int sgn(y.l) dl/(2 (t.l)^2) = 2 pi y0 / |Y| for y = (y0, 0, 0, 1)
  const SpinFrame f = spin_frame(t0);
  for (double y0 : {0.0, 0.3, -0.6}) {
    const FourVector y{{y0, 0, 0, 1}};
    const cplx s = sgn_integral(f, y, [](const Spinor& o) { return cplx{0.5 / std::pow(dot(t0, null_vector_of(o)), 2)}; }, 12, 16);
    CHECK(std::abs(s - 2.0 * pi * y0) < 1e-12);
  }
}

TEST_CASE("spin_derivative: Euler identity and static charge") {
  const auto g = build_grid(t0, 8, 16);
  const HomogeneousFn f{[](const Spinor& o) { return cplx{1.0 / dot(t0, null_vector_of(o))}; }, {-1, -1}};
  CHECK(euler_residual(g, f, SpinIndex::unprimed) < 1e-8);
  CHECK(euler_residual(g, f, SpinIndex::primed) < 1e-8);
  const HomogeneousFn wrong{f.eval, {-2, -1}};
  CHECK_THROWS_AS(spin_derivative(g, wrong, SpinIndex::unprimed), ConvergenceError);

  // zeta^Q_A = Q/(t.l) t_A^C' obar_C'; d_A' zeta_A = -l_a Q/(2 (t.l)^2)
  const cplx Q = 1.0;
  auto zeta = [&](const Spinor& o) {
    const double tl = dot(t0, null_vector_of(o));
    return (Q / tl) * lower(Spinor::from(mixed(t0) * lower(conj(o)).vec()));
  };
  double worst = 0.0;
  for (const auto& n : g.nodes()) {
    const auto d = spin_gradient(zeta, n.o, SpinIndex::primed);  // d[A'][A]
    const Spinor od = lower(n.o), obd = lower(conj(n.o));
    const double q = 0.5 / std::pow(dot(t0, n.l), 2);
    for (int A = 0; A < 2; ++A)
      for (int Ap = 0; Ap < 2; ++Ap)
        worst = std::max(worst, std::abs(d[static_cast<std::size_t>(Ap)][A] + od[A] * obd[Ap] * q));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("zero-mean identities") {
  std::mt19937_64 rng(99);
  const auto g = build_grid(t0, 24, 48);
  for (int k = 0; k < 20; ++k) {
    const FourVector v1 = random_boost(rng), v2 = random_boost(rng);
    const Spinor b = random_spinor(rng), c = random_spinor(rng);
    // h1 of type {-1,-2}: int d_A h1 = 0
    auto h1 = [=](const Spinor& o) {
      const FourVector l = null_vector_of(o);
      return pair(b, o) / (dot(v1, l) * dot(v2, l));
    };
    // f1 of type {0,-2}: d_A f1 = o_A g1 with int g1 = 0
    auto f1 = [=](const Spinor& o) { return std::pow(pair(c, o), 2) / std::pow(dot(v1, null_vector_of(o)), 2); };
    double sup = 0.0;
    const auto ints = g.integrate_nodes([&](const GridNode& n) {
      const Spinor d = as_spinor(spin_gradient(h1, n.o, SpinIndex::unprimed));
      sup = std::max(sup, std::sqrt(norm2(d)));
      return d;
    });
    CHECK(std::sqrt(norm2(ints)) < 1e-7 * sup * 4.0 * pi);
    double sup1 = 0.0;
    const cplx i1 = g.integrate_nodes([&](const GridNode& n) {
      const Spinor d = as_spinor(spin_gradient(f1, n.o, SpinIndex::unprimed));
      const cplx g1 = contract(iota_of(n.o, t0), d);
      sup1 = std::max(sup1, std::abs(g1));
      return g1;
    });
    CHECK(std::abs(i1) < 1e-7 * sup1 * 4.0 * pi);
  }
}

TEST_CASE("homogeneity audit") {
  std::mt19937_64 rng(5);
  std::vector<Spinor> s;
  for (int k = 0; k < 10; ++k) s.push_back(random_spinor(rng));
  const FourVector v = random_boost(rng);
  const Spinor b = random_spinor(rng);
  const HomogeneousFn f{[=](const Spinor& o) { return pair(b, o) / std::pow(dot(v, null_vector_of(o)), 2); }, {-1, -2}};
  CHECK(homogeneity_residual(f, s) < 1e-10);
  const HomogeneousFn wrong{f.eval, {-2, -2}};
  CHECK(homogeneity_residual(wrong, s) > 1e-3);
}

TEST_CASE("harmonic expansion: fit and sphere Laplacian eigenvalue") {
  const auto g = build_grid(t0, 12, 24);
  std::vector<cplx> vals;
  const auto ref = real_harmonics(3, 0.7, 1.1);
  for (const auto& n : g.nodes()) {
    const auto Y = real_harmonics(3, n.theta, n.phi);
    vals.push_back(2.0 * Y[5] - Y[10] + cplx{0, 1} * Y[2]);
  }
  const auto h = HarmonicExpansion::fit(g, vals, 11);
  CHECK(std::abs(h.at(0.7, 1.1) - (2.0 * ref[5] - ref[10] + cplx{0, 1} * ref[2])) < 1e-13);
  CHECK(h.tail_norm(4) < 1e-13);

  // iota^A iotabar^A' d_A d_A' Y_lm = -l(l+1)/2 Y_lm in the t-gauge
  std::mt19937_64 rng(8);
  for (int l = 1; l <= 3; ++l) {
    std::vector<cplx> v;
    for (const auto& n : g.nodes()) v.push_back(real_harmonics(3, n.theta, n.phi)[static_cast<std::size_t>(l * l + l + 1)]);
    const auto hl = HarmonicExpansion::fit(g, v, 11);
    for (int k = 0; k < 5; ++k) {
      const Spinor o = direction_spinor(g.frame(), 0.3 + 0.5 * k, 0.2 + 1.1 * k);
      const auto D = mixed_second_derivative([&](const Spinor& p) { return hl(p); }, o);
      const Spinor io = iota_of(o, t0), iob = conj(io);
      cplx lap = 0.0;
      for (int A = 0; A < 2; ++A)
        for (int Ap = 0; Ap < 2; ++Ap) lap += io[A] * iob[Ap] * D[static_cast<std::size_t>(A)][Ap];
      CHECK(std::abs(lap + 0.5 * l * (l + 1) * hl(o)) < 1e-7);
    }
  }
}
