#include <doctest.h>

#include <random>
#include <sstream>

#include "nullinf/scalar.hpp"

using namespace nullinf;

namespace {

const FourVector t0{{1.0, 0.0, 0.0, 0.0}};

// A_b(x) = 1/((x - i b)^2) and its characteristic data.
struct BFamily {
  FourVector b;
  cplx field(const FourVector& x) const {
    const CFourVector z = complexify(x) - I * complexify(b);
    return 1.0 / dot(z, z);
  }
  AsymptoticProfile profile() const {
    AsymptoticProfile p;
    p.chi = [b = b](double s, const Spinor& o) { return 1.0 / (2.0 * (s - I * dot(b, null_vector_of(o)))); };
    p.chi_dot = [b = b](double s, const Spinor& o) {
      const cplx d = s - I * dot(b, null_vector_of(o));
      return -1.0 / (2.0 * d * d);
    };
    p.chi_minus = [](const Spinor&) { return cplx{}; };
    p.chi_plus = p.chi_minus;
    return p;
  }
  ConeData cone() const {
    return {[b = b](double p, const Spinor& o) {
      const cplx d = -2.0 * I * dot(b, null_vector_of(o)) - p * dot(b, b);
      return 1.0 / (d * d);
    }};
  }
};

FourVector random_boost(std::mt19937_64& rng, double max_rap) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return boosted_time(max_rap * 0.5 * (u(rng) + 1.0), {u(rng), u(rng), u(rng)});
}

}  // namespace

TEST_CASE("kirchhoff evaluation on the closed-form family") {
  const BFamily fam{t0};
  const auto grid = build_grid(t0, 24, 48);
  const cplx a = kirchhoff_evaluate(fam.cone(), grid, 2.0 * t0, {true, 1e-6});
  CHECK(std::abs(a - cplx{0.12, 0.16}) < 1e-12);
  const ConeData zero{[](double, const Spinor&) { return cplx{}; }};
  CHECK(std::abs(kirchhoff_evaluate(zero, grid, FourVector{{3.0, 0.5, 0.2, -1.0}})) == 0.0);
  CHECK_THROWS_AS(kirchhoff_evaluate(fam.cone(), grid, FourVector{{1.0, 2.0, 0.0, 0.0}}), DomainError);
  CHECK_THROWS_AS(kirchhoff_evaluate(fam.cone(), grid, FourVector{{-2.0, 0.0, 0.0, 0.0}}), DomainError);

  // coarse grid on a peaked integrand fails the refinement check
  const BFamily fast{boosted_time(2.5, {0.3, 0.0, 1.0})};
  CHECK_THROWS_AS(kirchhoff_evaluate(fast.cone(), build_grid(t0, 4, 8), FourVector{{5.0, 1.0, 0.0, 2.0}}, {true, 1e-6}),
                  ConvergenceError);
}

TEST_CASE("field from asymptotic profile") {
  const BFamily fam{t0};
  const auto grid = build_grid(t0, 24, 48);
  const auto prof = fam.profile();
  CHECK(std::abs(field_from_asymptotic(prof, grid, 2.0 * t0) - cplx{0.12, 0.16}) < 1e-12);

  const auto past = past_from_future(prof);
  CHECK(past.direction == Direction::past);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const FourVector x{{u(rng), u(rng), u(rng), u(rng)}};
    CHECK(std::abs(field_from_asymptotic(prof, grid, x) - field_from_asymptotic(past, grid, x)) < 1e-9);
  }
  CHECK_THROWS_AS(past_from_future(past), DomainError);

  // isotropic t-gauge profile: A(lambda t) = -2 g'(lambda)
  AsymptoticProfile iso;
  iso.chi_dot = [](double s, const Spinor& o) {
    const double tl = null_vector_of(o)[0];
    return std::exp(-s * s / (tl * tl)) / (tl * tl);
  };
  for (const double lam : {0.0, 0.5, 1.3}) {
    const cplx a = field_from_asymptotic(iso, grid, lam * t0);
    CHECK(std::abs(a + 2.0 * std::exp(-lam * lam)) < 1e-12);
  }
}

TEST_CASE("round trip on the closed-form family") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const auto grid = build_grid(t0, 48, 96);
  for (int trial = 0; trial < 3; ++trial) {
    const BFamily fam{random_boost(rng, 0.8)};
    const auto prof = fam.profile();
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const FourVector x{{u(rng), u(rng), u(rng), u(rng)}};
      worst = std::max(worst, std::abs(field_from_asymptotic(prof, grid, x) - fam.field(x)));
    }
    CHECK(worst < 1e-8);

    const ScalarField A = [&](const FourVector& x) { return fam.field(x); };
    for (int k = 0; k < 10; ++k) {
      const FourVector x{{u(rng), u(rng), u(rng), u(rng)}};
      const Spinor o = direction_spinor(spin_frame(t0), 2.0 * std::abs(u(rng)), 2.0 * u(rng));
      const FourVector l = null_vector_of(o);
      const auto est = null_asymptote(A, x, l, LimitMode::future);
      CHECK(std::abs(est.value - prof.chi(dot(x, l), o)) < 1e-6);
      CHECK_FALSE(est.diverged);
      CHECK(est.error < 1e-6);

      // Kirchhoff on the same family, inside the future cone
      const FourVector xin{{3.0 + std::abs(u(rng)), u(rng), u(rng), u(rng)}};
      CHECK(std::abs(kirchhoff_evaluate(fam.cone(), grid, xin) - field_from_asymptotic(prof, grid, xin)) < 1e-6);
    }
  }
}

TEST_CASE("wave equation for a built field") {
  const BFamily fam{boosted_time(0.4, {1.0, 1.0, 0.0})};
  const auto grid = build_grid(t0, 32, 64);
  const auto prof = fam.profile();
  const ScalarField A = [&](const FourVector& x) { return field_from_asymptotic(prof, grid, x); };
  CHECK(wave_residual(A, FourVector{{0.3, -0.2, 0.5, 0.1}}) < 1e-6);
  CHECK(wave_residual(A, FourVector{{2.0, 0.4, 0.0, -0.7}}) < 1e-6);
}

TEST_CASE("null and spacelike asymptotes") {
  const BFamily fam{t0};
  const ScalarField A = [&](const FourVector& x) { return fam.field(x); };
  const auto frame = spin_frame(t0);
  const Spinor o = direction_spinor(frame, 0.7, 1.9);
  const auto fut = null_asymptote(A, FourVector{}, null_vector_of(o), LimitMode::future);
  CHECK(std::abs(fut.value - cplx{0.0, 0.5}) < 1e-10);
  const auto past = null_asymptote(A, FourVector{}, null_vector_of(o), LimitMode::past);
  CHECK(std::abs(past.value - cplx{0.0, -0.5}) < 1e-10);

  // static unit charge, scalar analog A = Q / r
  const double Q = 1.0;
  const ScalarField coul = [&](const FourVector& x) {
    return cplx{Q / std::sqrt(x[1] * x[1] + x[2] * x[2] + x[3] * x[3])};
  };
  const FourVector x{{0.4, 0.3, -0.2, 0.5}};
  for (const double scale : {1.0, 0.5, 3.0}) {
    const Spinor os = std::sqrt(scale) * direction_spinor(frame, 2.1, -0.4);
    const FourVector l = null_vector_of(os);
    const auto est = null_asymptote(coul, x, l, LimitMode::future);
    CHECK(std::abs(est.value - Q / dot(t0, l)) < 1e-8);
    const auto later = null_asymptote(coul, x + 5.0 * t0, l, LimitMode::future);
    CHECK(std::abs(later.value - est.value) < 1e-8);
  }
  const FourVector y{{0.0, 0.0, 0.0, 1.0}};
  CHECK(std::abs(null_asymptote(coul, x, y, LimitMode::spacelike).value - 1.0) < 1e-8);
  CHECK(std::abs(null_asymptote(A, x, y, LimitMode::spacelike).value) < 1e-8);

  CHECK_THROWS_AS(null_asymptote(A, x, y, LimitMode::future), DomainError);
  CHECK_THROWS_AS(null_asymptote(A, x, t0, LimitMode::spacelike), DomainError);
  CHECK_THROWS_AS(null_asymptote(A, x, null_vector_of(o), LimitMode::future, {8.0, 2.0, 3}), DomainError);

  // growing R A is flagged
  const ScalarField grow = [](const FourVector& x) { return cplx{std::sqrt(std::abs(x[0]))}; };
  const auto bad = null_asymptote(grow, FourVector{}, null_vector_of(o), LimitMode::future);
  CHECK(bad.oscillating);
  CHECK(bad.epsilon_fit < 0.0);
}

TEST_CASE("richardson extrapolation") {
  std::vector<cplx> g;
  for (int k = 0; k < 6; ++k) {
    const double R = 4.0 * std::pow(2.0, k);
    g.emplace_back(2.0 + 3.0 / R - 1.0 / (R * R) + 0.5 / (R * R * R));
  }
  const auto e = richardson(g, 2.0);
  CHECK(std::abs(e.value - 2.0) < 1e-13);
  CHECK(e.epsilon_fit == doctest::Approx(1.0).epsilon(0.05));
  CHECK_FALSE(e.diverged);
}

TEST_CASE("falloff constant") {
  const BFamily fam{boosted_time(0.5, {0.0, 1.0, 0.0})};
  const auto grid = build_grid(t0, 8, 16);
  const std::vector<double> ss{-1e4, -100.0, -10.0, -3.0, 3.0, 10.0, 100.0, 1e4};
  const double C = falloff_constant(fam.profile(), grid, 2.0, ss);
  CHECK(C > 0.4);
  CHECK(C < 1.0);
}

TEST_CASE("source characteristic of point charges") {
  const auto frame = spin_frame(t0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  const std::vector<PointSource> stat{{Worldline::inertial(FourVector{{0.0, 0.3, -0.1, 0.2}}, t0), 1.0}};
  for (int k = 0; k < 10; ++k) {
    const Spinor o = cplx{1.5 + u(rng), u(rng)} * direction_spinor(frame, 1.5 + 1.5 * u(rng), 3.0 * u(rng));
    const FourVector l = null_vector_of(o);
    for (const double s : {-50.0, 0.0, 7.0})
      CHECK(std::abs(source_characteristic(stat, s, o) - 1.0 / dot(t0, l)) < 1e-12);
  }

  const double xi = 0.8;
  const FourVector vm = boosted_time(xi, {1.0, 0.0, 0.0});
  const FourVector vp = boosted_time(-xi, {1.0, 0.0, 0.0});
  for (const double T : {0.0, 1.5}) {
    const std::vector<PointSource> kink{{Worldline(FourVector{}, vm, vp, T), cplx{1.0, -0.3}}};
    for (int k = 0; k < 10; ++k) {
      const Spinor o = direction_spinor(frame, 1.5 + 1.5 * u(rng), 3.0 * u(rng));
      const FourVector l = null_vector_of(o);
      const cplx Q = kink[0].charge;
      CHECK(std::abs(source_characteristic(kink, 1e3, o) - Q / dot(vp, l)) < 1e-12);
      CHECK(std::abs(source_characteristic(kink, -1e3, o) - Q / dot(vm, l)) < 1e-12);
      CHECK(std::abs(source_characteristic_limit(kink, o, true) - Q / dot(vp, l)) < 1e-15);
      CHECK(std::abs(source_characteristic_limit(kink, o, false) - Q / dot(vm, l)) < 1e-15);
      // homogeneity c(k s, k l) = c(s, l) / k
      const double s = 0.4 * u(rng);
      for (const double kap : {0.3, 2.7}) {
        const cplx lhs = source_characteristic(kink, kap * s, std::sqrt(kap) * o);
        CHECK(std::abs(lhs - source_characteristic(kink, s, o) / kap) < 1e-10);
      }
    }
  }

  // velocity continuity through the accelerated segment
  const Worldline w(FourVector{}, vm, vp, 2.0);
  CHECK(euclidean_norm(w.velocity(2.0 - 1e-12) - vp) < 1e-9);
  CHECK(std::abs(dot(w.velocity(1.0), w.velocity(1.0)) - 1.0) < 1e-12);
  const FourVector dz = (w.position(1.0 + 1e-5) - w.position(1.0 - 1e-5)) / 2e-5;
  CHECK(euclidean_norm(dz - w.velocity(1.0)) < 1e-8);
  CHECK_THROWS_AS(Worldline(FourVector{}, FourVector{{1.0, 1.0, 0.0, 0.0}}, t0, 1.0), DomainError);
}

TEST_CASE("source characteristic of a sampled density") {
  // static Gaussian blob of unit charge
  const double w = 0.4;
  const auto J = [&](const FourVector& y) {
    const double r2 = y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
    return cplx{std::exp(-r2 / (2 * w * w)) / std::pow(2 * pi * w * w, 1.5)};
  };
  const auto frame = spin_frame(t0);
  const Spinor o = 1.3 * direction_spinor(frame, 0.9, 0.2);
  const cplx c = source_characteristic_sampled(J, t0, 8.0 * w, 48, 0.7, o);
  CHECK(std::abs(c - 1.0 / dot(t0, null_vector_of(o))) < 1e-9);
}

TEST_CASE("tabulated profiles") {
  const auto grid = build_grid(t0, 4, 8);
  auto table = [&](double s_lo, double s_hi, int n) {
    std::ostringstream os;
    os.precision(17);
    os << "# gauge 1 0 0 0\n# epsilon 1\n# grid 4 8\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (int k = 0; k < n; ++k) {
        const double s = s_lo + (s_hi - s_lo) * k / (n - 1);
        const double g = 0.5 * std::erfc(s);  // chi' = -exp(-s^2)/sqrt(pi)
        os << i << ' ' << s << ' ' << g << ' ' << 0.0 << '\n';
      }
    return os.str();
  };
  std::istringstream in(table(-9.0, 9.0, 4001));
  const auto tab = TabulatedProfile::read(in);
  CHECK(tab.grid().size() == 32);
  CHECK(tab.epsilon() == 1.0);
  for (const double lam : {0.0, 0.6, 1.4}) {
    const cplx a = tab.field(lam * t0);
    CHECK(std::abs(a - 2.0 * std::exp(-lam * lam) / std::sqrt(pi)) < 1e-6);
  }
  CHECK(std::abs(tab.value(3, -20.0) - 1.0) < 1e-12);

  std::istringstream narrow(table(-1.0, 1.0, 201));
  const auto cut = TabulatedProfile::read(narrow);
  CHECK_THROWS_AS(cut.field(t0), ConvergenceError);

  std::istringstream missing("# gauge 1 0 0 0\n0 0.0 1.0 0.0\n");
  CHECK_THROWS_AS(TabulatedProfile::read(missing), DomainError);
  std::istringstream garbled("# gauge 1 0 0 0\n# epsilon 1\n# grid 2 4\n0 x y z\n");
  CHECK_THROWS_AS(TabulatedProfile::read(garbled), DomainError);
}
