#include "nullinf/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_roots.h>
#include <gsl/gsl_spline.h>

namespace nullinf {

AsymptoticProfile past_from_future(const AsymptoticProfile& f) {
  if (f.direction != Direction::future) throw DomainError("past_from_future: profile is not a future profile");
  AsymptoticProfile p = f;
  p.direction = Direction::past;
  p.chi = [c = f.chi, m = f.chi_minus](double s, const Spinor& o) { return m(o) - c(s, o); };
  p.chi_dot = [d = f.chi_dot](double s, const Spinor& o) { return -d(s, o); };
  p.chi_minus = [m = f.chi_minus, pl = f.chi_plus](const Spinor& o) { return m(o) - pl(o); };
  p.chi_plus = f.chi_minus;
  return p;
}

double falloff_constant(const AsymptoticProfile& p, const NullDirectionGrid& grid, double s_t,
                        std::span<const double> s_samples) {
  double worst = 0.0;
  for (const GridNode& n : grid.nodes()) {
    const cplx lim = p.chi_minus(n.o);
    for (const double s : s_samples) {
      if (s > s_t) worst = std::max(worst, std::abs(p.chi(s, n.o)) * std::pow(s, p.epsilon));
      if (s < -s_t) worst = std::max(worst, std::abs(p.chi(s, n.o) - lim) * std::pow(-s, p.epsilon));
    }
  }
  return worst;
}

cplx kirchhoff_evaluate(const ConeData& eta, const NullDirectionGrid& grid, const FourVector& x,
                        RefinementCheck check) {
  const double x2 = dot(x, x);
  if (!(x2 > 0.0) || !(dot(x, grid.gauge()) > 0.0))
    throw DomainError("kirchhoff_evaluate: x must lie inside the future light cone");
  auto eval = [&](const NullDirectionGrid& g) {
    const cplx sum = g.integrate_nodes([&](const GridNode& n) { return eta.eta_dot(2.0 * dot(x, n.l) / x2, n.o); });
    return -sum / (pi * x2);
  };
  const cplx a = eval(grid);
  if (check.enabled) {
    const cplx b = eval(build_grid(grid.gauge(), 2 * grid.n_theta(), 2 * grid.n_phi()));
    if (std::abs(a - b) > check.rel_tol * std::max(std::abs(b), 1e-300))
      throw ConvergenceError("kirchhoff_evaluate: grid refinement changed the value beyond tolerance");
  }
  return a;
}

cplx field_from_asymptotic(const AsymptoticProfile& p, const NullDirectionGrid& grid, const FourVector& x) {
  const cplx sum = grid.integrate_nodes([&](const GridNode& n) { return p.chi_dot(dot(x, n.l), n.o); });
  return (p.direction == Direction::future ? -1.0 : 1.0) * sum / (2.0 * pi);
}

double wave_residual(const ScalarField& A, const FourVector& x, double h) {
  const cplx a0 = A(x);
  cplx box = 0.0;
  for (std::size_t mu = 0; mu < 4; ++mu) {
    auto at = [&](double k) {
      FourVector y = x;
      y[mu] += k * h;
      return A(y);
    };
    const cplx d2 = (-at(2) + 16.0 * at(1) - 30.0 * a0 + 16.0 * at(-1) - at(-2)) / (12.0 * h * h);
    box += (mu == 0 ? 1.0 : -1.0) * d2;
  }
  return std::abs(box);
}

AsymptoteEstimate richardson(std::vector<cplx> samples, double ratio) {
  const std::size_t n = samples.size();
  if (n < 4) throw DomainError("null_asymptote: ladder needs at least 4 rungs");
  AsymptoteEstimate e;
  e.samples = samples;
  std::vector<cplx> diag{samples[0]};
  std::vector<cplx> row = samples;
  for (std::size_t j = 1; j < n; ++j) {
    const double f = std::pow(ratio, static_cast<double>(j)) - 1.0;
    std::vector<cplx> next(n - j);
    for (std::size_t k = 0; k < next.size(); ++k) next[k] = row[k + 1] + (row[k + 1] - row[k]) / f;
    row = std::move(next);
    diag.push_back(row.back());
  }
  e.value = diag.back();
  e.error = std::abs(diag[n - 1] - diag[n - 2]);
  const double floor = 1e-13 * std::max(1.0, std::abs(e.value));
  const double d_last = std::abs(diag[n - 1] - diag[n - 2]);
  const double d_prev = std::abs(diag[n - 2] - diag[n - 3]);
  e.diverged = d_last > floor && d_last > d_prev;
  const double g_last = std::abs(samples[n - 1] - samples[n - 2]);
  const double g_prev = std::abs(samples[n - 2] - samples[n - 3]);
  if (g_last <= floor)
    e.epsilon_fit = std::numeric_limits<double>::infinity();
  else
    e.epsilon_fit = std::log(g_prev / g_last) / std::log(ratio);
  e.oscillating = e.epsilon_fit <= 0.0;
  return e;
}

AsymptoteEstimate null_asymptote(const ScalarField& A, const FourVector& x, const FourVector& d, LimitMode mode,
                                 Ladder ladder) {
  if (ladder.rungs < 4 || !(ladder.ratio > 1.0) || !(ladder.r0 > 0.0))
    throw DomainError("null_asymptote: ladder must be geometric with at least 4 rungs");
  const double dd = dot(d, d), scale = euclidean_norm(d);
  if (mode == LimitMode::spacelike ? !(dd < 0.0) : std::abs(dd) > 1e-10 * scale * scale)
    throw DomainError("null_asymptote: direction does not match the limit mode");
  const double sign = mode == LimitMode::past ? -1.0 : 1.0;
  std::vector<cplx> g(static_cast<std::size_t>(ladder.rungs));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double R = ladder.r0 * std::pow(ladder.ratio, static_cast<double>(k));
    g[k] = R * A(x + (sign * R) * d);
  }
  return richardson(std::move(g), ladder.ratio);
}

// --- worldlines ----------------------------------------------------------

Worldline::Worldline(const FourVector& z0, const FourVector& v_in, const FourVector& v_out, double accel_time)
    : z0_(z0), v_in_(v_in), v_out_(v_out), T_(accel_time) {
  require_unit_timelike(v_in, 1e-9);
  require_unit_timelike(v_out, 1e-9);
  if (accel_time < 0.0) throw DomainError("Worldline: negative acceleration time");
  const double g = std::max(1.0, dot(v_in, v_out));
  rapidity_ = std::acosh(g);
  if (rapidity_ > 0.0) e1_ = (v_out - g * v_in) / std::sqrt(g * g - 1.0);
}

FourVector Worldline::velocity(double tau) const {
  if (tau < 0.0 || rapidity_ == 0.0) return v_in_;
  if (tau >= T_) return v_out_;
  const double th = rapidity_ * tau / T_;
  return std::cosh(th) * v_in_ + std::sinh(th) * e1_;
}

FourVector Worldline::acceleration(double tau) const {
  if (tau < 0.0 || tau >= T_ || rapidity_ == 0.0) return {};
  const double a = rapidity_ / T_;
  const double th = a * tau;
  return a * (std::sinh(th) * v_in_ + std::cosh(th) * e1_);
}

FourVector Worldline::position(double tau) const {
  if (tau <= 0.0 || rapidity_ == 0.0) return z0_ + tau * v_in_;
  auto accel = [&](double u) {
    if (T_ == 0.0) return z0_;
    const double a = rapidity_ / T_;
    return z0_ + (1.0 / a) * (std::sinh(a * u) * v_in_ + (std::cosh(a * u) - 1.0) * e1_);
  };
  if (tau <= T_) return accel(tau);
  return accel(T_) + (tau - T_) * v_out_;
}

double Worldline::retarded_parameter(const FourVector& l, double s) const {
  auto f = [&](double tau) { return dot(l, position(tau)) - s; };
  double lo = -1.0, hi = 1.0;
  int guard = 0;
  while (f(lo) > 0.0) {
    lo *= 2.0;
    if (++guard > 200) throw ConvergenceError("retarded_parameter: no lower bracket");
  }
  guard = 0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 200) throw ConvergenceError("retarded_parameter: no upper bracket");
  }
  gsl_function F;
  F.function = [](double tau, void* p) { return (*static_cast<decltype(f)*>(p))(tau); };
  F.params = &f;
  std::unique_ptr<gsl_root_fsolver, decltype(&gsl_root_fsolver_free)> solver(
      gsl_root_fsolver_alloc(gsl_root_fsolver_brent), &gsl_root_fsolver_free);
  gsl_root_fsolver_set(solver.get(), &F, lo, hi);
  for (int it = 0; it < 200; ++it) {
    gsl_root_fsolver_iterate(solver.get());
    const double a = gsl_root_fsolver_x_lower(solver.get()), b = gsl_root_fsolver_x_upper(solver.get());
    if (gsl_root_test_interval(a, b, 1e-15, 1e-15) == GSL_SUCCESS) {
      const double tau = gsl_root_fsolver_root(solver.get());
      if (std::abs(f(tau)) > 1e-9 * (1.0 + std::abs(s)))
        throw ConvergenceError("retarded_parameter: l.z(tau) is not monotone");
      return tau;
    }
  }
  throw ConvergenceError("retarded_parameter: root solve did not converge");
}

cplx source_characteristic(std::span<const PointSource> sources, double s, const Spinor& o) {
  const FourVector l = null_vector_of(o);
  cplx c = 0.0;
  for (const auto& src : sources) {
    const double tau = src.path.retarded_parameter(l, s);
    c += src.charge / dot(src.path.velocity(tau), l);
  }
  return c;
}

cplx source_characteristic_limit(std::span<const PointSource> sources, const Spinor& o, bool future) {
  const FourVector l = null_vector_of(o);
  cplx c = 0.0;
  for (const auto& src : sources) c += src.charge / dot(future ? src.path.v_out() : src.path.v_in(), l);
  return c;
}

cplx source_characteristic_sampled(const std::function<cplx(const FourVector&)>& J, const FourVector& t,
                                   double half_width, int n_gl, double s, const Spinor& o) {
  const SpinFrame f = spin_frame(t);
  const FourVector l = null_vector_of(o);
  const double tl = dot(t, l);
  const double xl = dot(f.X, l), yl = dot(f.Y, l), zl = dot(f.Z, l);
  const auto gl = gauss_legendre(n_gl, -half_width, half_width);
  const auto n = static_cast<std::size_t>(n_gl);
  auto terms = parallel_map(n * n * n, [&](std::size_t idx) {
    const auto& [a, wa] = gl[idx / (n * n)];
    const auto& [b, wb] = gl[(idx / n) % n];
    const auto& [c, wc] = gl[idx % n];
    const double y0 = (s - a * xl - b * yl - c * zl) / tl;
    return wa * wb * wc * J(y0 * t + a * f.X + b * f.Y + c * f.Z);
  });
  return pairwise_sum(terms) / tl;
}

// --- tabulated profiles --------------------------------------------------

struct TabulatedProfile::Series {
  using Spline = std::unique_ptr<gsl_spline, decltype(&gsl_spline_free)>;
  std::vector<double> s;
  Spline re{nullptr, &gsl_spline_free}, im{nullptr, &gsl_spline_free};

  Series(std::vector<double> ss, const std::vector<cplx>& v) : s(std::move(ss)) {
    std::vector<double> r(v.size()), i(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
      r[k] = v[k].real();
      i[k] = v[k].imag();
    }
    re.reset(gsl_spline_alloc(gsl_interp_cspline, s.size()));
    im.reset(gsl_spline_alloc(gsl_interp_cspline, s.size()));
    gsl_spline_init(re.get(), s.data(), r.data(), s.size());
    gsl_spline_init(im.get(), s.data(), i.data(), s.size());
  }
  cplx value(double x) const {
    x = std::clamp(x, s.front(), s.back());
    return {gsl_spline_eval(re.get(), x, nullptr), gsl_spline_eval(im.get(), x, nullptr)};
  }
  cplx deriv(double x) const {
    if (x < s.front() || x > s.back()) return 0.0;
    return {gsl_spline_eval_deriv(re.get(), x, nullptr), gsl_spline_eval_deriv(im.get(), x, nullptr)};
  }
};

TabulatedProfile::TabulatedProfile(NullDirectionGrid g, double eps, std::vector<std::shared_ptr<const Series>> series)
    : grid_(std::move(g)), epsilon_(eps), series_(std::move(series)) {
  for (std::size_t i = 0; i < series_.size(); ++i) {
    const Series& sr = *series_[i];
    double peak = 0.0;
    for (const double x : sr.s) peak = std::max(peak, std::abs(sr.deriv(x)));
    const double ends = std::max(std::abs(sr.deriv(sr.s.front())), std::abs(sr.deriv(sr.s.back())));
    if (ends > 1e-8 * peak) {
      truncation_ = "tabulated profile: derivative at the s-window end of node " + std::to_string(i) +
                    " exceeds 1e-8 of its peak";
      break;
    }
  }
}

TabulatedProfile TabulatedProfile::read(std::istream& in) {
  std::optional<FourVector> gauge;
  std::optional<double> eps;
  std::optional<std::array<int, 2>> res;
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<cplx>>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::istringstream ls(line.substr(first));
    const auto bad = [&] { return DomainError("tabulated profile: malformed line " + std::to_string(lineno)); };
    if (line[first] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "gauge") {
        FourVector t;
        if (!(ls >> t[0] >> t[1] >> t[2] >> t[3])) throw bad();
        gauge = t;
      } else if (key == "epsilon") {
        double e;
        if (!(ls >> e)) throw bad();
        eps = e;
      } else if (key == "grid") {
        std::array<int, 2> r{};
        if (!(ls >> r[0] >> r[1])) throw bad();
        res = r;
      }
      continue;
    }
    std::size_t node;
    double s, re, im;
    if (!(ls >> node >> s >> re >> im)) throw bad();
    auto& [ss, vv] = rows[node];
    if (!ss.empty() && !(s > ss.back())) throw DomainError("tabulated profile: s not ascending at line " + std::to_string(lineno));
    ss.push_back(s);
    vv.emplace_back(re, im);
  }
  if (!gauge || !eps || !res) throw DomainError("tabulated profile: missing gauge, epsilon or grid header");
  NullDirectionGrid grid(*gauge, (*res)[0], (*res)[1]);
  if (rows.size() != grid.size() || rows.rbegin()->first != grid.size() - 1)
    throw DomainError("tabulated profile: node rows do not cover the grid");
  std::vector<std::shared_ptr<const Series>> series;
  series.reserve(rows.size());
  for (auto& [node, sv] : rows) {
    if (sv.first.size() < 4) throw DomainError("tabulated profile: fewer than 4 samples at a node");
    series.push_back(std::make_shared<const Series>(std::move(sv.first), sv.second));
  }
  return TabulatedProfile(std::move(grid), *eps, std::move(series));
}

TabulatedProfile TabulatedProfile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("tabulated profile: cannot open " + path);
  return read(in);
}

cplx TabulatedProfile::value(std::size_t node, double s) const { return series_.at(node)->value(s); }
cplx TabulatedProfile::derivative(std::size_t node, double s) const { return series_.at(node)->deriv(s); }

cplx TabulatedProfile::field(const FourVector& x) const {
  if (truncation_) throw ConvergenceError(*truncation_);
  const auto& nodes = grid_.nodes();
  auto terms = parallel_map(nodes.size(), [&](std::size_t i) {
    return nodes[i].weight * series_[i]->deriv(dot(x, nodes[i].l));
  });
  return -pairwise_sum(terms) / (2.0 * pi);
}

}  // namespace nullinf
