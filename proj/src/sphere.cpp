#include "nullinf/sphere.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_legendre.h>

namespace nullinf {

namespace {
std::atomic<int> g_threads{1};
// GSL reports through return codes; its default handler aborts.
const bool gsl_handler_off = (gsl_set_error_handler_off(), true);
}

void set_threads(int n) { g_threads = std::max(1, n); }
int threads() { return g_threads; }

bool& detail::in_parallel_region() {
  thread_local bool flag = false;
  return flag;
}

std::vector<std::array<double, 2>> gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre: n must be positive");
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n));
  std::vector<std::array<double, 2>> out(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < out.size(); ++i) gsl_integration_glfixed_point(a, b, i, &out[i][0], &out[i][1], table);
  gsl_integration_glfixed_table_free(table);
  std::sort(out.begin(), out.end());
  return out;
}

NullDirectionGrid::NullDirectionGrid(const FourVector& t, int n_theta, int n_phi)
    : frame_(spin_frame(t)), n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 2 || n_phi < 4) throw DomainError("build_grid: need n_theta >= 2 and n_phi >= 4");
  const auto gl = gauss_legendre(n_theta);
  nodes_.reserve(static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi));
  for (const auto& [x, w] : gl) {
    const double th = std::acos(x);
    for (int j = 0; j < n_phi; ++j) {
      GridNode nd;
      nd.theta = th;
      nd.phi = 2.0 * pi * j / n_phi;
      nd.weight = w * 2.0 * pi / n_phi;
      nd.o = direction_spinor(frame_, nd.theta, nd.phi);
      nd.l = null_vector_of(nd.o);
      nodes_.push_back(nd);
    }
  }
}

NullDirectionGrid build_grid(const FourVector& t, int n_theta, int n_phi) {
  return NullDirectionGrid(t, n_theta, n_phi);
}

cplx integrate(const NullDirectionGrid& grid, const HomogeneousFn& f) {
  if (f.type != HomogeneityType{-2, -2}) throw DomainError("integrate: integrand must be of type {-2,-2}");
  return grid.integrate_nodes([&](const GridNode& n) { return f(n.o); });
}

double homogeneity_residual(const HomogeneousFn& f, std::span<const Spinor> samples) {
  static const std::array<cplx, 4> alphas{cplx{2.0, 1.0}, cplx{0.5, -0.3}, cplx{-1.3, 0.7}, cplx{0.0, 1.7}};
  double worst = 0.0;
  for (const Spinor& o : samples) {
    const cplx base = f(o);
    for (const cplx a : alphas) {
      const cplx expect = std::pow(a, f.type.p) * std::pow(std::conj(a), f.type.q) * base;
      const cplx got = f(a * o);
      const double scale = std::max(std::abs(expect), 1e-300);
      worst = std::max(worst, std::abs(got - expect) / scale);
    }
  }
  return worst;
}

LineGeometry line_geometry(const SpinFrame& f, const FourVector& y) {
  if (dot(y, y) >= 0.0) throw DomainError("delta-line: y must be spacelike");
  LineGeometry g;
  g.y0 = dot(y, f.t);
  const FourVector Y = y - g.y0 * f.t;
  g.radius = std::sqrt(-dot(Y, Y));
  g.axis = {-dot(Y, f.X) / g.radius, -dot(Y, f.Y) / g.radius, -dot(Y, f.Z) / g.radius};
  // any orthonormal completion; fixed choice for determinism
  const std::array<double, 3> ref =
      std::abs(g.axis[2]) < 0.9 ? std::array<double, 3>{0.0, 0.0, 1.0} : std::array<double, 3>{1.0, 0.0, 0.0};
  const auto cross = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return std::array<double, 3>{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  };
  g.e1 = cross(ref, g.axis);
  const double n1 = std::sqrt(g.e1[0] * g.e1[0] + g.e1[1] * g.e1[1] + g.e1[2] * g.e1[2]);
  for (auto& x : g.e1) x /= n1;
  g.e2 = cross(g.axis, g.e1);
  return g;
}

std::array<double, 3> on_cone(const LineGeometry& g, double c, double phi) {
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  std::array<double, 3> u{};
  for (std::size_t i = 0; i < 3; ++i)
    u[i] = c * g.axis[i] + s * (std::cos(phi) * g.e1[i] + std::sin(phi) * g.e2[i]);
  return u;
}

cplx integrate_delta_line(const NullDirectionGrid& grid, const FourVector& y, const HomogeneousFn& f) {
  if (f.type != HomogeneityType{-1, -1}) throw DomainError("integrate_delta_line: f must be of type {-1,-1}");
  return delta_line(grid.frame(), y, [&](const Spinor& o) { return f(o); }, 2 * grid.n_phi());
}

double euler_residual(const NullDirectionGrid& grid, const HomogeneousFn& f, SpinIndex which) {
  const int deg = which == SpinIndex::unprimed ? f.type.p : f.type.q;
  double worst = 0.0, scale = 0.0;
  for (const GridNode& n : grid.nodes()) {
    const auto d = spin_gradient(f.eval, n.o, which);
    const Spinor o = which == SpinIndex::unprimed ? n.o : conj(n.o);
    const cplx lhs = o[0] * d[0] + o[1] * d[1];
    const cplx val = f(n.o);
    worst = std::max(worst, std::abs(lhs - static_cast<double>(deg) * val));
    scale = std::max(scale, std::abs(val));
  }
  return scale > 0.0 ? worst / scale : worst;
}

SpinorFn spin_derivative(const NullDirectionGrid& grid, const HomogeneousFn& f, SpinIndex which, double tol) {
  const double res = euler_residual(grid, f, which);
  if (res > tol)
    throw ConvergenceError("spin_derivative: Euler identity residual " + std::to_string(res) +
                           " exceeds tolerance (wrong declared type or rough data)");
  SpinorFn out;
  out.eval = [g = f.eval, which](const Spinor& o) { return as_spinor(spin_gradient(g, o, which)); };
  out.type = f.type;
  (which == SpinIndex::unprimed ? out.type.p : out.type.q) -= 1;
  return out;
}

std::vector<double> real_harmonics(int lmax, double theta, double phi) {
  const std::size_t n = gsl_sf_legendre_array_n(static_cast<std::size_t>(lmax));
  std::vector<double> P(n);
  gsl_sf_legendre_array_e(GSL_SF_LEGENDRE_SPHARM, static_cast<std::size_t>(lmax), std::cos(theta), -1.0, P.data());
  std::vector<double> Y(static_cast<std::size_t>((lmax + 1) * (lmax + 1)));
  const double rt2 = std::sqrt(2.0);
  for (int l = 0; l <= lmax; ++l) {
    const auto base = static_cast<std::size_t>(l * l + l);
    Y[base] = P[gsl_sf_legendre_array_index(static_cast<std::size_t>(l), 0)];
    for (int m = 1; m <= l; ++m) {
      const double p = rt2 * P[gsl_sf_legendre_array_index(static_cast<std::size_t>(l), static_cast<std::size_t>(m))];
      Y[base + static_cast<std::size_t>(m)] = p * std::cos(m * phi);
      Y[base - static_cast<std::size_t>(m)] = p * std::sin(m * phi);
    }
  }
  return Y;
}

std::array<double, 2> direction_angles(const SpinFrame& f, const Spinor& o) {
  const FourVector l = null_vector_of(o);
  const double tl = dot(f.t, l);
  const double x = -dot(l, f.X) / tl, y = -dot(l, f.Y) / tl, z = -dot(l, f.Z) / tl;
  return {std::acos(std::clamp(z, -1.0, 1.0)), std::atan2(y, x)};
}

HarmonicExpansion HarmonicExpansion::fit(const NullDirectionGrid& grid, std::span<const cplx> values, int lmax) {
  if (values.size() != grid.size()) throw DomainError("HarmonicExpansion::fit: value count does not match grid");
  if (lmax < 0 || lmax > grid.n_theta() - 1 || 2 * lmax >= grid.n_phi())
    throw DomainError("HarmonicExpansion::fit: lmax exceeds the exactness range of the grid");
  HarmonicExpansion h;
  h.frame_ = grid.frame();
  h.lmax_ = lmax;
  const std::size_t nc = static_cast<std::size_t>((lmax + 1) * (lmax + 1));
  const auto ring = static_cast<std::size_t>(grid.n_phi());
  auto per_ring = parallel_map(static_cast<std::size_t>(grid.n_theta()), [&](std::size_t r) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(nc));
    for (std::size_t j = 0; j < ring; ++j) {
      const std::size_t i = r * ring + j;
      const auto& nd = grid.nodes()[i];
      const auto Y = real_harmonics(lmax, nd.theta, nd.phi);
      for (std::size_t k = 0; k < nc; ++k) c(static_cast<Eigen::Index>(k)) += nd.weight * Y[k] * values[i];
    }
    return c;
  });
  const Eigen::VectorXcd sum = pairwise_sum(per_ring);
  h.coef_.assign(sum.data(), sum.data() + sum.size());
  return h;
}

cplx HarmonicExpansion::at(double theta, double phi) const {
  const auto Y = real_harmonics(lmax_, theta, phi);
  cplx acc = 0.0;
  for (std::size_t k = 0; k < coef_.size(); ++k) acc += coef_[k] * Y[k];
  return acc;
}

cplx HarmonicExpansion::operator()(const Spinor& o) const {
  const auto [th, ph] = direction_angles(frame_, o);
  return at(th, ph);
}

double HarmonicExpansion::tail_norm(int l_from) const {
  double s = 0.0;
  for (int l = std::max(0, l_from); l <= lmax_; ++l)
    for (int m = -l; m <= l; ++m) s += std::norm(coef_[static_cast<std::size_t>(l * l + l + m)]);
  return std::sqrt(s);
}

HarmonicExpansion HarmonicExpansion::scaled(const std::function<cplx(int)>& factor) const {
  HarmonicExpansion h = *this;
  for (int l = 0; l <= lmax_; ++l) {
    const cplx f = factor(l);
    for (int m = -l; m <= l; ++m) h.coef_[static_cast<std::size_t>(l * l + l + m)] *= f;
  }
  return h;
}

}  // namespace nullinf
