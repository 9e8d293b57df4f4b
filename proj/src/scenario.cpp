#include "nullinf/scenario.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace nullinf {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr std::array<std::pair<Block, std::string_view>, 6> block_names{{{Block::asymptote, "asymptote"},
                                                                          {Block::radiate, "radiate"},
                                                                          {Block::budget, "budget"},
                                                                          {Block::longrange, "longrange"},
                                                                          {Block::shift, "shift"},
                                                                          {Block::dirac, "dirac"}}};

constexpr std::array<std::pair<ScenarioKind, std::string_view>, 5> kind_names{
    {{ScenarioKind::static_charge, "static-charge"},
     {ScenarioKind::particle_kink, "particle-kink"},
     {ScenarioKind::gaussian_pulse, "gaussian-pulse"},
     {ScenarioKind::dirac_packet, "dirac-packet"},
     {ScenarioKind::composite, "composite"}}};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// --- parsing -------------------------------------------------------------

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw DomainError("config: " + where + ": " + what);
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) invalid(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto a : keys) ok = ok || a == k;
    if (!ok) invalid(where, "unknown key '" + k + "'");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) invalid(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) invalid(where, "not finite");
  return x;
}

double number_or(const json& j, std::string_view key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j.at(key), where + "." + std::string(key)) : fallback;
}

int integer_in(const json& j, const std::string& where, int lo, int hi) {
  if (!j.is_number_integer()) invalid(where, "expected an integer");
  const int v = j.get<int>();
  if (v < lo || v > hi) invalid(where, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

cplx complex_value(const json& j, const std::string& where) {
  if (j.is_number()) return number(j, where);
  if (j.is_array() && j.size() == 2) return {number(j[0], where), number(j[1], where)};
  invalid(where, "expected a number or [re, im]");
}

std::array<double, 3> triple(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) invalid(where, "expected [x, y, z]");
  return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

// [v0, v1, v2, v3] rescaled to unit length, or {"rapidity", "direction"}.
FourVector velocity(const json& j, const std::string& where) {
  if (j.is_object()) {
    allow_keys(j, where, {"rapidity", "direction"});
    const double r = number_or(j, "rapidity", 0.0, where);
    const auto d = j.contains("direction") ? triple(j.at("direction"), where + ".direction")
                                           : std::array<double, 3>{0.0, 0.0, 1.0};
    if (std::hypot(d[0], d[1], d[2]) == 0.0) invalid(where, "direction must be nonzero");
    return boosted_time(r, d);
  }
  if (!j.is_array() || j.size() != 4) invalid(where, "expected [t, x, y, z] or {rapidity, direction}");
  FourVector v{{number(j[0], where), number(j[1], where), number(j[2], where), number(j[3], where)}};
  const double n2 = dot(v, v);
  if (!(n2 > 0.0) || v[0] <= 0.0) invalid(where, "not a future timelike vector");
  return (1.0 / std::sqrt(n2)) * v;
}

FourVector position(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) invalid(where, "expected [t, x, y, z]");
  return {{number(j[0], where), number(j[1], where), number(j[2], where), number(j[3], where)}};
}

BumpConfig bump(const json& j, const std::string& where) {
  allow_keys(j, where, {"v0", "width", "spinor", "branch"});
  BumpConfig b;
  if (j.contains("v0")) b.v0 = velocity(j.at("v0"), where + ".v0");
  b.width = number_or(j, "width", b.width, where);
  if (!(b.width > 0.0)) invalid(where + ".width", "must be positive");
  if (!j.contains("spinor")) invalid(where, "missing 'spinor'");
  const json& s = j.at("spinor");
  if (!s.is_array() || s.size() != 4) invalid(where + ".spinor", "expected four complex entries");
  for (int k = 0; k < 4; ++k) b.u(k) = complex_value(s[static_cast<std::size_t>(k)], where + ".spinor");
  if (b.u.norm() == 0.0) invalid(where + ".spinor", "must be nonzero");
  const std::string br = j.value("branch", std::string("plus"));
  if (br != "plus" && br != "minus") invalid(where + ".branch", "expected plus or minus");
  b.branch = br == "plus" ? Branch::plus : Branch::minus;
  return b;
}

std::string block_list(std::span<const Block> blocks) {
  std::string s;
  for (Block b : blocks) s += (s.empty() ? "" : ",") + std::string(block_name(b));
  return s;
}

// --- resolutions ---------------------------------------------------------

struct Resolution {
  int n_theta, n_phi;
  ChargeOptions s;
  int n_rap, h_theta, h_phi;
};

Resolution fine_resolution(const ScenarioConfig& c) {
  Resolution r{c.n_theta, c.n_phi, c.s_window, 32, 16, 32};
  if (c.packet) {
    r.n_rap = c.packet->n_rap;
    r.h_theta = c.packet->n_theta;
    r.h_phi = c.packet->n_phi;
  }
  return r;
}

// Three quarters of every node count, for the error estimates.
Resolution coarse_resolution(const Resolution& f) {
  auto q = [](int n, int lo) { return std::max(lo, (3 * n) / 4); };
  auto even = [&](int n, int lo) { return q(n, lo) + q(n, lo) % 2; };
  Resolution r = f;
  r.n_theta = q(f.n_theta, 4);
  r.n_phi = even(f.n_phi, 8);
  r.s.nodes_per_panel = q(f.s.nodes_per_panel, 4);
  r.n_rap = q(f.n_rap, 4);
  r.h_theta = q(f.h_theta, 4);
  r.h_phi = even(f.h_phi, 8);
  return r;
}

// --- scenario models -----------------------------------------------------

std::vector<PointSource> point_sources(const ScenarioConfig& c) {
  std::vector<PointSource> out;
  for (const auto& q : c.charges) out.push_back({Worldline(q.origin, q.u_in, q.u_out, q.accel_time), q.Q});
  return out;
}

DiracProfile packet_profile(const PacketConfig& p) {
  auto make = [&](const BumpConfig& b, Branch br) { return gaussian_bump(b.v0, b.width, b.u, br, p.mass, p.coupling); };
  if (p.profile == "two-bump") return two_bump(make(p.first, p.first.branch), make(p.second, p.second.branch));
  if (p.profile == "eigenpacket") return make(p.first, Branch::plus);
  return make(p.first, p.first.branch);
}

struct Built {
  EMAsymptoticData data;
  std::optional<CurrentModel> model;
  std::optional<DiracProfile> packet;
  std::optional<HyperboloidGrid> hgrid;
};

Built build(const ScenarioConfig& c, const Resolution& r) {
  Built b;
  switch (c.kind) {
    case ScenarioKind::static_charge: {
      const auto& q = c.charges.front();
      b.model = StaticCoulomb{q.Q, q.u_in, q.origin};
      b.data = current_data(*b.model, c.t);
      break;
    }
    case ScenarioKind::particle_kink:
      b.model = PointCharges{point_sources(c)};
      b.data = current_data(*b.model, c.t);
      break;
    case ScenarioKind::gaussian_pulse: {
      const SpinFrame f = spin_frame(c.t);
      b.data = isotropic_gaussian_news(c.t, direction_spinor(f, c.pulse->theta, c.pulse->phi), c.pulse->width);
      break;
    }
    case ScenarioKind::dirac_packet: {
      DiracProfile p = packet_profile(*c.packet);
      b.hgrid = profile_grid(p, r.n_rap, r.h_theta, r.h_phi);
      p = normalized(p, *b.hgrid);
      b.packet = p;
      b.model = DiracCurrent{p, HyperboloidSpec{r.n_rap, r.h_theta, r.h_phi, p.support, RadialRule::linear}};
      b.data = current_data(*b.model, c.t);
      break;
    }
    case ScenarioKind::composite: {
      std::optional<EMAsymptoticData> d;
      if (!c.charges.empty()) d = current_data(PointCharges{point_sources(c)}, c.t);
      if (c.pulse) {
        const SpinFrame f = spin_frame(c.t);
        const auto p = isotropic_gaussian_news(c.t, direction_spinor(f, c.pulse->theta, c.pulse->phi), c.pulse->width);
        d = d ? superpose(*d, p) : p;
      }
      b.data = *d;
      break;
    }
  }
  return b;
}

// --- blocks --------------------------------------------------------------

using Values = std::vector<std::pair<std::string, double>>;

constexpr std::array<const char*, 4> vec_names{"t", "x", "y", "z"};

void put_vector(Values& v, const std::string& key, const FourVector& x) {
  for (std::size_t a = 0; a < 4; ++a) v.emplace_back(key + "." + vec_names[a], x[a]);
}

void put_tensor(Values& v, const std::string& key, const Tensor2& M) {
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      v.emplace_back(key + "." + vec_names[static_cast<std::size_t>(a)] + vec_names[static_cast<std::size_t>(b)], M(a, b));
}

cplx node_mean(const NullDirectionGrid& grid, std::span<const cplx> values) {
  std::vector<cplx> terms(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) terms[i] = grid.nodes()[i].weight * values[i];
  return pairwise_sum(terms) / (2.0 * pi);
}

LongRangeVars vars_of(const Built& b, const NullDirectionGrid& grid) {
  return b.model ? longrange_vars(*b.model, grid) : longrange_vars(b.data, grid);
}

ScalarOnSphere kink_phi(const DressingConfig& k) {
  return [k](const Spinor& o) {
    const FourVector l = null_vector_of(o);
    return cplx{k.Q0 * std::log(dot(k.u1, l) / dot(k.u2, l))};
  };
}

Values asymptote_block(const ScenarioConfig& c, const Built& b, const NullDirectionGrid& grid) {
  const double w = c.pulse ? c.pulse->width : 1.0;
  const std::array<double, 6> s{-3.0 * w, -w, 0.0, 0.5 * w, 2.0 * w, 5.0 * w};
  const auto r = data_residuals(b.data, grid, s);
  Values v{{"Q.re", b.data.Q.real()},
           {"Q.im", b.data.Q.imag()},
           {"defect.asymptote.charge", r.charge},
           {"defect.asymptote.past_charge", r.past_charge},
           {"defect.asymptote.homogeneity", r.homogeneity},
           {"defect.asymptote.matching", r.matching}};
  if (b.model) v.emplace_back("defect.asymptote.conservation", charge_conservation_defect(*b.model, grid, s));
  return v;
}

Values radiate_block(const Built& b, const NullDirectionGrid& grid, const ChargeOptions& opt) {
  Values v;
  put_vector(v, "P.out-n", radiated_momentum(b.data, Flow::out, grid, opt));
  put_vector(v, "P.in-n", radiated_momentum(b.data, Flow::in, grid, opt));
  put_tensor(v, "M.out-n", radiated_angular_momentum(b.data, Flow::out, grid, {}, opt).M);
  put_tensor(v, "M.in-n", radiated_angular_momentum(b.data, Flow::in, grid, {}, opt).M);
  return v;
}

Values budget_block(const Built& b, const NullDirectionGrid& grid, const ChargeOptions& opt) {
  std::optional<TimelikeCharges> matter;
  if (b.packet) matter = timelike_out_charges(*b.packet, *b.hgrid);
  const auto r = radiation_budget(b.data, grid, matter, matter, opt);
  Values v;
  put_vector(v, "P.out", r.P_out);
  put_vector(v, "P.in", r.P_in);
  put_tensor(v, "M.out", r.M_out);
  v.emplace_back("defect.budget.P", r.P_defect);
  v.emplace_back("defect.budget.M", r.M_defect);
  v.emplace_back("defect.existence", r.existence);
  return v;
}

Values longrange_block(const ScenarioConfig& c, const Built& b, const NullDirectionGrid& grid, const ChargeOptions& opt) {
  const LongRangeVars vars = vars_of(b, grid);
  const cplx qm = node_mean(grid, vars.q), qpm = node_mean(grid, vars.qp), sm = node_mean(grid, vars.sigma);
  Values v{{"q.mean.re", qm.real()},
           {"q.mean.im", qm.imag()},
           {"qp.mean.re", qpm.real()},
           {"qp.mean.im", qpm.imag()},
           {"sigma.mean.re", sm.real()},
           {"sigma.mean.im", sm.imag()},
           {"defect.longrange.q_mean", vars.defects.q_mean},
           {"defect.longrange.qp_mean", vars.defects.qp_mean},
           {"defect.longrange.constraint", vars.defects.constraint},
           {"defect.longrange.transverse", vars.defects.transverse},
           {"defect.longrange.phi", phi_residual(grid, vars.Phi, b.data)},
           {"longrange.Phi.tail", vars.Phi.tail_norm}};
  const auto Phi = [&](const Spinor& o) { return vars.Phi.expansion(o); };
  const Tensor2 mix = tensor_of(mixing_term(grid, vars.q_fn, Phi));
  put_tensor(v, "mu.mix", mix);
  v.emplace_back("mu.mix.norm", max_abs(mix));
  // split of the radiated angular momentum, for smooth electric kinks
  bool smooth = c.kind == ScenarioKind::particle_kink;
  for (const auto& q : c.charges) smooth = smooth && q.accel_time > 0.0 && q.Q.imag() == 0.0;
  if (smooth) {
    const auto split = angular_momentum_split(b.data, vars, grid, opt);
    v.emplace_back("defect.longrange.split", split.split_residual);
  }
  return v;
}

Values shift_block(const ScenarioConfig& c, const Built& b, const NullDirectionGrid& grid) {
  const LongRangeVars vars = vars_of(b, grid);
  const ScalarOnSphere Phi = [&](const Spinor& o) { return vars.Phi.expansion(o); };
  const ShiftConfig& s = c.shift;
  const auto ts = trajectory_shift(s.Q, s.m, s.v, Phi, grid.n_theta(), grid.n_phi());
  const double norm = std::sqrt(std::max(0.0, -dot(ts.dy, ts.dy)));
  const double Q0 = b.data.Q.real();
  const ScalarOnSphere q = [&](const Spinor& o) {
    const double vl = dot(s.v, null_vector_of(o));
    return cplx{s.Q / (2.0 * vl * vl)};
  };
  const Tensor2 mix = tensor_of(mixing_term(grid, q, Phi));
  Values v;
  put_vector(v, "shift.dy", ts.dy);
  v.emplace_back("shift.norm", norm);
  v.emplace_back("shift.ratio", Q0 != 0.0 ? norm / std::abs(s.Q * Q0 / s.m) : 0.0);
  v.emplace_back("shift.delta", ts.delta);
  v.emplace_back("defect.shift.mixing", max_abs(Tensor2(mix + 0.5 * s.m * wedge(ts.dy, s.v))));
  return v;
}

Values dirac_block(const ScenarioConfig& c, const Built& b, const NullDirectionGrid& grid) {
  if (!b.packet) throw DomainError("the scenario has no Dirac packet");
  const DiracProfile& f = *b.packet;
  const auto tc = timelike_out_charges(f, *b.hgrid);
  const double norm = scalar_product(*b.hgrid, f, f).real();
  const ScalarOnSphere q = q_closed_form(*b.model, true);
  const auto qs = grid.sample([&](const GridNode& n) { return q(n.o); });
  const double qm = node_mean(grid, qs).real();
  Values v{{"dirac.norm", norm}, {"dirac.charge", f.coupling * norm}, {"dirac.q.mean", qm}};
  v.emplace_back("defect.dirac.charge", std::abs(qm - f.coupling * norm));
  put_vector(v, "P.out-t", tc.P);
  put_tensor(v, "M.out-t", tc.M);
  v.emplace_back("dirac.M.imag_residual", tc.imag_residual);
  if (c.dressing) {
    const ScalarOnSphere Phi = kink_phi(*c.dressing);
    const DiracProfile g = phase_dressing(f, grid, [&](const Spinor& o) { return Phi(o).real(); });
    const Tensor2 dM = timelike_out_charges(g, *b.hgrid).M - tc.M;
    put_tensor(v, "dressing.dM", dM);
    v.emplace_back("defect.dirac.dressing", max_abs(Tensor2(dM - tensor_of(mixing_term(grid, q, Phi)))));
  }
  return v;
}

template <class F>
Values in_block(Block blk, F&& f) {
  const std::string tag = std::string(block_name(blk)) + ": ";
  try {
    return f();
  } catch (const DomainError& e) {
    throw DomainError(tag + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(tag + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError(tag + e.what());
  }
}

Values compute(Block blk, const ScenarioConfig& c, const Resolution& r) {
  return in_block(blk, [&] {
    const Built b = build(c, r);
    const NullDirectionGrid grid(c.t, r.n_theta, r.n_phi);
    switch (blk) {
      case Block::asymptote: return asymptote_block(c, b, grid);
      case Block::radiate: return radiate_block(b, grid, r.s);
      case Block::budget: return budget_block(b, grid, r.s);
      case Block::longrange: return longrange_block(c, b, grid, r.s);
      case Block::shift: return shift_block(c, b, grid);
      case Block::dirac: return dirac_block(c, b, grid);
    }
    return Values{};
  });
}

}  // namespace

std::string_view block_name(Block b) {
  for (const auto& [k, n] : block_names)
    if (k == b) return n;
  return "?";
}

std::optional<Block> parse_block(std::string_view name) {
  for (const auto& [k, n] : block_names)
    if (n == name) return k;
  return std::nullopt;
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t{
      {"defect.asymptote.charge", 1e-9},     {"defect.asymptote.past_charge", 1e-9},
      {"defect.asymptote.homogeneity", 1e-8}, {"defect.asymptote.matching", 1e-9},
      {"defect.asymptote.conservation", 1e-7}, {"defect.budget.P", 1e-7},
      {"defect.budget.M", 1e-7},              {"defect.existence", 1e-8},
      {"defect.longrange.q_mean", 1e-8},      {"defect.longrange.qp_mean", 1e-8},
      {"defect.longrange.constraint", 1e-8},  {"defect.longrange.transverse", 1e-6},
      {"defect.longrange.phi", 1e-6},         {"defect.longrange.split", 1e-6},
      {"defect.shift.mixing", 1e-5},          {"defect.dirac.charge", 1e-7},
      {"defect.dirac.dressing", 1e-5}};
  return t;
}

ScenarioConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: not valid JSON: ") + e.what());
  }
  allow_keys(j, "top level", {"name", "kind", "frame", "grid", "charges", "pulse", "packet", "dressing", "shift",
                           "outputs", "tolerances", "expected"});
  ScenarioConfig c;
  if (!j.contains("name") || !j.at("name").is_string()) invalid("name", "missing or not a string");
  c.name = j.at("name").get<std::string>();
  if (!j.contains("kind") || !j.at("kind").is_string()) invalid("kind", "missing or not a string");
  {
    const std::string k = j.at("kind").get<std::string>();
    bool found = false;
    for (const auto& [kind, n] : kind_names)
      if (n == k) {
        c.kind = kind;
        found = true;
      }
    if (!found) invalid("kind", "unknown scenario kind '" + k + "'");
  }
  if (j.contains("frame")) {
    allow_keys(j.at("frame"), "frame", {"t"});
    if (j.at("frame").contains("t")) c.t = velocity(j.at("frame").at("t"), "frame.t");
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    allow_keys(g, "grid", {"sphere", "s_window"});
    if (g.contains("sphere")) {
      const json& s = g.at("sphere");
      if (!s.is_array() || s.size() != 2) invalid("grid.sphere", "expected [n_theta, n_phi]");
      c.n_theta = integer_in(s[0], "grid.sphere", 4, 256);
      c.n_phi = integer_in(s[1], "grid.sphere", 8, 512);
    }
    if (g.contains("s_window")) {
      const json& w = g.at("s_window");
      allow_keys(w, "grid.s_window", {"panels", "nodes", "max_half_width"});
      if (w.contains("panels")) c.s_window.panels = integer_in(w.at("panels"), "grid.s_window.panels", 2, 256);
      if (w.contains("nodes")) c.s_window.nodes_per_panel = integer_in(w.at("nodes"), "grid.s_window.nodes", 4, 64);
      c.s_window.max_half_width = number_or(w, "max_half_width", c.s_window.max_half_width, "grid.s_window");
      if (!(c.s_window.max_half_width > 0.0)) invalid("grid.s_window.max_half_width", "must be positive");
    }
  }
  if (j.contains("charges")) {
    const json& cs = j.at("charges");
    if (!cs.is_array()) invalid("charges", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string where = "charges[" + std::to_string(i) + "]";
      const json& q = cs[i];
      allow_keys(q, where, {"Q", "u_in", "u_out", "accel_time", "origin"});
      ChargeConfig cc;
      if (q.contains("Q")) cc.Q = complex_value(q.at("Q"), where + ".Q");
      if (q.contains("u_in")) cc.u_in = velocity(q.at("u_in"), where + ".u_in");
      cc.u_out = q.contains("u_out") ? velocity(q.at("u_out"), where + ".u_out") : cc.u_in;
      cc.accel_time = number_or(q, "accel_time", 0.0, where);
      if (cc.accel_time < 0.0) invalid(where + ".accel_time", "must be nonnegative");
      if (q.contains("origin")) cc.origin = position(q.at("origin"), where + ".origin");
      c.charges.push_back(cc);
    }
  }
  if (j.contains("pulse")) {
    const json& p = j.at("pulse");
    allow_keys(p, "pulse", {"width", "theta", "phi"});
    PulseConfig pc;
    pc.width = number_or(p, "width", 1.0, "pulse");
    if (!(pc.width > 0.0)) invalid("pulse.width", "must be positive");
    pc.theta = number_or(p, "theta", 0.0, "pulse");
    pc.phi = number_or(p, "phi", 0.0, "pulse");
    c.pulse = pc;
  }
  if (j.contains("packet")) {
    const json& p = j.at("packet");
    allow_keys(p, "packet", {"profile", "v0", "width", "spinor", "branch", "second", "mass", "coupling", "grid"});
    PacketConfig pc;
    pc.profile = p.value("profile", pc.profile);
    if (pc.profile != "gaussian-bump" && pc.profile != "two-bump" && pc.profile != "eigenpacket")
      invalid("packet.profile", "expected gaussian-bump, two-bump or eigenpacket");
    json first = json::object();
    for (const char* k : {"v0", "width", "spinor", "branch"})
      if (p.contains(k)) first[k] = p.at(k);
    pc.first = bump(first, "packet");
    if (pc.profile == "two-bump") {
      if (!p.contains("second")) invalid("packet", "two-bump needs 'second'");
      pc.second = bump(p.at("second"), "packet.second");
    } else if (p.contains("second")) {
      invalid("packet.second", "only used by two-bump");
    }
    pc.mass = number_or(p, "mass", 1.0, "packet");
    pc.coupling = number_or(p, "coupling", 1.0, "packet");
    if (!(pc.mass > 0.0)) invalid("packet.mass", "must be positive");
    if (p.contains("grid")) {
      const json& g = p.at("grid");
      if (!g.is_array() || g.size() != 3) invalid("packet.grid", "expected [n_rap, n_theta, n_phi]");
      pc.n_rap = integer_in(g[0], "packet.grid", 4, 128);
      pc.n_theta = integer_in(g[1], "packet.grid", 4, 128);
      pc.n_phi = integer_in(g[2], "packet.grid", 8, 256);
    }
    c.packet = pc;
  }
  if (j.contains("dressing")) {
    const json& d = j.at("dressing");
    allow_keys(d, "dressing", {"Q0", "u1", "u2"});
    DressingConfig dc;
    dc.Q0 = number_or(d, "Q0", 1.0, "dressing");
    if (d.contains("u1")) dc.u1 = velocity(d.at("u1"), "dressing.u1");
    if (d.contains("u2")) dc.u2 = velocity(d.at("u2"), "dressing.u2");
    c.dressing = dc;
  }
  if (j.contains("shift")) {
    const json& s = j.at("shift");
    allow_keys(s, "shift", {"Q", "m", "v"});
    c.shift.Q = number_or(s, "Q", 1.0, "shift");
    c.shift.m = number_or(s, "m", 1.0, "shift");
    if (!(c.shift.m > 0.0)) invalid("shift.m", "must be positive");
    if (s.contains("v")) c.shift.v = velocity(s.at("v"), "shift.v");
  }
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    if (!o.is_array()) invalid("outputs", "expected an array of block names");
    for (const auto& e : o) {
      if (!e.is_string()) invalid("outputs", "expected block names");
      const auto b = parse_block(e.get<std::string>());
      if (!b) invalid("outputs", "unknown block '" + e.get<std::string>() + "'");
      c.outputs.push_back(*b);
    }
  }
  c.tolerances = default_tolerances();
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (!t.is_object()) invalid("tolerances", "expected an object");
    for (const auto& [k, v] : t.items()) {
      if (!c.tolerances.contains(k)) invalid("tolerances", "unknown tolerance '" + k + "'");
      const double x = number(v, "tolerances." + k);
      if (!(x > 0.0)) invalid("tolerances." + k, "must be positive");
      c.tolerances[k] = x;
    }
  }
  if (j.contains("expected")) {
    const json& e = j.at("expected");
    if (!e.is_object()) invalid("expected", "expected an object");
    for (const auto& [k, v] : e.items()) {
      if (!v.is_array() || v.size() != 2) invalid("expected." + k, "expected [value, tolerance]");
      c.expected[k] = {number(v[0], "expected." + k), number(v[1], "expected." + k)};
    }
  }
  // kind requirements
  switch (c.kind) {
    case ScenarioKind::static_charge:
      if (c.charges.size() != 1) invalid("charges", "static-charge needs exactly one charge");
      if (c.charges.front().accel_time != 0.0 || euclidean_norm(c.charges.front().u_in - c.charges.front().u_out) > 0.0)
        invalid("charges", "a static charge does not accelerate");
      break;
    case ScenarioKind::particle_kink:
      if (c.charges.empty()) invalid("charges", "particle-kink needs at least one charge");
      break;
    case ScenarioKind::gaussian_pulse:
      if (!c.pulse) invalid("pulse", "gaussian-pulse needs a pulse section");
      break;
    case ScenarioKind::dirac_packet:
      if (!c.packet) invalid("packet", "dirac-packet needs a packet section");
      break;
    case ScenarioKind::composite:
      if (c.charges.empty() && !c.pulse) invalid("composite", "needs charges or a pulse");
      break;
  }
  if (c.dressing && !c.packet) invalid("dressing", "only applies to a packet");
  c.canonical = j.dump();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("config: cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void scale_tolerances(ScenarioConfig& c, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("tolerance scale must be positive");
  for (auto& [k, v] : c.tolerances) v *= factor;
}

const ReportValue* Report::find(std::string_view key) const {
  for (const auto& v : values)
    if (v.key == key) return &v;
  return nullptr;
}

std::string Report::table() const {
  std::string s = "# scenario\t" + scenario + "\n";
  for (const auto& [k, v] : provenance) s += "# " + k + "\t" + v + "\n";
  s += "key\tvalue\terror\n";
  for (const auto& v : values) s += v.key + "\t" + fmt17(v.value) + "\t" + fmt17(v.error) + "\n";
  for (const auto& v : violations) s += "# violation\t" + v + "\n";
  return s;
}

std::string Report::structured() const {
  ojson j;
  j["scenario"] = scenario;
  ojson vals = ojson::array();
  for (const auto& v : values) vals.push_back({{"key", v.key}, {"value", v.value}, {"error", v.error}});
  j["values"] = vals;
  ojson prov = ojson::object();
  for (const auto& [k, v] : provenance) prov[k] = v;
  j["provenance"] = prov;
  j["violations"] = violations;
  return j.dump(2) + "\n";
}

Report run_scenario(const ScenarioConfig& config, std::span<const Block> blocks) {
  const std::vector<Block> todo = blocks.empty() ? config.outputs : std::vector<Block>(blocks.begin(), blocks.end());
  if (todo.empty()) throw DomainError("run_scenario: no output blocks requested");
  const Resolution fine = fine_resolution(config), coarse = coarse_resolution(fine);
  Report rep;
  rep.scenario = config.name;
  rep.provenance["blocks"] = block_list(todo);
  rep.provenance["config.hash"] = hex64(fnv1a(config.canonical));
  rep.provenance["grid.sphere"] = std::to_string(fine.n_theta) + "x" + std::to_string(fine.n_phi);
  rep.provenance["grid.sphere.coarse"] = std::to_string(coarse.n_theta) + "x" + std::to_string(coarse.n_phi);
  rep.provenance["grid.s_window"] = std::to_string(fine.s.panels) + "x" + std::to_string(fine.s.nodes_per_panel) +
                                    " max " + fmt17(fine.s.max_half_width);
  if (config.packet)
    rep.provenance["grid.hyperboloid"] =
        std::to_string(fine.n_rap) + "x" + std::to_string(fine.h_theta) + "x" + std::to_string(fine.h_phi);
  for (Block blk : todo) {
    const Values a = compute(blk, config, fine);
    const Values b = compute(blk, config, coarse);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double err = i < b.size() && b[i].first == a[i].first ? std::abs(a[i].second - b[i].second)
                                                                   : std::numeric_limits<double>::quiet_NaN();
      rep.values.push_back({a[i].first, a[i].second, err});
      const auto tol = config.tolerances.find(a[i].first);
      if (tol == config.tolerances.end()) continue;
      rep.provenance["tolerance." + tol->first] = fmt17(tol->second);
      if (!(a[i].second <= tol->second))
        rep.violations.push_back(a[i].first + " = " + fmt17(a[i].second) + " exceeds " + fmt17(tol->second));
    }
  }
  return rep;
}

// --- verification suites -------------------------------------------------

namespace {

struct Check {
  std::string suite, name;
  double tolerance;
  std::function<double()> residual;
};

FourVector seeded_boost(std::mt19937_64& rng, double max_rap) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return boosted_time(max_rap * 0.5 * (u(rng) + 1.0), {u(rng), u(rng), u(rng) + 1e-3});
}

Spinor seeded_spinor(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {cplx{g(rng), g(rng)}, cplx{g(rng), g(rng)}};
}

const FourVector t_lab{{1.0, 0.0, 0.0, 0.0}};

std::vector<Check> spinor_checks() {
  return {
      {"minkowski_spinors", "null vector of a spinor is null", 1e-12,
       [] {
         std::mt19937_64 rng(1);
         double worst = 0.0;
         for (int k = 0; k < 50; ++k) {
           const FourVector l = null_vector_of(seeded_spinor(rng));
           worst = std::max(worst, std::abs(dot(l, l)) / (l[0] * l[0]));
         }
         return worst;
       }},
      {"minkowski_spinors", "mixed map round trip", 1e-13,
       [] {
         std::mt19937_64 rng(2);
         std::normal_distribution<double> g;
         double worst = 0.0;
         for (int k = 0; k < 50; ++k) {
           const FourVector v{{g(rng), g(rng), g(rng), g(rng)}};
           worst = std::max(worst, euclidean_norm(real_part(vector_of(mixed(v))) - v));
         }
         return worst;
       }},
      {"minkowski_spinors", "l_AA' = o_A obar_A'", 1e-12,
       [] {
         std::mt19937_64 rng(3);
         double worst = 0.0;
         for (int k = 0; k < 50; ++k) {
           const Spinor o = seeded_spinor(rng);
           const Mat2 d = mixed_lower(null_vector_of(o)) - lower(o).vec() * lower(conj(o)).vec().transpose();
           worst = std::max(worst, d.cwiseAbs().maxCoeff() / norm2(o));
         }
         return worst;
       }},
      {"minkowski_spinors", "C^A o_A = 1", 1e-12,
       [] {
         std::mt19937_64 rng(4);
         double worst = 0.0;
         for (int k = 0; k < 50; ++k) {
           const FourVector v = seeded_boost(rng, 2.0);
           const Spinor o = seeded_spinor(rng);
           worst = std::max(worst, std::abs(-contract(o, velocity_characteristic(v, o)) - 1.0));
         }
         return worst;
       }},
  };
}

std::vector<Check> sphere_checks() {
  return {
      {"null_sphere", "sum of weights = 4 pi", 1e-12,
       [] {
         const NullDirectionGrid g(t_lab, 24, 48);
         double s = 0.0;
         for (const auto& n : g.nodes()) s += n.weight;
         return std::abs(s - 4.0 * pi);
       }},
      {"null_sphere", "int dl / (v.l)^2 = 4 pi", 1e-9,
       [] {
         const NullDirectionGrid g(t_lab, 48, 96);
         double worst = 0.0;
         for (double r : {0.0, 0.5, 1.0, 2.0}) {
           const FourVector v = boosted_time(r, {0.3, -0.2, 1.0});
           const HomogeneousFn f{[v](const Spinor& o) { return cplx{1.0 / std::pow(dot(v, null_vector_of(o)), 2)}; },
                                 {-2, -2}};
           worst = std::max(worst, std::abs(integrate(g, f) - 4.0 * pi));
         }
         return worst;
       }},
      {"null_sphere", "delta-line identity", 1e-8,
       [] {
         std::mt19937_64 rng(4);
         std::normal_distribution<double> n;
         const NullDirectionGrid g(t_lab, 16, 64);
         double worst = 0.0;
         for (int k = 0; k < 20;) {
           const FourVector v = seeded_boost(rng, 1.0);
           const FourVector y{{n(rng), 2.0 + n(rng), n(rng), n(rng)}};
           if (dot(y, y) >= -0.1) continue;
           ++k;
           const HomogeneousFn f{[v](const Spinor& o) { return cplx{1.0 / dot(v, null_vector_of(o))}; }, {-1, -1}};
           const double expect = 2.0 * pi / std::sqrt(dot(y, v) * dot(y, v) - dot(y, y));
           worst = std::max(worst, std::abs(integrate_delta_line(g, y, f) - expect));
         }
         return worst;
       }},
  };
}

std::vector<Check> scalar_checks() {
  // A = 1 / (x - ib)^2 with chi = 1 / (2 (s - i b.l))
  struct Fam {
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
  };
  return {
      {"scalar_asymptotics", "field rebuilt from its profile", 1e-8,
       [] {
         std::mt19937_64 rng(5);
         std::uniform_real_distribution<double> u(-2.0, 2.0);
         const Fam fam{1.2 * boosted_time(0.4, {0.2, 1.0, -0.3})};
         const NullDirectionGrid g(t_lab, 32, 64);
         double worst = 0.0;
         for (int k = 0; k < 10; ++k) {
           const FourVector x{{u(rng), u(rng), u(rng), u(rng)}};
           worst = std::max(worst, std::abs(field_from_asymptotic(fam.profile(), g, x) - fam.field(x)));
         }
         return worst;
       }},
      {"scalar_asymptotics", "wave equation of the rebuilt field", 1e-5,
       [] {
         const Fam fam{boosted_time(0.3, {1.0, 0.0, 0.0})};
         const NullDirectionGrid g(t_lab, 24, 48);
         const ScalarField A = [&](const FourVector& x) { return field_from_asymptotic(fam.profile(), g, x); };
         return wave_residual(A, FourVector{{0.3, 0.2, -0.4, 0.1}});
       }},
  };
}

std::vector<Check> em_checks() {
  return {
      {"em_asymptotics", "Coulomb data consistency", 1e-12,
       [] {
         const NullDirectionGrid g(t_lab, 12, 24);
         const std::array<double, 3> s{-1.0, 0.0, 2.0};
         const auto r = data_residuals(coulomb_data(cplx{0.8, -0.2}, boosted_time(0.5, {1.0, 0.0, 0.0})), g, s);
         return std::max({r.charge, r.matching, r.homogeneity});
       }},
      {"em_asymptotics", "closed-form free field from its data", 1e-8,
       [] {
         const HertzField h{FourVector{{1.3, 0.2, -0.1, 0.3}}, Spinor{cplx{0.8, 0.2}, cplx{-0.3, 0.5}}};
         const NullDirectionGrid g(t_lab, 32, 64);
         double worst = 0.0;
         for (const FourVector& x : {FourVector{{0.2, 0.1, -0.3, 0.4}}, FourVector{{-0.5, 0.6, 0.2, 0.0}}}) {
           const SymSpinor exact = h.field(x);
           worst = std::max(worst, max_abs(free_field_from_zeta(h.data(), g, x).phi - exact) / max_abs(exact));
         }
         return worst;
       }},
      {"em_asymptotics", "charge conservation of a kink", 1e-10,
       [] {
         const NullDirectionGrid g(t_lab, 12, 24);
         const std::array<double, 4> s{-2.0, 0.1, 0.7, 3.0};
         const PointCharges pc{{{Worldline(FourVector{}, boosted_time(0.4, {1.0, 0.0, 0.0}),
                                           boosted_time(0.8, {0.0, 1.0, 0.0}), 1.0),
                                 cplx{1.0}}}};
         return charge_conservation_defect(pc, g, s);
       }},
  };
}

std::vector<Check> charge_checks() {
  return {
      {"poincare_charges", "Gaussian news P.t = 2 sqrt(pi/2)", 1e-6,
       [] {
         const NullDirectionGrid g(t_lab, 24, 48);
         const auto d = isotropic_gaussian_news(t_lab, direction_spinor(g.frame(), 0.0, 0.0));
         return std::abs(dot(radiated_momentum(d, Flow::out, g), t_lab) - 2.0 * std::sqrt(pi / 2.0));
       }},
      {"poincare_charges", "isotropic real news mu = 0", 1e-8,
       [] {
         const NullDirectionGrid g(t_lab, 24, 48);
         const auto d = isotropic_gaussian_news(t_lab, direction_spinor(g.frame(), 0.0, 0.0));
         return max_abs(radiated_angular_momentum(d, Flow::out, g).mu);
       }},
      {"poincare_charges", "budget closure of sourceless data", 1e-7,
       [] {
         const NullDirectionGrid g(t_lab, 24, 48);
         const HertzField h{FourVector{{1.2, 0.0, 0.3, 0.1}}, Spinor{cplx{1.0, 0.0}, cplx{0.2, 0.4}}};
         const auto b = radiation_budget(h.data(), g);
         return std::max(b.P_defect, b.M_defect);
       }},
      {"poincare_charges", "Cauchy charges approach the radiated ones", 1e-3,
       [] {
         const HertzField h{FourVector{{1.3, 0.2, -0.1, 0.3}}, Spinor{cplx{0.8, 0.2}, cplx{-0.3, 0.5}}};
         const auto d = h.data();
         const NullDirectionGrid g(t_lab, 32, 64);
         const FourVector P = radiated_momentum(d, Flow::out, g);
         const Tensor2 M =
             0.5 * (radiated_angular_momentum(d, Flow::out, g).M + radiated_angular_momentum(d, Flow::in, g).M);
         const std::array<double, 3> radii{2.0, 4.0, 8.0};
         const auto ladder = cauchy_surface_ladder(d, t_lab, 0.0, radii);
         double prev = std::numeric_limits<double>::infinity();
         for (const auto& rung : ladder) {
           const double defect = std::max(euclidean_norm(rung.P - P), max_abs(Tensor2(rung.M - M)));
           if (!(defect < prev)) return std::numeric_limits<double>::infinity();
           prev = defect;
         }
         return prev;
       }},
      {"poincare_charges", "existence defect of electric data", 1e-8,
       [] {
         const NullDirectionGrid g(t_lab, 16, 32);
         const FourVector v1 = boosted_time(0.5, {1.0, 0.0, 0.0}), v2 = boosted_time(0.7, {0.0, 1.0, 1.0});
         const PointCharges pc{{{Worldline(FourVector{}, v1, v2, 1.0), cplx{1.0}}}};
         return max_abs(existence_defect(current_data(pc), g));
       }},
  };
}

std::vector<Check> hyperboloid_checks() {
  return {
      {"massive_hyperboloid", "int dmu / (t.v)^4 = 4 pi / 3", 1e-6,
       [] {
         const HyperboloidGrid g(t_lab, {48, 8, 16, 14.0, RadialRule::tanh});
         return std::abs(integrate_hyperboloid(g, [](const FourVector& v) { return cplx{1.0 / std::pow(v[0], 4)}; }) -
                         4.0 * pi / 3.0);
       }},
      {"massive_hyperboloid", "tangential derivative reproduces h_a^b", 1e-6, [] { return tangency_residual(); }},
      {"massive_hyperboloid", "Coulomb cross term vanishes by antisymmetry", 1e-9,
       [] {
         DiracSpinor u;
         u << cplx{0.8, 0.1}, cplx{-0.3, 0.4}, cplx{0.2, -0.5}, cplx{0.1, 0.3};
         const DiracProfile p = gaussian_bump(t_lab, 0.4, u, Branch::plus, 1.0, 1.0);
         const HyperboloidGrid g(t_lab, {12, 6, 12, p.support, RadialRule::linear});
         return max_abs(coulomb_cross_term(p, g, 5.0));
       }},
  };
}

std::vector<Check> scenario_checks(const std::filesystem::path& golden_dir, double tol_scale) {
  std::vector<Check> out;
  out.push_back({"scenario_cli", "report determinism across thread counts", 0.5, [] {
                   const ScenarioConfig c = parse_config(
                       R"({"name": "determinism", "kind": "gaussian-pulse", "grid": {"sphere": [12, 24]},
                           "pulse": {"width": 1.0}, "outputs": ["radiate"]})");
                   const int before = threads();
                   set_threads(1);
                   const std::string a = run_scenario(c).table();
                   set_threads(4);
                   const std::string b = run_scenario(c).table();
                   set_threads(before);
                   return a == b ? 0.0 : 1.0;
                 }});
  if (golden_dir.empty()) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(golden_dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    ScenarioConfig c = load_config(f);
    scale_tolerances(c, tol_scale);
    auto report = std::make_shared<std::optional<Report>>();
    auto get = [c, report]() -> const Report& {
      if (!*report) *report = run_scenario(c);
      return **report;
    };
    out.push_back({"scenario_cli", c.name + ": no invariant violations", 0.5,
                   [get] { return get().violations.empty() ? 0.0 : 1.0; }});
    for (const auto& [key, e] : c.expected) {
      out.push_back({"scenario_cli", c.name + ": " + key, e.tolerance, [get, key, e] {
                       const ReportValue* v = get().find(key);
                       if (!v) throw DomainError("key not in report: " + key);
                       return std::abs(v->value - e.value);
                     }});
    }
  }
  return out;
}

}  // namespace

std::vector<CheckResult> verify_suite(std::string_view name, double budget_seconds,
                                      const std::filesystem::path& golden_dir, double tolerance_scale) {
  using Maker = std::function<std::vector<Check>()>;
  const std::vector<std::pair<std::string, Maker>> suites{
      {"minkowski_spinors", spinor_checks},
      {"null_sphere", sphere_checks},
      {"scalar_asymptotics", scalar_checks},
      {"em_asymptotics", em_checks},
      {"poincare_charges", charge_checks},
      {"massive_hyperboloid", hyperboloid_checks},
      {"scenario_cli", [&] { return scenario_checks(golden_dir, tolerance_scale); }}};
  std::vector<Check> checks;
  bool known = name == "all";
  for (const auto& [n, make] : suites)
    if (name == "all" || name == n) {
      known = true;
      for (auto& c : make()) checks.push_back(std::move(c));
    }
  if (!known) throw DomainError("verify: unknown suite '" + std::string(name) + "'");
  const auto start = std::chrono::steady_clock::now();
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    CheckResult r{c.suite, c.name, 0.0, c.tolerance * (c.suite == "scenario_cli" ? 1.0 : tolerance_scale), false, false, {}};
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > budget_seconds) {
      r.timed_out = true;
      r.note = "budget spent before the check started";
    } else {
      try {
        r.residual = c.residual();
        r.passed = r.residual <= r.tolerance;
      } catch (const std::exception& e) {
        r.residual = std::numeric_limits<double>::infinity();
        r.note = e.what();
      }
    }
    out.push_back(r);
  }
  return out;
}

std::string check_table(std::span<const CheckResult> results) {
  std::string s = "suite\tcheck\tstatus\tresidual\ttolerance\tnote\n";
  for (const auto& r : results) {
    const char* status = r.timed_out ? "TIMEOUT" : r.passed ? "PASS" : "FAIL";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e\t%.1e", r.residual, r.tolerance);
    s += r.suite + "\t" + r.name + "\t" + status + "\t" + buf + "\t" + r.note + "\n";
  }
  return s;
}

}  // namespace nullinf
