#include "rkwave/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <unistd.h>

namespace rkwave::io {

namespace {

const char* type_name(const json& j) {
  if (j.is_object()) return "object";
  if (j.is_array()) return "array";
  if (j.is_string()) return "string";
  if (j.is_boolean()) return "boolean";
  if (j.is_number_integer() || j.is_number_unsigned()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_null()) return "null";
  return "value";
}

}  // namespace

Checker::Checker(const json& node, std::string pointer)
    : node_(node), pointer_(std::move(pointer)) {}

void Checker::fail(const std::string& message) const {
  throw ConfigError(pointer_.empty() ? "/" : pointer_, message);
}

void Checker::keys(const std::vector<std::string>& required,
                   const std::vector<std::string>& optional) const {
  if (!node_.is_object()) fail(std::string("expected object, got ") + type_name(node_));
  for (const auto& k : required) {
    if (!node_.contains(k)) fail("missing required key '" + k + "'");
  }
  for (const auto& [key, value] : node_.items()) {
    (void)value;
    const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                       std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw ConfigError(pointer_ + "/" + key, "unknown key '" + key + "'");
  }
}

Checker Checker::child(const std::string& key) const {
  if (!node_.is_object() || !node_.contains(key)) fail("missing key '" + key + "'");
  return Checker(node_.at(key), pointer_ + "/" + key);
}

Checker Checker::element(std::size_t i) const {
  if (!node_.is_array() || i >= node_.size()) fail("missing array element " + std::to_string(i));
  return Checker(node_.at(i), pointer_ + "/" + std::to_string(i));
}

std::size_t Checker::array_size() const {
  if (!node_.is_array()) fail(std::string("expected array, got ") + type_name(node_));
  return node_.size();
}

double Checker::number(const std::string& key) const {
  const auto c = child(key);
  if (!c.raw().is_number()) c.fail(std::string("expected number, got ") + type_name(c.raw()));
  return c.raw().get<double>();
}

double Checker::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

int Checker::integer(const std::string& key) const {
  const auto c = child(key);
  if (!c.raw().is_number_integer() && !c.raw().is_number_unsigned()) {
    c.fail(std::string("expected integer, got ") + type_name(c.raw()));
  }
  return c.raw().get<int>();
}

int Checker::integer_or(const std::string& key, int fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Checker::boolean(const std::string& key) const {
  const auto c = child(key);
  if (!c.raw().is_boolean()) c.fail(std::string("expected boolean, got ") + type_name(c.raw()));
  return c.raw().get<bool>();
}

bool Checker::boolean_or(const std::string& key, bool fallback) const {
  return has(key) ? boolean(key) : fallback;
}

std::string Checker::text(const std::string& key) const {
  const auto c = child(key);
  if (!c.raw().is_string()) c.fail(std::string("expected string, got ") + type_name(c.raw()));
  return c.raw().get<std::string>();
}

std::string Checker::text_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

std::vector<double> Checker::number_array(const std::string& key) const {
  const auto c = child(key);
  if (!c.raw().is_array()) c.fail(std::string("expected array, got ") + type_name(c.raw()));
  std::vector<double> out;
  out.reserve(c.raw().size());
  for (std::size_t i = 0; i < c.raw().size(); ++i) {
    const auto e = c.element(i);
    if (!e.raw().is_number()) e.fail(std::string("expected number, got ") + type_name(e.raw()));
    out.push_back(e.raw().get<double>());
  }
  return out;
}

std::vector<int> Checker::integer_array(const std::string& key) const {
  const auto c = child(key);
  if (!c.raw().is_array()) c.fail(std::string("expected array, got ") + type_name(c.raw()));
  std::vector<int> out;
  out.reserve(c.raw().size());
  for (std::size_t i = 0; i < c.raw().size(); ++i) {
    const auto e = c.element(i);
    if (!e.raw().is_number_integer() && !e.raw().is_number_unsigned()) {
      e.fail(std::string("expected integer, got ") + type_name(e.raw()));
    }
    out.push_back(e.raw().get<int>());
  }
  return out;
}

Vec Checker::vector(const std::string& key) const {
  const auto v = number_array(key);
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("/", "parse error in '" + path.string() + "': " + e.what());
  }
  return j;
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

kwave::ImplicitProfile profile_from_json(const Checker& c, int k) {
  const std::string kind = c.text("kind");
  kwave::ImplicitProfile p;
  if (kind == "linear") {
    c.keys({"kind", "slope"}, {"offset"});
    p = kwave::ImplicitProfile::linear_profile(c.vector("slope"), c.number_or("offset", 0.0));
  } else if (kind == "gaussian") {
    c.keys({"kind", "amplitude", "center", "width"});
    p = kwave::ImplicitProfile::gaussian_profile(c.number("amplitude"), c.vector("center"),
                                                 c.number("width"));
  } else if (kind == "polynomial") {
    c.keys({"kind", "terms"});
    std::vector<kwave::ImplicitProfile::Term> terms;
    const auto arr = c.child("terms");
    for (std::size_t i = 0; i < arr.array_size(); ++i) {
      const auto tc = arr.element(i);
      tc.keys({"powers", "coef"});
      kwave::ImplicitProfile::Term t;
      t.powers = tc.integer_array("powers");
      t.coef = tc.number("coef");
      terms.push_back(std::move(t));
    }
    p = kwave::ImplicitProfile::polynomial_profile(std::move(terms));
  } else {
    c.child("kind").fail("unknown profile kind '" + kind + "'");
  }
  try {
    p.validate(k);
  } catch (const ContractError& e) {
    c.fail(e.what());
  }
  return p;
}

json profile_to_json(const kwave::ImplicitProfile& p) {
  json j;
  switch (p.kind) {
    case kwave::ImplicitProfile::Kind::linear: {
      j["kind"] = "linear";
      j["slope"] = std::vector<double>(p.slope.data(), p.slope.data() + p.slope.size());
      j["offset"] = p.offset;
      break;
    }
    case kwave::ImplicitProfile::Kind::gaussian: {
      j["kind"] = "gaussian";
      j["amplitude"] = p.amplitude;
      j["center"] = std::vector<double>(p.center.data(), p.center.data() + p.center.size());
      j["width"] = p.width;
      break;
    }
    case kwave::ImplicitProfile::Kind::polynomial: {
      j["kind"] = "polynomial";
      json terms = json::array();
      for (const auto& t : p.terms) {
        terms.push_back(json{{"powers", t.powers}, {"coef", t.coef}});
      }
      j["terms"] = std::move(terms);
      break;
    }
  }
  return j;
}

std::vector<kwave::ImplicitProfile> profiles_from_json(const json& root, int k) {
  Checker c(root, "");
  c.keys({"schema_version", "profiles"});
  if (c.integer("schema_version") != kSchemaVersion) {
    c.child("schema_version").fail("unsupported schema_version");
  }
  const auto arr = c.child("profiles");
  std::vector<kwave::ImplicitProfile> out;
  for (std::size_t i = 0; i < arr.array_size(); ++i) {
    out.push_back(profile_from_json(arr.element(i), k));
  }
  if (out.empty()) arr.fail("need at least one profile");
  return out;
}

json profiles_to_json(const std::vector<kwave::ImplicitProfile>& profiles) {
  json j;
  j["schema_version"] = kSchemaVersion;
  json arr = json::array();
  for (const auto& p : profiles) arr.push_back(profile_to_json(p));
  j["profiles"] = std::move(arr);
  return j;
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

json grid_to_json(const GridSpec& g) {
  json arr = json::array();
  for (const auto& a : g.axes) arr.push_back(json{{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}});
  return arr;
}

GridSpec grid_from_json(const Checker& c) {
  GridSpec g;
  for (std::size_t i = 0; i < c.array_size(); ++i) {
    const auto e = c.element(i);
    e.keys({"lo", "hi", "n"});
    AxisSpec a{e.number("lo"), e.number("hi"), e.integer("n")};
    if (a.n < 1 || a.hi < a.lo) e.fail("need n >= 1 and hi >= lo");
    g.axes.push_back(a);
  }
  if (g.axes.empty()) c.fail("empty grid");
  return g;
}

// ---------------------------------------------------------------------------
// Solutions
// ---------------------------------------------------------------------------

json solution_to_json(const kwave::KWaveSolution& s) {
  const auto& surf = s.surface;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = {{"name", surf.frame.model.name}, {"params", surf.frame.model.params}};
  j["frame"] = {{"selectors", surf.frame.selectors},
                {"source", surf.frame.source},
                {"commuting_certified", surf.frame.commuting_certified}};
  j["base_state"] =
      std::vector<double>(surf.base_state.data(), surf.base_state.data() + surf.base_state.size());
  j["r_grid"] = grid_to_json(surf.grid);
  j["surface"] = {{"values", surf.values},
                  {"lambda_values", surf.lambda_values},
                  {"path_independence_error", surf.path_independence_error}};
  json profs = json::array();
  for (const auto& p : s.profiles) profs.push_back(profile_to_json(p));
  j["profiles"] = std::move(profs);
  j["newton"] = {{"tolerance", s.newton.tolerance},
                 {"max_iterations", s.newton.max_iterations},
                 {"damping", s.newton.damping},
                 {"condition_limit", s.newton.condition_limit}};
  return j;
}

kwave::KWaveSolution solution_from_json(const json& root) {
  Checker c(root, "");
  c.keys({"schema_version", "model", "frame", "base_state", "r_grid", "surface", "profiles",
          "newton"});
  if (c.integer("schema_version") != kSchemaVersion) {
    c.child("schema_version").fail("unsupported schema_version");
  }

  const auto mc = c.child("model");
  mc.keys({"name"}, {"params"});
  std::map<std::string, double> params;
  if (mc.has("params")) {
    const auto pc = mc.child("params");
    if (!pc.raw().is_object()) pc.fail("expected object");
    for (const auto& [key, value] : pc.raw().items()) {
      if (!value.is_number()) throw ConfigError(pc.pointer() + "/" + key, "expected number");
      params[key] = value.get<double>();
    }
  }
  models::HydroModel model;
  try {
    model = models::make_model(mc.text("name"), params);
  } catch (const ContractError& e) {
    mc.fail(e.what());
  }

  const auto fc = c.child("frame");
  fc.keys({"selectors", "source", "commuting_certified"});
  std::vector<std::string> selectors;
  {
    const auto sc = fc.child("selectors");
    for (std::size_t i = 0; i < sc.array_size(); ++i) {
      const auto e = sc.element(i);
      if (!e.raw().is_string()) e.fail("expected string");
      selectors.push_back(e.raw().get<std::string>());
    }
  }
  const std::string source = fc.text("source");
  if (source != "analytic" && source != "tracked") {
    fc.child("source").fail("source must be 'analytic' or 'tracked'");
  }

  kwave::KWaveSolution s;
  try {
    s.surface.frame = geometry::make_frame(model, selectors, source);
  } catch (const ContractError& e) {
    fc.fail(e.what());
  }
  s.surface.frame.commuting_certified = fc.boolean("commuting_certified");
  s.surface.base_state = c.vector("base_state");
  if (s.surface.base_state.size() != model.q) c.child("base_state").fail("length must equal q");
  s.surface.grid = grid_from_json(c.child("r_grid"));
  if (s.surface.grid.dim() != s.surface.frame.k) c.child("r_grid").fail("dimension must equal k");

  const auto sc = c.child("surface");
  sc.keys({"values", "lambda_values", "path_independence_error"});
  s.surface.values = sc.number_array("values");
  s.surface.lambda_values = sc.number_array("lambda_values");
  s.surface.path_independence_error = sc.number("path_independence_error");
  const std::size_t nodes = s.surface.grid.node_count();
  if (s.surface.values.size() != nodes * static_cast<std::size_t>(model.q)) {
    sc.child("values").fail("size must be node_count * q");
  }
  if (s.surface.lambda_values.size() !=
      nodes * static_cast<std::size_t>(s.surface.frame.k) * static_cast<std::size_t>(model.p)) {
    sc.child("lambda_values").fail("size must be node_count * k * p");
  }
  s.surface.build_tables();

  const auto profs = c.child("profiles");
  for (std::size_t i = 0; i < profs.array_size(); ++i) {
    s.profiles.push_back(profile_from_json(profs.element(i), s.surface.frame.k));
  }

  const auto nc = c.child("newton");
  nc.keys({}, {"tolerance", "max_iterations", "damping", "condition_limit"});
  s.newton.tolerance = nc.number_or("tolerance", 1e-12);
  s.newton.max_iterations = nc.integer_or("max_iterations", 50);
  s.newton.damping = nc.number_or("damping", 0.5);
  s.newton.condition_limit = nc.number_or("condition_limit", 1e12);

  try {
    s.validate();
  } catch (const ContractError& e) {
    c.fail(e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

json verification_to_json(const verify::VerificationReport& rep) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["grid"] = grid_to_json(rep.grid);
  j["max_residual"] = rep.max_residual;
  j["mean_residual"] = rep.mean_residual;
  j["max_rank"] = rep.max_rank;
  j["rank_bound"] = rep.k_bound;
  j["residual_tol"] = rep.residual_tol;
  j["rank_tol"] = rep.rank_tol;
  j["resolved_points"] = rep.resolved;
  j["unresolved_points"] = rep.unresolved;
  j["pass"] = rep.pass;
  json rows = json::array();
  for (const auto& r : rep.rows) {
    json row;
    row["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
    row["resolved"] = r.resolved;
    if (r.resolved) {
      row["residual"] = r.residual;
      row["rank"] = r.rank;
      row["singular_values"] = std::vector<double>(
          r.singular_values.data(), r.singular_values.data() + r.singular_values.size());
    }
    rows.push_back(std::move(row));
  }
  j["points"] = std::move(rows);
  return j;
}

json involutivity_to_json(const geometry::InvolutivityReport& rep) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["h"] = rep.h;
  j["tol"] = rep.tol;
  j["pass"] = rep.pass;
  j["max_bracket_residual"] = rep.max_bracket_residual;
  j["max_lambda_span_residual"] = rep.max_lambda_residual;
  j["max_commutation"] = rep.max_commutation;
  json states = json::array();
  for (std::size_t i = 0; i < rep.sample_states.size(); ++i) {
    const auto& u = rep.sample_states[i];
    json st;
    st["state"] = std::vector<double>(u.data(), u.data() + u.size());
    json pairs = json::array();
    for (const auto& pc : rep.checks[i]) {
      pairs.push_back(json{{"s", pc.s},
                           {"r", pc.r},
                           {"bracket_residual", pc.bracket_residual},
                           {"lambda_span_residual", pc.lambda_span_residual},
                           {"commutation", pc.commutation}});
    }
    st["pairs"] = std::move(pairs);
    states.push_back(std::move(st));
  }
  j["states"] = std::move(states);
  return j;
}

json catastrophes_to_json(const kwave::CatastropheReport& rep) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["condition_threshold"] = rep.condition_threshold;
  json cells = json::array();
  for (const auto& c : rep.cells) {
    cells.push_back(json{
        {"axis", c.axis},
        {"x_lo", std::vector<double>(c.x_lo.data(), c.x_lo.data() + c.x_lo.size())},
        {"x_hi", std::vector<double>(c.x_hi.data(), c.x_hi.data() + c.x_hi.size())},
        {"det_lo", c.det_lo},
        {"det_hi", c.det_hi},
        {"locus_estimate", c.locus_estimate},
        {"reason", c.reason},
    });
  }
  j["cells"] = std::move(cells);
  return j;
}

json lambda_constraints_to_json(const kwave::LambdaConstraintReport& rep) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["vacuous"] = rep.vacuous;
  j["max_residual"] = rep.max_residual;
  json pairs = json::array();
  for (const auto& p : rep.pairs) {
    pairs.push_back(json{{"s", p.s},
                         {"l", p.l},
                         {"max_residual", p.max_residual},
                         {"alpha", p.alpha},
                         {"beta", p.beta},
                         {"residual", p.residual}});
  }
  j["pairs"] = std::move(pairs);
  return j;
}

// ---------------------------------------------------------------------------
// Field table CSV + plot script
// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string field_table_csv(const kwave::FieldTable& table, int k, int q) {
  const int p = table.grid.dim();
  std::string out;
  for (int i = 0; i < p; ++i) out += "x" + std::to_string(i + 1) + ",";
  for (int s = 0; s < k; ++s) out += "r" + std::to_string(s + 1) + ",";
  for (int c = 0; c < q; ++c) out += "u" + std::to_string(c + 1) + ",";
  out += "newton_iters,jac_cond,resolved\n";

  for (const auto& smp : table.samples) {
    for (int i = 0; i < p; ++i) out += format_double(smp.x[i]) + ",";
    for (int s = 0; s < k; ++s) out += format_double(smp.r.size() ? smp.r[s] : NAN) + ",";
    for (int c = 0; c < q; ++c) out += format_double(smp.u.size() ? smp.u[c] : NAN) + ",";
    out += std::to_string(smp.diag.iterations) + ",";
    out += format_double(smp.diag.jacobian_condition) + ",";
    out += smp.diag.resolved ? "1\n" : "0\n";
  }
  return out;
}

std::string gnuplot_script(const std::string& csv_name, const kwave::FieldTable& table, int k,
                           int q) {
  const int p = table.grid.dim();
  std::string s;
  s += "# gnuplot script for " + csv_name + "\n";
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead\n";
  if (p == 2 && table.grid.axes[0].n > 1 && table.grid.axes[1].n > 1) {
    s += "set pm3d map\n";
    s += "set xlabel 'x2'\nset ylabel 'x1'\n";
    for (int c = 0; c < q; ++c) {
      const int col = p + k + c + 1;
      s += (c ? "pause -1\n" : "");
      s += "set title 'u" + std::to_string(c + 1) + "'\n";
      s += "splot '" + csv_name + "' using 2:1:" + std::to_string(col) + " with pm3d\n";
    }
  } else {
    s += "set xlabel 'x" + std::to_string(p) + "'\n";
    for (int c = 0; c < q; ++c) {
      const int col = p + k + c + 1;
      s += (c ? "replot" : "plot");
      s += " '" + csv_name + "' using " + std::to_string(p) + ":" + std::to_string(col) +
           " with lines\n";
    }
    s += "pause -1\n";
  }
  return s;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  const fs::path tmp = dir / (path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

}  // namespace rkwave::io
