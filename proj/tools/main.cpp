// riemann-kwave: construct and verify Riemann simple-wave and k-wave
// solutions of first-order quasilinear hyperbolic systems.
//
// Subcommands: models, branches, involutivity, build, sample, verify,
// verify-symmetry. See README.md for the file schemas.

#include <CLI11.hpp>

#include "rkwave/geometry.hpp"
#include "rkwave/io.hpp"
#include "rkwave/kwave.hpp"
#include "rkwave/models.hpp"
#include "rkwave/numdiff.hpp"
#include "rkwave/symmetry.hpp"
#include "rkwave/verify.hpp"
#include "rkwave/wave.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

using namespace rkwave;
using io::json;

namespace {

struct GlobalOpts {
  std::string format = "table";
  int threads = 1;
  bool threads_set = false;
  bool quiet = false;
  std::string config_path;
  std::optional<json> config;
};

Vec parse_vector(const std::string& text) {
  std::stringstream ss(text);
  std::string item;
  std::vector<double> parts;
  while (std::getline(ss, item, ',')) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ContractError("bad number '" + item + "' in '" + text + "'");
    }
  }
  Vec out(static_cast<int>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) out[static_cast<int>(i)] = parts[i];
  return out;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string item;
  std::vector<std::string> out;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kv) {
  std::map<std::string, double> out;
  for (const auto& p : kv) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw ContractError("--param expects key=value, got '" + p + "'");
    out[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
  }
  return out;
}

void load_config(GlobalOpts& g) {
  if (g.config_path.empty()) return;
  const json j = io::load_json_file(g.config_path);
  const io::Checker c(j, "");
  c.keys({"schema_version"},
         {"model", "frame", "base_state", "r_grid", "x_grid", "psi", "newton", "tolerances",
          "seed", "samples", "threads", "output"});
  if (c.integer("schema_version") != io::kSchemaVersion) {
    c.child("schema_version").fail("unsupported schema_version");
  }
  if (c.has("model")) c.child("model").keys({"name"}, {"params"});
  if (c.has("newton")) {
    c.child("newton").keys({}, {"tolerance", "max_iterations", "damping", "condition_limit"});
  }
  if (c.has("tolerances")) {
    c.child("tolerances").keys({}, {"residual", "rank", "involutivity", "h", "epsilon"});
  }
  if (c.has("output")) c.child("output").keys({}, {"solution", "field", "report"});
  g.config = j;
}

// Flag value if the user typed it, else the config entry, else the default.
template <typename T, typename Getter>
T pick(const CLI::Option* opt, const T& flag_value, const GlobalOpts& g, Getter from_config,
       const T& fallback) {
  if (opt && opt->count() > 0) return flag_value;
  if (g.config) {
    if (auto v = from_config(*g.config)) return *v;
  }
  return fallback;
}

std::optional<std::string> config_text(const json& j, const char* key) {
  if (j.contains(key) && j.at(key).is_string()) return j.at(key).get<std::string>();
  return std::nullopt;
}

models::HydroModel model_from_options(const CLI::Option* model_opt, const std::string& model_flag,
                                      const std::vector<std::string>& param_flags,
                                      const GlobalOpts& g) {
  std::string name;
  std::map<std::string, double> params = parse_params(param_flags);
  if (model_opt->count() > 0) {
    name = model_flag;
  } else if (g.config && g.config->contains("model")) {
    const io::Checker mc(g.config->at("model"), "/model");
    name = mc.text("name");
    if (params.empty() && mc.has("params")) {
      for (const auto& [key, value] : mc.child("params").raw().items()) {
        if (!value.is_number()) throw ConfigError("/model/params/" + key, "expected number");
        params[key] = value.get<double>();
      }
    }
  } else {
    throw ContractError("no model given (use --model or a config file)");
  }
  return models::make_model(name, params);
}

kwave::NewtonSettings newton_from_config(const GlobalOpts& g) {
  kwave::NewtonSettings n;
  if (g.config && g.config->contains("newton")) {
    const io::Checker nc(g.config->at("newton"), "/newton");
    n.tolerance = nc.number_or("tolerance", n.tolerance);
    n.max_iterations = nc.integer_or("max_iterations", n.max_iterations);
    n.damping = nc.number_or("damping", n.damping);
    n.condition_limit = nc.number_or("condition_limit", n.condition_limit);
  }
  return n;
}

double tolerance_from_config(const GlobalOpts& g, const char* key, double fallback) {
  if (g.config && g.config->contains("tolerances")) {
    const io::Checker tc(g.config->at("tolerances"), "/tolerances");
    return tc.number_or(key, fallback);
  }
  return fallback;
}

void emit(const GlobalOpts& g, const std::string& line) {
  if (!g.quiet) std::cout << line << "\n";
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int run_models(const GlobalOpts& g) {
  const auto descriptors = models::list_models();
  if (g.format == "json") {
    json out = json::array();
    for (const auto& d : descriptors) {
      out.push_back(json{{"name", d.name},
                         {"p", d.p},
                         {"q", d.q},
                         {"variables", d.variable_names},
                         {"summary", d.summary}});
    }
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& d : descriptors) {
      std::printf("%-16s p=%d q=%d  %s\n", d.name.c_str(), d.p, d.q, d.summary.c_str());
    }
  }
  return 0;
}

int run_branches(const GlobalOpts& g, const models::HydroModel& model, const Vec& state) {
  const auto branches = wave::characteristic_branches(model, state);
  if (g.format == "json") {
    json out = json::array();
    for (const auto& b : branches) {
      out.push_back(json{
          {"speed", b.speed},
          {"lambda", std::vector<double>(b.lambda.data(), b.lambda.data() + b.lambda.size())},
          {"gamma", std::vector<double>(b.gamma.data(), b.gamma.data() + b.gamma.size())},
          {"multiplicity", b.multiplicity}});
    }
    std::cout << out.dump(2) << "\n";
  } else if (g.format == "csv") {
    std::string out = "speed";
    for (int i = 0; i < model.p; ++i) out += ",lambda" + std::to_string(i + 1);
    for (int i = 0; i < model.q; ++i) out += ",gamma" + std::to_string(i + 1);
    out += ",multiplicity\n";
    for (const auto& b : branches) {
      out += io::format_double(b.speed);
      for (int i = 0; i < b.lambda.size(); ++i) out += "," + io::format_double(b.lambda[i]);
      for (int i = 0; i < b.gamma.size(); ++i) out += "," + io::format_double(b.gamma[i]);
      out += "," + std::to_string(b.multiplicity) + "\n";
    }
    std::cout << out;
  } else {
    std::printf("%-12s %-24s %-24s %s\n", "speed", "lambda", "gamma", "mult");
    for (const auto& b : branches) {
      std::ostringstream lam, gam;
      lam << "(";
      for (int i = 0; i < b.lambda.size(); ++i) lam << (i ? ", " : "") << b.lambda[i];
      lam << ")";
      gam << "(";
      for (int i = 0; i < b.gamma.size(); ++i) gam << (i ? ", " : "") << b.gamma[i];
      gam << ")";
      std::printf("%-12.6g %-24s %-24s %d\n", b.speed, lam.str().c_str(), gam.str().c_str(),
                  b.multiplicity);
    }
  }
  return 0;
}

int run_involutivity(const GlobalOpts& g, const models::HydroModel& model,
                     const std::vector<std::string>& selectors, int samples, std::uint64_t seed,
                     double h, double tol, const std::string& out_path) {
  auto frame = geometry::make_frame(model, selectors);
  const auto states = geometry::sample_states(model, samples, seed);
  const auto rep = geometry::check_involutivity(frame, states, h, tol);
  const double commutation = geometry::commutation_residual(frame, states, h);

  json out = io::involutivity_to_json(rep);
  out["commutation_residual"] = commutation;
  out["commuting_certified"] = frame.commuting_certified;
  out["frame"] = selectors;
  out["model"] = model.name;

  if (!out_path.empty()) {
    io::write_text_atomic(out_path, out.dump(2) + "\n");
  }
  if (g.format == "json" && out_path.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    emit(g, "involutivity " + model.name + " [" + std::to_string(samples) +
                " states]: bracket<=" + sci(rep.max_bracket_residual) +
                " lambda-span<=" + sci(rep.max_lambda_residual) +
                " commutation=" + sci(commutation) + (rep.pass ? " PASS" : " FAIL") +
                (frame.commuting_certified ? " (certified)" : " (not certified)"));
  }
  return rep.pass ? 0 : 2;
}

int run_build(const GlobalOpts& g, const models::HydroModel& model,
              const std::vector<std::string>& selectors, const Vec& base, const GridSpec& rgrid,
              const json& psi_json, const kwave::NewtonSettings& newton, int substeps,
              std::uint64_t seed, const std::string& out_path) {
  auto frame = geometry::make_frame(model, selectors);
  const auto states = geometry::sample_states(model, 25, seed);
  const double commutation = geometry::commutation_residual(frame, states, 1e-5);
  if (!frame.commuting_certified) {
    throw ContractError("frame " + model.name + " is not commuting (residual " +
                        sci(commutation) + "); cannot integrate a surface from it");
  }

  kwave::IntegrateOptions opts;
  opts.substeps = substeps;
  kwave::KWaveSolution solution;
  solution.surface = kwave::integrate_surface(frame, base, rgrid, opts);
  solution.profiles = io::profiles_from_json(psi_json, frame.k);
  if (static_cast<int>(solution.profiles.size()) != frame.k) {
    throw ConfigError("/profiles", "need exactly " + std::to_string(frame.k) + " profiles");
  }
  solution.newton = newton;
  solution.validate();

  io::write_text_atomic(out_path, io::solution_to_json(solution).dump() + "\n");
  emit(g, "build " + model.name + " k=" + std::to_string(frame.k) + ": " +
              std::to_string(rgrid.node_count()) + " nodes, path_independence=" +
              sci(solution.surface.path_independence_error) +
              ", consistency=" + sci(kwave::surface_consistency(solution.surface)) + " -> " +
              out_path);
  return 0;
}

int run_sample(const GlobalOpts& g, const std::string& solution_path, const GridSpec& xgrid,
               const std::string& out_path, std::string report_path) {
  const auto solution = io::solution_from_json(io::load_json_file(solution_path));
  const auto table = kwave::sample_grid(solution, xgrid, g.threads);

  io::write_text_atomic(out_path, io::field_table_csv(table, solution.k(),
                                                      solution.surface.qdim()));
  const std::string stem =
      out_path.size() > 4 && out_path.substr(out_path.size() - 4) == ".csv"
          ? out_path.substr(0, out_path.size() - 4)
          : out_path;
  io::write_text_atomic(stem + ".gp",
                        io::gnuplot_script(out_path, table, solution.k(),
                                           solution.surface.qdim()));
  if (report_path.empty()) report_path = stem + ".catastrophe.json";
  io::write_text_atomic(report_path, io::catastrophes_to_json(table.catastrophes).dump(2) + "\n");

  std::size_t resolved = 0;
  for (const auto& s : table.samples) resolved += s.diag.resolved ? 1 : 0;
  emit(g, "sample: " + std::to_string(table.samples.size()) + " points, " +
              std::to_string(resolved) + " resolved, " +
              std::to_string(table.catastrophes.cells.size()) + " catastrophe cells -> " +
              out_path);
  return 0;
}

int run_verify(const GlobalOpts& g, std::optional<models::HydroModel> model_override,
               const std::string& solution_path, const GridSpec& xgrid,
               const verify::VerifyOptions& opts, const std::string& out_path) {
  const auto solution = io::solution_from_json(io::load_json_file(solution_path));
  const auto& model = model_override ? *model_override : solution.surface.frame.model;
  const auto rep = verify::verify_grid(model, solution, xgrid, opts);

  if (!out_path.empty()) {
    io::write_text_atomic(out_path, io::verification_to_json(rep).dump(2) + "\n");
  }
  const bool resolved_ok =
      rep.resolved > 0 && rep.max_residual <= opts.residual_tol && rep.max_rank <= rep.k_bound;
  emit(g, "verify " + model.name + ": max_residual=" + sci(rep.max_residual) +
              " mean=" + sci(rep.mean_residual) + " max_rank=" + std::to_string(rep.max_rank) +
              " unresolved=" + std::to_string(rep.unresolved) +
              (resolved_ok ? (rep.unresolved ? " PASS-RESOLVED" : " PASS") : " FAIL"));
  if (resolved_ok && rep.unresolved == 0) return 0;
  if (resolved_ok) return 3;
  return 2;
}

int run_verify_symmetry(const GlobalOpts& g, const std::string& solution_path,
                        const GridSpec& xgrid, double h, double epsilon,
                        const std::string& out_path) {
  const auto solution = io::solution_from_json(io::load_json_file(solution_path));
  const auto& model = solution.surface.frame.model;
  const FieldFn field = [&solution](const Space& x) { return solution.evaluate(x); };

  double max_invariance = 0.0, max_reduced = 0.0, max_agreement = 0.0;
  std::size_t resolved = 0, unresolved = 0;
  json points = json::array();
  const std::size_t nodes = xgrid.node_count();
  for (std::size_t n = 0; n < nodes; ++n) {
    const Space x = xgrid.node_coords(xgrid.unflatten(n));
    try {
      const double inv = symmetry::invariance_residual(solution, x, h);
      const double red = symmetry::reduced_system_residual(solution, x, h);
      const double pde = verify::pde_residual(model, field, x, h);
      max_invariance = std::max(max_invariance, inv);
      max_reduced = std::max(max_reduced, red);
      max_agreement = std::max(max_agreement, std::abs(red - pde));
      points.push_back(json{{"x", std::vector<double>(x.data(), x.data() + x.size())},
                            {"invariance", inv},
                            {"reduced_system", red},
                            {"pde_residual", pde}});
      ++resolved;
    } catch (const SolveError&) {
      ++unresolved;
    } catch (const DomainError&) {
      ++unresolved;
    }
  }
  const auto rect = symmetry::rectification_check(solution, xgrid, epsilon);

  json out;
  out["schema_version"] = io::kSchemaVersion;
  out["grid"] = io::grid_to_json(xgrid);
  out["max_invariance_residual"] = max_invariance;
  out["max_reduced_system_residual"] = max_reduced;
  out["max_reduced_vs_pde"] = max_agreement;
  out["rectification"] = json{{"vacuous", rect.vacuous},
                              {"epsilon", rect.epsilon},
                              {"points_tested", rect.points_tested},
                              {"max_discrepancy", rect.max_discrepancy},
                              {"max_normalized", rect.max_normalized}};
  out["resolved_points"] = resolved;
  out["unresolved_points"] = unresolved;
  out["points"] = std::move(points);

  if (!out_path.empty()) io::write_text_atomic(out_path, out.dump(2) + "\n");
  emit(g, "verify-symmetry: invariance<=" + sci(max_invariance) +
              " reduced-vs-pde<=" + sci(max_agreement) + " rectification<=" +
              sci(rect.max_normalized) + (rect.vacuous ? " (rectification vacuous)" : "") +
              " unresolved=" + std::to_string(unresolved));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemann k-wave construction and verification"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--format", g.format, "output format: table|csv|json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  auto* threads_opt = app.add_option("--threads", g.threads, "worker thread cap");
  app.add_flag("--quiet", g.quiet, "suppress summary lines");
  app.add_option("--config", g.config_path, "JSON run configuration");

  // branches
  auto* cmd_branches = app.add_subcommand("branches", "characteristic branches at a state")->fallthrough();
  std::string model_name, state_text;
  std::vector<std::string> params;
  auto* b_model = cmd_branches->add_option("--model", model_name, "catalogue model name");
  cmd_branches->add_option("--param", params, "model parameter key=value");
  cmd_branches->add_option("--state", state_text, "state components u1,u2,...")->required();

  // involutivity
  auto* cmd_invol = app.add_subcommand("involutivity", "involutivity report for a frame")->fallthrough();
  std::string frame_text = "fast,slow";
  int samples = 25;
  std::uint64_t seed = 12345;
  double h_invol = 1e-5, tol_invol = 1e-6;
  std::string out_invol;
  auto* i_model = cmd_invol->add_option("--model", model_name, "catalogue model name");
  cmd_invol->add_option("--param", params, "model parameter key=value");
  auto* i_frame = cmd_invol->add_option("--frame", frame_text, "branch selectors, comma separated");
  auto* i_samples = cmd_invol->add_option("--samples", samples, "number of sampled states");
  auto* i_seed = cmd_invol->add_option("--seed", seed, "sampling seed");
  auto* i_h = cmd_invol->add_option("--step", h_invol, "finite-difference step");
  auto* i_tol = cmd_invol->add_option("--tol", tol_invol, "relative pass tolerance");
  cmd_invol->add_option("--out", out_invol, "write the JSON report here");

  // build
  auto* cmd_build = app.add_subcommand("build", "integrate a surface and build a k-wave")->fallthrough();
  std::string base_text, rgrid_text, psi_path, out_solution = "solution.json";
  int substeps = 1;
  double newton_tol = 1e-12;
  int newton_max = 50;
  double newton_damping = 0.5;
  auto* bu_model = cmd_build->add_option("--model", model_name, "catalogue model name");
  cmd_build->add_option("--param", params, "model parameter key=value");
  auto* bu_frame = cmd_build->add_option("--frame", frame_text, "branch selectors");
  auto* bu_base = cmd_build->add_option("--base", base_text, "base state u0");
  auto* bu_rgrid = cmd_build->add_option("--rgrid", rgrid_text, "invariant grid lo:hi:n[,...]");
  auto* bu_psi = cmd_build->add_option("--psi", psi_path, "profile spec JSON file");
  auto* bu_out = cmd_build->add_option("--out", out_solution, "output solution path");
  cmd_build->add_option("--substeps", substeps, "RK4 substeps per grid cell");
  auto* bu_ntol = cmd_build->add_option("--newton-tol", newton_tol, "Newton tolerance");
  auto* bu_nmax = cmd_build->add_option("--newton-max", newton_max, "Newton iteration cap");
  auto* bu_ndamp = cmd_build->add_option("--newton-damping", newton_damping, "damping factor");
  auto* bu_seed = cmd_build->add_option("--seed", seed, "certification sampling seed");

  // sample
  auto* cmd_sample = app.add_subcommand("sample", "evaluate a solution over an x-grid")->fallthrough();
  std::string solution_path, xgrid_text, out_field = "field.csv", report_path;
  auto* s_solution = cmd_sample->add_option("--solution", solution_path, "solution JSON");
  auto* s_xgrid = cmd_sample->add_option("--xgrid", xgrid_text, "x grid lo:hi:n[,...]");
  auto* s_out = cmd_sample->add_option("--out", out_field, "output CSV path");
  cmd_sample->add_option("--report", report_path, "catastrophe report path");

  // verify
  auto* cmd_verify = app.add_subcommand("verify", "PDE residual and rank verification")->fallthrough();
  double h_verify = 1e-5, residual_tol = 1e-6, rank_tol = 1e-6;
  std::string out_report;
  auto* v_model = cmd_verify->add_option("--model", model_name, "catalogue model name");
  cmd_verify->add_option("--param", params, "model parameter key=value");
  auto* v_solution = cmd_verify->add_option("--solution", solution_path, "solution JSON");
  auto* v_xgrid = cmd_verify->add_option("--xgrid", xgrid_text, "x grid lo:hi:n[,...]");
  auto* v_h = cmd_verify->add_option("--step", h_verify, "finite-difference step");
  auto* v_rtol = cmd_verify->add_option("--residual-tol", residual_tol, "residual tolerance");
  auto* v_ktol = cmd_verify->add_option("--rank-tol", rank_tol, "relative rank tolerance");
  auto* v_out = cmd_verify->add_option("--out", out_report, "write the JSON report here");

  // verify-symmetry
  auto* cmd_sym = app.add_subcommand("verify-symmetry", "invariance and reduced-system checks")->fallthrough();
  double epsilon = 1e-3;
  auto* y_solution = cmd_sym->add_option("--solution", solution_path, "solution JSON");
  auto* y_xgrid = cmd_sym->add_option("--xgrid", xgrid_text, "x grid lo:hi:n[,...]");
  auto* y_h = cmd_sym->add_option("--step", h_verify, "finite-difference step");
  auto* y_eps = cmd_sym->add_option("--epsilon", epsilon, "rectification flow step");
  auto* y_out = cmd_sym->add_option("--out", out_report, "write the JSON report here");

  auto* cmd_models = app.add_subcommand("models", "list the model catalogue")->fallthrough();

  try {
    app.parse(argc, argv);
    load_config(g);
    if (!g.threads_set) g.threads_set = threads_opt->count() > 0;
    if (!g.threads_set && g.config && g.config->contains("threads")) {
      g.threads = io::Checker(*g.config, "").integer("threads");
    }
    if (g.threads < 1) throw ContractError("--threads must be >= 1");

    if (cmd_models->parsed()) return run_models(g);

    if (cmd_branches->parsed()) {
      const auto model = model_from_options(b_model, model_name, params, g);
      return run_branches(g, model, parse_vector(state_text));
    }

    if (cmd_invol->parsed()) {
      const auto model = model_from_options(i_model, model_name, params, g);
      const auto selectors = split_csv(pick<std::string>(
          i_frame, frame_text, g, [](const json& j) { return config_text(j, "frame"); },
          "fast,slow"));
      const int n = i_samples->count() ? samples
                    : g.config && g.config->contains("samples")
                        ? io::Checker(*g.config, "").integer("samples")
                        : 25;
      const auto sd = i_seed->count() ? seed
                      : g.config && g.config->contains("seed")
                          ? static_cast<std::uint64_t>(io::Checker(*g.config, "").integer("seed"))
                          : 12345;
      const double hh = i_h->count() ? h_invol : tolerance_from_config(g, "h", 1e-5);
      const double tt = i_tol->count() ? tol_invol : tolerance_from_config(g, "involutivity", 1e-6);
      return run_involutivity(g, model, selectors, n, sd, hh, tt, out_invol);
    }

    if (cmd_build->parsed()) {
      const auto model = model_from_options(bu_model, model_name, params, g);
      const auto selectors = split_csv(pick<std::string>(
          bu_frame, frame_text, g, [](const json& j) { return config_text(j, "frame"); },
          "fast"));
      const auto base_text_v = pick<std::string>(
          bu_base, base_text, g, [](const json& j) { return config_text(j, "base_state"); }, "");
      if (base_text_v.empty()) throw ContractError("no base state given (--base)");
      const auto rgrid_text_v = pick<std::string>(
          bu_rgrid, rgrid_text, g, [](const json& j) { return config_text(j, "r_grid"); }, "");
      if (rgrid_text_v.empty()) throw ContractError("no r-grid given (--rgrid)");

      json psi;
      if (bu_psi->count() > 0) {
        psi = io::load_json_file(psi_path);
      } else if (g.config && g.config->contains("psi")) {
        const auto& node = g.config->at("psi");
        psi = node.is_string() ? io::load_json_file(node.get<std::string>()) : node;
      } else {
        throw ContractError("no profile spec given (--psi)");
      }

      kwave::NewtonSettings newton = newton_from_config(g);
      if (bu_ntol->count()) newton.tolerance = newton_tol;
      if (bu_nmax->count()) newton.max_iterations = newton_max;
      if (bu_ndamp->count()) newton.damping = newton_damping;

      const auto sd = bu_seed->count() ? seed
                      : g.config && g.config->contains("seed")
                          ? static_cast<std::uint64_t>(io::Checker(*g.config, "").integer("seed"))
                          : 12345;
      const auto out = pick<std::string>(
          bu_out, out_solution, g,
          [](const json& j) -> std::optional<std::string> {
            if (j.contains("output") && j.at("output").contains("solution"))
              return j.at("output").at("solution").get<std::string>();
            return std::nullopt;
          },
          "solution.json");
      return run_build(g, model, selectors, parse_vector(base_text_v),
                       GridSpec::parse(rgrid_text_v), psi, newton, substeps, sd, out);
    }

    if (cmd_sample->parsed()) {
      const auto sol = pick<std::string>(
          s_solution, solution_path, g,
          [](const json& j) -> std::optional<std::string> {
            if (j.contains("output") && j.at("output").contains("solution"))
              return j.at("output").at("solution").get<std::string>();
            return std::nullopt;
          },
          "");
      if (sol.empty()) throw ContractError("no solution file given (--solution)");
      const auto xg = pick<std::string>(
          s_xgrid, xgrid_text, g, [](const json& j) { return config_text(j, "x_grid"); }, "");
      if (xg.empty()) throw ContractError("no x-grid given (--xgrid)");
      const auto out = pick<std::string>(
          s_out, out_field, g,
          [](const json& j) -> std::optional<std::string> {
            if (j.contains("output") && j.at("output").contains("field"))
              return j.at("output").at("field").get<std::string>();
            return std::nullopt;
          },
          "field.csv");
      return run_sample(g, sol, GridSpec::parse(xg), out, report_path);
    }

    if (cmd_verify->parsed()) {
      std::optional<models::HydroModel> model;
      if (v_model->count() > 0 || (g.config && g.config->contains("model"))) {
        model = model_from_options(v_model, model_name, params, g);
      }
      const auto sol = pick<std::string>(
          v_solution, solution_path, g,
          [](const json& j) -> std::optional<std::string> {
            if (j.contains("output") && j.at("output").contains("solution"))
              return j.at("output").at("solution").get<std::string>();
            return std::nullopt;
          },
          "");
      if (sol.empty()) throw ContractError("no solution file given (--solution)");
      const auto xg = pick<std::string>(
          v_xgrid, xgrid_text, g, [](const json& j) { return config_text(j, "x_grid"); }, "");
      if (xg.empty()) throw ContractError("no x-grid given (--xgrid)");
      verify::VerifyOptions opts;
      opts.h = v_h->count() ? h_verify : tolerance_from_config(g, "h", 1e-5);
      opts.residual_tol =
          v_rtol->count() ? residual_tol : tolerance_from_config(g, "residual", 1e-6);
      opts.rank_tol = v_ktol->count() ? rank_tol : tolerance_from_config(g, "rank", 1e-6);
      std::string out = v_out->count() ? out_report : "";
      return run_verify(g, model, sol, GridSpec::parse(xg), opts, out);
    }

    if (cmd_sym->parsed()) {
      const auto sol = pick<std::string>(
          y_solution, solution_path, g,
          [](const json& j) -> std::optional<std::string> {
            if (j.contains("output") && j.at("output").contains("solution"))
              return j.at("output").at("solution").get<std::string>();
            return std::nullopt;
          },
          "");
      if (sol.empty()) throw ContractError("no solution file given (--solution)");
      const auto xg = pick<std::string>(
          y_xgrid, xgrid_text, g, [](const json& j) { return config_text(j, "x_grid"); }, "");
      if (xg.empty()) throw ContractError("no x-grid given (--xgrid)");
      const double hh = y_h->count() ? h_verify : tolerance_from_config(g, "h", 1e-5);
      const double ee = y_eps->count() ? epsilon : tolerance_from_config(g, "epsilon", 1e-3);
      std::string out = y_out->count() ? out_report : "";
      return run_verify_symmetry(g, sol, GridSpec::parse(xg), hh, ee, out);
    }

    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
