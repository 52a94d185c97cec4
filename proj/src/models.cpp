#include "rkwave/models.hpp"

#include <cmath>
#include <cstdio>

namespace rkwave::models {

namespace {

// Boundary evaluation is allowed; a small relative slack keeps integration
// paths that graze a bound (e.g. dry shallow water, c = 0) from tripping on
// roundoff.
constexpr double kBoundarySlack = 1e-12;

std::string bound_text(const std::string& var, double value, double bound, bool lower) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s = %.17g violates %s %s %.17g", var.c_str(), value,
                var.c_str(), lower ? ">=" : "<=", bound);
  return buf;
}

HydroModel make_shallow_water() {
  HydroModel m;
  m.name = "shallow-water";
  m.p = 2;
  m.q = 2;
  m.variable_names = {"t", "x", "u", "c"};

  m.domain.resize(2, 2);
  m.domain << -100.0, 100.0,  // u
      0.0, 100.0;             // c  (c <= 0 strictly excluded; c = 0 is the dry boundary)
  m.sampling_box.resize(2, 2);
  m.sampling_box << -2.0, 2.0, 0.5, 2.0;

  m.coefficients = [](const State& s) {
    const double u = s[0], c = s[1];
    std::vector<Mat> a(2);
    a[0] = Mat::Identity(2, 2);
    a[1].resize(2, 2);
    a[1] << u, 2.0 * c, 0.5 * c, u;
    return a;
  };

  // Characteristic speeds u +- c; the constant polarizations (2, 1) and
  // (2, -1) already commute, no rescaling needed.
  m.analytic_frames["fast"] = {
      [](const State& s) { return s[0] + s[1]; },
      [](const State&) { return (Vec(2) << 2.0, 1.0).finished(); },
  };
  m.analytic_frames["slow"] = {
      [](const State& s) { return s[0] - s[1]; },
      [](const State&) { return (Vec(2) << 2.0, -1.0).finished(); },
  };
  return m;
}

HydroModel make_gas_polytropic(double kappa) {
  if (!(kappa >= 1.0)) throw ContractError("gas-polytropic: kappa must be >= 1");
  HydroModel m;
  m.name = "gas-polytropic";
  m.p = 2;
  m.q = 2;
  m.variable_names = {"t", "x", "rho", "u"};
  m.params["kappa"] = kappa;

  // Pressure normalized to p(rho) = rho^kappa / kappa, so the sound speed is
  // a(rho) = rho^((kappa-1)/2) and kappa = 2 reproduces shallow water with
  // c = sqrt(rho).
  const double rho_lo = kappa >= 2.0 ? 0.0 : 1e-6;
  m.domain.resize(2, 2);
  m.domain << rho_lo, 100.0,  // rho
      -100.0, 100.0;          // u
  m.sampling_box.resize(2, 2);
  m.sampling_box << 0.5, 2.0, -2.0, 2.0;

  m.coefficients = [kappa](const State& s) {
    const double rho = s[0], u = s[1];
    std::vector<Mat> a(2);
    a[0] = Mat::Identity(2, 2);
    a[1].resize(2, 2);
    a[1] << u, rho, std::pow(rho, kappa - 2.0), u;
    return a;
  };

  // Commuting rescaling of the eigenvector fields (rho, +-a): dividing by a
  // gives (+-rho/a, 1), the coordinate fields of the Riemann invariants
  // u +- 2 a / (kappa - 1).
  const auto sound = [kappa](const State& s) { return std::pow(s[0], 0.5 * (kappa - 1.0)); };
  m.analytic_frames["fast"] = {
      [sound](const State& s) { return s[1] + sound(s); },
      [kappa](const State& s) {
        return (Vec(2) << std::pow(s[0], 0.5 * (3.0 - kappa)), 1.0).finished();
      },
  };
  m.analytic_frames["slow"] = {
      [sound](const State& s) { return s[1] - sound(s); },
      [kappa](const State& s) {
        return (Vec(2) << -std::pow(s[0], 0.5 * (3.0 - kappa)), 1.0).finished();
      },
  };
  return m;
}

}  // namespace

bool HydroModel::in_domain(const State& u) const {
  if (u.size() != q) return false;
  for (int i = 0; i < q; ++i) {
    const double slack = kBoundarySlack * (1.0 + std::abs(domain(i, 0)) + std::abs(domain(i, 1)));
    if (u[i] < domain(i, 0) - slack || u[i] > domain(i, 1) + slack) return false;
  }
  return true;
}

void HydroModel::require_state_size(const State& u) const {
  if (u.size() != q) {
    throw ContractError("state has length " + std::to_string(u.size()) + ", model '" + name +
                        "' expects q = " + std::to_string(q));
  }
}

void HydroModel::require_in_domain(const State& u) const {
  require_state_size(u);
  for (int i = 0; i < q; ++i) {
    const double slack = kBoundarySlack * (1.0 + std::abs(domain(i, 0)) + std::abs(domain(i, 1)));
    const std::string& var = variable_names.size() == std::size_t(p + q)
                                 ? variable_names[p + i]
                                 : ("u" + std::to_string(i + 1));
    if (u[i] < domain(i, 0) - slack) throw DomainError(bound_text(var, u[i], domain(i, 0), true), u);
    if (u[i] > domain(i, 1) + slack) throw DomainError(bound_text(var, u[i], domain(i, 1), false), u);
  }
}

std::vector<ModelDescriptor> list_models() {
  return {
      {"shallow-water", 2, 2, {"t", "x", "u", "c"},
       "1D shallow water in velocity/celerity variables; speeds u +- c"},
      {"gas-polytropic", 2, 2, {"t", "x", "rho", "u"},
       "1D isentropic polytropic gas; speeds u +- rho^((kappa-1)/2), kappa param (default 2)"},
  };
}

HydroModel make_model(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "shallow-water") {
    if (!params.empty()) throw ContractError("shallow-water takes no parameters");
    return make_shallow_water();
  }
  if (name == "gas-polytropic") {
    double kappa = 2.0;
    for (const auto& [key, value] : params) {
      if (key == "kappa") {
        kappa = value;
      } else {
        throw ContractError("gas-polytropic: unknown parameter '" + key + "'");
      }
    }
    return make_gas_polytropic(kappa);
  }
  throw ContractError("unknown model '" + name + "'");
}

std::vector<Mat> eval_matrices(const HydroModel& model, const State& u) {
  model.require_in_domain(u);
  return model.coefficients(u);
}

}  // namespace rkwave::models
