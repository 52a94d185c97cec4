#pragma once

#include "rkwave/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace rkwave::models {

/// Catalogue-supplied closed forms for one characteristic family: the
/// characteristic speed c_s(u) and a polarization field rescaled so that
/// the catalogue families commute pairwise.
struct AnalyticBranch {
  std::function<double(const State&)> speed;
  std::function<Vec(const State&)> gamma;
};

/// A first-order quasilinear system A^i(u) u_i = 0 given as evaluatable
/// coefficient matrices. Evaluation is pure: a model value can be shared
/// across threads freely.
struct HydroModel {
  std::string name;
  int p = 0;  // independent variables x^1..x^p
  int q = 0;  // dependent variables u^1..u^q
  std::vector<std::string> variable_names;  // p space labels then q state labels
  std::map<std::string, double> params;

  /// Closed hyperbolicity box, one [lo, hi] row per state component.
  /// Evaluation on the boundary is allowed; strictly outside is an error.
  Mat domain;
  /// Reference sub-box used when sampling states for checks.
  Mat sampling_box;

  std::function<std::vector<Mat>(const State&)> coefficients;
  std::map<std::string, AnalyticBranch> analytic_frames;

  bool in_domain(const State& u) const;
  void require_in_domain(const State& u) const;
  void require_state_size(const State& u) const;
};

struct ModelDescriptor {
  std::string name;
  int p = 0;
  int q = 0;
  std::vector<std::string> variable_names;
  std::string summary;
};

/// Catalogue listing.
std::vector<ModelDescriptor> list_models();

/// Instantiate a catalogue model; `params` overrides catalogue defaults
/// (currently only gas-polytropic "kappa"). Unknown names or params throw.
HydroModel make_model(const std::string& name,
                      const std::map<std::string, double>& params = {});

/// The p coefficient matrices A^1(u)..A^p(u); throws DomainError outside
/// the model box.
std::vector<Mat> eval_matrices(const HydroModel& model, const State& u);

}  // namespace rkwave::models
