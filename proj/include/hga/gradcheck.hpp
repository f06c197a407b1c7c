#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hga/params.hpp"
#include "hga/tape.hpp"

namespace hga {

// Builds a scalar loss on the tape from the given parameters. Must be a pure
// function of the parameter values so it can be re-evaluated for differencing.
using LossGraph = std::function<Var(Tape&, const ParamStore&)>;

// Zeroes the stored gradients, evaluates the graph, back-propagates and
// stores d(loss)/d(param) in params. Returns the loss.
double forward_backward(const LossGraph& graph, ParamStore& params);

// Forward evaluation only.
double evaluate_loss(const LossGraph& graph, const ParamStore& params);

struct ParamCheck {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_param;

  bool passed(double rel_tol) const { return max_rel_error < rel_tol; }
  // Names of parameters whose max relative error reaches rel_tol.
  std::vector<std::string> flagged(double rel_tol) const;
};

// Relative error |a - n| / max(1e-8, |a| + |n|).
double relative_error(double analytic, double numeric);

// Compares `analytic` against central differences of the graph.
GradCheckReport compare_gradients(const LossGraph& graph, ParamStore& params, const GradMap& analytic,
                                  double epsilon = 1e-5);

// Analytic gradients by reverse accumulation, checked element-wise against
// central differences (f(θ+ε) - f(θ-ε)) / 2ε.
GradCheckReport finite_diff_check(const LossGraph& graph, ParamStore& params, double epsilon = 1e-5);

}  // namespace hga
