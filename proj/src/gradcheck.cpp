#include "hga/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hga/error.hpp"

namespace hga {

double forward_backward(const LossGraph& graph, ParamStore& params) {
  params.zero_grad();
  Tape tape;
  const Var loss = graph(tape, params);
  const double value = tape.value(loss).item();
  params.accumulate(tape.backward(loss));
  return value;
}

double evaluate_loss(const LossGraph& graph, const ParamStore& params) {
  Tape tape(Tape::Mode::kInference);
  return tape.value(graph(tape, params)).item();
}

std::vector<std::string> GradCheckReport::flagged(double rel_tol) const {
  std::vector<std::string> out;
  for (const auto& p : params)
    if (p.max_rel_error >= rel_tol) out.push_back(p.name);
  return out;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckReport compare_gradients(const LossGraph& graph, ParamStore& params, const GradMap& analytic,
                                  double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) throw InvalidArgument("finite-difference epsilon must lie in [1e-7, 1e-3]");
  GradCheckReport report;
  for (const std::string& name : params.names()) {
    auto it = analytic.find(name);
    Tensor& value = params.value(name);
    ParamCheck pc;
    pc.name = name;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + epsilon;
      const double up = evaluate_loss(graph, params);
      value[i] = saved - epsilon;
      const double down = evaluate_loss(graph, params);
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = it == analytic.end() ? 0.0 : it->second[i];
      const double rel = relative_error(a, numeric);
      const double abs_err = std::abs(a - numeric);
      if (i == 0 || rel > pc.max_rel_error) {
        pc.max_rel_error = rel;
        pc.worst_index = i;
        pc.analytic = a;
        pc.numeric = numeric;
      }
      pc.max_abs_error = std::max(pc.max_abs_error, abs_err);
    }
    if (pc.max_rel_error >= report.max_rel_error) {
      report.max_rel_error = pc.max_rel_error;
      report.worst_param = name;
    }
    report.max_abs_error = std::max(report.max_abs_error, pc.max_abs_error);
    report.params.push_back(pc);
  }
  return report;
}

GradCheckReport finite_diff_check(const LossGraph& graph, ParamStore& params, double epsilon) {
  forward_backward(graph, params);
  GradMap analytic;
  for (const auto& [name, p] : params.entries()) analytic.emplace(name, p.grad);
  return compare_gradients(graph, params, analytic, epsilon);
}

}  // namespace hga
