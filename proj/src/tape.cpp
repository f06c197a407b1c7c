#include "hga/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hga/error.hpp"
#include "hga/kernels.hpp"

namespace hga {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                          shape_string(b.shape()));
  }
}

void add_into(Tensor& dst, const Tensor& src, double scale = 1.0) {
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += scale * src[i];
}

}  // namespace

const Tensor& Tape::val(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.ref ? *n.ref : n.owned;
}

const Tensor& Tape::value(Var v) const {
  if (v.id >= nodes_.size()) throw InvalidArgument("tape variable out of range");
  return val(v.id);
}

Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(val(id).shape());
    n.has_grad = true;
  }
  return n.grad;
}

Var Tape::push(const char* op, Tensor value, bool requires_grad, Backward backward) {
  if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
  Node n;
  n.owned = std::move(value);
  n.op = op;
  n.requires_grad = requires_grad && recording();
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) { return push("constant", std::move(value), false, nullptr); }

Var Tape::param(const ParamStore& store, const std::string& name) {
  const Tensor& v = store.value(name);
  if (!v.all_finite()) throw NumericError("non-finite value in parameter " + name);
  Node n;
  n.ref = &v;
  n.op = "param";
  n.param = name;
  n.requires_grad = recording();
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::matmul(Var a, Var b) {
  Tensor out;
  kernels::matmul(val(a.id), val(b.id), out);
  return push("matmul", std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.nodes_[self].grad;
    if (t.needs(a)) kernels::matmul_nt(g, t.val(b.id), t.grad(a.id), true);
    if (t.needs(b)) kernels::matmul_tn(t.val(a.id), g, t.grad(b.id), true);
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  Tensor out;
  kernels::matmul_nt(val(a.id), val(b.id), out);
  return push("matmul_nt", std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.nodes_[self].grad;
    if (t.needs(a)) kernels::matmul(g, t.val(b.id), t.grad(a.id), true);
    if (t.needs(b)) kernels::matmul_tn(g, t.val(a.id), t.grad(b.id), true);
  });
}

Var Tape::add(Var a, Var b) {
  require_same_shape(val(a.id), val(b.id), "add");
  Tensor out = val(a.id);
  add_into(out, val(b.id));
  return push("add", std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.nodes_[self].grad;
    if (t.needs(a)) add_into(t.grad(a.id), g);
    if (t.needs(b)) add_into(t.grad(b.id), g);
  });
}

Var Tape::add_row(Var a, Var bias) {
  const Tensor& x = val(a.id);
  const Tensor& bv = val(bias.id);
  if (bv.size() != x.cols()) {
    throw InvalidArgument("add_row: bias " + shape_string(bv.shape()) + " vs input " + shape_string(x.shape()));
  }
  Tensor out = x;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv[j];
  return push("add_row", std::move(out), needs(a) || needs(bias), [a, bias](Tape& t, std::size_t self) {
    const Tensor& g = t.nodes_[self].grad;
    if (t.needs(a)) add_into(t.grad(a.id), g);
    if (t.needs(bias)) {
      Tensor& gb = t.grad(bias.id);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
    }
  });
}

Var Tape::mul(Var a, Var b) {
  require_same_shape(val(a.id), val(b.id), "mul");
  Tensor out = val(a.id);
  const Tensor& bv = val(b.id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return push("mul", std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Tensor& g = t.nodes_[self].grad;
    if (t.needs(a)) {
      Tensor& ga = t.grad(a.id);
      const Tensor& bv = t.val(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.needs(b)) {
      Tensor& gb = t.grad(b.id);
      const Tensor& av = t.val(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var Tape::dropout(Var a, double rate, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("dropout rate must lie in [0, 1)");
  if (rate == 0.0) return a;
  Tensor keep(val(a.id).shape());
  std::bernoulli_distribution survive(1.0 - rate);
  const double s = 1.0 / (1.0 - rate);
  for (double& v : keep.values()) v = survive(rng) ? s : 0.0;
  return mul(a, constant(std::move(keep)));
}

Var Tape::scale(Var a, double s) {
  Tensor out = val(a.id);
  for (double& v : out.values()) v *= s;
  return push("scale", std::move(out), needs(a), [a, s](Tape& t, std::size_t self) {
    add_into(t.grad(a.id), t.nodes_[self].grad, s);
  });
}

Var Tape::tanh(Var a) {
  Tensor out = val(a.id);
  for (double& v : out.values()) v = std::tanh(v);
  return push("tanh", std::move(out), needs(a), [a](Tape& t, std::size_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& y = t.val(self);
    Tensor& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var Tape::gelu(Var a) {
  Tensor out = val(a.id);
  for (double& v : out.values()) v = 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
  return push("gelu", std::move(out), needs(a), [a](Tape& t, std::size_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& x = t.val(a.id);
    Tensor& ga = t.grad(a.id);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double cdf = 0.5 * (1.0 + std::erf(x[i] * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x[i] * x[i]);
      ga[i] += g[i] * (cdf + x[i] * pdf);
    }
  });
}

Var Tape::softmax_rows(Var a) {
  Tensor out = val(a.id);
  const std::size_t rows = out.rows();
  const std::size_t cols = out.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    double m = out(i, 0);
    for (std::size_t j = 1; j < cols; ++j) m = std::max(m, out(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      out(i, j) = std::exp(out(i, j) - m);
      z += out(i, j);
    }
    for (std::size_t j = 0; j < cols; ++j) out(i, j) /= z;
  }
  return push("softmax_rows", std::move(out), needs(a), [a](Tape& t, std::size_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& y = t.val(self);
    Tensor& ga = t.grad(a.id);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j) ga(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
  const Tensor& in = val(x.id);
  const std::size_t rows = in.rows();
  const std::size_t cols = in.cols();
  if (val(gain.id).size() != cols || val(bias.id).size() != cols) {
    throw InvalidArgument("layer_norm: gain/bias size does not match " + shape_string(in.shape()));
  }
  Tensor normed(in.shape());
  std::vector<double> inv_std(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < cols; ++j) mu += in(i, j);
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t j = 0; j < cols; ++j) var += (in(i, j) - mu) * (in(i, j) - mu);
    var /= static_cast<double>(cols);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < cols; ++j) normed(i, j) = (in(i, j) - mu) * inv_std[i];
  }
  Tensor out(in.shape());
  const Tensor& gv = val(gain.id);
  const Tensor& bv = val(bias.id);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = normed(i, j) * gv[j] + bv[j];

  const bool req = needs(x) || needs(gain) || needs(bias);
  return push("layer_norm", std::move(out), req,
              [x, gain, bias, normed = std::move(normed), inv_std = std::move(inv_std)](Tape& t, std::size_t self) {
                const Tensor& g = t.nodes_[self].grad;
                const std::size_t rows = g.rows();
                const std::size_t cols = g.cols();
                if (t.needs(gain)) {
                  Tensor& gg = t.grad(gain.id);
                  for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j) gg[j] += g(i, j) * normed(i, j);
                }
                if (t.needs(bias)) {
                  Tensor& gb = t.grad(bias.id);
                  for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j) gb[j] += g(i, j);
                }
                if (t.needs(x)) {
                  const Tensor& gv = t.val(gain.id);
                  Tensor& gx = t.grad(x.id);
                  const double n = static_cast<double>(cols);
                  for (std::size_t i = 0; i < rows; ++i) {
                    double mean_d = 0.0;
                    double mean_dn = 0.0;
                    for (std::size_t j = 0; j < cols; ++j) {
                      const double d = g(i, j) * gv[j];
                      mean_d += d;
                      mean_dn += d * normed(i, j);
                    }
                    mean_d /= n;
                    mean_dn /= n;
                    for (std::size_t j = 0; j < cols; ++j) {
                      const double d = g(i, j) * gv[j];
                      gx(i, j) += inv_std[i] * (d - mean_d - normed(i, j) * mean_dn);
                    }
                  }
                }
              });
}

Var Tape::masked_fill(Var a, std::vector<std::uint8_t> mask, double fill) {
  Tensor out = val(a.id);
  if (mask.size() != out.size()) throw InvalidArgument("masked_fill: mask size does not match input");
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask[i]) out[i] = fill;
  return push("masked_fill", std::move(out), needs(a), [a, mask = std::move(mask)](Tape& t, std::size_t self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!mask[i]) ga[i] += g[i];
  });
}

Var Tape::embedding(Var table, std::span<const int> ids) {
  const Tensor& tv = val(table.id);
  const std::size_t width = tv.cols();
  Tensor out({ids.size(), width});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= tv.rows()) {
      throw InvalidArgument("embedding id " + std::to_string(ids[r]) + " out of range " + std::to_string(tv.rows()));
    }
    std::copy_n(tv.raw().begin() + static_cast<std::ptrdiff_t>(ids[r] * width), width,
                out.raw().begin() + static_cast<std::ptrdiff_t>(r * width));
  }
  return push("embedding", std::move(out), needs(table),
              [table, ids = std::vector<int>(ids.begin(), ids.end())](Tape& t, std::size_t self) {
                const Tensor& g = t.nodes_[self].grad;
                Tensor& gt = t.grad(table.id);
                const std::size_t width = g.cols();
                for (std::size_t r = 0; r < ids.size(); ++r)
                  for (std::size_t j = 0; j < width; ++j) gt(static_cast<std::size_t>(ids[r]), j) += g(r, j);
              });
}

Var Tape::rotary(Var x, std::span<const int> positions, double base) {
  Tensor out = val(x.id);
  kernels::rotate_pairs(out, positions, base);
  return push("rotary", std::move(out), needs(x),
              [x, base, pos = std::vector<int>(positions.begin(), positions.end())](Tape& t, std::size_t self) {
                // Rotation is orthogonal: the adjoint is the inverse rotation.
                Tensor g = t.nodes_[self].grad;
                kernels::rotate_pairs(g, pos, base, /*inverse=*/true);
                add_into(t.grad(x.id), g);
              });
}

Var Tape::slice_cols(Var x, std::size_t begin, std::size_t count) {
  const Tensor& in = val(x.id);
  if (begin + count > in.cols()) throw InvalidArgument("slice_cols out of range");
  Tensor out({in.rows(), count});
  for (std::size_t i = 0; i < in.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = in(i, begin + j);
  return push("slice_cols", std::move(out), needs(x), [x, begin](Tape& t, std::size_t self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& gx = t.grad(x.id);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) gx(i, begin + j) += g(i, j);
  });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat_cols of nothing");
  const std::size_t rows = val(parts[0].id).rows();
  std::size_t cols = 0;
  bool req = false;
  for (Var p : parts) {
    if (val(p.id).rows() != rows) throw InvalidArgument("concat_cols row mismatch");
    cols += val(p.id).cols();
    req = req || needs(p);
  }
  Tensor out({rows, cols});
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& pv = val(p.id);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < pv.cols(); ++j) out(i, offset + j) = pv(i, j);
    offset += pv.cols();
  }
  return push("concat_cols", std::move(out), req,
              [parts = std::vector<Var>(parts.begin(), parts.end())](Tape& t, std::size_t self) {
                const Tensor& g = t.nodes_[self].grad;
                std::size_t offset = 0;
                for (Var p : parts) {
                  const std::size_t width = t.val(p.id).cols();
                  if (t.needs(p)) {
                    Tensor& gp = t.grad(p.id);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                      for (std::size_t j = 0; j < width; ++j) gp(i, j) += g(i, offset + j);
                  }
                  offset += width;
                }
              });
}

Var Tape::log1p_sum_exp(Var x, std::vector<std::uint8_t> selected, double sign) {
  const Tensor& in = val(x.id);
  if (selected.size() != in.size()) throw InvalidArgument("log1p_sum_exp: selection size does not match input");
  const double y = kernels::log1p_sum_exp(in.values(), selected, sign);
  return push("log1p_sum_exp", Tensor::scalar(y), needs(x),
              [x, sign, selected = std::move(selected)](Tape& t, std::size_t self) {
                const double g = t.nodes_[self].grad.item();
                const double y = t.val(self).item();
                const Tensor& in = t.val(x.id);
                Tensor& gx = t.grad(x.id);
                // d/dx_c = sign * exp(sign*x_c) / (1 + sum) = sign * exp(sign*x_c - y)
                for (std::size_t c = 0; c < in.size(); ++c)
                  if (selected[c]) gx[c] += g * sign * std::exp(sign * in[c] - y);
              });
}

Var Tape::cross_entropy_rows(Var logits, std::span<const int> targets) {
  const Tensor& z = val(logits.id);
  if (targets.size() != z.rows()) throw InvalidArgument("cross_entropy_rows: target count does not match rows");
  const std::size_t cols = z.cols();
  Tensor probs(z.shape());
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double m = z(i, 0);
    for (std::size_t j = 1; j < cols; ++j) m = std::max(m, z(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += std::exp(z(i, j) - m);
    const double lse = m + std::log(s);
    for (std::size_t j = 0; j < cols; ++j) probs(i, j) = std::exp(z(i, j) - lse);
    if (targets[i] >= 0) {
      if (static_cast<std::size_t>(targets[i]) >= cols) throw InvalidArgument("cross_entropy_rows: target out of range");
      total += lse - z(i, static_cast<std::size_t>(targets[i]));
      ++counted;
    }
  }
  const double n = counted ? static_cast<double>(counted) : 1.0;
  return push("cross_entropy_rows", Tensor::scalar(total / n), needs(logits),
              [logits, n, probs = std::move(probs),
               targets = std::vector<int>(targets.begin(), targets.end())](Tape& t, std::size_t self) {
                const double g = t.nodes_[self].grad.item();
                Tensor& gz = t.grad(logits.id);
                for (std::size_t i = 0; i < probs.rows(); ++i) {
                  if (targets[i] < 0) continue;
                  for (std::size_t j = 0; j < probs.cols(); ++j) {
                    const double onehot = static_cast<int>(j) == targets[i] ? 1.0 : 0.0;
                    gz(i, j) += g * (probs(i, j) - onehot) / n;
                  }
                }
              });
}

Var Tape::sum(Var a) {
  double s = 0.0;
  for (double v : val(a.id).values()) s += v;
  return push("sum", Tensor::scalar(s), needs(a), [a](Tape& t, std::size_t self) {
    const double g = t.nodes_[self].grad.item();
    for (double& v : t.grad(a.id).values()) v += g;
  });
}

Var Tape::mean(Var a) {
  const double n = static_cast<double>(val(a.id).size());
  return scale(sum(a), 1.0 / n);
}

GradMap Tape::backward(Var loss) {
  if (!recording()) throw InvalidArgument("backward() on an inference tape");
  if (val(loss.id).size() != 1) throw InvalidArgument("backward() needs a scalar loss");
  grad(loss.id)[0] = 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.has_grad && n.backward) {
      n.backward(*this, id);
      if (!n.grad.all_finite()) throw NumericError(std::string("non-finite gradient flowing out of ") + n.op);
    }
  }
  GradMap out;
  for (std::size_t id = 0; id <= loss.id; ++id) {
    Node& n = nodes_[id];
    if (n.param.empty()) continue;
    auto [it, inserted] = out.try_emplace(n.param, n.has_grad ? n.grad : Tensor(val(id).shape()));
    if (!inserted && n.has_grad) add_into(it->second, n.grad);
  }
  return out;
}

}  // namespace hga
