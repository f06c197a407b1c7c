#include "hga/kernels.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "hga/error.hpp"

namespace hga::kernels {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap view(const Tensor& t) { return ConstMap(t.raw().data(), t.rows(), t.cols()); }
MutMap view(Tensor& t) { return MutMap(t.raw().data(), t.rows(), t.cols()); }

void prepare(Tensor& c, std::size_t m, std::size_t n, bool accumulate) {
  if (accumulate) {
    if (c.rows() != m || c.cols() != n) throw InvalidArgument("matmul accumulate target has wrong shape");
  } else if (c.rank() != 2 || c.rows() != m || c.cols() != n) {
    c = Tensor({m, n});
  }
}

}  // namespace

void matmul(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  if (a.cols() != b.rows()) {
    throw InvalidArgument("matmul shape mismatch " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  prepare(c, a.rows(), b.cols(), accumulate);
  if (accumulate) {
    view(c).noalias() += view(a) * view(b);
  } else {
    view(c).noalias() = view(a) * view(b);
  }
}

void matmul_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  if (a.cols() != b.cols()) {
    throw InvalidArgument("matmul_nt shape mismatch " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  prepare(c, a.rows(), b.rows(), accumulate);
  if (accumulate) {
    view(c).noalias() += view(a) * view(b).transpose();
  } else {
    view(c).noalias() = view(a) * view(b).transpose();
  }
}

void matmul_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  if (a.rows() != b.rows()) {
    throw InvalidArgument("matmul_tn shape mismatch " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  prepare(c, a.cols(), b.cols(), accumulate);
  if (accumulate) {
    view(c).noalias() += view(a).transpose() * view(b);
  } else {
    view(c).noalias() = view(a).transpose() * view(b);
  }
}

void rotate_pairs(Tensor& x, std::span<const int> positions, double base, bool inverse) {
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  if (cols % 2 != 0) throw InvalidArgument("rotary encoding needs an even feature size, got " + std::to_string(cols));
  if (positions.size() != rows) throw InvalidArgument("rotary positions length does not match rows");
  const double sign = inverse ? -1.0 : 1.0;
  for (std::size_t t = 0; t < cols / 2; ++t) {
    const double freq = std::pow(base, -2.0 * static_cast<double>(t) / static_cast<double>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      if (positions[i] == 0) continue;
      const double theta = sign * static_cast<double>(positions[i]) * freq;
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      double& a = x(i, 2 * t);
      double& b = x(i, 2 * t + 1);
      const double a0 = a;
      const double b0 = b;
      a = a0 * c - b0 * s;
      b = a0 * s + b0 * c;
    }
  }
}

double log1p_sum_exp(std::span<const double> x, std::span<const std::uint8_t> selected, double sign) {
  double m = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    if (selected[c]) m = std::max(m, sign * x[c]);
  }
  double acc = std::exp(-m);
  for (std::size_t c = 0; c < x.size(); ++c) {
    if (selected[c]) acc += std::exp(sign * x[c] - m);
  }
  return m + std::log(acc);
}

}  // namespace hga::kernels
