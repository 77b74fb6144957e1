// Copyright 2026 The rcnqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rcnqa/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rcnqa {

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

FilterBank make_filter_bank(std::size_t count, std::size_t depth,
                            std::size_t width) {
  if (count == 0 || depth == 0 || width == 0) {
    throw DimensionError("filter bank dimensions must be positive");
  }
  FilterBank fb;
  fb.depth = depth;
  fb.width = width;
  fb.weights = DenseMatrix(count, depth * width);
  fb.bias.assign(count, 0.0);
  return fb;
}

std::string to_string(ConvMode mode) {
  return mode == ConvMode::wide ? "wide" : "narrow";
}

ConvMode conv_mode_from_string(const std::string& s) {
  if (s == "wide") return ConvMode::wide;
  if (s == "narrow") return ConvMode::narrow;
  throw ConfigError("unknown convolution mode: " + s);
}

namespace {

std::size_t conv_out_cols(std::size_t length, std::size_t width,
                          ConvMode mode) {
  if (mode == ConvMode::wide) return length + width - 1;
  if (length < width) {
    throw DimensionError(
        "narrow convolution needs input length >= filter width, got length " +
        std::to_string(length) + " and width " + std::to_string(width));
  }
  return length - width + 1;
}

}  // namespace

DenseMatrix conv1d_forward(const DenseMatrix& input, const FilterBank& fb,
                           ConvMode mode) {
  if (input.rows() != fb.depth) {
    throw DimensionError("convolution input depth " +
                         std::to_string(input.rows()) +
                         " does not match filter depth " +
                         std::to_string(fb.depth));
  }
  if (input.cols() == 0) {
    throw DimensionError("convolution input has no columns");
  }
  const std::size_t len = input.cols();
  const std::size_t m = fb.width;
  const std::size_t out_cols = conv_out_cols(len, m, mode);
  const std::ptrdiff_t shift =
      mode == ConvMode::wide ? -static_cast<std::ptrdiff_t>(m) + 1 : 0;

  DenseMatrix out(fb.count(), out_cols);
  for (std::size_t i = 0; i < fb.count(); ++i) {
    for (std::size_t j = 0; j < out_cols; ++j) {
      double acc = fb.bias[i];
      const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(j) + shift;
      for (std::size_t t = 0; t < m; ++t) {
        const std::ptrdiff_t col = start + static_cast<std::ptrdiff_t>(t);
        if (col < 0 || col >= static_cast<std::ptrdiff_t>(len)) continue;
        for (std::size_t k = 0; k < fb.depth; ++k) {
          acc += fb.w(i, k, t) * input(k, static_cast<std::size_t>(col));
        }
      }
      out(i, j) = acc;
    }
  }
  return out;
}

ConvGrads conv1d_backward(const DenseMatrix& input, const FilterBank& fb,
                          ConvMode mode, const DenseMatrix& upstream) {
  const std::size_t len = input.cols();
  const std::size_t m = fb.width;
  const std::size_t out_cols = conv_out_cols(len, m, mode);
  if (upstream.rows() != fb.count() || upstream.cols() != out_cols) {
    throw DimensionError("upstream gradient shape does not match convolution output");
  }
  const std::ptrdiff_t shift =
      mode == ConvMode::wide ? -static_cast<std::ptrdiff_t>(m) + 1 : 0;

  ConvGrads g;
  g.input = DenseMatrix(input.rows(), input.cols());
  g.filters = DenseMatrix(fb.weights.rows(), fb.weights.cols());
  g.bias.assign(fb.count(), 0.0);

  for (std::size_t i = 0; i < fb.count(); ++i) {
    for (std::size_t j = 0; j < out_cols; ++j) {
      const double u = upstream(i, j);
      if (u == 0.0) continue;
      const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(j) + shift;
      for (std::size_t t = 0; t < m; ++t) {
        const std::ptrdiff_t col = start + static_cast<std::ptrdiff_t>(t);
        if (col < 0 || col >= static_cast<std::ptrdiff_t>(len)) continue;
        const std::size_t c = static_cast<std::size_t>(col);
        for (std::size_t k = 0; k < fb.depth; ++k) {
          g.filters(i, k * m + t) += u * input(k, c);
          g.input(k, c) += u * fb.w(i, k, t);
        }
      }
    }
  }
  for (std::size_t i = 0; i < fb.count(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < out_cols; ++j) sum += upstream(i, j);
    g.bias[i] = sum;
  }
  return g;
}

std::vector<double> relu(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

DenseMatrix relu(const DenseMatrix& x) {
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.data()[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
  }
  return out;
}

std::vector<double> relu_grad(std::span<const double> pre,
                              std::span<const double> upstream) {
  if (pre.size() != upstream.size()) {
    throw DimensionError("relu gradient size mismatch");
  }
  std::vector<double> out(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    out[i] = pre[i] > 0.0 ? upstream[i] : 0.0;
  }
  return out;
}

DenseMatrix relu_grad(const DenseMatrix& pre, const DenseMatrix& upstream) {
  if (!pre.same_shape(upstream)) {
    throw DimensionError("relu gradient shape mismatch");
  }
  DenseMatrix out(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    out.data()[i] = pre.data()[i] > 0.0 ? upstream.data()[i] : 0.0;
  }
  return out;
}

MaxPoolResult maxpool_rows(const DenseMatrix& feature_map) {
  if (feature_map.cols() == 0) {
    throw DimensionError("max pooling over an empty feature map");
  }
  MaxPoolResult r;
  r.values.resize(feature_map.rows());
  r.argmax.resize(feature_map.rows());
  for (std::size_t i = 0; i < feature_map.rows(); ++i) {
    double best = feature_map(i, 0);
    std::size_t best_j = 0;
    for (std::size_t j = 1; j < feature_map.cols(); ++j) {
      if (feature_map(i, j) > best) {
        best = feature_map(i, j);
        best_j = j;
      }
    }
    r.values[i] = best;
    r.argmax[i] = best_j;
  }
  return r;
}

DenseMatrix maxpool_rows_backward(const MaxPoolResult& pooled,
                                  std::size_t cols,
                                  std::span<const double> upstream) {
  if (upstream.size() != pooled.values.size()) {
    throw DimensionError("max pool upstream gradient size mismatch");
  }
  DenseMatrix out(pooled.values.size(), cols);
  for (std::size_t i = 0; i < pooled.argmax.size(); ++i) {
    if (pooled.argmax[i] >= cols) {
      throw DimensionError("max pool argmax out of range");
    }
    out(i, pooled.argmax[i]) = upstream[i];
  }
  return out;
}

double bilinear(std::span<const double> left, const DenseMatrix& m,
                std::span<const double> right) {
  if (left.size() != m.rows() || right.size() != m.cols()) {
    throw DimensionError("bilinear form dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row_dot = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      row_dot += m(i, j) * right[j];
    }
    acc += left[i] * row_dot;
  }
  return acc;
}

BilinearGrads bilinear_backward(std::span<const double> left,
                                const DenseMatrix& m,
                                std::span<const double> right,
                                double upstream) {
  if (left.size() != m.rows() || right.size() != m.cols()) {
    throw DimensionError("bilinear form dimension mismatch");
  }
  BilinearGrads g;
  g.left.assign(left.size(), 0.0);
  g.right.assign(right.size(), 0.0);
  g.matrix = DenseMatrix(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      g.matrix(i, j) = upstream * left[i] * right[j];
      g.left[i] += upstream * m(i, j) * right[j];
      g.right[j] += upstream * m(i, j) * left[i];
    }
  }
  return g;
}

std::vector<double> affine(const DenseMatrix& weight,
                           std::span<const double> x,
                           std::span<const double> bias) {
  if (weight.cols() != x.size() || weight.rows() != bias.size()) {
    throw DimensionError("affine layer dimension mismatch");
  }
  std::vector<double> out(weight.rows());
  for (std::size_t i = 0; i < weight.rows(); ++i) {
    double acc = bias[i];
    for (std::size_t j = 0; j < weight.cols(); ++j) {
      acc += weight(i, j) * x[j];
    }
    out[i] = acc;
  }
  return out;
}

AffineGrads affine_backward(const DenseMatrix& weight,
                            std::span<const double> x,
                            std::span<const double> upstream) {
  if (weight.cols() != x.size() || weight.rows() != upstream.size()) {
    throw DimensionError("affine backward dimension mismatch");
  }
  AffineGrads g;
  g.weight = DenseMatrix(weight.rows(), weight.cols());
  g.input.assign(x.size(), 0.0);
  g.bias.assign(upstream.begin(), upstream.end());
  for (std::size_t i = 0; i < weight.rows(); ++i) {
    for (std::size_t j = 0; j < weight.cols(); ++j) {
      g.weight(i, j) = upstream[i] * x[j];
      g.input[j] += upstream[i] * weight(i, j);
    }
  }
  return g;
}

SoftmaxNll softmax_nll(std::array<double, 2> logits, int label) {
  if (label != 0 && label != 1) {
    throw DimensionError("softmax label must be 0 or 1");
  }
  const double mx = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - mx);
  const double e1 = std::exp(logits[1] - mx);
  const double z = e0 + e1;
  SoftmaxNll r;
  r.probs = {e0 / z, e1 / z};
  // ln p = (logit - mx) - ln z, computed without re-exponentiating.
  r.loss = -(logits[label] - mx - std::log(z));
  r.dlogits = {r.probs[0], r.probs[1]};
  r.dlogits[label] -= 1.0;
  return r;
}

GradCheckReport gradient_check(const std::function<double()>& loss,
                               std::vector<GradCheckBlock> blocks,
                               double epsilon, double tolerance) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-4)) {
    throw ConfigError("gradient check epsilon must lie in [1e-6, 1e-4]");
  }
  GradCheckReport report;
  report.tolerance = tolerance;
  for (GradCheckBlock& block : blocks) {
    if (block.params.size() != block.analytic.size()) {
      throw DimensionError("gradient block '" + block.name +
                           "' has mismatched parameter and gradient sizes");
    }
    GradCheckReport::BlockResult res;
    res.name = block.name;
    for (std::size_t i = 0; i < block.params.size(); ++i) {
      const double saved = block.params[i];
      block.params[i] = saved + epsilon;
      const double up = loss();
      block.params[i] = saved - epsilon;
      const double down = loss();
      block.params[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        report.note = "non-finite loss while perturbing block '" + block.name +
                      "' at index " + std::to_string(i);
        report.pass = false;
        report.max_rel_error = std::numeric_limits<double>::infinity();
        report.blocks.push_back(res);
        return report;
      }
      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = block.analytic[i];
      const double denom =
          std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
      const double rel = std::fabs(analytic - numeric) / denom;
      if (rel > res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst_index = i;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, res.max_rel_error);
    report.blocks.push_back(std::move(res));
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

}  // namespace rcnqa
