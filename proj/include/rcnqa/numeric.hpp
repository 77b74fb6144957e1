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

#ifndef RCNQA_NUMERIC_HPP
#define RCNQA_NUMERIC_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rcnqa/common.hpp"

namespace rcnqa {

// Row-major dense matrix of doubles. Training and gradient checking run in
// double precision throughout; single precision is permitted only for
// inference-side storage.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> row(std::size_t r) {
    return std::span<double>(data_.data() + r * cols_, cols_);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_.data() + r * cols_, cols_);
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const DenseMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A bank of `count()` convolution filters, each spanning the full input depth
// with a given width, plus one bias per filter. Filter i is stored as row i of
// `weights`, laid out as a row-major depth x width matrix.
struct FilterBank {
  std::size_t depth = 0;
  std::size_t width = 0;
  DenseMatrix weights;       // count x (depth * width)
  std::vector<double> bias;  // length count

  std::size_t count() const { return weights.rows(); }
  double w(std::size_t i, std::size_t k, std::size_t t) const {
    return weights(i, k * width + t);
  }
  double& w(std::size_t i, std::size_t k, std::size_t t) {
    return weights(i, k * width + t);
  }
};

FilterBank make_filter_bank(std::size_t count, std::size_t depth,
                            std::size_t width);

enum class ConvMode { wide, narrow };

std::string to_string(ConvMode mode);
ConvMode conv_mode_from_string(const std::string& s);

// 1-D convolution of a depth x length input with every filter in the bank.
// Wide mode implicitly zero-pads width-1 columns on each side and yields
// length + width - 1 output columns; narrow mode yields length - width + 1
// and requires length >= width. Output entry (i, j) is bias[i] plus the sum
// of the element-wise product of filter i with the column slice of the input
// covered by output position j.
DenseMatrix conv1d_forward(const DenseMatrix& input, const FilterBank& fb,
                           ConvMode mode);

struct ConvGrads {
  DenseMatrix input;         // same shape as the forward input
  DenseMatrix filters;       // same shape as fb.weights
  std::vector<double> bias;  // length fb.count()
};

// Analytic gradients of conv1d_forward. `upstream` must have the forward
// output shape; bias gradient i is the row-sum of upstream row i.
ConvGrads conv1d_backward(const DenseMatrix& input, const FilterBank& fb,
                          ConvMode mode, const DenseMatrix& upstream);

// Element-wise max(0, x). The subgradient at exactly 0 is taken to be 0.
std::vector<double> relu(std::span<const double> x);
DenseMatrix relu(const DenseMatrix& x);
std::vector<double> relu_grad(std::span<const double> pre,
                              std::span<const double> upstream);
DenseMatrix relu_grad(const DenseMatrix& pre, const DenseMatrix& upstream);

struct MaxPoolResult {
  std::vector<double> values;       // per row maximum
  std::vector<std::size_t> argmax;  // column of the max; ties go leftmost
};

// Max over the columns of each row. Errors on a zero-column input.
MaxPoolResult maxpool_rows(const DenseMatrix& feature_map);

// Routes the upstream gradient of each pooled value back to the recorded
// argmax column; all other entries are zero.
DenseMatrix maxpool_rows_backward(const MaxPoolResult& pooled,
                                  std::size_t cols,
                                  std::span<const double> upstream);

// left^T * M * right.
double bilinear(std::span<const double> left, const DenseMatrix& m,
                std::span<const double> right);

struct BilinearGrads {
  std::vector<double> left;
  DenseMatrix matrix;  // upstream * outer(left, right)
  std::vector<double> right;
};

BilinearGrads bilinear_backward(std::span<const double> left,
                                const DenseMatrix& m,
                                std::span<const double> right,
                                double upstream);

// W x + b.
std::vector<double> affine(const DenseMatrix& weight,
                           std::span<const double> x,
                           std::span<const double> bias);

struct AffineGrads {
  DenseMatrix weight;
  std::vector<double> input;
  std::vector<double> bias;
};

AffineGrads affine_backward(const DenseMatrix& weight,
                            std::span<const double> x,
                            std::span<const double> upstream);

struct SoftmaxNll {
  std::array<double, 2> probs;
  double loss;
  std::array<double, 2> dlogits;  // probs - one_hot(label)
};

// Numerically stabilized binary softmax with negative log-likelihood loss.
// The max logit is subtracted before exponentiation.
SoftmaxNll softmax_nll(std::array<double, 2> logits, int label);

// One named parameter block handed to the gradient checker: a mutable view of
// the parameter storage and the analytic gradient computed at the current
// parameter values.
struct GradCheckBlock {
  std::string name;
  std::span<double> params;
  std::span<const double> analytic;
};

struct GradCheckReport {
  struct BlockResult {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
  };
  std::vector<BlockResult> blocks;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;  // diagnostics, e.g. the block where the loss went non-finite
};

// Central finite-difference check of analytic gradients. For every scalar in
// every block the loss closure is evaluated at +/- epsilon and compared with
// relative error |a - n| / max(|a|, |n|, 1e-8). Parameters are restored after
// each probe. epsilon must lie in [1e-6, 1e-4]. A non-finite loss during
// perturbation fails the report and names the offending block.
GradCheckReport gradient_check(const std::function<double()>& loss,
                               std::vector<GradCheckBlock> blocks,
                               double epsilon, double tolerance);

}  // namespace rcnqa

#endif  // RCNQA_NUMERIC_HPP
