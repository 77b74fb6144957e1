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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "rcnqa/numeric.hpp"

using namespace rcnqa;

namespace {

// Deliberately naive re-implementations, kept independent of the library so
// they can serve as oracles. Loops everywhere, no caching, no skipping.

DenseMatrix conv_oracle(const DenseMatrix& in, const FilterBank& fb,
                        ConvMode mode) {
  const std::ptrdiff_t cols = static_cast<std::ptrdiff_t>(in.cols());
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(fb.width);
  const std::ptrdiff_t out_cols =
      mode == ConvMode::wide ? cols + m - 1 : cols - m + 1;
  DenseMatrix out(fb.count(), static_cast<std::size_t>(out_cols));
  for (std::size_t i = 0; i < fb.count(); ++i) {
    for (std::ptrdiff_t j = 0; j < out_cols; ++j) {
      double acc = fb.bias[i];
      for (std::size_t k = 0; k < fb.depth; ++k) {
        for (std::ptrdiff_t t = 0; t < m; ++t) {
          const std::ptrdiff_t c =
              mode == ConvMode::wide ? j - (m - 1) + t : j + t;
          if (c < 0 || c >= cols) continue;
          acc += fb.w(i, k, static_cast<std::size_t>(t)) *
                 in(k, static_cast<std::size_t>(c));
        }
      }
      out(i, static_cast<std::size_t>(j)) = acc;
    }
  }
  return out;
}

double bilinear_oracle(std::span<const double> l, const DenseMatrix& m,
                       std::span<const double> r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      acc += l[i] * m(i, j) * r[j];
    }
  }
  return acc;
}

std::vector<double> affine_oracle(const DenseMatrix& w,
                                  std::span<const double> x,
                                  std::span<const double> b) {
  std::vector<double> out(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    out[i] = b[i];
    for (std::size_t j = 0; j < w.cols(); ++j) out[i] += w(i, j) * x[j];
  }
  return out;
}

MaxPoolResult maxpool_oracle(const DenseMatrix& fm) {
  MaxPoolResult out;
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    double best = fm(i, 0);
    std::size_t where = 0;
    for (std::size_t j = 1; j < fm.cols(); ++j) {
      if (fm(i, j) > best) {
        best = fm(i, j);
        where = j;
      }
    }
    out.values.push_back(best);
    out.argmax.push_back(where);
  }
  return out;
}

DenseMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  DenseMatrix m(r, c);
  for (double& v : m.data()) v = rng.uniform(-2.0, 2.0);
  return m;
}

FilterBank random_bank(std::size_t count, std::size_t depth, std::size_t width,
                       Rng& rng) {
  FilterBank fb = make_filter_bank(count, depth, width);
  for (double& v : fb.weights.data()) v = rng.uniform(-1.0, 1.0);
  for (double& v : fb.bias) v = rng.uniform(-1.0, 1.0);
  return fb;
}

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// Central finite difference of a scalar function of one perturbed value.
template <class F>
double fd(double& slot, double eps, F loss) {
  const double saved = slot;
  slot = saved + eps;
  const double up = loss();
  slot = saved - eps;
  const double down = loss();
  slot = saved;
  return (up - down) / (2.0 * eps);
}

}  // namespace

TEST_CASE("conv1d matches the nested-loop oracle on random instances") {
  Rng rng(101);
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t depth = 1 + rng.index(5);
    const std::size_t width = 1 + rng.index(4);
    const std::size_t cols = width + rng.index(6);  // narrow needs cols >= m
    const std::size_t count = 1 + rng.index(4);
    const DenseMatrix in = random_matrix(depth, cols, rng);
    const FilterBank fb = random_bank(count, depth, width, rng);
    const ConvMode mode = iter % 2 == 0 ? ConvMode::wide : ConvMode::narrow;
    const DenseMatrix got = conv1d_forward(in, fb, mode);
    const DenseMatrix want = conv_oracle(in, fb, mode);
    REQUIRE(got.same_shape(want));
    for (std::size_t i = 0; i < got.size(); ++i) {
      REQUIRE(std::abs(got.data()[i] - want.data()[i]) <= 1e-12);
    }
  }
}

TEST_CASE("conv1d width-1 example: column sums") {
  DenseMatrix in(2, 2);
  in(0, 0) = 1;
  in(0, 1) = 2;
  in(1, 0) = 3;
  in(1, 1) = 4;
  FilterBank fb = make_filter_bank(1, 2, 1);
  fb.w(0, 0, 0) = 1.0;
  fb.w(0, 1, 0) = 1.0;
  for (ConvMode mode : {ConvMode::wide, ConvMode::narrow}) {
    const DenseMatrix out = conv1d_forward(in, fb, mode);
    REQUIRE(out.rows() == 1);
    REQUIRE(out.cols() == 2);
    CHECK(out(0, 0) == doctest::Approx(4.0));
    CHECK(out(0, 1) == doctest::Approx(6.0));
  }
}

TEST_CASE("narrow conv equals the interior slice of wide conv") {
  Rng rng(102);
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t width = 2 + rng.index(3);
    const std::size_t cols = width + rng.index(5);
    const DenseMatrix in = random_matrix(3, cols, rng);
    const FilterBank fb = random_bank(2, 3, width, rng);
    const DenseMatrix wide = conv1d_forward(in, fb, ConvMode::wide);
    const DenseMatrix narrow = conv1d_forward(in, fb, ConvMode::narrow);
    REQUIRE(wide.cols() == cols + width - 1);
    REQUIRE(narrow.cols() == cols - width + 1);
    for (std::size_t i = 0; i < narrow.rows(); ++i) {
      for (std::size_t j = 0; j < narrow.cols(); ++j) {
        CHECK(narrow(i, j) == doctest::Approx(wide(i, j + width - 1)));
      }
    }
  }
}

TEST_CASE("narrow conv rejects inputs shorter than the filter") {
  const DenseMatrix in = DenseMatrix(2, 2, 1.0);
  const FilterBank fb = make_filter_bank(1, 2, 3);
  CHECK_THROWS_AS(conv1d_forward(in, fb, ConvMode::narrow), DimensionError);
  CHECK_NOTHROW(conv1d_forward(in, fb, ConvMode::wide));
}

TEST_CASE("conv backward matches finite differences") {
  Rng rng(103);
  for (ConvMode mode : {ConvMode::wide, ConvMode::narrow}) {
    DenseMatrix in = random_matrix(3, 5, rng);
    FilterBank fb = random_bank(2, 3, 3, rng);
    const DenseMatrix out = conv1d_forward(in, fb, mode);
    DenseMatrix upstream = random_matrix(out.rows(), out.cols(), rng);

    // loss = sum(upstream .* conv(in)), linear in every parameter
    auto loss = [&]() {
      const DenseMatrix o = conv1d_forward(in, fb, mode);
      double acc = 0.0;
      for (std::size_t i = 0; i < o.size(); ++i) {
        acc += upstream.data()[i] * o.data()[i];
      }
      return acc;
    };
    const ConvGrads g = conv1d_backward(in, fb, mode, upstream);

    for (std::size_t i = 0; i < in.size(); ++i) {
      const double n = fd(in.data()[i], 1e-6, loss);
      CHECK(std::abs(g.input.data()[i] - n) < 1e-6);
    }
    for (std::size_t i = 0; i < fb.weights.size(); ++i) {
      const double n = fd(fb.weights.data()[i], 1e-6, loss);
      CHECK(std::abs(g.filters.data()[i] - n) < 1e-6);
    }
    for (std::size_t i = 0; i < fb.bias.size(); ++i) {
      const double n = fd(fb.bias[i], 1e-6, loss);
      CHECK(std::abs(g.bias[i] - n) < 1e-6);
    }
  }
}

TEST_CASE("bilinear matches the double-loop oracle and its gradients check out") {
  Rng rng(104);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t nl = 1 + rng.index(5);
    const std::size_t nr = 1 + rng.index(5);
    std::vector<double> l = random_vector(nl, rng);
    std::vector<double> r = random_vector(nr, rng);
    DenseMatrix m = random_matrix(nl, nr, rng);
    const double got = bilinear(l, m, r);
    CHECK(std::abs(got - bilinear_oracle(l, m, r)) <= 1e-12);

    const double up = rng.uniform(-1.0, 1.0);
    const BilinearGrads g = bilinear_backward(l, m, r, up);
    auto loss = [&]() { return up * bilinear(l, m, r); };
    for (std::size_t i = 0; i < nl; ++i) {
      CHECK(std::abs(g.left[i] - fd(l[i], 1e-6, loss)) < 1e-6);
    }
    for (std::size_t i = 0; i < nr; ++i) {
      CHECK(std::abs(g.right[i] - fd(r[i], 1e-6, loss)) < 1e-6);
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(std::abs(g.matrix.data()[i] - fd(m.data()[i], 1e-6, loss)) < 1e-6);
    }
  }
}

TEST_CASE("zero matrix makes the bilinear form vanish") {
  Rng rng(105);
  const std::vector<double> l = random_vector(4, rng);
  const std::vector<double> r = random_vector(4, rng);
  const DenseMatrix zero(4, 4, 0.0);
  CHECK(bilinear(l, zero, r) == 0.0);
}

TEST_CASE("affine matches the oracle and finite differences") {
  Rng rng(106);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t rows = 1 + rng.index(5);
    const std::size_t cols = 1 + rng.index(5);
    DenseMatrix w = random_matrix(rows, cols, rng);
    std::vector<double> x = random_vector(cols, rng);
    std::vector<double> b = random_vector(rows, rng);
    const std::vector<double> got = affine(w, x, b);
    const std::vector<double> want = affine_oracle(w, x, b);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(std::abs(got[i] - want[i]) <= 1e-12);
    }

    std::vector<double> up = random_vector(rows, rng);
    const AffineGrads g = affine_backward(w, x, up);
    auto loss = [&]() {
      const std::vector<double> o = affine(w, x, b);
      double acc = 0.0;
      for (std::size_t i = 0; i < o.size(); ++i) acc += up[i] * o[i];
      return acc;
    };
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(std::abs(g.weight.data()[i] - fd(w.data()[i], 1e-6, loss)) < 1e-6);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(g.input[i] - fd(x[i], 1e-6, loss)) < 1e-6);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(std::abs(g.bias[i] - fd(b[i], 1e-6, loss)) < 1e-6);
    }
  }
}

TEST_CASE("maxpool matches a linear scan and ties go leftmost") {
  Rng rng(107);
  for (int iter = 0; iter < 200; ++iter) {
    const DenseMatrix fm = random_matrix(1 + rng.index(4), 1 + rng.index(6), rng);
    const MaxPoolResult got = maxpool_rows(fm);
    const MaxPoolResult want = maxpool_oracle(fm);
    REQUIRE(got.values == want.values);
    REQUIRE(got.argmax == want.argmax);
  }

  DenseMatrix tie(1, 3);
  tie(0, 0) = 1.0;
  tie(0, 1) = 3.0;
  tie(0, 2) = 3.0;
  const MaxPoolResult r = maxpool_rows(tie);
  CHECK(r.values[0] == 3.0);
  CHECK(r.argmax[0] == 1);
}

TEST_CASE("maxpool backward routes all upstream mass to the argmax columns") {
  Rng rng(108);
  const DenseMatrix fm = random_matrix(3, 5, rng);
  const MaxPoolResult pooled = maxpool_rows(fm);
  const std::vector<double> up = random_vector(3, rng);
  const DenseMatrix d = maxpool_rows_backward(pooled, fm.cols(), up);
  REQUIRE(d.rows() == 3);
  REQUIRE(d.cols() == 5);
  double total = 0.0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (j == pooled.argmax[i]) {
        CHECK(d(i, j) == up[i]);
      } else {
        CHECK(d(i, j) == 0.0);
      }
      total += d(i, j);
    }
  }
  double up_total = 0.0;
  for (double v : up) up_total += v;
  CHECK(total == doctest::Approx(up_total));
}

TEST_CASE("relu clamps negatives and uses subgradient zero at the kink") {
  const std::vector<double> pre = {-1.0, 0.0, 2.5};
  const std::vector<double> out = relu(pre);
  CHECK(out == std::vector<double>{0.0, 0.0, 2.5});
  const std::vector<double> up = {5.0, 5.0, 5.0};
  const std::vector<double> g = relu_grad(pre, up);
  CHECK(g == std::vector<double>{0.0, 0.0, 5.0});
}

TEST_CASE("softmax examples and stability") {
  {
    const SoftmaxNll r = softmax_nll({0.0, 0.0}, 1);
    CHECK(r.probs[0] == doctest::Approx(0.5));
    CHECK(r.probs[1] == doctest::Approx(0.5));
    CHECK(r.loss == doctest::Approx(std::log(2.0)));
    CHECK(r.dlogits[0] == doctest::Approx(0.5));
    CHECK(r.dlogits[1] == doctest::Approx(-0.5));
  }
  {
    const SoftmaxNll r = softmax_nll({100.0, -100.0}, 0);
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss == doctest::Approx(0.0));
    CHECK(r.probs[0] + r.probs[1] == doctest::Approx(1.0).epsilon(1e-9));
  }
  {
    // extreme logits must not overflow
    const SoftmaxNll r = softmax_nll({1000.0, 0.0}, 1);
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss == doctest::Approx(1000.0));
  }
  {
    Rng rng(109);
    for (int iter = 0; iter < 100; ++iter) {
      const std::array<double, 2> logits = {rng.uniform(-5, 5),
                                            rng.uniform(-5, 5)};
      const int label = static_cast<int>(rng.index(2));
      SoftmaxNll r = softmax_nll(logits, label);
      CHECK(r.probs[0] + r.probs[1] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(r.loss >= 0.0);
      for (int i = 0; i < 2; ++i) {
        std::array<double, 2> l = logits;
        const double eps = 1e-6;
        l[i] = logits[i] + eps;
        const double up_loss = softmax_nll(l, label).loss;
        l[i] = logits[i] - eps;
        const double down_loss = softmax_nll(l, label).loss;
        const double n = (up_loss - down_loss) / (2 * eps);
        CHECK(std::abs(r.dlogits[i] - n) < 1e-6);
      }
    }
  }
}

TEST_CASE("gradient_check validates epsilon and catches corrupted gradients") {
  std::vector<double> p = {0.5, -1.25};
  std::vector<double> analytic(2);
  auto loss = [&]() { return p[0] * p[0] + 3.0 * p[1] * p[1]; };
  auto fill_analytic = [&](double scale) {
    analytic[0] = scale * 2.0 * p[0];
    analytic[1] = scale * 6.0 * p[1];
  };

  fill_analytic(1.0);
  std::vector<GradCheckBlock> blocks = {
      {"quad", std::span<double>(p), std::span<const double>(analytic)}};
  CHECK_THROWS_AS(gradient_check(loss, blocks, 1e-7, 1e-4), ConfigError);
  CHECK_THROWS_AS(gradient_check(loss, blocks, 1e-3, 1e-4), ConfigError);

  const GradCheckReport good = gradient_check(loss, blocks, 1e-5, 1e-4);
  CHECK(good.pass);
  CHECK(good.max_rel_error < 1e-7);
  CHECK(p[0] == 0.5);  // probes restored the parameter
  CHECK(p[1] == -1.25);

  fill_analytic(2.0);  // corrupted: doubled gradient
  const GradCheckReport bad = gradient_check(loss, blocks, 1e-5, 1e-4);
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.blocks.size() == 1);
  CHECK(bad.blocks[0].name == "quad");
  CHECK(bad.blocks[0].max_rel_error > 0.1);
}
