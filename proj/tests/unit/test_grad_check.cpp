#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dsakt/error.hpp"
#include "dsakt/grad_check.hpp"
#include "dsakt/kernels.hpp"

using namespace dsakt;

namespace {

GradCheckParameter probe(const std::string& name, Matrix<double>& value, const Matrix<double>& grad) {
  const auto n = static_cast<std::size_t>(value.size());
  return {name, {value.data(), n}, {grad.data(), n}};
}

// Random upstream weights turn a matrix-valued kernel into a scalar for probing.
double contract(const Matrix<double>& y, const Matrix<double>& upstream) { return (y.array() * upstream.array()).sum(); }

}  // namespace

TEST_CASE("harness basics") {
  SUBCASE("sigmoid derivative at zero") {
    std::vector<double> x{0.0};
    const std::vector<double> analytic{0.25};
    const std::vector<GradCheckParameter> p{{"x", x, analytic}};
    const auto report = grad_check([&] { return sigmoid(x[0]); }, p, 1e-8);
    CHECK(report.passed);
    CHECK(report.entries[0].max_relative_error < 1e-8);
  }
  SUBCASE("constant function") {
    std::vector<double> x{1.0, 2.0};
    const std::vector<double> analytic{0.0, 0.0};
    const std::vector<GradCheckParameter> p{{"x", x, analytic}};
    const auto report = grad_check([] { return 3.0; }, p, 1e-12);
    CHECK(report.passed);
    CHECK(report.worst() == 0.0);
  }
  SUBCASE("wrong gradients fail and values are restored") {
    std::vector<double> x{1.5};
    const std::vector<double> analytic{1.0};
    const std::vector<GradCheckParameter> p{{"x", x, analytic}};
    const auto report = grad_check([&] { return x[0] * x[0]; }, p, 1e-6);
    CHECK_FALSE(report.passed);
    CHECK(x[0] == 1.5);
  }
  SUBCASE("non-finite loss names the parameter") {
    std::vector<double> x{0.0};
    const std::vector<double> analytic{0.0};
    const std::vector<GradCheckParameter> p{{"weird", x, analytic}};
    try {
      grad_check([&] { return std::log(x[0] > 0 ? x[0] : 0.0); }, p, 1e-6);
      FAIL("expected NumericError");
    } catch (const NumericError& ex) {
      CHECK(std::string(ex.what()).find("weird") != std::string::npos);
    }
  }
  SUBCASE("absolute floor excuses tiny gaps and counts them") {
    std::vector<double> x{0.0, 1.0};
    const std::vector<double> analytic{1e-10, 2.0};
    const std::vector<GradCheckParameter> p{{"x", x, analytic}};
    const auto strict = grad_check([&] { return x[1] * x[1]; }, p, 1e-6);
    CHECK_FALSE(strict.passed);
    const auto floored = grad_check([&] { return x[1] * x[1]; }, p, 1e-6, 1e-5, 1e-9);
    CHECK(floored.passed);
    CHECK(floored.entries[0].floored == 1);
    CHECK(floored.entries[0].max_floored_gap == doctest::Approx(1e-10));
  }
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(0.0, 1e-12) == doctest::Approx(1e-4));
}

TEST_CASE("kernel gradients match central differences over five seeds") {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    std::srand(seed);
    CAPTURE(seed);

    SUBCASE("linear") {
      Matrix<double> x = Matrix<double>::Random(4, 3), w = Matrix<double>::Random(3, 5), b = Matrix<double>::Random(1, 5);
      const Matrix<double> up = Matrix<double>::Random(4, 5);
      Matrix<double> dw = Matrix<double>::Zero(3, 5), db = Matrix<double>::Zero(1, 5);
      const Matrix<double> dx = linear_backward<double>(x, w, up, dw, &db);
      const std::vector<GradCheckParameter> p{probe("x", x, dx), probe("w", w, dw), probe("b", b, db)};
      const auto r = grad_check([&] { return contract(linear<double>(x, w, b), up); }, p, 1e-6);
      CHECK(r.passed);

      // sum(linear) w.r.t. W
      Matrix<double> dw_sum = Matrix<double>::Zero(3, 5);
      linear_backward<double>(x, w, Matrix<double>::Ones(4, 5), dw_sum);
      const std::vector<GradCheckParameter> q{probe("w", w, dw_sum)};
      CHECK(grad_check([&] { return linear<double>(x, w, b).sum(); }, q, 1e-6).passed);
    }
    SUBCASE("relu") {
      Matrix<double> x = Matrix<double>::Random(3, 4);
      x = x.unaryExpr([](double v) { return std::abs(v) < 1e-3 ? 0.5 : v; });  // stay off the kink
      const Matrix<double> up = Matrix<double>::Random(3, 4);
      const Matrix<double> dx = relu_backward<double>(x, up);
      const std::vector<GradCheckParameter> p{probe("x", x, dx)};
      CHECK(grad_check([&] { return contract(relu<double>(x), up); }, p, 1e-6).passed);
    }
    SUBCASE("sigmoid") {
      Matrix<double> x = Matrix<double>::Random(2, 5) * 4.0;
      const Matrix<double> up = Matrix<double>::Random(2, 5);
      const Matrix<double> s = sigmoid<double>(x);
      const Matrix<double> dx = up.array() * s.array() * (1.0 - s.array());
      const std::vector<GradCheckParameter> p{probe("x", x, dx)};
      CHECK(grad_check([&] { return contract(sigmoid<double>(x), up); }, p, 1e-6).passed);
    }
    SUBCASE("masked softmax") {
      Matrix<double> s = Matrix<double>::Random(5, 5) * 3.0;
      Mask m(5, 5);
      for (int t = 0; t < 5; ++t)
        for (int u = 0; u < 5; ++u) m(t, u) = u <= t;
      const Matrix<double> up = Matrix<double>::Random(5, 5);
      const Matrix<double> ds = softmax_masked_backward<double>(softmax_masked(s, m), up);
      const std::vector<GradCheckParameter> p{probe("scores", s, ds)};
      CHECK(grad_check([&] { return contract(softmax_masked(s, m), up); }, p, 1e-6).passed);
    }
    SUBCASE("layer norm") {
      Matrix<double> x = Matrix<double>::Random(3, 6) * 2.0;
      Matrix<double> gamma = Matrix<double>::Random(1, 6), beta = Matrix<double>::Random(1, 6);
      const Matrix<double> up = Matrix<double>::Random(3, 6);
      LayerNormCache<double> cache;
      layer_norm<double>(x, gamma, beta, 1e-5, &cache);
      Matrix<double> dg = Matrix<double>::Zero(1, 6), db = Matrix<double>::Zero(1, 6);
      const Matrix<double> dx = layer_norm_backward<double>(cache, gamma, up, dg, db);
      const std::vector<GradCheckParameter> p{probe("x", x, dx), probe("gamma", gamma, dg), probe("beta", beta, db)};
      const auto r = grad_check([&] { return contract(layer_norm<double>(x, gamma, beta), up); }, p, 1e-6);
      CHECK(r.passed);
    }
    SUBCASE("bce") {
      std::mt19937 gen(seed);
      std::uniform_real_distribution<double> u(0.05, 0.95);
      std::vector<double> pred(6);
      for (auto& v : pred) v = u(gen);
      const std::vector<std::uint8_t> target{1, 0, 1, 1, 0, 0}, valid{1, 1, 0, 1, 1, 0};
      const auto g = bce_masked_backward<double>(pred, target, valid);
      const std::vector<GradCheckParameter> p{{"pred", pred, g}};
      CHECK(grad_check([&] { return bce_masked<double>(pred, target, valid); }, p, 1e-6).passed);
    }
  }
}
