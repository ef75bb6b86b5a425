// Numeric kernel: matrix product, activations and their derivatives, and the
// seeded random number generator.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cryptolab/core/activations.hpp"
#include "cryptolab/core/errors.hpp"
#include "cryptolab/core/rng.hpp"
#include "cryptolab/core/stats.hpp"
#include "cryptolab/core/types.hpp"

using namespace cryptolab;

namespace {

Matrix random_matrix(Index rows, Index cols, SeededRng& rng, double lo = -2.0,
                     double hi = 2.0) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

}  // namespace

TEST_CASE("matmul reproduces identity and small hand cases") {
  Matrix a(2, 2);
  a << 3, 4, 5, 6;
  const Matrix id = Matrix::Identity(2, 2);
  const Matrix prod = matmul(id, a);
  CHECK(prod(0, 0) == 3.0);
  CHECK(prod(0, 1) == 4.0);
  CHECK(prod(1, 0) == 5.0);
  CHECK(prod(1, 1) == 6.0);

  Matrix row(1, 2);
  row << 1, 2;
  Matrix col(2, 1);
  col << 3, 4;
  const Matrix scalar = matmul(row, col);
  CHECK(scalar.rows() == 1);
  CHECK(scalar.cols() == 1);
  CHECK(scalar(0, 0) == 11.0);
}

TEST_CASE("matmul matches a naive triple-loop product") {
  SeededRng rng(101);
  const Matrix a = random_matrix(4, 3, rng);
  const Matrix b = random_matrix(3, 5, rng);
  const Matrix got = matmul(a, b);

  for (Index r = 0; r < 4; ++r) {
    for (Index c = 0; c < 5; ++c) {
      double acc = 0.0;
      for (Index k = 0; k < 3; ++k) acc += a(r, k) * b(k, c);
      CHECK(got(r, c) == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("matmul rejects mismatched shapes with a shape error") {
  SeededRng rng(7);
  const Matrix a = random_matrix(2, 3, rng);
  const Matrix b = random_matrix(4, 2, rng);
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
}

TEST_CASE("matmul is associative within 1e-9 relative tolerance") {
  SeededRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    const Matrix a = random_matrix(3, 4, rng);
    const Matrix b = random_matrix(4, 5, rng);
    const Matrix c = random_matrix(5, 2, rng);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    const double scale = left.norm() + right.norm();
    CHECK((left - right).norm() <= 1e-9 * scale);
  }
}

TEST_CASE("activation values at zero") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(std::tanh(0.0) == 0.0);
  CHECK(tanh_prime(0.0) == 1.0);
  CHECK(activation_value(3.25, Activation::Linear) == 3.25);
  CHECK(activation_derivative(3.25, Activation::Linear) == 1.0);
}

TEST_CASE("sigmoid derivative matches a central finite difference") {
  const double h = 1e-6;
  for (double x : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
    CAPTURE(x);
    const double numeric = (sigmoid(x + h) - sigmoid(x - h)) / (2.0 * h);
    CHECK(std::abs(sigmoid_prime(x) - numeric) < 1e-8);
  }
}

TEST_CASE("every activation derivative matches finite differences on 100 points") {
  SeededRng rng(23);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-4.0, 4.0);
    CAPTURE(x);
    for (Activation kind : {Activation::Sigmoid, Activation::Tanh, Activation::Linear}) {
      CAPTURE(to_string(kind));
      const double numeric =
          (activation_value(x + h, kind) - activation_value(x - h, kind)) / (2.0 * h);
      CHECK(std::abs(activation_derivative(x, kind) - numeric) < 1e-7);
    }
  }
}

TEST_CASE("activation outputs stay inside their open ranges until saturation") {
  SeededRng rng(29);
  // Strict interior holds only while 1 - |value| is representable: sigmoid
  // reaches exactly 1.0 near |x| ~ 37 and tanh near |x| ~ 19. Test the strict
  // property inside those domains and the exact saturation beyond them.
  for (int i = 0; i < 200; ++i) {
    const double xs = rng.uniform(-30.0, 30.0);
    CAPTURE(xs);
    const double s = sigmoid(xs);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    const double xt = rng.uniform(-18.0, 18.0);
    CAPTURE(xt);
    const double t = std::tanh(xt);
    CHECK(t > -1.0);
    CHECK(t < 1.0);
  }
  CHECK(sigmoid(50.0) == 1.0);
  CHECK(std::tanh(25.0) == 1.0);
  CHECK(std::tanh(-25.0) == -1.0);
}

TEST_CASE("apply_activation works elementwise on matrices") {
  Matrix m(2, 2);
  m << 0.0, 1.0, -1.0, 2.0;
  const Matrix s = apply_activation(m, Activation::Sigmoid);
  CHECK(s(0, 0) == 0.5);
  CHECK(s(0, 1) == sigmoid(1.0));
  CHECK(s(1, 0) == sigmoid(-1.0));
  const Matrix d = apply_activation(m, Activation::Tanh, /*derivative=*/true);
  CHECK(d(0, 0) == 1.0);
  CHECK(d(1, 1) == tanh_prime(2.0));
}

TEST_CASE("same seed replays the identical draw sequence") {
  SeededRng a(987654321);
  SeededRng b(987654321);
  for (int i = 0; i < 50; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  SeededRng c(987654321);
  SeededRng d(987654321);
  for (int i = 0; i < 50; ++i) {
    CHECK(c.uniform01() == d.uniform01());
    CHECK(c.gaussian(0.0, 1.0) == d.gaussian(0.0, 1.0));
  }
}

TEST_CASE("different seeds diverge") {
  SeededRng a(1);
  SeededRng b(2);
  int equal = 0;
  for (int i = 0; i < 20; ++i) {
    if (a.next_u64() == b.next_u64()) ++equal;
  }
  CHECK(equal == 0);
}

TEST_CASE("uniform01 lies in [0, 1)") {
  SeededRng rng(77);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("zero standard deviation collapses gaussian draws to the mean") {
  SeededRng rng(5);
  const std::vector<double> draws = rng.gaussian_draws(5.0, 0.0, 3);
  REQUIRE(draws.size() == 3);
  CHECK(draws[0] == 5.0);
  CHECK(draws[1] == 5.0);
  CHECK(draws[2] == 5.0);
}

TEST_CASE("gaussian draws pass a law-of-large-numbers check") {
  SeededRng rng(2024);
  const std::vector<double> draws = rng.gaussian_draws(0.0, 1.0, 100000);
  CHECK(std::abs(mean(draws)) < 0.02);
  CHECK(std::abs(population_stddev(draws) - 1.0) < 0.02);
}

TEST_CASE("negative standard deviation is rejected") {
  SeededRng rng(5);
  CHECK_THROWS_AS(rng.gaussian(0.0, -1.0), ParameterError);
  CHECK_THROWS_AS(rng.gaussian_draws(0.0, -0.5, 10), ParameterError);
}

TEST_CASE("derived child generators are deterministic and independent") {
  SeededRng parent_a(31337);
  SeededRng parent_b(31337);
  SeededRng child_a = parent_a.derive(4);
  SeededRng child_b = parent_b.derive(4);
  CHECK(child_a.seed() == child_b.seed());
  for (int i = 0; i < 20; ++i) CHECK(child_a.next_u64() == child_b.next_u64());

  SeededRng other = parent_a.derive(5);
  CHECK(other.seed() != parent_a.derive(4).seed());
}

TEST_CASE("deriving does not disturb the parent stream") {
  SeededRng with_children(99);
  SeededRng plain(99);
  (void)with_children.derive(0);
  (void)with_children.derive(123);
  for (int i = 0; i < 10; ++i) CHECK(with_children.next_u64() == plain.next_u64());
}

TEST_CASE("next_below stays inside its bound and rejects zero") {
  SeededRng rng(13);
  for (int i = 0; i < 1000; ++i) CHECK(rng.next_below(7) < 7);
  CHECK_THROWS_AS(rng.next_below(0), ParameterError);
}

TEST_CASE("mean, variance, and stddev match hand calculations") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  CHECK(mean(xs) == 2.5);
  CHECK(population_variance(xs) == 1.25);
  CHECK(population_stddev(xs) == std::sqrt(1.25));
  CHECK_THROWS_AS(mean(std::vector<double>{}), ParameterError);
}

TEST_CASE("pearson correlation detects perfect linear relationships") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> up = {2.0, 4.0, 6.0, 8.0};
  const std::vector<double> down = {8.0, 6.0, 4.0, 2.0};
  CHECK(pearson(a, up) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(a, down) == doctest::Approx(-1.0).epsilon(1e-12));

  const std::vector<double> flat = {5.0, 5.0, 5.0, 5.0};
  CHECK_THROWS_AS(pearson(a, flat), EstimationError);
  const std::vector<double> shorter = {1.0, 2.0};
  CHECK_THROWS_AS(pearson(a, shorter), ShapeError);
}
