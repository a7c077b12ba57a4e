#include <doctest.h>

#include <cmath>
#include <random>

#include "semidisc/pairlag.hpp"

using namespace semidisc;

namespace {

PairPoint random_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PairPoint x(n);
  for (int i = 0; i < n; ++i) x(i) = u(rng);
  return x;
}

void check_against_differences(const PairLagrangian& pair, std::mt19937_64& rng) {
  const int n = 4 * pair.dim();
  for (int trial = 0; trial < 50; ++trial) {
    const PairPoint x = random_point(rng, n);
    const PairDerivatives d = pair.evaluate(x);
    CHECK(d.value == doctest::Approx(pair.value(x)));
    for (int i = 0; i < n; ++i) {
      const double h = 1e-5;
      PairPoint xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      const double g = (pair.value(xp) - pair.value(xm)) / (2.0 * h);
      CHECK(std::abs(d.gradient(i) - g) <= 1e-7 * std::max(1.0, std::abs(g)));
      const Eigen::VectorXd col = (pair.evaluate(xp, false).gradient - pair.evaluate(xm, false).gradient) / (2.0 * h);
      CHECK((d.hessian.col(i) - col).cwiseAbs().maxCoeff() <= 1e-7 * std::max(1.0, col.cwiseAbs().maxCoeff()));
    }
    CHECK((d.hessian - d.hessian.transpose()).norm() <= 1e-12);
  }
}

}  // namespace

TEST_CASE("wave pair Lagrangian value") {
  const PairLagrangian pair = make_wave_pair_lagrangian(make_wave_spec("v^2/2", "u^4/4", 0.5));
  CHECK(pair.dim() == 1);
  PairPoint x(4);
  x << 0.2, 1.0, 0.6, 3.0;  // y0, v0, y1, v1
  const double strain = (0.6 - 0.2) / 0.5, mid = 0.4;
  CHECK(pair.value(x) == doctest::Approx(0.5 * 4.0 - 0.5 * strain * strain - std::pow(mid, 4) / 4.0));
}

TEST_CASE("slot blocks match the packed layout") {
  const PairLagrangian pair = make_generic_pair_lagrangian(
      parse_expression("y0_1*v0_2 + 2*y1_2*v1_1^2 + v0_1*v1_2"), 2);
  CHECK(pair.variables() == std::vector<std::string>{"y0_1", "y0_2", "v0_1", "v0_2", "y1_1", "y1_2", "v1_1", "v1_2"});
  const PairPoint x = pack_pair_point(Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4), Eigen::Vector2d(5, 6),
                                      Eigen::Vector2d(7, 8));
  const PairDerivatives d = pair.evaluate(x);
  CHECK(d.block(Slot::Y0)(0) == 4.0);          // v0_2
  CHECK(d.block(Slot::V0)(0) == 8.0);          // v1_2
  CHECK(d.block(Slot::V1)(0) == 2 * 6 * 2 * 7);
  CHECK(d.block(Slot::Y1, Slot::V1)(1, 0) == 4 * 7);
  CHECK(pair.gradient(Slot::V0, x)(1) == 1.0);  // y0_1
  CHECK(pair.hessian(Slot::Y0, Slot::V0, x)(0, 1) == 1.0);
  CHECK(pair_variable_name(Slot::V1, 2) == "v1_2");
}

TEST_CASE("unknown names are rejected at construction") {
  CHECK_THROWS_AS(make_generic_pair_lagrangian(parse_expression("y2_1"), 1), UnknownVariable);
  CHECK_THROWS_AS(make_generic_pair_lagrangian(parse_expression("y0_2"), 1), UnknownVariable);
  CHECK_THROWS_AS(make_wave_pair_lagrangian(make_wave_spec("u^2", "0", 1.0)), UnknownVariable);
  CHECK_THROWS_AS(make_wave_pair_lagrangian(make_wave_spec("v^2", "v", 1.0)), UnknownVariable);
}

TEST_CASE("property: exact derivatives agree with differences of the value") {
  std::mt19937_64 rng(11);
  check_against_differences(make_wave_pair_lagrangian(make_wave_spec("v^2/2 + v^4/8", "1 - cos(u)", 0.2)), rng);
  check_against_differences(
      make_generic_pair_lagrangian(parse_expression("0.5*(v0_1^2 + v1_2^2) + v0_2*v1_1*y0_1 - exp(0.3*y1_1)*sin(y0_2) "
                                                    "- (y1_2 - y0_1)^2/2"),
                                   2),
      rng);
}

TEST_CASE("linear wave: second derivatives are constant") {
  const PairLagrangian pair = make_wave_pair_lagrangian(make_wave_spec("v^2/2", "0", 0.25));
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd h0 = pair.evaluate(random_point(rng, 4)).hessian;
  const Eigen::MatrixXd h1 = pair.evaluate(random_point(rng, 4)).hessian;
  CHECK((h0 - h1).norm() == 0.0);
  // kinetic block of (v0 + v1)^2 / 8 is rank one
  CHECK(h0(1, 1) == 0.25);
  CHECK(h0(1, 3) == 0.25);
  CHECK(h0(0, 0) == -16.0);
  CHECK(h0(0, 2) == 16.0);
}
