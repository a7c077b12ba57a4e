#include <doctest.h>

#include <cmath>
#include <random>

#include "semidisc/constraint.hpp"
#include "support.hpp"

using namespace semidisc;
using semidisc::test::alternating;
using semidisc::test::random_state;
using semidisc::test::wave_chain;

namespace {

ChainState three_nodes(const ChainSystem& sys, double y0, double y1, double y2, double v0 = 0, double v1 = 0,
                       double v2 = 0) {
  NodeArray y(3, 1), v(3, 1);
  y << y0, y1, y2;
  v << v0, v1, v2;
  return sys.make_state(0.0, y, v);
}

}  // namespace

TEST_CASE("kernel basis of diagonal and rank-deficient matrices") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m(0, 0) = 2.0;
  m(2, 2) = 1.0;
  const auto k = kernel_basis(m);
  REQUIRE(k.size() == 1);
  CHECK((k[0] - Eigen::Vector3d(0, 1, 0)).norm() <= 1e-15);
  CHECK(kernel_basis(Eigen::MatrixXd::Identity(4, 4)).empty());
  CHECK(kernel_matrix(Eigen::MatrixXd::Zero(2, 2)).cols() == 2);
}

TEST_CASE("kernel vectors are sign normalised") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 1, 1, 1;
  const auto k = kernel_basis(m);
  REQUIRE(k.size() == 1);
  CHECK(k[0](0) > 0.0);
  CHECK(k[0](0) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("property: free wave kernel is the normalised alternating vector") {
  std::mt19937_64 rng(31);
  for (int cells = 2; cells <= 20; ++cells) {
    const ChainSystem sys = wave_chain("v^2/2", "u^4/4", 0.1, cells, false);
    const auto k = kernel_basis(mass_matrix(sys, random_state(sys, rng)));
    REQUIRE(k.size() == 1);
    CHECK((k[0] - alternating(cells + 1) / std::sqrt(cells + 1.0)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("fixed ends are regular") {
  std::mt19937_64 rng(32);
  for (int cells = 2; cells <= 12; ++cells) {
    const ChainSystem sys = wave_chain("v^2/2", "0", 0.1, cells, true);
    CHECK(kernel_basis(mass_matrix(sys, random_state(sys, rng))).empty());
  }
}

TEST_CASE("secondary constraint is the kernel component of the force") {
  const ChainSystem sys = wave_chain("v^2/2", "0", 1.0, 2, false);
  // F = -K y with K the stiffness of the three-node chain
  const Eigen::VectorXd phi = secondary_constraints(sys, three_nodes(sys, 0.0, 1.0, 0.0));
  REQUIRE(phi.size() == 1);
  CHECK(std::abs(phi(0)) == doctest::Approx(4.0 / std::sqrt(3.0)));
  CHECK(std::abs(secondary_constraints(sys, three_nodes(sys, 0, 1, 2))(0)) <= 1e-14);
}

TEST_CASE("constraint chain stabilises at depth two") {
  const ChainSystem sys = wave_chain("v^2/2", "0", 1.0, 2, false);
  const ChainState ref = three_nodes(sys, 0, 1, 2);
  const ConstraintChain chain = constraint_chain(sys, ref, 5);
  CHECK(chain.stabilized);
  CHECK(chain.depth == 2);
  REQUIRE(chain.levels.size() == 2);
  CHECK(chain.levels[0].functions.size() == 1);
  CHECK(chain.levels[1].functions.size() == 1);
  CHECK(chain.levels[0].kernel.cols() == 1);
  CHECK(is_admissible(sys, ref, chain, 1e-8));
}

TEST_CASE("level values are multiples of second differences") {
  const ChainSystem sys = wave_chain("v^2/2", "0", 1.0, 2, false);
  const ConstraintChain chain = constraint_chain(sys, three_nodes(sys, 0, 1, 2), 5);
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(-1, 1);
  const double c = 2.0 / std::sqrt(3.0);
  for (int i = 0; i < 20; ++i) {
    const double y0 = u(rng), y1 = u(rng), y2 = u(rng), v0 = u(rng), v1 = u(rng), v2 = u(rng);
    const auto vals = chain.values(three_nodes(sys, y0, y1, y2, v0, v1, v2));
    CHECK(std::abs(vals[0][0]) == doctest::Approx(c * std::abs(y0 - 2 * y1 + y2)).epsilon(1e-8));
    CHECK(std::abs(vals[1][0]) == doctest::Approx(c * std::abs(v0 - 2 * v1 + v2)).epsilon(1e-5));
  }
}

TEST_CASE("velocity violating the rate constraint is inadmissible") {
  const ChainSystem sys = wave_chain("v^2/2", "0", 1.0, 2, false);
  const ChainState bad = three_nodes(sys, 0, 0, 0, 1, -1, 1);
  const ConstraintChain chain = constraint_chain(sys, bad, 5);
  CHECK_FALSE(is_admissible(sys, bad, chain, 1e-8));
  CHECK(std::abs(chain.values(bad)[1][0]) == doctest::Approx(8.0 / std::sqrt(3.0)).epsilon(1e-5));
}

TEST_CASE("regular chains have no constraints") {
  const ChainSystem sys = wave_chain("v^2/2", "u^2", 0.5, 4, true);
  std::mt19937_64 rng(34);
  const ChainState s = random_state(sys, rng);
  const ConstraintChain chain = constraint_chain(sys, s, 4);
  CHECK(chain.stabilized);
  CHECK(chain.depth == 0);
  CHECK(is_admissible(sys, s, chain, 1e-8));
}

TEST_CASE("depth cap leaves the chain unstabilised") {
  const ChainSystem sys = wave_chain("v^2/2", "0", 1.0, 2, false);
  const ConstraintChain chain = constraint_chain(sys, three_nodes(sys, 0, 1, 2), 1);
  CHECK_FALSE(chain.stabilized);
  CHECK(chain.depth == 1);
}

TEST_CASE("finite-difference step scales with the state") {
  const ChainSystem sys = wave_chain("v^2/2", "0", 1.0, 2, false);
  CHECK(constraint_fd_step(three_nodes(sys, 0, 0, 0)) == doctest::Approx(1e-5));
  CHECK(constraint_fd_step(three_nodes(sys, 0, 300, 400)) > 1e-3);
}
