#pragma once

#include <doctest.h>

#include <random>

#include "semidisc/chain.hpp"

namespace semidisc::test {

inline ChainSystem wave_chain(const char* sigma, const char* f, double h, int cells, bool fixed) {
  BoundaryMode mode = fixed ? BoundaryMode::fixed_ends({TimeCurve::parse("0")}, {TimeCurve::parse("0")})
                            : BoundaryMode::free_ends();
  return ChainSystem(make_wave_pair_lagrangian(make_wave_spec(sigma, f, h)), cells, std::move(mode));
}

inline NodeArray random_nodes(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  NodeArray a(rows, cols);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  return a;
}

inline ChainState random_state(const ChainSystem& sys, std::mt19937_64& rng, double scale = 1.0) {
  return sys.make_state(0.0, random_nodes(rng, sys.nodes(), sys.dim(), scale),
                        random_nodes(rng, sys.nodes(), sys.dim(), scale));
}

/// Alternating vector (1, -1, 1, ...) of length n.
inline Eigen::VectorXd alternating(int n) {
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v(k) = k % 2 == 0 ? 1.0 : -1.0;
  return v;
}

}  // namespace semidisc::test
