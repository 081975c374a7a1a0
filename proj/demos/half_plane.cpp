// Geodesics of the Poincaré half-plane: a vertical ray, a connecting arc and
// the absence of conjugate points.

#include "spraylab/catalog.hpp"
#include "spraylab/shooting.hpp"

#include <cstdio>

using namespace spraylab;

int main() {
  const Spray s = make_catalog_spray("poincare-half-plane");
  const IntegratorControls c;

  const ExpResult up = exp_map(s, vec({0, 1}), vec({0, 1}), c);
  std::printf("exp_(0,1)(0,1) = (%.12f, %.12f), e = %.12f\n", (*up.point)[0], (*up.point)[1], std::exp(1.0));

  ShootingStrategy st;
  const auto arc = connect(s, vec({0, 1}), vec({1, 1}), st, c);
  if (arc) {
    std::printf("connect (0,1) -> (1,1): v = (%.9f, %.9f), residual %.2e\n", arc->v[0], arc->v[1], arc->residual);
    const Vec mid = arc->trajectory.position_at(0.5);
    std::printf("  midpoint (%.9f, %.9f), semicircle top %.9f\n", mid[0], mid[1], std::sqrt(1.25));
  }

  const auto t = first_conjugate_parameter(s, vec({0, 1}), vec({1, 0}), 10.0, c);
  std::printf("first conjugate point up to t = 10: %s\n", t ? "found" : "none");
}
