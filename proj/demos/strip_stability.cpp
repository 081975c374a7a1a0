// Bump perturbations of the Minkowski strip spray: distance on the unit
// sphere bundle and both probe verdicts per amplitude.

#include "spraylab/catalog.hpp"
#include "spraylab/stability.hpp"

#include <cstdio>

using namespace spraylab;

int main() {
  const Spray strip = make_catalog_spray("minkowski-strip");
  const CompactSet K = CompactSet::box(vec({-1, 0.25}), vec({1, 0.75}));
  ProbeGrid grid;
  grid.levels = 2;
  grid.seed = 7;

  Bump b;
  b.center = vec({0, 0.5});
  b.radius = 0.3;
  b.fiber_center = vec({1, 0});
  b.fiber_radius = 1.0;
  b.amplitude = 1.0;
  b.direction = vec({0, 1});

  for (double a : {0.0, 1e-3, 1e-2}) {
    const Spray sp = perturb(strip, scaled_family({b}, a, 2.0));
    const double d = c0_fine_distance(strip, sp, K, 400, grid.seed);
    const auto pc = pseudoconvexity_probe(sp, K, grid);
    const auto dp = disprisonment_probe(sp, K, grid);
    std::printf("amplitude %-6g  c0 %.3e  pseudoconvex %-12s  disprisoning %s\n", a, d, to_string(pc.verdict),
                to_string(dp.verdict));
  }
}
