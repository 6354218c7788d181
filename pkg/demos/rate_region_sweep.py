"""Achievable rate regions of four transmission schemes.

Sweeps a fan of rate weights on a small fading grid for each scheme and
prints the hull of achievable (r1, r2) points. The orderings to look
for: adapting power to the fading beats fixed power, and cooperation
beats direct-only transmission, with the combination on top.
"""

from coopmac import SchemeMode, SolverConfig, build_uniform_grid, sweep
from coopmac.region import default_weights


def main() -> None:
    # 2x2 direct gains, 2x2 inter gains: a 16-state toy fading grid
    ensemble = build_uniform_grid([0.1, 0.3], [0.5, 0.8])
    config = SolverConfig(step_a=5.0, step_b=1.0, max_iters=800)
    weights = default_weights(9)

    print(f"{'scheme':20s} {'max sum rate':>14s}   hull points")
    for mode in SchemeMode:
        region = sweep(ensemble, mode, weights=weights, config=config)
        corners = " ".join(f"({r1:.3f},{r2:.3f})"
                           for r1, r2 in region.hull[1:-1])
        print(f"{mode.value:20s} {region.max_sum_rate():14.4f}   {corners}")


if __name__ == "__main__":
    main()
