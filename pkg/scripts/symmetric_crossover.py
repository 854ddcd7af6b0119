"""Where does deliberately ignoring half the world start to pay?

Compares the full-support design against the half-support design on the
symmetric family, for a grid of informativeness levels, and prints the
smallest (even) number of states at which the half-support design wins.

Usage:
    python3 scripts/symmetric_crossover.py
"""

from famlearn import symmetric_utilities

INFO_LEVELS = (1.5, 2.0, 3.0, 4.0, 6.0, 10.0)
MAX_STATES = 40


def crossover_point(info: float) -> int | None:
    """Smallest even n with the half-support design strictly better."""
    for n in range(4, MAX_STATES + 1, 2):
        if symmetric_utilities(n, info)[2]:
            return n
    return None


def main() -> None:
    print(f"{'info':>6s} {'crossover_n':>12s}   utilities at the crossover")
    for info in INFO_LEVELS:
        n = crossover_point(info)
        if n is None:
            print(f"{info:>6.1f} {'-':>12s}   (none up to n={MAX_STATES})")
            continue
        full, ignorant, _ = symmetric_utilities(n, info)
        print(
            f"{info:>6.1f} {n:>12d}   full={full:.6f}  half={ignorant:.6f}"
            f"  gain={ignorant - full:+.6f}"
        )

    # the gap keeps widening after the crossover: show one trajectory
    print("\ntrajectory at info=4.0:")
    for n in range(4, 22, 2):
        full, ignorant, crossed = symmetric_utilities(n, 4.0)
        marker = "*" if crossed else " "
        print(f"  n={n:>2d}  full={full:.6f}  half={ignorant:.6f} {marker}")


if __name__ == "__main__":
    main()
