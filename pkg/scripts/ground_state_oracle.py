#!/usr/bin/env python3
"""
Cross-check the shooting solver against a brute-force fixed-step RK4 shooter.

The oracle integrates u'' + (N-1)/r u' - u + u^p = 0 from a series start and
bisects u(0) on the sign of the first event (zero crossing or rebound). It
shares no code with spikelab.groundstate.

Usage:
    python scripts/ground_state_oracle.py
    python scripts/ground_state_oracle.py --pairs 3:3 2:2.5 --step 1e-3 --r-max 20
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Tuple

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import numpy as np

from spikelab.groundstate import solve_ground_state


DEFAULT_PAIRS = ["1:3", "2:3", "3:3", "3:2", "3:4.5", "4:2"]


def _rhs(dimension: int, exponent: float, r: float, y: np.ndarray) -> np.ndarray:
    u, du = y
    return np.array([du, -(dimension - 1) / r * du + u - abs(u) ** exponent * np.sign(u)])


def shoot(dimension: int, exponent: float, alpha: float, step: float, r_max: float) -> int:
    """+1 if the trajectory crosses zero, -1 if it rebounds, 0 if neither by r_max."""
    r0 = step
    c = (alpha - alpha**exponent) / (2.0 * dimension)
    y = np.array([alpha + c * r0**2, 2.0 * c * r0])
    r = r0
    while r < r_max:
        k1 = _rhs(dimension, exponent, r, y)
        k2 = _rhs(dimension, exponent, r + step / 2, y + step / 2 * k1)
        k3 = _rhs(dimension, exponent, r + step / 2, y + step / 2 * k2)
        k4 = _rhs(dimension, exponent, r + step, y + step * k3)
        y = y + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        r += step
        if y[0] < 0.0:
            return 1
        if y[1] > 0.0:
            return -1
    return 0


def oracle_alpha(dimension: int, exponent: float, step: float, r_max: float, iterations: int = 60) -> float:
    lo, hi = 1.0, 2.0
    while shoot(dimension, exponent, hi, step, r_max) != 1:
        lo, hi = hi, 2.0 * hi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if shoot(dimension, exponent, mid, step, r_max) == 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _parse_pair(text: str) -> Tuple[int, float]:
    n, p = text.split(":")
    return int(n), float(p)


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Brute-force ground state oracle")
    parser.add_argument("--pairs", nargs="+", default=DEFAULT_PAIRS, help="N:p pairs")
    parser.add_argument("--step", type=float, default=2e-3, help="RK4 step")
    parser.add_argument("--r-max", type=float, default=16.0)
    parser.add_argument("--rtol", type=float, default=1e-5, help="allowed relative gap in u(0)")
    args = parser.parse_args(argv)

    print("=" * 60)
    print("Ground state oracle: RK4 bisection vs adaptive shooting")
    print("=" * 60)
    print(f"{'N':>3} {'p':>6} {'oracle u(0)':>16} {'solver u(0)':>16} {'rel gap':>10}")

    failures = 0
    for text in args.pairs:
        n, p = _parse_pair(text)
        expected = oracle_alpha(n, p, args.step, args.r_max)
        actual = solve_ground_state(n, p).alpha
        gap = abs(actual - expected) / expected
        flag = "" if gap <= args.rtol else "  <-- mismatch"
        failures += gap > args.rtol
        print(f"{n:>3} {p:>6g} {expected:>16.10f} {actual:>16.10f} {gap:>10.2e}{flag}")

    print()
    print("OK" if failures == 0 else f"{failures} pair(s) outside rtol={args.rtol:g}")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
