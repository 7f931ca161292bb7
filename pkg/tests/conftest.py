"""Shared test utilities.

The plain-float recursion here is the independent double-precision oracle:
it iterates the fusion map with ordinary arithmetic and never touches the
package's log-domain code path.
"""

from __future__ import annotations

import math


def plain_fuse(a: float, b: float) -> tuple[float, float]:
    """One fusion step in plain double precision."""
    if a <= b:
        return 1.0 - (1.0 - a) ** 2, b * b
    return a * a, 1.0 - (1.0 - b) ** 2


def plain_trajectory(a: float, b: float, levels: int) -> list[tuple[float, float]]:
    out = [(a, b)]
    for _ in range(levels):
        a, b = plain_fuse(a, b)
        out.append((a, b))
    return out


def plain_min_sensors(a: float, b: float, epsilon: float) -> int:
    """Smallest power-of-two leaf count via the plain recursion."""
    height = 0
    while a + b > epsilon:
        a, b = plain_fuse(a, b)
        height += 1
        if height > 200:
            raise AssertionError("plain recursion did not converge")
    return 1 << height


def triangle_grid(n: int):
    """Grid points (i/n, j/n) strictly inside the open triangle."""
    for i in range(n):
        for j in range(n):
            if i + j < n:
                yield i / n, j / n


def rel_err(x: float, ref: float) -> float:
    if ref == 0.0:
        return abs(x)
    return abs(x - ref) / abs(ref)
