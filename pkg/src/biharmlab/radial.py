"""Radial differential operators in dimension N from one-dimensional derivatives.

For a radial function f(|x|) on R^N:

    Delta f       = f'' + (N-1)/r f'
    (Delta f)'    = f''' + (N-1)(f''/r - f'/r^2)
    Delta^2 f     = f'''' + 2(N-1)/r f''' + (N-1)(N-3)(f''/r^2 - f'/r^3)
"""

from __future__ import annotations

__all__ = ["lap_radial", "dlap_radial", "bilap_radial"]


def lap_radial(N: int, r, d1, d2):
    return d2 + (N - 1.0) * d1 / r


def dlap_radial(N: int, r, d1, d2, d3):
    return d3 + (N - 1.0) * (d2 / r - d1 / r**2)


def bilap_radial(N: int, r, d1, d2, d3, d4):
    return d4 + 2.0 * (N - 1.0) * d3 / r + (N - 1.0) * (N - 3.0) * (d2 / r**2 - d1 / r**3)
