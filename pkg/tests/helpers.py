"""Numerical helpers shared by the test modules."""

import numpy as np


def poles(L, d, upto):
    """Sorted poles of the mode residual up to a bit past ``upto``."""
    p = [k * np.pi / d for k in range(1, int(upto * d / np.pi) + 2)]
    p += [k * np.pi / (L - d) for k in range(1, int(upto * (L - d) / np.pi) + 2)]
    return np.array(sorted(p))


def one_sided_derivative(f, x, h, side, order=8):
    """Derivative at ``x`` from ``order + 1`` samples on one side only."""
    k = np.arange(order + 1)
    pts = x + side * h * k
    # weights from the Vandermonde system of the polynomial through the samples
    V = np.vander(side * h * k, increasing=True).T
    rhs = np.zeros(order + 1)
    rhs[1] = 1.0
    w = np.linalg.solve(V, rhs)
    return float(w @ f(pts))
