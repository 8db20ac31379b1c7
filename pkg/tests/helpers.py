"""Shared builders for randomized test models."""

import numpy as np

from ptcycle import TwoLevelModel


def random_model(rng, lam=0.0, winding=None, epsilon=0.0):
    """Random smooth model from low-order trigonometric profiles.

    The coupling magnitude stays above 0.5 so no accidental zero of R(k)
    sneaks in, and all derivatives are supplied in closed form.
    """
    a0, a1, b1 = rng.uniform(-0.5, 0.5, 3)
    wa, wb = rng.uniform(-0.6, 0.6, 2)
    rc, rs = rng.uniform(-0.4, 0.4, 2)
    pc, ps = rng.uniform(-0.5, 0.5, 2)
    m = int(rng.integers(0, 2)) if winding is None else winding

    return TwoLevelModel(
        g=lambda k: a0 + a1 * np.cos(k) + b1 * np.sin(k),
        w=lambda k: 1.0 + wa * np.cos(k) + wb * np.sin(k),
        r=lambda k: 1.5 + rc * np.cos(k) + rs * np.sin(k),
        phi=lambda k: m * np.asarray(k, dtype=float) + pc * np.sin(k) + ps * (np.cos(k) - 1.0),
        dg=lambda k: -a1 * np.sin(k) + b1 * np.cos(k),
        dw=lambda k: -wa * np.sin(k) + wb * np.cos(k),
        dr=lambda k: -rc * np.sin(k) + rs * np.cos(k),
        dphi=lambda k: m + pc * np.cos(k) - ps * np.sin(k),
        phi_winding=m,
        lam=lam,
        epsilon=epsilon,
        label="random",
    )
