"""Large-domain (vanishing elastic constant) limit energies and regime map.

In the limit the energy of a competitor collapses to a sum of interface
terms: each wall between bulk states contributes its length times the
geodesic transition cost between the corresponding wells.  Candidate
profiles on the unit square with a concentric square hole of half-width rho:

* cross: two diagonal walls of combined length 4*sqrt(2)*rho against the
  hole, plus straight defect lines of length 4*(1 - rho) along the
  diagonals outside the hole;
* edge-layer: the same hole walls plus two walls of length sqrt(2) each
  hugging a pair of opposite edges;
* collared: an isotropic-to-ordered wall at the hole, an ordered collar of
  width eta, a second wall, then diagonal lines on the remainder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geodesics import TransitionCosts

__all__ = ["j_inf_wors", "j_inf_bd", "j_inf_esc", "ratios", "classify_regime",
           "RegimeReport"]

SQ2 = np.sqrt(2.0)


def j_inf_wors(rho: float, c: TransitionCosts) -> float:
    return 4.0 * SQ2 * rho * c.c2 + 4.0 * (1.0 - rho) * c.c4


def j_inf_bd(rho: float, c: TransitionCosts) -> float:
    return 4.0 * SQ2 * rho * c.c2 + 2.0 * SQ2 * c.c4


def j_inf_esc(rho: float, eta: float, c: TransitionCosts) -> float:
    return (4.0 * SQ2 * rho * c.c1 + 4.0 * SQ2 * (rho + eta) * c.c3
            + 4.0 * (1.0 - rho - eta) * c.c4)


def ratios(c: TransitionCosts):
    """Hole-size thresholds R1 (collared beats cross) and R2 (collared beats
    edge-layer), from comparing the limit energies at optimal collar width."""
    r1 = (c.c4 - SQ2 * c.c3) / (SQ2 * c.c1 - SQ2 * c.c2 + c.c4)
    den2 = 2.0 * c.c1 - 2.0 * c.c2
    if den2 == 0.0:
        # degenerate material with equal origin costs: the edge-layer
        # comparison carries no hole-size information
        return r1, np.inf
    r2 = (c.c4 - 2.0 * c.c3) / den2
    return r1, r2


@dataclass
class RegimeReport:
    rho_star: float            # cross/edge-layer crossing, 1 - sqrt(2)/2
    r1: float
    r2: float
    escaped_candidate: bool    # collared profile ever optimal
    table: list                # (rho, winner, J_wors, J_bd, J_esc_best)


def classify_regime(c: TransitionCosts, rhos=None, neta: int = 200) -> RegimeReport:
    """Winner of the limit energies across hole sizes.

    The collared profile is minimized over collar width eta on a grid of
    ``neta`` points in [0, 1 - rho].
    """
    if rhos is None:
        rhos = np.linspace(0.01, 0.9, 90)
    r1, r2 = ratios(c)
    table = []
    esc_ever = False
    for rho in rhos:
        jw = j_inf_wors(rho, c)
        jb = j_inf_bd(rho, c)
        etas = np.linspace(0.0, 1.0 - rho, neta)
        je = np.min([j_inf_esc(rho, e, c) for e in etas])
        if je < min(jw, jb):
            winner = "ESC"
            esc_ever = True
        elif jw <= jb:
            winner = "WORS"
        else:
            winner = "BD"
        table.append((float(rho), winner, jw, jb, float(je)))
    return RegimeReport(rho_star=1.0 - SQ2 / 2.0, r1=r1, r2=r2,
                        escaped_candidate=esc_ever, table=table)
