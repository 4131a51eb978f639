"""Symmetry group of the square annulus acting on tensor fields.

The group is the dihedral group of the square combined with the z -> -z
flip: 16 orthogonal matrices R.  A field transforms by conjugation,
Q'(x) = R Q(R^-1 x) R^T; the five-component action S(R) is derived at
import time by conjugating the basis tensors, so no hand-derived sign
table enters.

Deduplication of solution records identifies two states when some group
element maps one onto the other within tolerance.  The default group for
deduplication is the subgroup preserving each pair of opposite square
edges setwise (axis mirrors, the half-turn, and their z-flips); the full
dihedral group additionally identifies solutions that differ by a quarter
turn, which exchanges physically distinct edge-layer orientations.
"""

from __future__ import annotations

import numpy as np

from .core import BASIS, BASIS_NORMS_SQ

__all__ = ["GROUP_NAMES", "AXIS_GROUP_NAMES", "component_matrix", "act", "dedup"]


def _rot(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


_PLANAR = {
    "id": np.eye(3),
    "rot90": _rot(np.pi / 2).round(12),
    "rot180": _rot(np.pi).round(12),
    "rot270": _rot(3 * np.pi / 2).round(12),
    "mx": np.diag([-1.0, 1.0, 1.0]),
    "my": np.diag([1.0, -1.0, 1.0]),
    "diag": np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
    "adiag": np.array([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
}
_ZFLIP = np.diag([1.0, 1.0, -1.0])

MATRICES = {}
for _name, _m in _PLANAR.items():
    MATRICES[_name] = _m
    MATRICES[_name + "*z"] = _ZFLIP @ _m

GROUP_NAMES = tuple(MATRICES)
AXIS_GROUP_NAMES = ("id", "mx", "my", "rot180",
                    "id*z", "mx*z", "my*z", "rot180*z")


def component_matrix(R: np.ndarray) -> np.ndarray:
    """5x5 matrix S with (S q)_i = <R E_j R^T, E_i> q_j / |E_i|^2."""
    S = np.empty((5, 5))
    for j in range(5):
        conj = R @ BASIS[j] @ R.T
        for i in range(5):
            S[i, j] = np.sum(conj * BASIS[i]) / BASIS_NORMS_SQ[i]
    return S


_COMPONENT = {name: component_matrix(m) for name, m in MATRICES.items()}


def _spatial_map(u: np.ndarray, Rinv_planar: np.ndarray) -> np.ndarray:
    """Evaluate u at R^-1 x for a signed-permutation planar block.

    Relies on the grid being the symmetric lattice x_i = -x_{n-1-i}.
    """
    a, b = Rinv_planar[0]
    c, d = Rinv_planar[1]
    out = u
    if b == 0:
        # x' = a*x, y' = d*y
        if a < 0:
            out = out[::-1, :]
        if d < 0:
            out = out[:, ::-1]
    else:
        # x' = b*y, y' = c*x : transpose then fix signs
        out = out.T
        if c < 0:
            out = out[::-1, :]
        if b < 0:
            out = out[:, ::-1]
    return out.copy()


def act(state, name: str):
    """Apply the named group element to a solution state (new state)."""
    if name not in MATRICES:
        raise KeyError(f"unknown group element {name!r}; choose from {GROUP_NAMES}")
    R = MATRICES[name]
    S = _COMPONENT[name]
    Rinv = R.T[:2, :2]
    new = state.copy()
    if state.nfields == 5:
        moved = np.stack([_spatial_map(f, Rinv) for f in state.fields])
        new.fields[:] = np.einsum("ij,jxy->ixy", S, moved)
    else:
        # reduced fields live in the (1,3) block, which every element preserves
        s1, s3 = S[0, 0], S[2, 2]
        new.fields[0] = s1 * _spatial_map(state.fields[0], Rinv)
        new.fields[1] = s3 * _spatial_map(state.fields[1], Rinv)
    return new


def orbit_distance(rec_a, rec_b, group=AXIS_GROUP_NAMES) -> float:
    """min over the group of the discrete L2 distance act(g, b) to a."""
    if rec_a.state.nfields != rec_b.state.nfields:
        return np.inf
    return min(rec_a.state.distance(act(rec_b.state, g)) for g in group)


def dedup(records, tol: float, group=AXIS_GROUP_NAMES):
    """Group solution records into symmetry classes.

    Mutates each record's ``symmetry_class`` and returns one representative
    per class (lowest energy first within ties of discovery order).
    """
    reps = []
    for rec in records:
        placed = False
        for cls, rep in enumerate(reps):
            if orbit_distance(rep, rec, group) < tol:
                rec.symmetry_class = rep.symmetry_class
                placed = True
                break
        if not placed:
            rec.symmetry_class = len(reps)
            reps.append(rec)
    return reps
