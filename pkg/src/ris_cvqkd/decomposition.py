"""SVD decomposition of the channel triple into parallel beamsplitter branches.

Each channel matrix H = U D V^H yields per-branch power transmissivities
(squared singular values).  Branch i pairs the i-th strongest singular value
of each of the three channels; the RIS common phase and the derived complex
coefficients of the reflected path are attached per branch.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelTriple, RisGeometry

RANK_CUTOFF = 1e-12  # relative to the largest singular value


class PhysicalityError(ValueError):
    """A transmissivity left the [0, 1] beamsplitter range under strict policy."""


@dataclass(frozen=True)
class SvdBundle:
    """Full SVD record of one channel matrix."""

    u: np.ndarray
    d: np.ndarray  # rectangular, sqrt(transmissivities) on the diagonal
    v: np.ndarray
    s: np.ndarray  # residual tap matrix, sqrt(1 - beta) then ones
    rank: int

    @property
    def betas(self) -> np.ndarray:
        """Squared singular values of the first ``rank`` branches."""
        r = self.rank
        return np.square(np.diagonal(self.d)[:r].real)


@dataclass(frozen=True)
class BranchParams:
    """Scalar model of one parallel branch.

    ``alpha`` and ``gamma`` are the signal and probe coefficients of the
    reflected path at the receiver; ``beta_f_tilde`` is the probe coefficient
    of the eavesdropper tap on the RIS-to-receiver hop.
    """

    beta_d: float
    beta_g: float
    beta_f: float
    phi: float
    alpha: complex
    gamma: complex
    beta_f_tilde: complex
    branch_index: int = 1


def make_branch(beta_d: float, beta_g: float, beta_f: float, phi: float,
                index: int = 1) -> BranchParams:
    """Build a branch record from raw transmissivities and the common phase."""
    for name, b in (("beta_d", beta_d), ("beta_g", beta_g), ("beta_f", beta_f)):
        if not 0.0 <= b <= 1.0:
            raise ValueError(f"{name}={b} outside [0, 1]")
    rot = cmath.exp(1j * phi)
    alpha = math.sqrt(beta_g * beta_f) * rot
    gamma = math.sqrt(1.0 - beta_f) + math.sqrt(beta_f * (1.0 - beta_g)) * rot
    beta_f_tilde = math.sqrt(beta_f) - math.sqrt((1.0 - beta_g) * (1.0 - beta_f)) * rot
    return BranchParams(beta_d=beta_d, beta_g=beta_g, beta_f=beta_f, phi=phi,
                        alpha=alpha, gamma=gamma, beta_f_tilde=beta_f_tilde,
                        branch_index=index)


def _effective_rank(singular_values: np.ndarray) -> int:
    if singular_values.size == 0 or singular_values[0] <= 0.0:
        return 0
    return int(np.count_nonzero(singular_values > RANK_CUTOFF * singular_values[0]))


def _decompose_one(h: np.ndarray) -> SvdBundle:
    h = np.asarray(h, dtype=complex)
    try:
        u, sv, vh = np.linalg.svd(h, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"SVD did not converge: {exc}") from exc
    r_x, t_x = h.shape
    n_min = min(r_x, t_x)
    d = np.zeros((r_x, t_x))
    d[:n_min, :n_min] = np.diag(sv)
    rank = _effective_rank(sv)
    # residual diagonal: sqrt(1 - beta) on ranked slots, 1 afterwards;
    # beta > 1 slots are floored at 0 (physicality handled downstream)
    s_diag = np.ones(n_min)
    s_diag[:rank] = np.sqrt(np.maximum(0.0, 1.0 - sv[:rank] ** 2))
    return SvdBundle(u=u, d=d, v=vh.conj().T, s=np.diag(s_diag), rank=rank)


def decompose(t: ChannelTriple) -> tuple[SvdBundle, SvdBundle, SvdBundle]:
    """SVD of all three channels, singular values sorted descending."""
    return _decompose_one(t.h_d), _decompose_one(t.h_g), _decompose_one(t.h_f)


def branch_params(bundles: tuple[SvdBundle, SvdBundle, SvdBundle],
                  ris: RisGeometry, clamp_policy: str = "clamp",
                  ) -> tuple[list[BranchParams], int]:
    """Pair the branches of the three channels and derive per-branch coefficients.

    The branch count is the smallest effective rank among the three channels.
    Transmissivities above 1 (possible at short range with large array gains)
    are clamped to 1 under the default policy, with the number of clamped
    values returned; ``clamp_policy="strict"`` raises instead.

    Returns (branches, clamp_count).
    """
    if clamp_policy not in ("clamp", "strict"):
        raise ValueError(f"unknown clamp_policy {clamp_policy!r}")
    b_d, b_g, b_f = bundles
    r = min(b.rank for b in bundles)
    clamped = 0
    branches: list[BranchParams] = []
    for i in range(r):
        raw = [b_d.betas[i], b_g.betas[i], b_f.betas[i]]
        fixed = []
        for value in raw:
            if value > 1.0:
                if clamp_policy == "strict" and value > 1.0 + 1e-12:
                    raise PhysicalityError(
                        f"branch {i + 1} transmissivity {value} exceeds 1")
                if value > 1.0 + 1e-12:
                    clamped += 1
                value = 1.0
            fixed.append(value)
        branches.append(make_branch(fixed[0], fixed[1], fixed[2],
                                    ris.common_phase, index=i + 1))
    return branches, clamped
