"""Brute-force verification path for the closed-form eigenvalue machinery.

Everything here is rebuilt from first principles: the joint covariance of
(Bob's conditioning mode, stored output, kept EPR half) is assembled directly
from the linear input-output relations, conditioning is a generic Schur
complement on the measured quadrature, and symplectic eigenvalues come from a
numeric eigensolver.  Accuracy over speed; tests and the ``verify`` command
are the only consumers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import BranchParams, make_branch
from .qkd import (AncillaCase, NoiseModel, NumericDomainError, TwoModeCov,
                  conditional_cov, symplectic_eigs_conditional,
                  symplectic_eigs_unconditional)

PAIR_TOL = 1e-7  # relative tolerance for the +/- eigenvalue pairing

_Z = np.diag([1.0, -1.0])
_OMEGA4 = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _mode_coefficients(case: AncillaCase, b: BranchParams
                       ) -> tuple[complex, complex, complex, complex]:
    """(signal, probe) coefficients of Bob's conditioning mode and of the
    stored output mode."""
    if case is AncillaCase.DIRECT:
        c_ba: complex = math.sqrt(b.beta_d)
        c_be: complex = math.sqrt(1.0 - b.beta_d)
        c_oa: complex = -math.sqrt(1.0 - b.beta_d)
        c_oe: complex = math.sqrt(b.beta_d)
    else:
        c_ba, c_be = b.alpha, b.gamma
        if case is AncillaCase.ALICE_RIS:
            c_oa = -math.sqrt(1.0 - b.beta_g)
            c_oe = math.sqrt(b.beta_g)
        else:
            c_oa = -math.sqrt((1.0 - b.beta_f) * b.beta_g) * np.exp(1j * b.phi)
            c_oe = b.beta_f_tilde
    return c_ba, c_be, c_oa, c_oe


def joint_cov(case: AncillaCase, b: BranchParams, n: NoiseModel) -> np.ndarray:
    """6x6 Hermitian covariance over (conditioning mode, output, EPR half).

    Signal-borne correlations carry the identity quadrature structure; the
    EPR cross term carries the Pauli-z structure with strength
    sqrt(v_e^2 - 1).
    """
    c_ba, c_be, c_oa, c_oe = _mode_coefficients(case, b)
    v_a, v_e = n.v_a, n.v_e
    epr = math.sqrt(v_e ** 2 - 1.0)
    j = np.zeros((6, 6), dtype=complex)
    eye = np.eye(2)

    def put(r, c, block):
        j[2 * r: 2 * r + 2, 2 * c: 2 * c + 2] = block
        if r != c:
            j[2 * c: 2 * c + 2, 2 * r: 2 * r + 2] = block.conj().T

    put(0, 0, ((abs(c_ba) ** 2) * v_a + (abs(c_be) ** 2) * v_e) * eye)
    put(1, 1, ((abs(c_oa) ** 2) * v_a + (abs(c_oe) ** 2) * v_e) * eye)
    put(2, 2, v_e * eye)
    put(1, 0, (c_oa * np.conj(c_ba) * v_a + c_oe * np.conj(c_be) * v_e) * eye)
    put(2, 0, np.conj(c_be) * epr * _Z)
    put(1, 2, c_oe * epr * _Z)
    return j


def conditional_cov_oracle(case: AncillaCase, b: BranchParams,
                           n: NoiseModel) -> np.ndarray:
    """Condition the stored pair on the measured quadrature of Bob's mode.

    Extracts the cross-covariance block verbatim from the joint matrix and
    subtracts the rank-one update selecting the measured quadrature.
    """
    j = joint_cov(case, b, n)
    v_b = j[0, 0].real
    if v_b <= 0.0:
        raise NumericDomainError("conditioning variance is zero")
    sigma_e = j[2:, 2:]
    w = j[2:, :2]
    m = np.diag([1.0, 0.0]).astype(complex)
    return sigma_e - (w @ m @ w.conj().T) / v_b


def _paired(mags: np.ndarray) -> tuple[float, float]:
    mags = np.sort(mags)[::-1]
    scale = max(mags[0], 1.0)
    if abs(mags[0] - mags[1]) > PAIR_TOL * scale or \
            abs(mags[2] - mags[3]) > PAIR_TOL * max(mags[2], 1.0):
        raise NumericDomainError(
            f"eigenvalues do not pair within tolerance: {mags}")
    return 0.5 * (mags[0] + mags[1]), 0.5 * (mags[2] + mags[3])


def numeric_symplectic_eigs(k: np.ndarray) -> tuple[float, float]:
    """Symplectic eigenvalues of a 4x4 Hermitian covariance.

    Computed as the eigenvalues of K^(1/2) (j Omega) K^(1/2), which shares
    the spectrum of j*Omega*K but is Hermitian, so a stable solver applies.
    The small eigenvalue is refined through an exact determinant when it is
    tiny relative to the large one.
    """
    k = np.asarray(k, dtype=complex)
    if k.shape != (4, 4):
        raise ValueError("covariance must be 4x4")
    if not np.allclose(k, k.conj().T, rtol=0.0, atol=1e-10 * max(1.0, float(np.abs(k).max()))):
        raise ValueError("covariance must be Hermitian")
    try:
        vals, vecs = np.linalg.eigh(k)
    except np.linalg.LinAlgError as exc:
        raise NumericDomainError(f"eigensolver failed: {exc}") from exc
    vals = np.maximum(vals, 0.0)
    root = (vecs * np.sqrt(vals)) @ vecs.conj().T
    herm = root @ (1j * _OMEGA4) @ root
    herm = 0.5 * (herm + herm.conj().T)
    lam = np.abs(np.linalg.eigvalsh(herm))
    lam1, lam2 = _paired(lam)
    if lam1 > 0.0 and lam2 < 1e-2 * lam1:
        lam2 = _small_eig_from_det(k, lam1)
    return lam1, lam2


def numeric_symplectic_eigs_direct(k: np.ndarray) -> tuple[float, float]:
    """Same spectrum through the non-Hermitian route |eig(j*Omega*K)|."""
    k = np.asarray(k, dtype=complex)
    try:
        lam = np.abs(np.linalg.eigvals(1j * _OMEGA4 @ k))
    except np.linalg.LinAlgError as exc:
        raise NumericDomainError(f"eigensolver failed: {exc}") from exc
    return _paired(lam)


def _small_eig_from_det(k: np.ndarray, lam1: float) -> float:
    """Recover the small symplectic eigenvalue from det(K) = (lam1*lam2)^2.

    The determinant is evaluated in extended precision so the result stays
    accurate when the covariance is nearly singular.
    """
    import mpmath as mp

    with mp.workdps(50):
        m = mp.matrix(4, 4)
        for r in range(4):
            for c in range(4):
                m[r, c] = mp.mpc(k[r, c].real, k[r, c].imag)
        det = mp.det(m)
        value = abs(mp.sqrt(abs(det)))
    return float(value) / lam1


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_deviation: float
    tolerance: float
    passed: bool
    draws: int


def _rel_dev(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def random_branch(rng: np.random.Generator) -> tuple[BranchParams, NoiseModel]:
    """One parameter draw of the standard verification grid."""
    b = make_branch(beta_d=rng.uniform(0.0, 1.0), beta_g=rng.uniform(0.0, 1.0),
                    beta_f=rng.uniform(0.0, 1.0), phi=rng.uniform(0.0, 2.0 * math.pi))
    n = NoiseModel.from_link(1e13, 300.0, v_s=rng.uniform(1.0, 2000.0),
                             v_e=rng.uniform(1.0, 20.0))
    return b, n


def run_verification(draws: int, seed: int = 42, perturb=None) -> list[CheckResult]:
    """Closed forms versus the numeric oracle over a seeded random grid.

    Three checks per storage case: unconditional eigenvalues against the
    covariance eigensolver, conditional eigenvalues against the
    Schur-complement pipeline, and the conditional block matrix itself.
    ``perturb(case_tag, (lam1, lam2, lam3, lam4))`` may rewrite the
    closed-form eigenvalues (fault-injection hook for tests).
    """
    tol = 1e-8
    rng = np.random.default_rng(seed)
    names = [f"{kind}[{case.value}]"
             for case in AncillaCase
             for kind in ("eigs_unconditional", "eigs_conditional", "cond_blocks")]
    worst = {name: 0.0 for name in names}
    for _ in range(draws):
        b, n = random_branch(rng)
        for case in AncillaCase:
            closed_u = symplectic_eigs_unconditional(case, b, n)
            closed_c = symplectic_eigs_conditional(case, b, n)
            if perturb is not None:
                closed_u, closed_c = _apply_perturb(perturb, case, closed_u, closed_c)
            oracle_u = numeric_symplectic_eigs(
                TwoModeCov(eve_output_variance_oracle(case, b, n), n.v_e,
                           v_corr_oracle(case, b, n)).as_matrix())
            cond_matrix = conditional_cov_oracle(case, b, n)
            oracle_c = numeric_symplectic_eigs(cond_matrix)
            dev_u = max(_rel_dev(closed_u[0], oracle_u[0]),
                        _rel_dev(closed_u[1], oracle_u[1]))
            dev_c = max(_rel_dev(closed_c[0], oracle_c[0]),
                        _rel_dev(closed_c[1], oracle_c[1]))
            block = conditional_cov(case, b, n).as_matrix()
            scale = max(1.0, float(np.abs(cond_matrix).max()))
            dev_b = float(np.abs(block - cond_matrix).max()) / scale
            key = f"eigs_unconditional[{case.value}]"
            worst[key] = max(worst[key], dev_u)
            key = f"eigs_conditional[{case.value}]"
            worst[key] = max(worst[key], dev_c)
            key = f"cond_blocks[{case.value}]"
            worst[key] = max(worst[key], dev_b)
    return [CheckResult(name=name, max_deviation=worst[name], tolerance=tol,
                        passed=(draws == 0 or worst[name] < tol), draws=draws)
            for name in names]


def _apply_perturb(perturb, case, closed_u, closed_c):
    lams = perturb(case.value, closed_u + closed_c)
    return (lams[0], lams[1]), (lams[2], lams[3])


def eve_output_variance_oracle(case: AncillaCase, b: BranchParams,
                               n: NoiseModel) -> float:
    """Stored-output variance recomputed from the raw mode coefficients."""
    _, _, c_oa, c_oe = _mode_coefficients(case, b)
    return (abs(c_oa) ** 2) * n.v_a + (abs(c_oe) ** 2) * n.v_e


def v_corr_oracle(case: AncillaCase, b: BranchParams, n: NoiseModel) -> complex:
    """Output/EPR-half cross term recomputed from the raw mode coefficients."""
    _, _, _, c_oe = _mode_coefficients(case, b)
    return c_oe * math.sqrt(n.v_e ** 2 - 1.0)
