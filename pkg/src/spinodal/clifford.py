"""Complex matrix representations of the Clifford algebra Cl(n).

Convention: gammas are skew-adjoint and satisfy

    gamma_i gamma_j + gamma_j gamma_i = -2 delta_ij I.

They are built as ``i * e_j`` where ``e_j`` are Hermitian Euclidean gammas
(``e_i e_j + e_j e_i = 2 delta_ij``) obtained by the usual doubling
recursion from the Pauli pair.  Odd dimensions append the chirality
element of the preceding even dimension.  The Hermitian inner product
``<a, b> = sum a_k conj(b_k)`` is conjugate-linear in the second slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from spinodal.errors import InvalidDimensionError, ShapeError

_S1 = np.array([[0, 1], [1, 0]], dtype=complex)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_S3 = np.array([[1, 0], [0, -1]], dtype=complex)


def _hermitian_gammas(n: int) -> list[np.ndarray]:
    gam = [_S1, _S2]
    d = 2
    while d + 2 <= n:
        eye = np.eye(gam[0].shape[0], dtype=complex)
        gam = [np.kron(_S1, g) for g in gam] + [np.kron(_S2, eye), np.kron(_S3, eye)]
        d += 2
    if d < n:
        chirality = (1j) ** (d // 2) * gam[0]
        for g in gam[1:]:
            chirality = chirality @ g
        gam = gam + [chirality]
    return gam


@dataclass(frozen=True, eq=False)
class CliffordRep:
    """Dimension-n gamma matrices acting on C^N, N = 2**(n // 2)."""

    n: int
    fiber_dim: int
    gammas: np.ndarray  # shape (n, N, N)

    def gamma(self, v) -> np.ndarray:
        """Return gamma(v) = sum_i v_i gamma_i; ``v`` may be batched (..., n)."""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.n:
            raise ShapeError(f"vector has {v.shape[-1]} entries, expected {self.n}")
        return np.tensordot(v, self.gammas, axes=([-1], [0]))

    def residuals(self) -> dict[str, float]:
        """Max entrywise Clifford-relation and skew-adjointness residuals."""
        eye = np.eye(self.fiber_dim)
        clif = 0.0
        skew = 0.0
        for i in range(self.n):
            gi = self.gammas[i]
            skew = max(skew, float(np.max(np.abs(gi.conj().T + gi))))
            for j in range(self.n):
                anti = gi @ self.gammas[j] + self.gammas[j] @ gi
                target = -2.0 * eye if i == j else 0.0 * eye
                clif = max(clif, float(np.max(np.abs(anti - target))))
        return {"clifford": clif, "skew_adjoint": skew}


def build_clifford_rep(n: int) -> CliffordRep:
    if int(n) != n or n < 2:
        raise InvalidDimensionError(f"Clifford representation needs integer n >= 2, got {n!r}")
    n = int(n)
    gammas = np.stack([1j * e for e in _hermitian_gammas(n)])
    gammas.setflags(write=False)
    return CliffordRep(n=n, fiber_dim=gammas.shape[1], gammas=gammas)


def clifford_mul(rep: CliffordRep, v, psi) -> np.ndarray:
    """Clifford multiplication gamma(v) psi.

    Both arguments may carry matching leading batch dimensions.
    """
    v = np.asarray(v, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    if v.shape[-1] != rep.n:
        raise ShapeError(f"vector has {v.shape[-1]} entries, expected {rep.n}")
    if psi.shape[-1] != rep.fiber_dim:
        raise ShapeError(f"spinor has {psi.shape[-1]} entries, expected {rep.fiber_dim}")
    return np.einsum("...i,ijk,...k->...j", v, rep.gammas, psi)


def hermitian(a, b) -> np.ndarray:
    """<a, b> = sum_k a_k conj(b_k) over the last axis."""
    return np.sum(np.asarray(a) * np.conj(b), axis=-1)
