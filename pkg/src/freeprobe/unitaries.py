"""Finite families of unitary matrices, Haar sampling and JSON I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInput

UNITARITY_TOL = 1e-10


def haar_sample(d: int, seed: int | None = None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Haar-distributed d x d unitary.

    QR of a complex Ginibre matrix, with the columns of Q rescaled by the
    phases of diag(R) so the result does not depend on the QR convention.
    """
    if d < 1:
        raise InvalidInput(f"dimension must be >= 1, got {d}")
    if rng is None:
        rng = np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))


@dataclass(frozen=True)
class UnitaryFamily:
    """N unitaries u_1..u_N of common size d, stacked as an (N, d, d) array."""

    matrices: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=np.complex128)
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise InvalidInput(f"expected an (N, d, d) stack of matrices, got shape {m.shape}")
        if m.shape[0] < 1:
            raise InvalidInput("family is empty")
        for i, u in enumerate(m):
            defect = unitarity_defect(u)
            if defect > UNITARITY_TOL:
                raise InvalidInput(
                    f"matrix {i + 1} is not unitary: max |UU* - I| = {defect:.3e}"
                )
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)

    @property
    def rank(self) -> int:
        return self.matrices.shape[0]

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @classmethod
    def haar(cls, d: int, rank: int, seed: int | None = None) -> "UnitaryFamily":
        rng = np.random.default_rng(seed)
        return cls(np.stack([haar_sample(d, rng=rng) for _ in range(rank)]))

    @classmethod
    def identity(cls, d: int, rank: int) -> "UnitaryFamily":
        return cls(np.stack([np.eye(d, dtype=np.complex128)] * rank))

    @classmethod
    def near_identity(cls, d: int, rank: int, scale: float, seed: int | None = None) -> "UnitaryFamily":
        """exp(i * scale * H) for random Hermitian H of unit spectral norm."""
        rng = np.random.default_rng(seed)
        mats = []
        for _ in range(rank):
            a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            h = (a + a.conj().T) / 2
            w, v = np.linalg.eigh(h)
            w = w / max(np.max(np.abs(w)), 1e-300)
            mats.append((v * np.exp(1j * scale * w)) @ v.conj().T)
        return cls(np.stack(mats))

    def word_matrix(self, word) -> np.ndarray:
        """Product of u_i (letter +i) and u_i^* (letter -i) along the word."""
        out = np.eye(self.dim, dtype=np.complex128)
        for x in word:
            u = self.matrices[abs(x) - 1]
            out = out @ (u if x > 0 else u.conj().T)
        return out

    # -- JSON ------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "N": self.rank,
            "d": self.dim,
            "matrices": [
                [[float(z.real), float(z.imag)] for z in u.reshape(-1)]
                for u in self.matrices
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "UnitaryFamily":
        try:
            rank, d = int(data["N"]), int(data["d"])
            raw = data["matrices"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed unitary family: {exc}") from None
        if len(raw) != rank:
            raise InvalidInput(f"declared N={rank} but {len(raw)} matrices given")
        mats = []
        for i, entries in enumerate(raw):
            if len(entries) != d * d:
                raise InvalidInput(f"matrix {i + 1} has {len(entries)} entries, expected {d * d}")
            try:
                flat = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
            except (TypeError, ValueError):
                raise InvalidInput(f"matrix {i + 1}: entries must be [re, im] pairs") from None
            mats.append(flat.reshape(d, d))
        return cls(np.stack(mats))

    @classmethod
    def load(cls, path) -> "UnitaryFamily":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read unitary family {path}: {exc}") from None
        return cls.from_json(data)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))
