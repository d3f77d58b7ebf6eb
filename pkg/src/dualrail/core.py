"""Composite Hilbert space bookkeeping and dense channel algebra.

All states and operators live on a tensor product of truncated modes. The
mode order is fixed by a :class:`HilbertLayout` and index arithmetic is
row-major, so the last mode varies fastest.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, NullBranchError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-9


@dataclass(frozen=True)
class HilbertLayout:
    dims: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"mode dimensions must be positive, got {self.dims}")
        labels = tuple(self.labels) or tuple(f"m{i}" for i in range(len(dims)))
        if len(labels) != len(dims):
            raise DimensionError("one label per mode required")
        if len(set(labels)) != len(labels):
            raise DimensionError(f"duplicate mode labels {labels}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def standard(cls, cavity_dim: int = 3, transmon_dim: int = 3) -> "HilbertLayout":
        """Cavity A, cavity B, transmon."""
        return cls((cavity_dim, cavity_dim, transmon_dim), ("A", "B", "T"))

    @property
    def total(self) -> int:
        return prod(self.dims)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    def mode(self, key: int | str) -> int:
        if isinstance(key, str):
            try:
                return self.labels.index(key)
            except ValueError:
                raise DimensionError(f"no mode labelled {key!r} in {self.labels}") from None
        if not 0 <= key < self.n_modes:
            raise DimensionError(f"mode index {key} out of range for {self.n_modes} modes")
        return int(key)

    def index(self, occupations: Sequence[int]) -> int:
        if len(occupations) != self.n_modes:
            raise DimensionError(f"need {self.n_modes} occupations, got {len(occupations)}")
        for n, d in zip(occupations, self.dims):
            if not 0 <= n < d:
                raise DimensionError(f"level {n} outside truncation {d}")
        return int(np.ravel_multi_index(tuple(occupations), self.dims))

    def occupations(self, index: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(index, self.dims))

    def sub(self, modes: Iterable[int]) -> "HilbertLayout":
        modes = sorted(modes)
        return HilbertLayout(tuple(self.dims[m] for m in modes),
                             tuple(self.labels[m] for m in modes))


@dataclass(frozen=True, eq=False)
class Operator:
    matrix: np.ndarray
    layout: HilbertLayout | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        if self.layout is not None and m.shape[0] != self.layout.total:
            raise DimensionError(f"operator dimension {m.shape[0]} != layout total {self.layout.total}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.layout)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.abs(self.matrix - self.matrix.conj().T).max(initial=0.0) <= tol)

    def is_unitary(self, tol: float = HERMITIAN_TOL) -> bool:
        eye = np.eye(self.dim)
        return bool(np.abs(self.matrix.conj().T @ self.matrix - eye).max() <= tol)

    def _wrap(self, other):
        if isinstance(other, Operator):
            if self.dim != other.dim:
                raise DimensionError(f"dimension mismatch {self.dim} vs {other.dim}")
            return other.matrix
        return other

    def __add__(self, other):
        if np.isscalar(other):
            return Operator(self.matrix + other * np.eye(self.dim), self.layout)
        return Operator(self.matrix + self._wrap(other), self.layout)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __neg__(self):
        return Operator(-self.matrix, self.layout)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return self @ scalar
        return Operator(self.matrix * scalar, self.layout)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.matrix / scalar, self.layout)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.matrix @ self._wrap(other), self.layout)
        if isinstance(other, Ket):
            return Ket(self.matrix @ other.vector, other.layout)
        return Operator(self.matrix @ other, self.layout)


@dataclass(frozen=True, eq=False)
class Ket:
    vector: np.ndarray
    layout: HilbertLayout

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        if v.shape[0] != self.layout.total:
            raise DimensionError(f"ket length {v.shape[0]} != layout total {self.layout.total}")
        object.__setattr__(self, "vector", v)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def dm(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.vector, self.vector.conj()), self.layout)

    def __add__(self, other: "Ket") -> "Ket":
        return Ket(self.vector + other.vector, self.layout)

    def __mul__(self, scalar) -> "Ket":
        return Ket(self.vector * scalar, self.layout)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Ket":
        return Ket(self.vector / scalar, self.layout)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    layout: HilbertLayout

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.layout.total, self.layout.total):
            raise DimensionError(f"density matrix shape {m.shape} does not match layout {self.layout.dims}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(hermitize(self.matrix)).min())

    def is_valid(self, trace_tol: float = TRACE_TOL, pos_tol: float = POSITIVITY_TOL) -> bool:
        herm = np.abs(self.matrix - self.matrix.conj().T).max() <= HERMITIAN_TOL
        return bool(herm and abs(self.trace() - 1) <= trace_tol
                    and self.min_eigenvalue() >= -pos_tol)

    def normalized(self) -> "DensityMatrix":
        tr = self.trace()
        if tr <= 0:
            raise NullBranchError("cannot normalize a state with zero trace")
        return DensityMatrix(self.matrix / tr, self.layout)

    def expect(self, op: Operator | np.ndarray) -> complex:
        m = op.matrix if isinstance(op, Operator) else np.asarray(op)
        return complex(np.trace(m @ self.matrix))


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def annihilation(dim: int) -> np.ndarray:
    if dim < 2:
        raise DimensionError(f"ladder operator needs dim >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim)).astype(complex)


def level_op(dim: int, i: int, j: int) -> np.ndarray:
    """|i><j| on a single mode."""
    if not (0 <= i < dim and 0 <= j < dim):
        raise DimensionError(f"levels ({i}, {j}) outside dimension {dim}")
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def embed(layout: HilbertLayout, mode: int | str, op) -> Operator:
    mode = layout.mode(mode)
    m = op.matrix if isinstance(op, Operator) else np.asarray(op, dtype=complex)
    if m.shape != (layout.dims[mode], layout.dims[mode]):
        raise DimensionError(f"operator of shape {m.shape} does not fit mode {layout.labels[mode]} "
                             f"of dimension {layout.dims[mode]}")
    left = prod(layout.dims[:mode])
    right = prod(layout.dims[mode + 1:])
    return Operator(np.kron(np.kron(np.eye(left), m), np.eye(right)), layout)


def identity(layout: HilbertLayout) -> Operator:
    return Operator(np.eye(layout.total, dtype=complex), layout)


def basis_ket(layout: HilbertLayout, occupations: Sequence[int]) -> Ket:
    v = np.zeros(layout.total, dtype=complex)
    v[layout.index(occupations)] = 1.0
    return Ket(v, layout)


def tensor_kets(layout: HilbertLayout, factors: Sequence[np.ndarray]) -> Ket:
    v = np.ones(1, dtype=complex)
    for f, d in zip(factors, layout.dims):
        f = np.asarray(f, dtype=complex)
        if f.shape != (d,):
            raise DimensionError(f"factor of shape {f.shape} does not fit dimension {d}")
        v = np.kron(v, f)
    return Ket(v, layout)


def permute_modes(layout: HilbertLayout, perm: Sequence[int]) -> Operator:
    """Unitary that moves the content of mode ``perm[k]`` into mode ``k``.

    Only modes of equal dimension may be exchanged.
    """
    perm = list(perm)
    if sorted(perm) != list(range(layout.n_modes)):
        raise DimensionError(f"{perm} is not a permutation of the modes")
    if any(layout.dims[k] != layout.dims[p] for k, p in enumerate(perm)):
        raise DimensionError("can only permute modes of equal dimension")
    idx = np.arange(layout.total).reshape(layout.dims)
    # new[..n_k..] = old[..n_{perm^-1}..]
    src = np.transpose(idx, perm).reshape(-1)
    u = np.zeros((layout.total, layout.total), dtype=complex)
    u[idx.reshape(-1), src] = 1.0
    return Operator(u, layout)


def partial_trace(rho: DensityMatrix, keep: Iterable[int | str]) -> DensityMatrix:
    layout = rho.layout
    keep = sorted({layout.mode(k) for k in keep})
    if not keep:
        raise DimensionError("partial trace needs at least one mode to keep")
    n = layout.n_modes
    t = rho.matrix.reshape(layout.dims + layout.dims)
    traced = [m for m in range(n) if m not in keep]
    # contract row/column indices of traced modes pairwise
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = [letters[i] for i in range(n)]
    cols = [letters[n + i] if i in keep else letters[i] for i in range(n)]
    out = [rows[i] for i in keep] + [cols[i] for i in keep]
    expr = "".join(rows) + "".join(cols) + "->" + "".join(out)
    sub = layout.sub(keep)
    red = np.einsum(expr, t).reshape(sub.total, sub.total)
    return DensityMatrix(red, sub)


def apply_kraus(rho: DensityMatrix, kraus: Sequence, normalize: bool = True
                ) -> tuple[DensityMatrix, float]:
    """Apply sum_k E rho E^dag; returns the state and its pre-normalization trace."""
    mats = [k.matrix if isinstance(k, Operator) else np.asarray(k, dtype=complex) for k in kraus]
    for m in mats:
        if m.shape != rho.matrix.shape:
            raise DimensionError(f"Kraus operator shape {m.shape} != state shape {rho.matrix.shape}")
    out = np.zeros_like(rho.matrix)
    for m in mats:
        out += m @ rho.matrix @ m.conj().T
    out = hermitize(out)
    prob = float(np.trace(out).real)
    if normalize:
        if prob <= 0:
            raise NullBranchError("Kraus branch has zero probability")
        out = out / prob
    return DensityMatrix(out, rho.layout), prob


def apply_unitary(rho: DensityMatrix, u) -> DensityMatrix:
    m = u.matrix if isinstance(u, Operator) else np.asarray(u)
    return DensityMatrix(hermitize(m @ rho.matrix @ m.conj().T), rho.layout)


def state_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Overlap Tr[rho sigma]; equals the fidelity when either state is pure."""
    if rho.matrix.shape != sigma.matrix.shape:
        raise DimensionError(f"shape mismatch {rho.matrix.shape} vs {sigma.matrix.shape}")
    val = np.trace(rho.matrix @ sigma.matrix)
    return float(min(1.0, max(0.0, val.real)))


def kraus_completeness(kraus: Sequence) -> float:
    """max |sum E^dag E - I|."""
    mats = [k.matrix if isinstance(k, Operator) else np.asarray(k) for k in kraus]
    s = sum(m.conj().T @ m for m in mats)
    return float(np.abs(s - np.eye(s.shape[0])).max())


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
