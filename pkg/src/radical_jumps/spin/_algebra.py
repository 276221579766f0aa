# mypy: disallow-untyped-defs
"""
Spin matrices and their embedding into the tensor-product Hilbert space of a radical pair.

Sites are ordered electron 1, electron 2, then the nuclei in declaration order, and Kronecker
products nest left to right, so for site dims ``(2, 2, 3)`` the global basis index of
``|a, b, c>`` is ``(a * 2 + b) * 3 + c``.

Local (single-site) matrices are dense ``numpy`` arrays; everything living on the full space
is a :class:`SparseOperator`.
"""
from typing import Union

import attr
import functools
import numpy as np
import scipy.sparse
from collections.abc import Sequence

from radical_jumps.foundation.exceptions import RadicalJumpsError

ELECTRON_SITES = (0, 1)
HERMITIAN_TOLERANCE = 1e-12


class InvalidSpinError(RadicalJumpsError):
    """
    A spin multiplicity that does not describe a spin (zero or negative).
    """


class LayoutError(RadicalJumpsError):
    """
    Operator dimensions or indices inconsistent with the Hilbert space layout.
    """


class InvalidPairError(RadicalJumpsError):
    """
    Singlet/triplet projectors requested for sites that are not two distinct spin-1/2 sites.
    """


def _ReadOnly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@attr.s(auto_attribs=True, frozen=True, eq=False)
class SpinMatricesLocal:
    """
    Angular momentum matrices of a single spin in the ``|I, m>`` basis, ``m = I ... -I``.

    Matrices are in multiples of hbar and read-only, as instances are cached and shared.
    """

    multiplicity: int
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def spin(self) -> float:
        return (self.multiplicity - 1) / 2

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.multiplicity, dtype=complex)

    def Cartesian(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.sx, self.sy, self.sz

    def Raising(self) -> np.ndarray:
        return self.sx + 1j * self.sy

    def Lowering(self) -> np.ndarray:
        return self.sx - 1j * self.sy


@functools.lru_cache(maxsize=None)
def SpinMatrices(multiplicity: int) -> SpinMatricesLocal:
    """
    Returns the spin matrices for a spin of the given multiplicity ``2I + 1``.

    :raises InvalidSpinError: if multiplicity is smaller than 1.
    """
    if multiplicity < 1:
        raise InvalidSpinError(
            f"Spin multiplicity must be at least 1, got {multiplicity}."
        )
    spin = (multiplicity - 1) / 2
    m = spin - np.arange(multiplicity)

    # <m + 1| I+ |m> sits just above the diagonal as m decreases along the basis.
    raising = np.zeros((multiplicity, multiplicity), dtype=complex)
    for row in range(multiplicity - 1):
        m_lower = m[row + 1]
        raising[row, row + 1] = np.sqrt(spin * (spin + 1) - m_lower * (m_lower + 1))
    lowering = raising.conj().T

    sx = (raising + lowering) / 2
    sy = (raising - lowering) / 2j
    sz = np.diag(m).astype(complex)
    return SpinMatricesLocal(
        multiplicity=multiplicity,
        sx=_ReadOnly(sx),
        sy=_ReadOnly(sy),
        sz=_ReadOnly(sz),
    )


def _ValidateSiteDims(
    instance: "HilbertLayout", attribute: "attr.Attribute", value: tuple[int, ...]
) -> None:
    if len(value) < len(ELECTRON_SITES):
        raise LayoutError(f"A radical pair layout needs two electron sites, got {value}.")
    for site in ELECTRON_SITES:
        if value[site] != 2:
            raise LayoutError(
                f"Electron site {site} must have multiplicity 2, got {value[site]}."
            )
    for site, dim in enumerate(value[len(ELECTRON_SITES) :], start=len(ELECTRON_SITES)):
        if dim < 1:
            raise LayoutError(f"Nuclear site {site} has invalid multiplicity {dim}.")


@attr.s(auto_attribs=True, frozen=True)
class HilbertLayout:
    """
    Ordered site multiplicities: the two electrons first, then the nuclei.
    """

    site_dims: tuple[int, ...] = attr.ib(
        converter=lambda dims: tuple(int(d) for d in dims),
        validator=_ValidateSiteDims,
    )

    @classmethod
    def ForNuclei(cls, nuclear_multiplicities: Sequence[int]) -> "HilbertLayout":
        return cls((2, 2, *nuclear_multiplicities))

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.site_dims))

    @property
    def nuclear_dims(self) -> tuple[int, ...]:
        return self.site_dims[len(ELECTRON_SITES) :]

    @property
    def nuclear_state_count(self) -> int:
        """
        Number of nuclear spin states, ``Z``; ``total_dim == 4 * Z``.
        """
        return int(np.prod(self.nuclear_dims))

    @property
    def nucleus_count(self) -> int:
        return len(self.nuclear_dims)

    def NuclearSite(self, nucleus_index: int) -> int:
        return len(ELECTRON_SITES) + nucleus_index


def _ToCsr(matrix: object) -> scipy.sparse.csr_matrix:
    csr = scipy.sparse.csr_matrix(matrix, dtype=complex)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    return csr


OperatorOrScalar = Union["SparseOperator", complex, float, int]


@attr.s(auto_attribs=True, frozen=True, eq=False)
class SparseOperator:
    """
    Square complex operator on the full Hilbert space, stored as CSR.

    ``hermitian_hint`` is a promise checked at construction: when set, ``max |A - A^H|`` must
    not exceed ``1e-12`` relative to the largest entry. Arithmetic keeps the hint only where
    Hermiticity is preserved exactly (sums of Hermitian operators, real scalings, adjoints).
    """

    matrix: scipy.sparse.csr_matrix = attr.ib(converter=_ToCsr)
    hermitian_hint: bool = False

    # Makes numpy scalars defer to the reflected operators below.
    __array_ufunc__ = None

    def __attrs_post_init__(self) -> None:
        rows, cols = self.matrix.shape
        if rows != cols:
            raise LayoutError(f"Operators must be square, got shape {self.matrix.shape}.")
        if self.hermitian_hint:
            defect = self.HermitianDefect()
            if defect > HERMITIAN_TOLERANCE * max(1.0, self.MaxAbs()):
                raise LayoutError(
                    f"Operator flagged Hermitian deviates from its adjoint by {defect:g}."
                )

    @classmethod
    def FromCoordinates(
        cls,
        dim: int,
        rows: Sequence[int],
        cols: Sequence[int],
        values: Sequence[complex],
        hermitian_hint: bool = False,
    ) -> "SparseOperator":
        """
        Assembles an operator from coordinate triplets; duplicate coordinates are summed.
        """
        row_array = np.asarray(rows, dtype=np.int64)
        col_array = np.asarray(cols, dtype=np.int64)
        value_array = np.asarray(values, dtype=complex)
        if not (row_array.shape == col_array.shape == value_array.shape):
            raise LayoutError("Coordinate arrays must have the same length.")
        for name, indices in (("row", row_array), ("column", col_array)):
            if indices.size and (indices.min() < 0 or indices.max() >= dim):
                raise LayoutError(f"A {name} index lies outside [0, {dim}).")
        coo = scipy.sparse.coo_matrix(
            (value_array, (row_array, col_array)), shape=(dim, dim)
        )
        return cls(coo.tocsr(), hermitian_hint)

    @classmethod
    def Identity(cls, dim: int) -> "SparseOperator":
        return cls(scipy.sparse.identity(dim, dtype=complex, format="csr"), True)

    @classmethod
    def Zeros(cls, dim: int) -> "SparseOperator":
        return cls(scipy.sparse.csr_matrix((dim, dim), dtype=complex), True)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def Coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self.matrix.tocoo()
        return coo.row, coo.col, coo.data

    def ToDense(self) -> np.ndarray:
        return self.matrix.toarray()

    def MaxAbs(self) -> float:
        return float(np.abs(self.matrix.data).max()) if self.matrix.nnz else 0.0

    def HermitianDefect(self) -> float:
        difference = self.matrix - self.matrix.conj().T
        return float(np.abs(difference.data).max()) if difference.nnz else 0.0

    def Adjoint(self) -> "SparseOperator":
        return SparseOperator(self.matrix.conj().T, self.hermitian_hint)

    def Apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ vector

    def Expectation(self, vector: np.ndarray) -> complex:
        """
        Returns ``<v|A|v>`` (not normalized).
        """
        return complex(np.vdot(vector, self.matrix @ vector))

    def Trace(self) -> complex:
        return complex(self.matrix.diagonal().sum())

    def _CheckDim(self, other: "SparseOperator") -> None:
        if other.dim != self.dim:
            raise LayoutError(f"Dimension mismatch: {self.dim} vs {other.dim}.")

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        self._CheckDim(other)
        return SparseOperator(
            self.matrix + other.matrix, self.hermitian_hint and other.hermitian_hint
        )

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        self._CheckDim(other)
        return SparseOperator(
            self.matrix - other.matrix, self.hermitian_hint and other.hermitian_hint
        )

    def __neg__(self) -> "SparseOperator":
        return SparseOperator(-self.matrix, self.hermitian_hint)

    def __mul__(self, scalar: complex) -> "SparseOperator":
        keeps_hermiticity = self.hermitian_hint and np.imag(scalar) == 0
        return SparseOperator(self.matrix * scalar, bool(keeps_hermiticity))

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "SparseOperator":
        return self * (1 / scalar)

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        self._CheckDim(other)
        return SparseOperator(self.matrix @ other.matrix)

    def __repr__(self) -> str:
        return (
            f"<SparseOperator dim={self.dim} nnz={self.nnz}"
            f" hermitian_hint={self.hermitian_hint}>"
        )


def EmbedSiteOperator(
    local: np.ndarray, site: int, layout: HilbertLayout
) -> SparseOperator:
    """
    Returns ``1 x ... x local x ... x 1`` with ``local`` acting on ``site``.

    :raises LayoutError: if ``local`` does not match the site dimension.
    """
    if not 0 <= site < len(layout.site_dims):
        raise LayoutError(f"Site {site} does not exist in layout {layout.site_dims}.")
    local = np.asarray(local, dtype=complex)
    site_dim = layout.site_dims[site]
    if local.shape != (site_dim, site_dim):
        raise LayoutError(
            f"Local operator of shape {local.shape} does not fit site {site}"
            f" of dimension {site_dim}."
        )
    left = int(np.prod(layout.site_dims[:site]))
    right = int(np.prod(layout.site_dims[site + 1 :]))
    embedded = scipy.sparse.kron(
        scipy.sparse.kron(scipy.sparse.identity(left, dtype=complex), local),
        scipy.sparse.identity(right, dtype=complex),
        format="csr",
    )
    is_hermitian = bool(np.allclose(local, local.conj().T, rtol=0, atol=1e-14))
    return SparseOperator(embedded, is_hermitian)


def EmbedSpinVector(
    layout: HilbertLayout, site: int
) -> tuple[SparseOperator, SparseOperator, SparseOperator]:
    """
    Returns the Cartesian spin operators ``(S_x, S_y, S_z)`` of ``site`` on the full space.
    """
    matrices = SpinMatrices(layout.site_dims[site])
    return (
        EmbedSiteOperator(matrices.sx, site, layout),
        EmbedSiteOperator(matrices.sy, site, layout),
        EmbedSiteOperator(matrices.sz, site, layout),
    )


def _CheckElectronPair(layout: HilbertLayout, electrons: tuple[int, int]) -> None:
    i, j = electrons
    if i == j:
        raise InvalidPairError(f"Projector needs two distinct sites, got {electrons}.")
    for site in electrons:
        if not 0 <= site < len(layout.site_dims) or layout.site_dims[site] != 2:
            raise InvalidPairError(
                f"Site {site} is not a spin-1/2 site of layout {layout.site_dims}."
            )


def SingletProjector(
    layout: HilbertLayout, electrons: tuple[int, int] = ELECTRON_SITES
) -> SparseOperator:
    """
    Returns ``P_S = 1/4 - S_i . S_j`` on the full space.
    """
    _CheckElectronPair(layout, electrons)
    i, j = electrons
    dot = SparseOperator.Zeros(layout.total_dim)
    for s_i, s_j in zip(EmbedSpinVector(layout, i), EmbedSpinVector(layout, j)):
        dot = dot + s_i @ s_j
    projector = 0.25 * SparseOperator.Identity(layout.total_dim) - dot
    return SparseOperator(projector.matrix, hermitian_hint=True)


def TripletProjector(
    layout: HilbertLayout, electrons: tuple[int, int] = ELECTRON_SITES
) -> SparseOperator:
    """
    Returns ``P_T = 1 - P_S``.
    """
    return SparseOperator.Identity(layout.total_dim) - SingletProjector(layout, electrons)


def ElectronSinglet() -> np.ndarray:
    """
    The two-electron singlet ``(|up,down> - |down,up>) / sqrt(2)`` in the product basis.
    """
    return np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2)
