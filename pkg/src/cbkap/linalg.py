"""Exact linear algebra over GF(2^m) on vectorized n x n matrices.

Provides spans, multiplicative algebra closure with witness words,
membership-constrained linear solving, and invertible-solution sampling.
Matrices are vectorized row-major to length n^2; every computation is
exact Gaussian elimination over the field.

A witnessed basis keeps each basis matrix together with the braid word
that evaluates to it (all witnesses are pure words: their permutation
part is the identity).  Internally it maintains a row-reduced echelon
copy plus the change-of-basis transform, so membership tests and
coefficient extraction stay O(dim * n^2) while the raw matrices and
their witnesses are preserved verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np

from .braid import BraidWord
from .field import GF2m

__all__ = [
    "NotInSpan",
    "NoSolution",
    "InvertibleSampleFailed",
    "WitnessedBasis",
    "span_basis",
    "AlgebraClosure",
    "algebra_closure",
    "SolutionSpace",
    "solve_membership",
    "sample_invertible",
]


class NotInSpan(ValueError):
    """The matrix is outside the span of the basis."""


class NoSolution(ValueError):
    """The membership system admits no usable solution."""


class InvertibleSampleFailed(RuntimeError):
    """No invertible combination was found within the try budget."""


class WitnessedBasis:
    """Linearly independent matrices, each optionally carrying a witness
    braid word that evaluates to it with identity permutation part."""

    def __init__(self, field: GF2m, n: int):
        self.field = field
        self.n = n
        self.mats: list[np.ndarray] = []
        self.witnesses: list[BraidWord | None] = []
        self._rows: list[np.ndarray] = []  # echelon rows, pivot normalized to 1
        self._pivots: list[int] = []
        self._tf: list[np.ndarray] = []  # echelon row i = sum_j tf[i][j] * raw vec j

    @property
    def dim(self) -> int:
        return len(self.mats)

    def _reduce(self, vec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Reduce vec against the echelon rows; returns (residual, combo)."""
        fld = self.field
        v = vec.copy()
        combo = np.zeros(len(self._rows), dtype=fld.dtype)
        for j, (row, piv) in enumerate(zip(self._rows, self._pivots)):
            a = int(v[piv])
            if a:
                v ^= fld.mul_vec(row, a)
                combo[j] = a
        return v, combo

    def add(self, mat: np.ndarray, witness: BraidWord | None = None) -> bool:
        """Sift a matrix in; returns True when the dimension grew."""
        fld = self.field
        vec = mat.reshape(-1).astype(fld.dtype)
        residual, combo = self._reduce(vec)
        nz = np.nonzero(residual)[0]
        if nz.size == 0:
            return False
        piv = int(nz[0])
        inv_piv = fld.inv(int(residual[piv]))
        k = len(self._rows)
        # new echelon row = inv_piv * (raw_new - combo . echelon rows)
        tf_row = np.zeros(k + 1, dtype=fld.dtype)
        tf_row[k] = inv_piv
        if k:
            back = np.zeros(k, dtype=fld.dtype)
            for j, c in enumerate(combo):
                if c:
                    back ^= fld.mul_vec(self._tf[j], int(c))
            tf_row[:k] = fld.mul_vec(back, inv_piv)
        self._tf = [np.concatenate([row, np.zeros(1, dtype=fld.dtype)]) for row in self._tf]
        self._tf.append(tf_row)
        self._rows.append(fld.mul_vec(residual, inv_piv))
        self._pivots.append(piv)
        self.mats.append(mat.astype(fld.dtype))
        self.witnesses.append(witness)
        return True

    def __contains__(self, mat: np.ndarray) -> bool:
        residual, _ = self._reduce(mat.reshape(-1).astype(self.field.dtype))
        return not residual.any()

    def express(self, mat: np.ndarray) -> np.ndarray:
        """Coefficients over the raw basis matrices, exact.

        Raises NotInSpan when the matrix lies outside the span.
        """
        fld = self.field
        residual, combo = self._reduce(mat.reshape(-1).astype(fld.dtype))
        if residual.any():
            raise NotInSpan("matrix is outside the span of the basis")
        out = np.zeros(self.dim, dtype=fld.dtype)
        for j, c in enumerate(combo):
            if c:
                out ^= fld.mul_vec(self._tf[j], int(c))
        return out

    def combine(self, coeffs: Sequence[int]) -> np.ndarray:
        """The matrix sum of coeff_i * basis_i."""
        fld = self.field
        out = fld.zeros(self.n)
        for c, m in zip(coeffs, self.mats):
            if c:
                out ^= fld.mul_vec(m, int(c))
        return out


def span_basis(mats: Iterable[np.ndarray], field: GF2m) -> tuple[list[np.ndarray], int]:
    """Maximal linearly independent sublist in first-seen order, and its size."""
    basis = None
    kept = []
    for m in mats:
        if basis is None:
            basis = WitnessedBasis(field, m.shape[0])
        if basis.add(m):
            kept.append(m)
    return kept, len(kept)


class AlgebraClosure:
    """A witnessed basis kept closed under products with its generators.

    Contains the identity (empty witness) and every added generator, and
    multiplies each basis element by each productive generator on both
    sides until no product leaves the span.  Products of pure witnesses
    concatenate, so closure preserves pure witnesses.  Generators already
    inside the span contribute nothing new and are skipped.

    Each basis element also records how it was formed (identity, a
    generator, or a one-sided product of a generator with an earlier
    element).  Evaluating a pure word under a permuted variable
    assignment is multiplicative over concatenation, so these recipes let
    callers rebuild every basis matrix under a twisted assignment from
    the twisted generator images alone, without re-streaming the
    concatenated witness words.
    """

    def __init__(self, field: GF2m, n: int, witnessed: bool = True):
        self.basis = WitnessedBasis(field, n)
        self.generators: list[tuple[np.ndarray, BraidWord | None]] = []
        # per basis element: ("one",) | ("gen", gi) | ("gb", gi, bi) | ("bg", bi, gi)
        self.recipes: list[tuple] = []
        self._done: list[int] = []  # per generator: basis size already multiplied
        self.basis.add(field.identity(n), BraidWord() if witnessed else None)
        self.recipes.append(("one",))

    @property
    def dim(self) -> int:
        return self.basis.dim

    def add_generator(self, mat: np.ndarray, witness: BraidWord | None = None) -> bool:
        """Add a generator and restore closure; True if the span grew."""
        if not self.basis.add(mat, witness):
            return False
        self.generators.append((mat, witness))
        self.recipes.append(("gen", len(self.generators) - 1))
        self._done.append(0)
        self._drain()
        return True

    def _drain(self) -> None:
        fld = self.basis.field
        progress = True
        while progress:
            progress = False
            for gi, (gmat, gwit) in enumerate(self.generators):
                start = self._done[gi]
                size = self.basis.dim
                if start >= size:
                    continue
                progress = True
                for bi in range(start, size):
                    bmat = self.basis.mats[bi]
                    bwit = self.basis.witnesses[bi]
                    lwit = rwit = None
                    if gwit is not None and bwit is not None:
                        lwit = gwit + bwit
                        rwit = bwit + gwit
                    if self.basis.add(fld.mat_mul(gmat, bmat), lwit):
                        self.recipes.append(("gb", gi, bi))
                    if self.basis.add(fld.mat_mul(bmat, gmat), rwit):
                        self.recipes.append(("bg", bi, gi))
                self._done[gi] = size

    def rebuild(self, gen_images: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Replay the recipes with substitute generator matrices.

        With gen_images[i] the twisted image of generator i, returns the
        twisted image of every basis element, in basis order.
        """
        fld = self.basis.field
        out: list[np.ndarray] = []
        for recipe in self.recipes:
            kind = recipe[0]
            if kind == "one":
                out.append(fld.identity(self.basis.n))
            elif kind == "gen":
                out.append(gen_images[recipe[1]])
            elif kind == "gb":
                out.append(fld.mat_mul(gen_images[recipe[1]], out[recipe[2]]))
            else:
                out.append(fld.mat_mul(out[recipe[1]], gen_images[recipe[2]]))
        return out


def algebra_closure(
    gens: Iterable[np.ndarray | tuple[np.ndarray, BraidWord | None]], field: GF2m
) -> WitnessedBasis:
    """Basis of the smallest subspace containing the identity and the
    generators that is closed under matrix multiplication.

    Generators may be bare matrices or (matrix, witness word) pairs; with
    witnesses present, every basis element carries a concatenated witness
    (the identity gets the empty word).
    """
    items = []
    for g in gens:
        if isinstance(g, tuple):
            items.append(g)
        else:
            items.append((g, None))
    if not items:
        raise ValueError("need at least one generator")
    witnessed = all(w is not None for _, w in items)
    n = items[0][0].shape[0]
    closure = AlgebraClosure(field, n, witnessed=witnessed)
    for mat, wit in items:
        closure.add_generator(mat, wit if witnessed else None)
    return closure.basis


@dataclass
class SolutionSpace:
    """An affine coefficient space: particular + span(homogeneous)."""

    particular: np.ndarray
    homogeneous: list[np.ndarray] = dc_field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.particular)

    def sample(self, field: GF2m, rng) -> np.ndarray:
        x = self.particular.copy()
        for h in self.homogeneous:
            c = rng.randrange(field.order)
            if c:
                x ^= field.mul_vec(h, c)
        return x


def solve_membership(
    gamma_inv: np.ndarray,
    kappas: Sequence[np.ndarray],
    V: WitnessedBasis,
    field: GF2m,
) -> SolutionSpace:
    """Parametrize {x : gamma_inv . sum(x_i kappa_i) lies in span(V)}.

    The constraint is linear: reducing each gamma_inv * kappa_i against
    V's echelon rows leaves a residual, and x must combine the residuals
    to zero.  Returns the zero particular plus a kernel basis; raises
    NoSolution when the kernel is trivial (the span of V is too small, so
    callers should enlarge it and retry).
    """
    fld = field
    residuals = []
    for k in kappas:
        res, _ = V._reduce(fld.mat_mul(gamma_inv, k).reshape(-1))
        residuals.append(res)
    # left kernel of the residual stack, with row-combination tracking
    rows: list[np.ndarray] = []
    pivots: list[int] = []
    combos: list[np.ndarray] = []
    kernel: list[np.ndarray] = []
    r = len(kappas)
    for i, res in enumerate(residuals):
        v = res.copy()
        t = np.zeros(r, dtype=fld.dtype)
        t[i] = 1
        for row, piv, comb in zip(rows, pivots, combos):
            a = int(v[piv])
            if a:
                v ^= fld.mul_vec(row, a)
                t ^= fld.mul_vec(comb, a)
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            kernel.append(t)
        else:
            piv = int(nz[0])
            inv_piv = fld.inv(int(v[piv]))
            rows.append(fld.mul_vec(v, inv_piv))
            pivots.append(piv)
            combos.append(fld.mul_vec(t, inv_piv))
    if not kernel:
        raise NoSolution("no nonzero combination of the kappa basis lands in span(V)")
    return SolutionSpace(particular=np.zeros(r, dtype=fld.dtype), homogeneous=kernel)


def sample_invertible(
    space: SolutionSpace,
    kappas: Sequence[np.ndarray],
    field: GF2m,
    rng,
    max_tries: int = 64,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Draw solutions until the combined matrix is invertible.

    Returns (matrix, coefficients, tries).  When the solution space
    contains at least one invertible combination, the invertible density
    of a matrix subspace is at least 1 - n/|F|, so the expected number of
    tries is near 1 for the protocol sizes.  Raises
    InvertibleSampleFailed after max_tries draws.
    """
    fld = field
    n = kappas[0].shape[0]
    for tries in range(1, max_tries + 1):
        x = space.sample(fld, rng)
        c = fld.zeros(n)
        for xi, k in zip(x, kappas):
            if xi:
                c ^= fld.mul_vec(k, int(xi))
        if fld.is_invertible(c):
            return c, x, tries
    raise InvertibleSampleFailed(f"no invertible combination in {max_tries} tries")
