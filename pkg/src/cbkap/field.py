"""Exact arithmetic in GF(2^m) and dense matrices over it.

Field elements are plain Python ints in [0, 2^m), read as polynomial
bit-vectors over GF(2) (bit k = coefficient of x^k).  Addition is XOR,
multiplication is carry-less polynomial multiplication reduced modulo an
irreducible modulus.  A ``GF2m`` instance owns the modulus and a single
log/antilog table pair built over a primitive element; all arithmetic is
exact, with no tolerances anywhere.

Matrices are numpy arrays of the field's unsigned dtype and are always
passed around together with their ``GF2m``.  Every object here is
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "NonInvertibleFieldElement",
    "SingularMatrix",
    "GF2m",
    "is_irreducible",
    "default_modulus",
]


class NonInvertibleFieldElement(ZeroDivisionError):
    """Multiplicative inverse of zero was requested."""


class SingularMatrix(ValueError):
    """Matrix inversion was requested for a singular matrix."""


def _poly_mod(a: int, m: int) -> int:
    """Remainder of the bit-vector polynomial a modulo m, over GF(2)."""
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def _clmul(a: int, b: int) -> int:
    """Carry-less (polynomial) product of two bit-vectors."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def is_irreducible(modulus: int) -> bool:
    """Whether the bit-vector polynomial is irreducible over GF(2).

    Checked by trial division against every polynomial of degree at most
    half the modulus degree.
    """
    degree = modulus.bit_length() - 1
    if degree < 1:
        return False
    for q in range(2, 1 << (degree // 2 + 1)):
        if _poly_mod(modulus, q) == 0:
            return False
    return True


def default_modulus(degree: int) -> int:
    """Smallest irreducible polynomial of the given degree.

    For degree 8 this is x^8 + x^4 + x^3 + x + 1 (0x11B), the usual
    GF(2^8) choice.
    """
    if degree < 1:
        raise ValueError("field degree must be >= 1")
    for cand in range((1 << degree) + 1, 1 << (degree + 1), 2):
        if is_irreducible(cand):
            return cand
    raise ValueError(f"no irreducible polynomial of degree {degree}")  # pragma: no cover


def _prime_factors(x: int) -> list[int]:
    out = []
    p = 2
    while p * p <= x:
        if x % p == 0:
            out.append(p)
            while x % p == 0:
                x //= p
        p += 1
    if x > 1:
        out.append(x)
    return out


class GF2m:
    """The field GF(2^m) for a fixed irreducible modulus.

    Scalar operations use one log/antilog table pair over a primitive
    element; vector and matrix operations use the numpy copies of the
    same tables.  Construction is O(2^m), so the degree is capped at 16
    (the protocol sizes of interest are m <= 8).
    """

    def __init__(self, degree: int, modulus: int | None = None):
        if degree < 1:
            raise ValueError("field degree must be >= 1")
        if degree > 16:
            raise ValueError("field degree above 16 is not supported (table-based arithmetic)")
        if modulus is None:
            modulus = default_modulus(degree)
        if modulus.bit_length() - 1 != degree:
            raise ValueError("modulus degree does not match the field degree")
        if not is_irreducible(modulus):
            raise ValueError(f"modulus {modulus:#x} is not irreducible")
        self.degree = degree
        self.modulus = modulus
        self.order = 1 << degree
        self.dtype = np.uint8 if degree <= 8 else np.uint16
        self._build_tables()

    def _mul_slow(self, a: int, b: int) -> int:
        return _poly_mod(_clmul(a, b), self.modulus)

    def _pow_slow(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self._mul_slow(r, a)
            a = self._mul_slow(a, a)
            e >>= 1
        return r

    def _build_tables(self) -> None:
        q = self.order
        gen = 1
        for cand in range(1, q):
            if all(self._pow_slow(cand, (q - 1) // p) != 1 for p in _prime_factors(q - 1)):
                gen = cand
                break
        exp = [0] * (2 * (q - 1))
        log = [0] * q
        cur = 1
        for i in range(q - 1):
            exp[i] = cur
            exp[i + q - 1] = cur
            log[cur] = i
            cur = self._mul_slow(cur, gen)
        assert cur == 1, "element used for the tables is not primitive"
        self._exp = exp
        self._log = log
        self._inv = [0] + [exp[(q - 1 - log[a]) % (q - 1)] for a in range(1, q)]
        self._exp_np = np.array(exp, dtype=self.dtype)
        self._log_np = np.array(log, dtype=np.int32)

    # -- scalar operations -------------------------------------------------

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    @staticmethod
    def neg(a: int) -> int:
        # characteristic 2: every element is its own negative
        return a

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise NonInvertibleFieldElement("0 has no multiplicative inverse")
        return self._inv[a]

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e == 0:
                return 1
            if e < 0:
                raise NonInvertibleFieldElement("0 has no multiplicative inverse")
            return 0
        return self._exp[(self._log[a] * e) % (self.order - 1)]

    def random_element(self, rng) -> int:
        return rng.randrange(self.order)

    # -- vector and matrix operations --------------------------------------

    def mul_vec(self, v: np.ndarray, s: int) -> np.ndarray:
        """Scale a vector (or matrix) of field elements by the scalar s."""
        if s == 0:
            return np.zeros_like(v)
        if s == 1:
            return v.copy()
        out = self._exp_np[self._log_np[v] + self._log[s]]
        out[v == 0] = 0
        return out

    def identity(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=self.dtype)

    def zeros(self, n: int, m: int | None = None) -> np.ndarray:
        return np.zeros((n, m if m is not None else n), dtype=self.dtype)

    def mat_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Exact matrix product; accumulation is XOR over outer products."""
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ValueError("matrix dimension mismatch")
        lg, ex = self._log_np, self._exp_np
        out = np.zeros((a.shape[0], b.shape[1]), dtype=self.dtype)
        for t in range(a.shape[1]):
            col = a[:, t]
            row = b[t, :]
            zc = col == 0
            zr = row == 0
            if zc.all() or zr.all():
                continue
            prod = ex[lg[col][:, None] + lg[row][None, :]]
            prod[zc, :] = 0
            prod[:, zr] = 0
            out ^= prod
        return out

    def mat_inv(self, a: np.ndarray) -> np.ndarray:
        """Inverse by Gauss-Jordan elimination, pivoting on the first
        nonzero entry of each column.  Raises SingularMatrix on failure."""
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        n = a.shape[0]
        lg, ex = self._log_np, self._exp_np
        aug = np.concatenate([a.astype(self.dtype), self.identity(n)], axis=1)
        for col in range(n):
            rows = np.nonzero(aug[col:, col])[0]
            if rows.size == 0:
                raise SingularMatrix("matrix is singular")
            piv = col + int(rows[0])
            if piv != col:
                aug[[col, piv]] = aug[[piv, col]]
            pv = int(aug[col, col])
            if pv != 1:
                aug[col] = self.mul_vec(aug[col], self._inv[pv])
            factors = aug[:, col].copy()
            factors[col] = 0
            nz = factors != 0
            if nz.any():
                prod = ex[lg[aug[col]][None, :] + lg[factors[nz]][:, None]]
                prod[:, aug[col] == 0] = 0
                aug[nz] ^= prod
        return aug[:, n:]

    def is_invertible(self, a: np.ndarray) -> bool:
        try:
            self.mat_inv(a)
            return True
        except SingularMatrix:
            return False

    def random_matrix(self, rng, n: int) -> np.ndarray:
        flat = [rng.randrange(self.order) for _ in range(n * n)]
        return np.array(flat, dtype=self.dtype).reshape(n, n)

    def random_invertible(self, rng, n: int) -> np.ndarray:
        while True:
            m = self.random_matrix(rng, n)
            if self.is_invertible(m):
                return m

    # -- identity ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GF2m)
            and other.degree == self.degree
            and other.modulus == self.modulus
        )

    def __hash__(self) -> int:
        return hash((self.degree, self.modulus))

    def __repr__(self) -> str:
        return f"GF2m(degree={self.degree}, modulus={self.modulus:#x})"
