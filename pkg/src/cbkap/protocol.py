"""The colored Burau key agreement protocol (CBKAP).

A trusted-third-party style generator produces instances with the two
structural properties the protocol needs:

* the braid subgroups A and B act *-commutingly on matrix-permutation
  states: their generator words are a fixed random conjugate of words
  supported on disjoint strand blocks (lower half for A, upper half for
  B, skipping the middle generator entirely), so they commute exactly in
  the braid group;
* the matrix subgroups C and D commute elementwise: both are generated
  by the same matrix kappa (the image of a random braid word), or, with
  the override, D by an invertible polynomial in kappa.

Alice draws an invertible combination c from the algebra spanned by the
C generators and a product word over the A generators, and publishes
``c . eval(word)``; Bob mirrors her with d and the B generators.  Both
sides then derive the same key exactly, which is checked by tests and by
the command-line driver on every exchange.

Public and private material live in separate structures (and separate
files on disk) so the attack harness can be blinded by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .braid import (
    BraidWord,
    EvalParams,
    MatPerm,
    e_multiply,
    free_reduce,
    left_mul,
    random_word,
    word_eval_pair,
    word_perm,
)
from .field import GF2m
from .linalg import algebra_closure
from .perm import Perm

__all__ = [
    "InstancePublic",
    "InstancePrivate",
    "TTPDebug",
    "Transcript",
    "SharedKey",
    "PartySecret",
    "ttp_generate",
    "alice_round",
    "bob_round",
    "derive_key_alice",
    "derive_key_bob",
]


@dataclass
class InstancePublic:
    """What Alice (and the adversary) sees: evaluation parameters, the A
    generator braid words, and the C generator matrices."""

    params: EvalParams
    a_gens: list[BraidWord]
    c_gens: list[np.ndarray]

    def __post_init__(self):
        n = self.params.n
        for w in self.a_gens:
            word_perm(w, n)  # validates letter ranges
        fld = self.params.field
        for c in self.c_gens:
            if not fld.is_invertible(c):
                raise ValueError("C generators must be invertible")


@dataclass
class InstancePrivate:
    """Bob's side: the B generator braid words and the D generator
    matrices (D = C unless the generator was asked for an override)."""

    b_gens: list[BraidWord]
    d_gens: list[np.ndarray]


@dataclass
class TTPDebug:
    """Generation-time secrets kept only for diagnostics and tests."""

    conjugator: BraidWord
    lower_words: list[BraidWord]
    upper_words: list[BraidWord]
    kappa_word: BraidWord


@dataclass
class Transcript:
    """The two messages sent over the insecure channel."""

    alice_msg: MatPerm
    bob_msg: MatPerm | None


@dataclass
class SharedKey:
    key: MatPerm

    def __eq__(self, other) -> bool:
        return isinstance(other, SharedKey) and other.key == self.key


@dataclass
class PartySecret:
    """One party's ephemeral secret: the scaling matrix and the product
    word over that party's braid generators."""

    matrix: np.ndarray
    word: BraidWord


def _min_poly_degree(field: GF2m, mat: np.ndarray) -> int:
    """Degree of the minimal polynomial = dim of the algebra spanned by mat."""
    return algebra_closure([mat], field).dim


def ttp_generate(
    n: int,
    field: GF2m,
    gen_count: int = 8,
    word_len: int = 100,
    rng=None,
    d_polynomial: bool = False,
) -> tuple[InstancePublic, InstancePrivate, TTPDebug]:
    """Generate a protocol instance.

    A generators are ``z u z^-1`` for random words u over the lower-block
    strand generators and a single random conjugator z; B generators use
    the upper block.  Each generator is freely reduced and has length
    about word_len.  kappa is the matrix of a random braid word, retried
    until its minimal polynomial has degree at least 3 so that C is not a
    scalar family.  The tau values are drawn outside {0, 1} (outside {0}
    over GF(2), which has no other choice).
    """
    if rng is None:
        raise ValueError("pass a seeded random.Random for reproducibility")
    if n < 4:
        raise ValueError("need n >= 4 for two nontrivial strand blocks")
    if gen_count < 2:
        raise ValueError("need at least 2 generators per side")
    if word_len < 1:
        raise ValueError("word_len must be >= 1")

    # policy: avoid 0 and 1 to dodge degenerate evaluations; over GF(2)
    # the only nonzero value is 1, which is still a valid instance
    tau_lo = 2 if field.order > 2 else 1
    tau = tuple(rng.randrange(tau_lo, field.order) for _ in range(n))
    params = EvalParams(field, n, tau)

    half = n // 2
    lower = range(1, half)  # strand generators touching strands 1..half
    upper = range(half + 1, n)  # touching strands half+1..n
    z_len = max(1, word_len // 4)
    core_len = max(1, word_len - 2 * z_len)
    z = random_word(n, z_len, rng)
    z_inv = z.inverse()

    def conjugated(strands):
        words = []
        for _ in range(gen_count):
            u = random_word(n, core_len, rng, strands=strands)
            words.append((free_reduce(z + u + z_inv), u))
        return words

    a_pairs = conjugated(lower)
    b_pairs = conjugated(upper)
    a_gens = [w for w, _ in a_pairs]
    b_gens = [w for w, _ in b_pairs]

    while True:
        kappa_word = random_word(n, word_len, rng)
        kappa = word_eval_pair(kappa_word, params).mat
        if field.is_invertible(kappa) and _min_poly_degree(field, kappa) >= 3:
            break
    c_gens = [kappa]
    if d_polynomial:
        powers = algebra_closure([kappa], field)
        while True:
            coeffs = [rng.randrange(field.order) for _ in range(powers.dim)]
            d0 = powers.combine(coeffs)
            if field.is_invertible(d0):
                break
        d_gens = [d0]
    else:
        d_gens = [kappa]

    pub = InstancePublic(params, a_gens, c_gens)
    priv = InstancePrivate(b_gens, d_gens)
    debug = TTPDebug(z, [u for _, u in a_pairs], [u for _, u in b_pairs], kappa_word)

    # Construction guarantees the commuting properties; spot-check one
    # random pair of each kind so generation fails loudly if it ever breaks.
    omega = MatPerm(field.random_matrix(rng, n), Perm.random(n, rng))
    u = a_gens[rng.randrange(gen_count)]
    v = b_gens[rng.randrange(gen_count)]
    if e_multiply(e_multiply(omega, u, params), v, params) != e_multiply(
        e_multiply(omega, v, params), u, params
    ):
        raise RuntimeError("A and B generators failed to *-commute")
    if not np.array_equal(
        field.mat_mul(c_gens[0], d_gens[0]), field.mat_mul(d_gens[0], c_gens[0])
    ):
        raise RuntimeError("C and D generators failed to commute")

    return pub, priv, debug


def _sample_scale(field: GF2m, gens: list[np.ndarray], rng) -> np.ndarray:
    """Random invertible element of the algebra spanned by the generators."""
    basis = algebra_closure(gens, field)
    while True:
        coeffs = [rng.randrange(field.order) for _ in range(basis.dim)]
        c = basis.combine(coeffs)
        if field.is_invertible(c):
            return c


def _product_word(gens: list[BraidWord], rng, draws: tuple[int, int]) -> BraidWord:
    count = rng.randint(*draws)
    parts = []
    for _ in range(count):
        w = gens[rng.randrange(len(gens))]
        parts.append(w if rng.random() < 0.5 else w.inverse())
    return BraidWord.concat(*parts) if parts else BraidWord()


def alice_round(
    pub: InstancePublic, rng, draws: tuple[int, int] = (10, 20)
) -> tuple[PartySecret, MatPerm]:
    """Alice's message: an invertible c from the C algebra, a product
    word over the A generators, and the state ``c . eval(word)``."""
    c = _sample_scale(pub.params.field, pub.c_gens, rng)
    g_word = _product_word(pub.a_gens, rng, draws)
    msg = e_multiply(MatPerm(c, Perm.identity(pub.params.n)), g_word, pub.params)
    return PartySecret(c, g_word), msg


def bob_round(
    pub: InstancePublic, priv: InstancePrivate, rng, draws: tuple[int, int] = (10, 20)
) -> tuple[PartySecret, MatPerm]:
    """Bob's message, mirroring Alice with d and the B generators."""
    d = _sample_scale(pub.params.field, priv.d_gens, rng)
    h_word = _product_word(priv.b_gens, rng, draws)
    msg = e_multiply(MatPerm(d, Perm.identity(pub.params.n)), h_word, pub.params)
    return PartySecret(d, h_word), msg


def derive_key_alice(secret: PartySecret, bob_msg: MatPerm, pub: InstancePublic) -> SharedKey:
    """Alice's key: her scale acting on Bob's message E-multiplied by her word."""
    t = e_multiply(bob_msg, secret.word, pub.params)
    return SharedKey(left_mul(pub.params.field, secret.matrix, t))


def derive_key_bob(secret: PartySecret, alice_msg: MatPerm, pub: InstancePublic) -> SharedKey:
    """Bob's key: his scale acting on Alice's message E-multiplied by his word."""
    t = e_multiply(alice_msg, secret.word, pub.params)
    return SharedKey(left_mul(pub.params.field, secret.matrix, t))
