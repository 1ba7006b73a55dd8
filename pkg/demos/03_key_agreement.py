"""A complete key agreement run.

The trusted-party generator builds an instance whose braid subgroups
act *-commutingly (a fixed conjugate of two disjoint strand blocks) and
whose matrix subgroups commute (both generated by one matrix).  Alice
and Bob exchange one message each and derive the same key exactly.
"""

import random

from cbkap import GF2m, alice_round, bob_round, derive_key_alice, derive_key_bob, ttp_generate

rng = random.Random(3)
field = GF2m(8)

print("generating a full-size instance (n=16, |F|=256, 8 generators of ~650 letters)...")
pub, priv, debug = ttp_generate(16, field, gen_count=8, word_len=650, rng=rng)
print(f"  tau = {pub.params.tau}")
print(f"  A generator lengths: {[len(w) for w in pub.a_gens]}")
print(f"  B generator lengths: {[len(w) for w in priv.b_gens]}")

alice_secret, alice_msg = alice_round(pub, rng)
print(f"\nAlice sends (p, g) with g = {alice_msg.perm!r}")
bob_secret, bob_msg = bob_round(pub, priv, rng)
print(f"Bob sends (q, h) with h = {bob_msg.perm!r}")

key_alice = derive_key_alice(alice_secret, bob_msg, pub)
key_bob = derive_key_bob(bob_secret, alice_msg, pub)
assert key_alice == key_bob
print(f"\nboth sides derived the same key, permutation part {key_alice.key.perm!r}")
print("key matrix, first row:", key_alice.key.mat[0])
