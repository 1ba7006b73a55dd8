import json
import subprocess
import sys

import numpy as np
import pytest

from cbkap import formats
from cbkap.braid import BraidWord
from cbkap.cli import main
from cbkap.formats import FormatError
from cbkap.protocol import Transcript


def run(*argv):
    return main([str(a) for a in argv])


def gen_small(tmp_path, seed=7):
    assert run(
        "gen", "--n", 8, "--field-bits", 5, "--word-len", 100,
        "--seed", seed, "--out-dir", tmp_path,
    ) == 0
    return tmp_path / "instance_public.json", tmp_path / "instance_private.json"


def test_word_json_round_trip():
    flat = BraidWord([1, -3, 2, 2, -1])
    nested = BraidWord.concat(flat, BraidWord([4]).power(3), flat.inverse())
    deep = nested.power(2) + BraidWord([-2])
    for w in (BraidWord(), flat, nested, deep):
        back = formats.word_from_json(formats.word_to_json(w))
        assert list(back.letters()) == list(w.letters())
    assert formats.word_to_json(flat) == [1, -3, 2, 2, -1]
    with pytest.raises(FormatError):
        formats.word_from_json([1, "x"])
    with pytest.raises(FormatError):
        formats.word_from_json({"body": [1], "count": 2})


def test_instance_round_trip(tmp_path, small_instance):
    pub, priv, _ = small_instance
    p_pub = tmp_path / "pub.json"
    p_priv = tmp_path / "priv.json"
    formats.save_instance_public(p_pub, pub)
    formats.save_instance_private(p_priv, priv, pub.params)
    pub2 = formats.load_instance_public(p_pub)
    assert pub2.params == pub.params
    assert [list(w.letters()) for w in pub2.a_gens] == [list(w.letters()) for w in pub.a_gens]
    assert all(np.array_equal(a, b) for a, b in zip(pub2.c_gens, pub.c_gens))
    priv2 = formats.load_instance_private(p_priv, pub.params)
    assert [list(w.letters()) for w in priv2.b_gens] == [list(w.letters()) for w in priv.b_gens]
    assert all(np.array_equal(a, b) for a, b in zip(priv2.d_gens, priv.d_gens))


def test_transcript_and_key_round_trip(tmp_path, small_instance, small_exchange):
    pub, _, _ = small_instance
    _, alice_msg, _, bob_msg, key = small_exchange
    p_tr = tmp_path / "tr.json"
    formats.save_transcript(p_tr, Transcript(alice_msg, bob_msg), pub.params)
    tr = formats.load_transcript(p_tr, pub.params)
    assert tr.alice_msg == alice_msg and tr.bob_msg == bob_msg
    formats.save_transcript(p_tr, Transcript(alice_msg, None), pub.params)
    assert formats.load_transcript(p_tr, pub.params).bob_msg is None
    p_key = tmp_path / "key.json"
    formats.save_key(p_key, key, pub.params)
    assert formats.load_key(p_key) == key


def test_envelope_kind_and_version_checks(tmp_path, small_instance, small_exchange):
    pub, _, _ = small_instance
    key = small_exchange[-1]
    p = tmp_path / "key.json"
    formats.save_key(p, key, pub.params)
    with pytest.raises(FormatError):
        formats.load_envelope(p, expect_kind="instance_public")
    doc = json.loads(p.read_text())
    doc["format_version"] = 99
    p.write_text(json.dumps(doc))
    with pytest.raises(FormatError):
        formats.load_envelope(p)
    doc["format_version"] = 1
    doc["kind"] = "mystery"
    p.write_text(json.dumps(doc))
    with pytest.raises(FormatError):
        formats.load_envelope(p)


def test_gen_is_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    gen_small(a, seed=5)
    gen_small(b, seed=5)
    for name in ("instance_public.json", "instance_private.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    c = tmp_path / "c"
    c.mkdir()
    gen_small(c, seed=6)
    assert (a / "instance_public.json").read_bytes() != (c / "instance_public.json").read_bytes()


def test_gen_usage_errors(tmp_path):
    assert run("gen", "--n", 3, "--out-dir", tmp_path) == 2
    assert run("gen", "--n", 8, "--field-bits", 8, "--modulus", "0x101", "--out-dir", tmp_path) == 2


def test_protocol_and_verify_flow(tmp_path):
    pub_file, priv_file = gen_small(tmp_path)
    assert run(
        "protocol", "--public", pub_file, "--private", priv_file,
        "--seed", 11, "--out-dir", tmp_path,
    ) == 0
    assert run("verify", tmp_path / "key_alice.json", tmp_path / "key_bob.json") == 0
    # tamper one matrix entry
    doc = json.loads((tmp_path / "key_bob.json").read_text())
    doc["payload"]["key"]["mat"][0] ^= 1
    (tmp_path / "key_tampered.json").write_text(json.dumps(doc))
    assert run("verify", tmp_path / "key_alice.json", tmp_path / "key_tampered.json") == 1
    # tamper the permutation
    doc = json.loads((tmp_path / "key_bob.json").read_text())
    perm = doc["payload"]["key"]["perm"]
    perm[0], perm[1] = perm[1], perm[0]
    (tmp_path / "key_perm.json").write_text(json.dumps(doc))
    assert run("verify", tmp_path / "key_alice.json", tmp_path / "key_perm.json") == 1


def test_protocol_missing_private_file(tmp_path):
    pub_file, _ = gen_small(tmp_path)
    assert run(
        "protocol", "--public", pub_file, "--private", tmp_path / "nope.json",
        "--seed", 1, "--out-dir", tmp_path,
    ) == 2


def test_protocol_alice_only(tmp_path):
    pub_file, priv_file = gen_small(tmp_path)
    out = tmp_path / "half"
    assert run(
        "protocol", "--public", pub_file, "--private", priv_file,
        "--seed", 2, "--out-dir", out, "--alice-only",
    ) == 0
    assert (out / "transcript.json").exists()
    assert not (out / "key_alice.json").exists()
    doc = json.loads((out / "transcript.json").read_text())
    assert doc["payload"]["bob"] is None
    # the attack needs Bob's half
    assert run(
        "attack", "--public", pub_file, "--transcript", out / "transcript.json",
        "--seed", 3, "--out-dir", out,
    ) == 2


def test_attack_flow_recovers_alice_key(tmp_path):
    pub_file, priv_file = gen_small(tmp_path)
    assert run(
        "protocol", "--public", pub_file, "--private", priv_file,
        "--seed", 21, "--out-dir", tmp_path,
    ) == 0
    assert run(
        "attack", "--public", pub_file, "--transcript", tmp_path / "transcript.json",
        "--seed", 22, "--out-dir", tmp_path,
    ) == 0
    assert run("verify", tmp_path / "key_recovered.json", tmp_path / "key_alice.json") == 0
    kind, stats = formats.load_envelope(tmp_path / "stats.json", expect_kind="stats")
    for field in ("dim_v", "candidates", "factor_letters", "total_seconds", "peak_rss_mb"):
        assert field in stats


def test_attack_refuses_private_material(tmp_path):
    pub_file, priv_file = gen_small(tmp_path)
    assert run(
        "protocol", "--public", pub_file, "--private", priv_file,
        "--seed", 21, "--out-dir", tmp_path,
    ) == 0
    assert run(
        "attack", "--public", priv_file, "--transcript", tmp_path / "transcript.json",
        "--seed", 1, "--out-dir", tmp_path,
    ) == 2
    assert run(
        "attack", "--public", pub_file, "--transcript", priv_file,
        "--seed", 1, "--out-dir", tmp_path,
    ) == 2


def test_eraser_seed_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("ERASER_SEED", "33")
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    for out in (a, b):
        assert run("gen", "--n", 8, "--field-bits", 5, "--word-len", 60, "--out-dir", out) == 0
    assert (a / "instance_public.json").read_bytes() == (b / "instance_public.json").read_bytes()
    monkeypatch.setenv("ERASER_SEED", "not-a-number")
    assert run("gen", "--n", 8, "--field-bits", 5, "--word-len", 60, "--out-dir", a) == 2


def test_usage_exit_code():
    assert run("gen", "--badflag") == 2
    assert run() == 2


def test_console_script_bench():
    out = subprocess.run(
        [sys.executable, "-m", "cbkap.cli", "bench", "--letters", "2000", "--seed", "1"],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert "letters/s" in out.stdout
