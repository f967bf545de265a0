#!/usr/bin/env python3
"""Independent reference for badge and fallback golden vectors (hashlib only)."""
import base64
import hashlib
import json
import struct
import sys


def badge(username: str, text: str, q_num: int, nonce: bytes) -> dict:
    seed = hashlib.shake_256(username.encode() + struct.pack(">H", q_num) + nonce).digest(64)
    pk_hash = hashlib.sha256(seed[:32]).hexdigest()[:12].upper()
    h_msg = hashlib.sha256(text.encode()).hexdigest()
    h_ent = hashlib.sha256(str(q_num).encode()).hexdigest()
    g = hashlib.sha256(f"{h_msg}:{h_ent}:{pk_hash}".encode()).digest()
    sig = base64.b64encode(g[:18]).decode().rstrip("=")
    return {"pk_hash": pk_hash, "signature": sig, "nonce_hex": nonce.hex()}


def fallback(username: str, nonce: bytes, timestamp_ms: int) -> dict:
    d = hashlib.shake_256(username.encode() + struct.pack(">q", timestamp_ms) + nonce).digest(64)
    q_num = (d[0] * 256 + d[1]) % 1001
    raw = [float(b) for b in d[2:6]]
    total = sum(raw)
    bell = [0.5, 0.0, 0.0, 0.5] if total == 0 else [x / total for x in raw]
    return {"q_num": q_num, "bell_bytes": list(d[2:6]), "bell": bell}


if __name__ == "__main__":
    zero = bytes(32)
    seq = bytes(range(32))
    out = {
        "badge_alice_hi_452_zero": badge("alice", "hi", 452, zero),
        "badge_unicode": badge("Zoë 🚀", "héllo &amp; <b>", 1000, seq),
        "fallback_alice_zero_1700000000000": fallback("alice", zero, 1700000000000),
        "fallback_bob_seq_0": fallback("bob", seq, 0),
    }
    # --check FILE: exit non-zero if the frozen vectors drifted from this oracle
    if len(sys.argv) == 3 and sys.argv[1] == "--check":
        with open(sys.argv[2], encoding="utf-8") as f:
            frozen = json.load(f)
        if frozen != out:
            print("golden vectors differ from the hashlib oracle", file=sys.stderr)
            sys.exit(1)
        print("golden vectors match")
    else:
        print(json.dumps(out, indent=2, ensure_ascii=False))
