"""Content-addressed on-disk cache for MOP bundles.

Entries are JSON documents ``{"checksum": ..., "payload": ...}`` written
atomically (temporary file plus rename).  Floats are stored as ``float.hex``
and extended-precision numbers as their exact mpf tuples, so a hit rebuilds
the object bit for bit.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

from ..chebpoly import ChebPoly
from ..errors import CorruptEntry, IoError
from ..nikishin import MopBundle, NikishinPair, assemble_bundle, mop_bundle
from ..precision import PrecisionConfig, arith_for_bits
from .config import FORMAT_VERSION, WEIGHT_GRAMMAR, PrecisionSettings, format_weight

log = logging.getLogger(__name__)

ENV_CACHE_DIR = "RELASYM_CACHE_DIR"
CACHE_SCHEMA = 1


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def cache_key(kind: str, content: dict) -> str:
    """sha256 of the canonical JSON of (kind, content, schema versions)."""
    doc = {"kind": kind, "content": content, "schema": CACHE_SCHEMA,
           "format_version": FORMAT_VERSION, "weight_grammar": WEIGHT_GRAMMAR}
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def resolve_cache_dir(configured=None):
    env = os.environ.get(ENV_CACHE_DIR)
    if env:
        return Path(env)
    return Path(configured) if configured else None


class Cache:
    def __init__(self, root):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            raise IoError(f"cannot create cache directory {self.root}: {err}") from err

    def path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def put(self, key: str, payload: dict) -> Path:
        body = canonical_json(payload)
        doc = canonical_json({"checksum": hashlib.sha256(body.encode()).hexdigest(), "payload": payload})
        target = self.path(key)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".tmp-", suffix=".json")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(doc)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, target)
        except OSError as err:
            raise IoError(f"cache write failed for {key}: {err}") from err
        return target

    def _read(self, key: str) -> dict:
        p = self.path(key)
        try:
            text = p.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise KeyError(key) from None
        except OSError as err:
            raise IoError(f"cache read failed for {key}: {err}") from err
        try:
            doc = json.loads(text)
            payload = doc["payload"]
            ok = hashlib.sha256(canonical_json(payload).encode()).hexdigest() == doc["checksum"]
        except (ValueError, KeyError, TypeError) as err:
            raise CorruptEntry(f"unreadable entry: {err}") from err
        if not ok:
            raise CorruptEntry("checksum mismatch")
        return payload

    def get(self, key: str):
        """Payload on a hit, None on a miss; corrupt entries are evicted and logged."""
        try:
            return self._read(key)
        except KeyError:
            return None
        except CorruptEntry as err:
            self.evict(key, str(err))
            return None

    def evict(self, key: str, reason: str):
        try:
            self.path(key).unlink()
        except FileNotFoundError:
            pass
        with open(self.root / "evictions.log", "a", encoding="utf-8") as fh:
            fh.write(f"{key} {reason}\n")
        log.warning("evicted cache entry %s: %s", key, reason)


# ---------------------------------------------------------------------------
# exact number encoding


def encode_number(v, arith):
    if arith.is_mp:
        sign, man, exp, bc = v._mpf_
        return {"mpf": [int(sign), format(int(man), "x"), int(exp), int(bc)]}
    return {"f": float(v).hex()}


def decode_number(d, arith):
    if "mpf" in d:
        sign, man, exp, bc = d["mpf"]
        return arith.ctx.make_mpf((sign, int(man, 16), exp, bc))
    return float.fromhex(d["f"])


def _encode_poly(P: ChebPoly):
    return {"interval": [P.ref_interval.a.hex(), P.ref_interval.b.hex()], "monic": P.monic,
            "coeffs": [encode_number(c, P.arith) for c in P.coeffs]}


def _decode_poly(d, iv, arith):
    coeffs = [decode_number(c, arith) for c in d["coeffs"]]
    arr = np.array(coeffs, dtype=object if arith.is_mp else float)
    return ChebPoly(iv, arr, arith, d["monic"])


def encode_bundle(b: MopBundle) -> dict:
    arith = b.arith
    return {
        "index": [b.index.n1, b.index.n2],
        "perturbed": b.perturbed,
        "cfg": b.cfg.as_dict(),
        "Q1": _encode_poly(b.Q1),
        "Q2": _encode_poly(b.Q2),
        "K": [encode_number(k, arith) for k in b.K],
        "eps": list(b.eps),
        "residuals": [float(r).hex() for r in b.residuals],
        "checks": {k: float(v).hex() for k, v in sorted(b.checks.items())},
    }


def decode_bundle(sys: NikishinPair, d: dict) -> MopBundle:
    cfg = PrecisionConfig(**d["cfg"])
    arith = arith_for_bits(cfg.mantissa_bits)
    Q1 = _decode_poly(d["Q1"], sys.delta1, arith)
    Q2 = _decode_poly(d["Q2"], sys.delta2, arith)
    K = tuple(decode_number(k, arith) for k in d["K"])
    residuals = tuple(float.fromhex(r) for r in d["residuals"])
    checks = {k: float.fromhex(v) for k, v in d["checks"].items()}
    return assemble_bundle(sys, tuple(d["index"]), d["perturbed"], cfg, Q1, Q2, K, tuple(d["eps"]), residuals, checks)


def bundle_key(sys: NikishinPair, n, perturbed: bool, precision: PrecisionSettings) -> str:
    def measure(m):
        return {"interval": [m.interval.a.hex(), m.interval.b.hex()], "weight": format_weight(m.weight)}

    content = {
        "sigma1": measure(sys.sigma1),
        "sigma2": measure(sys.sigma2),
        "perturbed": bool(perturbed),
        "index": [int(n[0]), int(n[1])],
        "mantissa_bits": precision.mantissa_bits,
        "quad_order": precision.quad_order,
    }
    if perturbed:
        content["rho1"] = None if sys.rho1 is None else format_weight(sys.rho1)
        content["rho2"] = None if sys.rho2 is None else format_weight(sys.rho2)
    return cache_key("mop_bundle", content)


class BundleProvider:
    """``provider(sys, n, perturbed)`` backed by memory and an optional disk cache."""

    def __init__(self, precision: PrecisionSettings, cache: Cache | None = None):
        self.precision = precision
        self.cache = cache
        self.memory = {}
        self.hits = 0
        self.misses = 0

    def compute(self, sys, n, perturbed) -> MopBundle:
        cfg = self.precision.config_for(n.N1)
        return mop_bundle(sys, n, perturbed, cfg, escalate=self.precision.escalate)

    def __call__(self, sys, n, perturbed) -> MopBundle:
        mem = (sys, n, bool(perturbed))
        if mem in self.memory:
            return self.memory[mem]
        b = None
        key = None
        if self.cache is not None:
            key = bundle_key(sys, tuple(n), perturbed, self.precision)
            payload = self.cache.get(key)
            if payload is not None:
                b = decode_bundle(sys, payload)
                self.hits += 1
        if b is None:
            b = self.compute(sys, n, perturbed)
            self.misses += 1
            if self.cache is not None:
                self.cache.put(key, encode_bundle(b))
        self.memory[mem] = b
        return b
