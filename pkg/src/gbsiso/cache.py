"""On-disk cache of orbit certificates.

Entries are keyed by (graph content hash, c, k, orbit).  Writes go to a
temporary file in the target directory followed by ``os.replace``, so
concurrent writers never expose a partial file.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional

from .combinatorics import Orbit
from .gbs import GbsEncoding
from .invariants import (
    DEFAULT_BUDGET,
    Certificate,
    OrbitCertificate,
    certificate_from_records,
    orbit_certificate,
    record_from_json,
    record_to_json,
)

log = logging.getLogger(__name__)


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class OrbitCache:
    def __init__(self, root):
        self.root = Path(root)
        self.hits = 0
        self.misses = 0

    def _path(self, e: GbsEncoding, o: Orbit) -> Path:
        h = e.graph.content_hash()
        params = f"c{e.c.numerator}-{e.c.denominator}_k{e.k.numerator}-{e.k.denominator}"
        name = "-".join(str(x) for x in o.representative) or "empty"
        return self.root / h[:2] / h / params / f"{name}.json"

    def get(self, e: GbsEncoding, o: Orbit) -> Optional[OrbitCertificate]:
        p = self._path(e, o)
        try:
            obj = json.loads(p.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError) as exc:
            log.warning("ignoring unreadable cache entry %s: %s", p, exc)
            return None
        rec = record_from_json(obj, e.modes)
        if rec.orbit != o:
            log.warning("cache entry %s holds orbit %s", p, rec.orbit.representative)
            return None
        return rec

    def put(self, e: GbsEncoding, rec: OrbitCertificate) -> None:
        if rec.skipped:
            return
        atomic_write_text(self._path(e, rec.orbit), json.dumps(record_to_json(rec), sort_keys=True))


def cached_orbit_certificate(
    e: GbsEncoding,
    o: Orbit,
    cache: Optional[OrbitCache] = None,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> OrbitCertificate:
    if cache is not None:
        rec = cache.get(e, o)
        if rec is not None:
            cache.hits += 1
            log.debug("cache hit %s %s", e.graph.label, o.compressed())
            return rec
        cache.misses += 1
    rec = orbit_certificate(e, o, workers=workers, budget=budget)
    if cache is not None:
        cache.put(e, rec)
    return rec


def certify(
    e: GbsEncoding,
    orbits: Iterable[Orbit],
    cache: Optional[OrbitCache] = None,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> Certificate:
    recs = [cached_orbit_certificate(e, o, cache, workers, budget) for o in sorted(set(orbits))]
    return certificate_from_records(e, recs)
