"""Command-line front end.

Subcommands::

    gbsiso certify FILE...        write one certificate JSON per graph
    gbsiso compare A [B]          find the first orbit separating two graphs
    gbsiso family FILE            split a family into distinguished classes
    gbsiso probabilities FILE     CSV of orbit probabilities
    gbsiso orbits --total T --modes M

Exit codes: 0 completed, 1 input error, 2 partial (some orbits skipped).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .cache import OrbitCache, atomic_write_text, cached_orbit_certificate, certify
from .combinatorics import SCHEDULES, Orbit, OddTotalError, orbits_up_to, partitions, scheduled
from .gbs import EncodingError, encode, parse_rational
from .graphs import Graph, GraphFormatError, characteristic_polynomial, is_cospectral, read_graph_file
from .invariants import (
    CRITERIA,
    DEFAULT_BUDGET,
    ComparisonReport,
    OrbitCertificate,
    Verdict,
    compare_records,
)

EXIT_OK, EXIT_INPUT, EXIT_PARTIAL = 0, 1, 2

log = logging.getLogger("gbsiso")


class InputError(Exception):
    pass


# --- config ------------------------------------------------------------------


@dataclass
class RunConfig:
    paths: list[Path] = field(default_factory=list)
    fmt: Optional[str] = None
    c: Optional[str] = None
    k: str = "0"
    max_photons: int = 4
    orbit_specs: list[str] = field(default_factory=list)
    workers: int = 1
    cache_dir: Optional[Path] = None
    output: str = "text"
    budget: int = DEFAULT_BUDGET
    criteria: tuple[str, ...] = CRITERIA
    schedule_order: str = "spread"

    def validate(self):
        unknown = set(self.criteria) - set(CRITERIA)
        if unknown:
            raise InputError(f"unknown criteria {sorted(unknown)}; choose from {', '.join(CRITERIA)}")
        if not self.orbit_specs and (self.max_photons < 2 or self.max_photons % 2):
            raise InputError(f"--max-photons must be even and >= 2, got {self.max_photons}")
        if self.workers < 1:
            raise InputError("--workers must be >= 1")

    def cache(self) -> Optional[OrbitCache]:
        return OrbitCache(self.cache_dir) if self.cache_dir else None

    def schedule(self, modes: int) -> list[Orbit]:
        """Explicit orbits in the order given, otherwise every orbit up to ``max_photons``."""
        if not self.orbit_specs:
            return scheduled(orbits_up_to(self.max_photons, modes), self.schedule_order)
        out = []
        for spec in self.orbit_specs:
            try:
                counts = [int(x) for x in spec.replace(" ", "").split(",") if x != ""]
                out.append(Orbit.padded(counts, modes))
            except ValueError as exc:
                raise InputError(f"bad --orbit {spec!r}: {exc}") from exc
        return out

    def encode(self, g: Graph):
        try:
            return encode(g, self.c, self.k)
        except (EncodingError, ValueError) as exc:
            raise InputError(f"{g.label}: {exc}") from exc


def load_graphs(path: Path, fmt: Optional[str]) -> list[Graph]:
    try:
        graphs = read_graph_file(path, fmt)
    except (OSError, GraphFormatError, ValueError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not graphs:
        raise InputError(f"{path} contains no graphs")
    return graphs


def _emit(text: str, out=None):
    (out or sys.stdout).write(text if text.endswith("\n") else text + "\n")


# --- certify -----------------------------------------------------------------


def cmd_certify(cfg: RunConfig, out_dir: Path) -> int:
    cache = cfg.cache()
    partial = False
    written = []
    for path in cfg.paths:
        for g in load_graphs(path, cfg.fmt):
            e = cfg.encode(g)
            cert = certify(e, cfg.schedule(g.order), cache, cfg.workers, cfg.budget)
            target = out_dir / f"{_safe(g.label or g.content_hash()[:12])}.cert.json"
            atomic_write_text(target, cert.dumps())
            written.append(str(target))
            skipped = [r.orbit.compressed() for r in cert.records if r.skipped]
            if skipped:
                partial = True
                log.warning("%s: skipped orbits over budget: %s", g.label, "; ".join(skipped))
    if cache is not None:
        log.info("cache hits=%d misses=%d", cache.hits, cache.misses)
    if cfg.output == "json":
        _emit(json.dumps({"certificates": written, "partial": partial}))
    else:
        for w in written:
            _emit(w)
    return EXIT_PARTIAL if partial else EXIT_OK


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


# --- compare -----------------------------------------------------------------


def compare_graphs(cfg: RunConfig, g1: Graph, g2: Graph) -> ComparisonReport:
    if g1.order != g2.order:
        raise InputError(f"order mismatch: {g1.order} vs {g2.order}")
    if not is_cospectral(g1, g2):
        return ComparisonReport(Verdict.DISTINGUISHED, separating_criterion="spectrum",
                                reason="spectra differ; the graphs are not isomorphic")
    e1, e2 = cfg.encode(g1), cfg.encode(g2)
    if e1.c != e2.c:
        raise InputError("encodings chose different c; pass --c explicitly")
    cache = cfg.cache()
    details = []
    for o in cfg.schedule(g1.order):
        r1 = cached_orbit_certificate(e1, o, cache, cfg.workers, cfg.budget)
        r2 = cached_orbit_certificate(e2, o, cache, cfg.workers, cfg.budget)
        d = compare_records(r1, r2, e1.prefactor_sq, e2.prefactor_sq, cfg.criteria)
        details.append(d)
        if d.first_difference:
            return ComparisonReport(Verdict.DISTINGUISHED, o, d.first_difference, tuple(details))
    return ComparisonReport(Verdict.UNDISTINGUISHED_UP_TO_LIMIT, details=tuple(details))


def report_to_json(r: ComparisonReport, labels) -> dict:
    return {
        "graphs": list(labels),
        "verdict": r.verdict.value,
        "threshold_orbit": list(r.threshold_orbit.representative) if r.threshold_orbit else None,
        "criterion": r.separating_criterion,
        "reason": r.reason,
        "orbits": [
            {"orbit": list(d.orbit.representative), "skipped": d.skipped, "agree": d.results}
            for d in r.details
        ],
    }


def cmd_compare(cfg: RunConfig) -> int:
    graphs = [g for p in cfg.paths for g in load_graphs(p, cfg.fmt)]
    if len(graphs) < 2:
        raise InputError("compare needs two graphs (two files, or one file with two graphs)")
    g1, g2 = graphs[0], graphs[1]
    report = compare_graphs(cfg, g1, g2)
    if cfg.output == "json":
        _emit(json.dumps(report_to_json(report, (g1.label, g2.label)), indent=1))
    else:
        _emit(f"{g1.label} vs {g2.label}: {report.verdict.value}")
        if report.reason:
            _emit(report.reason)
        if report.threshold_orbit is not None:
            o = report.threshold_orbit
            _emit(f"threshold orbit: {o.compressed()}  (|n|={o.total}, size {o.size})")
        if report.separating_criterion:
            _emit(f"criterion: {report.separating_criterion}")
        for d in report.details:
            flags = "skipped" if d.skipped else " ".join(f"{c}:{'same' if ok else 'DIFF'}" for c, ok in d.results.items())
            _emit(f"  {d.orbit.compressed():<24} {flags}")
    return EXIT_PARTIAL if report.incomplete and not report.distinguished else EXIT_OK


# --- family ------------------------------------------------------------------


@dataclass
class FamilyReport:
    labels: list[str]
    classes: list[list[int]]
    steps: list[dict]  # per orbit: orbit, classes after, newly distinguished
    separations: dict[tuple[int, int], dict]  # (i, j) -> first separating orbit/criterion
    partial: bool = False

    def to_json(self) -> dict:
        return {
            "graphs": self.labels,
            "classes": [[self.labels[i] for i in c] for c in self.classes],
            "steps": self.steps,
            "separations": [
                {"pair": [self.labels[i], self.labels[j]], **v} for (i, j), v in sorted(self.separations.items())
            ],
            "partial": self.partial,
        }


def _record_key(r: OrbitCertificate, pf) -> tuple:
    return (
        tuple(r.multiset.items()),
        r.hafnian_sum,
        pf * r.squared_sum**2,
        tuple(sorted(r.photon_vector)),
    )


def family_refinement(cfg: RunConfig, graphs: list[Graph]) -> FamilyReport:
    """Split the family orbit by orbit; a class splits when its members' orbit records differ."""
    if len({g.order for g in graphs}) != 1:
        raise InputError("family members must all have the same order")
    labels = [g.label or f"g{i}" for i, g in enumerate(graphs)]
    M = graphs[0].order
    encs = [cfg.encode(g) for g in graphs]
    if len({e.c for e in encs}) != 1:
        raise InputError("encodings chose different c; pass --c explicitly")
    cache = cfg.cache()
    separations: dict[tuple[int, int], dict] = {}

    def split(classes, keyf, stage):
        out = []
        for cls in classes:
            groups: dict = {}
            for i in cls:
                groups.setdefault(keyf(i), []).append(i)
            parts = list(groups.values())
            for a in range(len(parts)):
                for b in range(a + 1, len(parts)):
                    for i in parts[a]:
                        for j in parts[b]:
                            separations[(min(i, j), max(i, j))] = stage
            out.extend(parts)
        return out

    polys = [characteristic_polynomial(g) for g in graphs]
    classes = split([list(range(len(graphs)))], lambda i: polys[i], {"orbit": None, "criterion": "spectrum"})
    steps = [{"orbit": None, "stage": "spectrum", "classes": len(classes), "newly_distinguished": len(classes) - 1}]
    partial = False
    for o in cfg.schedule(M):
        if all(len(c) == 1 for c in classes):
            break
        active = [i for c in classes if len(c) > 1 for i in c]
        recs = {i: cached_orbit_certificate(encs[i], o, cache, cfg.workers, cfg.budget) for i in active}
        if any(r.skipped for r in recs.values()):
            partial = True
            steps.append({"orbit": list(o.representative), "stage": o.compressed(), "classes": len(classes),
                          "newly_distinguished": 0, "skipped": True})
            continue
        before = len(classes)
        # criteria are evaluated strongest first so each pair records the first differing one
        for crit_idx, crit in enumerate(CRITERIA):
            if crit not in cfg.criteria:
                continue
            classes = split(
                classes,
                lambda i, ci=crit_idx: _record_key(recs[i], encs[i].prefactor_sq)[ci] if i in recs else None,
                {"orbit": list(o.representative), "criterion": crit},
            )
        steps.append({"orbit": list(o.representative), "stage": o.compressed(), "classes": len(classes),
                      "newly_distinguished": len(classes) - before})
    classes = sorted((sorted(c) for c in classes), key=lambda c: c[0])
    return FamilyReport(labels, classes, steps, separations, partial)


def cmd_family(cfg: RunConfig) -> int:
    graphs = [g for p in cfg.paths for g in load_graphs(p, cfg.fmt)]
    rep = family_refinement(cfg, graphs)
    if cfg.output == "json":
        _emit(json.dumps(rep.to_json(), indent=1))
    else:
        _emit(f"{len(graphs)} graphs, {len(rep.classes)} classes{' (partial)' if rep.partial else ''}")
        for s in rep.steps:
            extra = " skipped" if s.get("skipped") else ""
            _emit(f"  {s['stage']:<24} classes={s['classes']:<4} new={s['newly_distinguished']}{extra}")
        for c in rep.classes:
            _emit("  class: " + ", ".join(rep.labels[i] for i in c))
    return EXIT_PARTIAL if rep.partial else EXIT_OK


# --- probabilities and orbits ------------------------------------------------

PROBABILITY_COLUMNS = ("total_photons", "orbit_representative", "orbit_size", "orbit_probability")


def probability_rows(cfg: RunConfig, g: Graph):
    """Yield (total, representative, size, probability) for nonzero orbits; None marks skipped."""
    e = cfg.encode(g)
    cache = cfg.cache()
    for o in cfg.schedule(g.order):
        if o.is_zero_probability():
            continue
        r = cached_orbit_certificate(e, o, cache, cfg.workers, cfg.budget)
        if r.skipped:
            yield o, None
            continue
        p = e.prefactor * float(e.c ** o.total * r.squared_sum / o.factorial) if r.squared_sum else 0.0
        if p:
            yield o, p


def cmd_probabilities(cfg: RunConfig) -> int:
    graphs = load_graphs(cfg.paths[0], cfg.fmt)
    g = graphs[0]
    partial = False
    rows = []
    for o, p in probability_rows(cfg, g):
        if p is None:
            partial = True
            continue
        rows.append((o.total, o.compressed(), o.size, p))
    if cfg.output == "json":
        _emit(json.dumps([dict(zip(PROBABILITY_COLUMNS, (t, r, str(s), p))) for t, r, s, p in rows], indent=1))
    elif cfg.output == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(PROBABILITY_COLUMNS)
        for t, r, s, p in rows:
            w.writerow([t, r, s, repr(p)])
    else:
        for t, r, s, p in rows:
            _emit(f"{t:>3}  {r:<24} {s:>12}  {p:.12e}")
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_orbits(cfg: RunConfig, total: int, modes: int) -> int:
    try:
        reps = partitions(total, modes)
    except OddTotalError as exc:
        raise InputError(str(exc)) from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    rows = [Orbit(p) for p in reps]
    if cfg.output == "json":
        _emit(json.dumps([
            {"representative": list(o.representative), "size": str(o.size), "zero": o.is_zero_probability()}
            for o in rows
        ], indent=1))
    elif cfg.output == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(("orbit_representative", "orbit_size", "zero_probability"))
        for o in rows:
            w.writerow((o.compressed(), o.size, int(o.is_zero_probability())))
    else:
        for o in rows:
            _emit(f"{o.compressed():<24} {o.size:>14}{'  zero' if o.is_zero_probability() else ''}")
    return EXIT_OK


# --- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=("graph6", "json"), help="input format (default: by extension)")
    common.add_argument("--c", help="scaling constant, e.g. 1/6.9 (default 1/(||A||+k+1) rounded down)")
    common.add_argument("--k", default="0", help="diagonal shift (default 0)")
    common.add_argument("--max-photons", type=int, default=4, help="certify all orbits with |n| <= this (even)")
    common.add_argument("--orbit", action="append", default=[], metavar="N1,N2,...",
                        help="explicit orbit, zero-padded to the graph order; repeatable, used in the given order")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--cache-dir", type=Path)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max orbit elements per orbit")
    common.add_argument("--criteria", default=",".join(CRITERIA),
                        help="comma-separated comparison criteria (default: all, strongest first)")
    common.add_argument("--schedule", choices=SCHEDULES, default="spread",
                        help="orbit order within each photon total when --orbit is not given")
    common.add_argument("--output", choices=("text", "json", "csv"), default="text")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="gbsiso", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("certify", parents=[common], help="write certificate JSON files")
    s.add_argument("paths", nargs="+", type=Path)
    s.add_argument("--out-dir", type=Path, default=Path("certificates"))
    s = sub.add_parser("compare", parents=[common], help="compare two graphs")
    s.add_argument("paths", nargs="+", type=Path)
    s = sub.add_parser("family", parents=[common], help="split a family into classes")
    s.add_argument("paths", nargs="+", type=Path)
    s = sub.add_parser("probabilities", parents=[common], help="orbit probabilities")
    s.add_argument("paths", nargs=1, type=Path)
    s = sub.add_parser("orbits", parents=[common], help="list orbits of a photon total")
    s.add_argument("--total", type=int, required=True)
    s.add_argument("--modes", type=int, required=True)
    return p


def _configure_logging(verbose: int) -> None:
    # own handler so messages reach stderr even when the host already configured logging
    for h in list(log.handlers):
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.WARNING - 10 * min(verbose, 2))
    log.propagate = False


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    cfg = RunConfig(
        paths=list(getattr(args, "paths", [])),
        fmt=args.fmt,
        c=args.c,
        k=args.k,
        max_photons=args.max_photons,
        orbit_specs=args.orbit,
        workers=args.workers,
        cache_dir=args.cache_dir,
        output=args.output,
        budget=args.budget,
        schedule_order=args.schedule,
        criteria=tuple(x.strip() for x in args.criteria.split(",") if x.strip()),
    )
    try:
        if args.c is not None:
            parse_rational(args.c)
        parse_rational(args.k)
        if args.command == "orbits":
            return cmd_orbits(cfg, args.total, args.modes)
        cfg.validate()
        if args.command == "certify":
            return cmd_certify(cfg, args.out_dir)
        if args.command == "compare":
            return cmd_compare(cfg)
        if args.command == "family":
            return cmd_family(cfg)
        if args.command == "probabilities":
            return cmd_probabilities(cfg)
    except (InputError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
