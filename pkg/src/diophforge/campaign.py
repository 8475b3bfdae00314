"""Seeded verification campaigns over random rationals t.

Each sample records the reduced-fraction ground truth, the factorization
oracle's verdict and the outcome of the witness search. Timings are kept
out of the report unless asked for, so equal configs give equal bytes.
"""

from __future__ import annotations

import json
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .exact import FactorizationBudgetExceeded, factor_budget, format_rational

CACHE_ENV = "DIOPH_FORGE_CACHE"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class CampaignConfig:
    samples: int = 100
    height: int = 100
    witness_height: int = 31
    factor_budget: int = 200_000
    seed: int = 0
    jobs: int = 1
    out: str | None = None
    check_p: bool = False  # also evaluate the 32-unknown polynomial at each witness
    timings: bool = False
    integers_only: bool = False

    def validate(self) -> None:
        for name in ("samples", "height", "factor_budget", "jobs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.witness_height < 0:
            raise ValueError("witness_height must be nonnegative")


@dataclass
class SampleRecord:
    t: str
    ground_truth: bool
    oracle_verdict: bool | None
    witness_status: str
    route: str | None = None
    clause: int | None = None
    p_zero: bool | None = None
    seconds: float | None = None


@dataclass
class CampaignReport:
    config: dict
    version: str
    records: list[SampleRecord] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        c = {
            "samples": len(self.records),
            "positives": sum(r.ground_truth for r in self.records),
            "oracle_mismatches": sum(
                r.oracle_verdict is not None and r.oracle_verdict != r.ground_truth for r in self.records
            ),
            "oracle_unknown": sum(r.oracle_verdict is None for r in self.records),
            "witness_invalid": sum(r.witness_status == "invalid" for r in self.records),
        }
        for status in ("found", "unknown", "not-applicable", "invalid"):
            c[f"witness_{status}"] = sum(r.witness_status == status for r in self.records)
        for route in ("2-adic", "phi"):
            c[f"route_{route}"] = sum(r.route == route for r in self.records)
        return c

    @property
    def ok(self) -> bool:
        c = self.counts
        return c["oracle_mismatches"] == 0 and c["witness_invalid"] == 0

    def to_obj(self) -> dict:
        recs = []
        for r in self.records:
            d = asdict(r)
            if d["seconds"] is None:
                del d["seconds"]
            recs.append(d)
        return {"version": self.version, "config": self.config, "counts": self.counts, "ok": self.ok, "records": recs}

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=1, sort_keys=True)


def random_rational(rng: random.Random, H: int) -> Fraction:
    """Numerator uniform in [-H, H] minus 0, denominator uniform in [1, H], reduced."""
    n = 0
    while n == 0:
        n = rng.randint(-H, H)
    return Fraction(n, rng.randint(1, H))


def sample_points(cfg: CampaignConfig) -> list[Fraction]:
    rng = random.Random(cfg.seed)
    if cfg.integers_only:
        return [Fraction(rng.randint(-cfg.height, cfg.height)) for _ in range(cfg.samples)]
    return [random_rational(rng, cfg.height) for _ in range(cfg.samples)]


# per-process state: the representation and, lazily, the polynomial
_STATE: dict = {}


def _rep():
    if "rep" not in _STATE:
        from .assembly import build_notZ

        _STATE["rep"] = build_notZ()
    return _STATE["rep"]


def _poly():
    if "fp" not in _STATE:
        from .assembly import combine_to_P

        _STATE["fp"] = combine_to_P(_rep())
    return _STATE["fp"]


def run_sample(t: Fraction, cfg: CampaignConfig) -> SampleRecord:
    from .assembly import notZ_witness, p_witness, semantic_decide_notZ, vanishes_at

    start = time.perf_counter()
    rec = SampleRecord(t=format_rational(t), ground_truth=t.denominator != 1, oracle_verdict=None, witness_status="")
    try:
        with factor_budget(cfg.factor_budget):
            rec.oracle_verdict = semantic_decide_notZ(t)
    except FactorizationBudgetExceeded:
        pass
    if not rec.ground_truth:
        rec.witness_status = "not-applicable"
    elif cfg.witness_height == 0:
        rec.witness_status = "unknown"
    else:
        rep = _rep()
        try:
            with factor_budget(cfg.factor_budget):
                w, route = notZ_witness(t, rep, phi_height=cfg.witness_height)
        except FactorizationBudgetExceeded:
            w, route = None, "factor-budget"
        rec.route = route
        if w is None:
            rec.witness_status = "unknown"
        else:
            rec.clause = w.index
            valid = rep.formula.check(w, {"t": t})
            if valid and cfg.check_p:
                fp = _poly()
                rec.p_zero = vanishes_at(fp, p_witness(fp, t, w))
                valid = rec.p_zero
            rec.witness_status = "found" if valid else "invalid"
    if cfg.timings:
        rec.seconds = round(time.perf_counter() - start, 4)
    return rec


def _run_chunk(args: tuple[list[Fraction], CampaignConfig]) -> list[SampleRecord]:
    ts, cfg = args
    return [run_sample(t, cfg) for t in ts]


def run_campaign(cfg: CampaignConfig) -> CampaignReport:
    cfg.validate()
    points = sample_points(cfg)
    echo = {k: v for k, v in asdict(cfg).items() if k not in ("out", "jobs")}
    report = CampaignReport(config=echo, version=__version__)
    if cfg.jobs == 1:
        report.records = [run_sample(t, cfg) for t in points]
    else:
        chunks = [points[i :: cfg.jobs] for i in range(cfg.jobs)]
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_run_chunk, [(c, cfg) for c in chunks]))
        # undo the striping so records come back in sample order
        records: list[SampleRecord | None] = [None] * len(points)
        for i, res in enumerate(results):
            for j, rec in enumerate(res):
                records[i + j * cfg.jobs] = rec
        report.records = records  # type: ignore[assignment]
    if cfg.out:
        Path(cfg.out).write_text(report.to_json() + "\n")
    return report


def cache_dir() -> Path | None:
    d = os.environ.get(CACHE_ENV)
    return Path(d) if d else None
