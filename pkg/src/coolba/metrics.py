"""Run records, complexity bookkeeping and exponent estimation."""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .values import PHI

PHASE_KEYS = ("B1", "B2", "B3", "B4", "B5", "B6")
BIT_KEYS = PHASE_KEYS + ("obc_bits", "leader_bits", "dissemination_bits")
FLAG_KEYS = ("terminated", "consistent", "valid_applicable", "valid_holds",
             "lemma3_ok", "phase4_entry_ok")
CSV_COLUMNS = ("n", "t", "l", "rounds") + PHASE_KEYS + (
    "obc_bits", "total_bits", "total_excl_obc", "consistent", "valid", "lemma3_ok",
    "mode", "strategy", "seed")

# simulator meter name -> record keys it feeds
METER_KEYS = {
    "B1": ("B1",), "B2": ("B2",), "B3": ("B3",), "B4": ("B4",), "B6": ("B6",),
    "obc": ("B5", "obc_bits"),
    "leader": ("leader_bits",),
    "dissemination": ("dissemination_bits",),
}


def bits_from_meters(meters):
    bits = dict.fromkeys(BIT_KEYS, 0)
    for meter, value in meters.items():
        for key in METER_KEYS[meter]:
            bits[key] += value
    return bits


def _encode_value(v):
    return None if v is PHI else v.hex()


@dataclass
class RunRecord:
    mode: str
    n: int
    t: int
    ell: int
    rounds_total: int
    bits: dict
    outputs: dict
    flags: dict
    honest_bits: dict = field(default_factory=dict)
    strategy: str = ""
    seed: int | None = None
    faulty: tuple = ()
    committee: tuple | None = None
    transcript: object = field(default=None, repr=False, compare=False)

    @property
    def total_bits(self):
        b = self.bits
        return sum(b[k] for k in PHASE_KEYS) + b["leader_bits"] + b["dissemination_bits"]

    @property
    def total_excl_obc(self):
        return self.total_bits - self.bits["obc_bits"]

    @property
    def passed(self):
        f = self.flags
        return all(f[k] for k in FLAG_KEYS if k != "valid_applicable")

    def to_dict(self):
        return {
            "mode": self.mode,
            "n": self.n,
            "t": self.t,
            "l": self.ell,
            "seed": self.seed,
            "strategy": self.strategy,
            "faulty": list(self.faulty),
            "committee": list(self.committee) if self.committee else None,
            "rounds_total": self.rounds_total,
            "bits": dict(self.bits),
            "honest_bits": dict(self.honest_bits),
            "total_bits": self.total_bits,
            "total_excl_obc": self.total_excl_obc,
            "outputs": {str(i): _encode_value(v) for i, v in sorted(self.outputs.items())},
            "flags": dict(self.flags),
            "passed": self.passed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def csv_row(self):
        b = self.bits
        row = {"n": self.n, "t": self.t, "l": self.ell, "rounds": self.rounds_total}
        row.update({k: b[k] for k in PHASE_KEYS})
        row.update(obc_bits=b["obc_bits"], total_bits=self.total_bits,
                   total_excl_obc=self.total_excl_obc,
                   consistent=int(self.flags["consistent"]),
                   valid=int(self.flags["valid_holds"]),
                   lemma3_ok=int(self.flags["lemma3_ok"]),
                   mode=self.mode, strategy=self.strategy, seed=self.seed)
        return row


def write_csv(records, fh):
    writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(rec.csv_row())


@dataclass
class ExponentEstimate:
    alpha: float
    delta: float
    beta_hat: float  # one-bit consensus bits excluded
    beta_hat_with_obc: float
    residual: float
    residual_with_obc: float
    points: int

    def to_dict(self):
        return dict(self.__dict__)


def _fit(xs, ys):
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = float(np.sum((np.polyval([slope, intercept], xs) - ys) ** 2))
    return float(slope), resid


def estimate_exponent(records, alpha=None, delta=None):
    """Least-squares slope of log(total bits) against log(n).

    Records sharing an ``n`` are averaged in log space first. ``alpha`` and
    ``delta`` default to the mean of ``log l / log n`` and ``log t / log n``.
    """
    groups = {}
    for rec in records:
        groups.setdefault(rec.n, []).append(rec)
    if len(groups) < 2:
        raise ValueError("exponent estimation needs at least two distinct n values")
    ns = sorted(groups)
    xs = np.log([float(n) for n in ns])
    excl = np.array([np.mean([math.log(r.total_excl_obc) for r in groups[n]]) for n in ns])
    incl = np.array([np.mean([math.log(r.total_bits) for r in groups[n]]) for n in ns])
    if alpha is None:
        alpha = float(np.mean([math.log(groups[n][0].ell) / math.log(n) for n in ns]))
    if delta is None:
        delta = float(np.mean([math.log(max(groups[n][0].t, 1)) / math.log(n) for n in ns]))
    b1, r1 = _fit(xs, excl)
    b2, r2 = _fit(xs, incl)
    return ExponentEstimate(alpha, delta, b1, b2, r1, r2, len(ns))


def reference_bound(n, t, ell):
    """max{n*l, n*t*log2 t} with log2 clamped at t = 2."""
    return max(n * ell, n * t * math.log2(max(t, 2)))


def bound_constants(records):
    """Per-record ``total_excl_obc / max{n l, n t log t}`` and its spread (max/min)."""
    ks = [r.total_excl_obc / reference_bound(r.n, r.t, r.ell) for r in records]
    return ks, max(ks) / min(ks)


def round_constant(records, slack=8):
    """Smallest K_r with rounds_total <= K_r * t + slack over all records."""
    return max((r.rounds_total - slack) / max(r.t, 1) for r in records)


def expected_cool_rounds(t, committee=False, broadcast=False):
    """Round budget of plain COOL when the vote consensus outputs 1."""
    return 3 * (t + 1) + 6 + int(committee) + int(broadcast)
