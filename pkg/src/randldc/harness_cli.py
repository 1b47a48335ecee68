"""Monte Carlo experiments and the ``randldc`` command line.

An experiment runs, for every strategy and decode epsilon, ``trials``
independent trials: draw a message, encode, let the adversary corrupt the
word within its budget, decode one target bit and log the queries.  Every
trial draws from its own stream derived from ``base_seed`` and its
coordinates, so results do not depend on execution order and a rerun gives a
byte-identical CSV.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .bitcore import BitString, DecodeFailure, QueryOracle, RandomStream
from .channel_sim import AdversaryContext, apply_channel, budget_for, builtin_strategies, strategy_by_name
from .codes_edit import build_greedy_code, cache_dir, edit_distance
from .ldc_edit import (
    EditFlexParams,
    EditLdcParams,
    decode_edit_flexible,
    decode_edit_oblivious,
    decode_edit_shared,
    encode_edit_flexible,
    encode_edit_oblivious,
    encode_edit_shared,
    normalize_length,
)
from .ldc_hamming import (
    FlexibleParams,
    HammingLdcParams,
    SharedRandomness,
    decode_flexible,
    decode_oblivious,
    decode_shared,
    deserialize,
    encode_flexible,
    encode_oblivious,
    encode_shared,
    serialize,
)

CONSTRUCTIONS = ("ham-sr", "ham-obl", "ham-flex-sr", "ham-flex-obl",
                 "edit-sr", "edit-obl", "edit-flex-sr", "edit-flex-obl")
OUTCOMES = ("correct", "wrong", "decode_failure")
TARGET_MODES = ("uniform", "sweep")


# ---------------------------------------------------------------- constructions

@dataclass(frozen=True)
class Scheme:
    """One construction at fixed parameters behind a uniform encode/decode surface."""

    construction: str
    k: int
    epsilon: float  # build-time epsilon; flexible schemes ignore it

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"unknown construction {self.construction!r}; choose from {CONSTRUCTIONS}")

    @property
    def error_type(self) -> str:
        return "hamming" if self.construction.startswith("ham") else "edit"

    @property
    def model(self) -> str:
        return "shared" if self.construction.endswith("sr") else "oblivious"

    @property
    def flexible(self) -> bool:
        return "-flex-" in self.construction

    @property
    def params(self):
        return _params(self.construction, self.k, self.epsilon)

    @property
    def n(self) -> int:
        p = self.params
        if isinstance(p, HammingLdcParams):
            return p.length(self.model)
        return p.n

    @property
    def block_len(self) -> int | None:
        return self.params.layout.block_len if self.error_type == "edit" else None

    @property
    def tolerated_delta(self) -> float:
        return self.params.delta

    def encode(self, x: BitString, shared: SharedRandomness, rs: RandomStream) -> BitString:
        p, c = self.params, self.construction
        if c == "ham-sr":
            return encode_shared(x, shared, p).z
        if c == "ham-obl":
            return encode_oblivious(x, rs, p).bits
        if c.startswith("ham-flex"):
            return encode_flexible(x, shared if self.model == "shared" else rs, p).bits
        if c == "edit-sr":
            return encode_edit_shared(x, shared, p)
        if c == "edit-obl":
            return encode_edit_oblivious(x, rs, p)
        return encode_edit_flexible(x, shared if self.model == "shared" else rs, p)

    def received_oracle(self, word: BitString) -> QueryOracle:
        """Edit decoders see the received word truncated or zero-padded to n."""
        if self.error_type == "edit":
            word = normalize_length(word, self.n)
        return QueryOracle(word)

    def decode(self, i: int, oracle: QueryOracle, epsilon: float, shared: SharedRandomness,
               rs: RandomStream) -> int:
        p, c = self.params, self.construction
        if c == "ham-sr":
            return decode_shared(i, oracle, shared, p)
        if c == "ham-obl":
            return decode_oblivious(i, oracle, p, rs)
        if c.startswith("ham-flex"):
            return decode_flexible(i, oracle, epsilon, shared, p, rs)
        if c == "edit-sr":
            return decode_edit_shared(i, oracle, shared, p, rs)
        if c == "edit-obl":
            return decode_edit_oblivious(i, oracle, p, rs)
        return decode_edit_flexible(i, oracle, epsilon, shared, p, rs)


@lru_cache(maxsize=None)
def _params(construction: str, k: int, epsilon: float):
    model = "shared" if construction.endswith("sr") else "oblivious"
    if construction in ("ham-sr", "ham-obl"):
        return HammingLdcParams(k, epsilon)
    if construction.startswith("ham-flex"):
        return FlexibleParams(k, model)
    if construction in ("edit-sr", "edit-obl"):
        return EditLdcParams(k, epsilon, model)
    return EditFlexParams(k, model)


# ---------------------------------------------------------------- experiments

def parse_epsilon(text: str) -> tuple[float, ...]:
    """``"0.1"`` or ``"flex:0.25,0.0625"``."""
    body = text[len("flex:"):] if text.startswith("flex:") else text
    values = tuple(float(v) for v in body.split(",") if v.strip())
    if not values:
        raise ValueError(f"no epsilon in {text!r}")
    return values


def format_epsilon(values: tuple[float, ...], flexible: bool) -> str:
    body = ",".join(repr(v) for v in values)
    return f"flex:{body}" if flexible else body


@dataclass(frozen=True)
class ExperimentConfig:
    construction: str
    k: int
    epsilon: tuple[float, ...]
    delta: float | None = None  # None: the construction's configured delta
    strategies: tuple[str, ...] = ("all",)
    trials: int = 100
    base_seed: int = 0
    target: str = "uniform"  # "sweep" cycles the target through every index

    @property
    def scheme(self) -> Scheme:
        return Scheme(self.construction, self.k, self.epsilon[0])

    @property
    def model(self) -> str:
        return self.scheme.model

    @property
    def error_type(self) -> str:
        return self.scheme.error_type

    @property
    def resolved_delta(self) -> float:
        return self.scheme.tolerated_delta if self.delta is None else self.delta

    def strategy_names(self) -> list[str]:
        sc = self.scheme
        if "all" in self.strategies:
            return [s.name for s in builtin_strategies(sc.error_type, sc.model)]
        return list(self.strategies)

    def validate(self) -> None:
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"unknown construction {self.construction!r}; choose from {CONSTRUCTIONS}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.base_seed < 1 << 64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")
        if self.target not in TARGET_MODES:
            raise ValueError(f"target must be one of {TARGET_MODES}")
        if not self.epsilon:
            raise ValueError("at least one epsilon is required")
        sc = self.scheme
        if not sc.flexible and len(self.epsilon) != 1:
            raise ValueError(f"{self.construction} takes a single epsilon")
        for e in self.epsilon:
            if not 0 < e < 1 and not (sc.flexible and e == 1):
                raise ValueError(f"epsilon {e} outside (0, 1)")
        try:
            tol = sc.tolerated_delta
            sc.n
        except ValueError as exc:
            raise ValueError(f"invalid parameters for {self.construction}: {exc}") from exc
        if not 0 <= self.resolved_delta <= tol + 1e-12:
            raise ValueError(f"delta {self.resolved_delta} outside the tolerated range [0, {tol:.6g}]")
        if not self.strategy_names():
            raise ValueError("no strategy applies to this construction")
        for name in self.strategy_names():
            st = strategy_by_name(sc.error_type, name)
            if st.needs_codeword and sc.model == "oblivious":
                raise ValueError(f"strategy {name} reads the codeword; not allowed for an oblivious channel")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    target: int
    strategy: str
    epsilon: float
    outcome: str
    queries_bits: int
    queries_positions: int


def run_trial(cfg: ExperimentConfig, strategy: str, eps_index: int, t: int) -> TrialRecord:
    sc = cfg.scheme
    eps = cfg.epsilon[eps_index]
    trs = RandomStream(cfg.base_seed, ("trial", strategy, eps_index, t))
    x = trs.derive("message").draw_bits(sc.k)
    shared = SharedRandomness(trs.derive("shared").draw_uint(64))
    word = sc.encode(x, shared, trs.derive("encoder"))
    n = word.length
    budget = budget_for(cfg.resolved_delta, n)
    ctx = AdversaryContext(sc.model, sc.error_type, n, budget,
                           visible_codeword=word if sc.model == "shared" else None,
                           block_len=sc.block_len)
    st = strategy_by_name(sc.error_type, strategy)
    received = apply_channel(word, st(ctx, trs.derive("adversary")), budget)
    i = t % sc.k if cfg.target == "sweep" else trs.derive("target").randbelow(sc.k)
    oracle = sc.received_oracle(received)
    try:
        bit = sc.decode(i, oracle, eps, shared, trs.derive("decoder"))
        outcome = "correct" if bit == int(x.bits[i]) else "wrong"
    except DecodeFailure:
        outcome = "decode_failure"
    return TrialRecord(t, i, strategy, eps, outcome, int(oracle.total), oracle.distinct())


def _run_chunk(cfg: ExperimentConfig, jobs: list[tuple[str, int, int]]) -> list[TrialRecord]:
    return [run_trial(cfg, s, e, t) for s, e, t in jobs]


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[TrialRecord]:
    """All trials, ordered by (strategy, epsilon, trial index) whatever ``workers`` is."""
    cfg.validate()
    jobs = [(s, e, t) for s in cfg.strategy_names() for e in range(len(cfg.epsilon)) for t in range(cfg.trials)]
    if workers <= 1:
        return _run_chunk(cfg, jobs)
    size = math.ceil(len(jobs) / workers)
    chunks = [jobs[j:j + size] for j in range(0, len(jobs), size)]
    with ProcessPoolExecutor(workers) as pool:
        parts = list(pool.map(_run_chunk, [cfg] * len(chunks), chunks))
    return [r for part in parts for r in part]


@dataclass(frozen=True)
class SummaryRow:
    strategy: str
    epsilon: float
    trials: int
    failures: int
    failure_rate: float
    ci_low: float
    ci_high: float
    mean_queries_bits: float
    max_queries_bits: int


def wilson_interval(failures: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(failures, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def summarize(records: list[TrialRecord]) -> list[SummaryRow]:
    """One row per (strategy, epsilon); failures include decode failures."""
    if not records:
        raise ValueError("no records to summarize")
    groups: dict[tuple[str, float], list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.strategy, r.epsilon), []).append(r)
    rows = []
    for (strategy, eps), rs in groups.items():
        fails = sum(r.outcome != "correct" for r in rs)
        lo, hi = wilson_interval(fails, len(rs))
        q = np.array([r.queries_bits for r in rs], dtype=np.int64)
        rows.append(SummaryRow(strategy, eps, len(rs), fails, fails / len(rs), lo, hi,
                               float(q.mean()), int(q.max())))
    return rows


# ---------------------------------------------------------------- CSV

CONFIG_COLUMNS = ("construction", "model", "error_type", "k", "delta", "trials", "base_seed", "target_mode")
RECORD_COLUMNS = tuple(f.name for f in fields(TrialRecord))
CSV_COLUMNS = CONFIG_COLUMNS + RECORD_COLUMNS


def to_csv(cfg: ExperimentConfig, records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_NONE)
    w.writerow(CSV_COLUMNS)
    echo = [cfg.construction, cfg.model, cfg.error_type, cfg.k, repr(cfg.resolved_delta), cfg.trials,
            cfg.base_seed, cfg.target]
    for r in records:
        w.writerow(echo + [r.trial, r.target, r.strategy, repr(r.epsilon), r.outcome,
                           r.queries_bits, r.queries_positions])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[dict], list[TrialRecord]]:
    """Parse :func:`to_csv` output into config echoes and records."""
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    echoes, records = [], []
    for row in reader:
        d = dict(zip(header, row))
        echoes.append({c: d[c] for c in CONFIG_COLUMNS})
        if d["outcome"] not in OUTCOMES:
            raise ValueError(f"unknown outcome {d['outcome']!r}")
        records.append(TrialRecord(int(d["trial"]), int(d["target"]), d["strategy"], float(d["epsilon"]),
                                   d["outcome"], int(d["queries_bits"]), int(d["queries_positions"])))
    return echoes, records


def format_summary(rows: list[SummaryRow]) -> str:
    out = ["strategy,epsilon,trials,failures,failure_rate,ci_low,ci_high,mean_queries_bits,max_queries_bits"]
    for r in rows:
        out.append(f"{r.strategy},{r.epsilon!r},{r.trials},{r.failures},{r.failure_rate:.6f},"
                   f"{r.ci_low:.6f},{r.ci_high:.6f},{r.mean_queries_bits:.1f},{r.max_queries_bits}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- command line

def read_config_file(path: str | Path) -> dict[str, str]:
    """Plain ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


_DEFAULTS = {"epsilon": "0.1", "trials": "100", "seed": "0", "target": "uniform", "workers": "1"}


def _merged(args: argparse.Namespace) -> dict[str, str]:
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if value is None or key in ("command", "config", "func"):
            continue
        merged[key] = ",".join(value) if isinstance(value, list) else str(value)
    return merged


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    m = _merged(args)
    for key in ("construction", "k"):
        if key not in m:
            raise ValueError(f"missing --{key}")
    strategies = tuple(s for s in m.get("strategy", "all").split(",") if s)
    return ExperimentConfig(
        construction=m["construction"], k=int(m["k"]), epsilon=parse_epsilon(m["epsilon"]),
        delta=float(m["delta"]) if "delta" in m else None, strategies=strategies or ("all",),
        trials=int(m["trials"]), base_seed=int(m["seed"]), target=m["target"])


def _cmd_experiment(args) -> int:
    cfg = config_from_args(args)
    records = run_experiment(cfg, workers=int(_merged(args)["workers"]))
    text = to_csv(cfg, records)
    out = _merged(args).get("out")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    sys.stderr.write(format_summary(summarize(records)))
    return 0


def _message_bits(m: dict, k: int, seed: int) -> BitString:
    if "message" in m:
        s = m["message"]
        if len(s) != k or set(s) - {"0", "1"}:
            raise ValueError(f"--message must be {k} characters of 0/1")
        return BitString(np.array([int(c) for c in s], dtype=np.uint8))
    return RandomStream(seed, ("cli", "message")).draw_bits(k)


def _cmd_encode(args) -> int:
    m = _merged(args)
    cfg = config_from_args(args)
    cfg.validate()
    sc = cfg.scheme
    seed = cfg.base_seed
    x = _message_bits(m, sc.k, seed)
    word = sc.encode(x, SharedRandomness(seed), RandomStream(seed, ("cli", "encoder")))
    header = {"construction": sc.construction, "k": sc.k, "epsilon": format_epsilon(cfg.epsilon, sc.flexible),
              "model": sc.model}
    if sc.model == "shared":
        header["seed"] = seed
    data = serialize(word, header)
    if "out" not in m:
        raise ValueError("encode needs --out")
    Path(m["out"]).write_bytes(data)
    print("message", "".join(str(b) for b in x.bits.tolist()))
    print("length", word.length)
    return 0


def _cmd_decode(args) -> int:
    word, header = deserialize(Path(args.input).read_bytes())
    sc = Scheme(header["construction"], int(header["k"]), parse_epsilon(header["epsilon"])[0])
    # fixed-epsilon codes are built for one epsilon; only flexible ones accept another
    eps = parse_epsilon(args.epsilon if args.epsilon and sc.flexible else header["epsilon"])
    seed = args.seed if args.seed is not None else int(header.get("seed", 0))
    indices = range(sc.k) if args.index is None else [args.index]
    bits = []
    for i in indices:
        oracle = sc.received_oracle(word)
        try:
            bits.append(str(sc.decode(i, oracle, eps[0], SharedRandomness(seed),
                                      RandomStream(seed, ("cli", "decoder", i)))))
        except DecodeFailure:
            bits.append("?")
    print("".join(bits))
    return 0


def _cmd_codebook(args) -> int:
    code = build_greedy_code(args.N, args.min_rel_dist, verify=args.verify)
    book = code.codebook
    print(f"N={code.N} codewords={book.shape[0]} length={code.codeword_len} "
          f"min_admission_distance={code.min_dist} cache={cache_dir()}")
    if args.check:
        worst = min(edit_distance(BitString(book[a]), BitString(book[b]))
                    for a in range(book.shape[0]) for b in range(a + 1, book.shape[0]))
        print(f"pairwise_min_edit_distance={worst}")
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--construction", choices=CONSTRUCTIONS)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", help='decode epsilon, or "flex:e1,e2,..." for flexible codes')
    p.add_argument("--delta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="key=value file; flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="randldc", description="LDCs with randomized encoding")
    sub = ap.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("experiment", help="Monte Carlo failure and query measurement, CSV out")
    _common(ex)
    ex.add_argument("--strategy", action="append", help="repeatable; 'all' for every builtin strategy")
    ex.add_argument("--trials", type=int)
    ex.add_argument("--target", choices=TARGET_MODES)
    ex.add_argument("--workers", type=int)
    ex.add_argument("--out", help="CSV path (default stdout)")
    ex.set_defaults(func=_cmd_experiment)

    en = sub.add_parser("encode", help="encode a message into a serialized codeword")
    _common(en)
    en.add_argument("--message", help="k characters of 0/1 (default: random from --seed)")
    en.add_argument("--out", required=True)
    en.set_defaults(func=_cmd_encode)

    de = sub.add_parser("decode", help="locally decode bits of a serialized word")
    de.add_argument("input")
    de.add_argument("--index", type=int, help="bit to decode (default: all)")
    de.add_argument("--epsilon")
    de.add_argument("--seed", type=int, help="shared seed (default: the seed of record)")
    de.set_defaults(func=_cmd_decode)

    cb = sub.add_parser("codebook", help="build or load a cached greedy insdel codebook")
    cb.add_argument("--N", type=int, required=True)
    cb.add_argument("--min-rel-dist", type=float, default=0.1)
    cb.add_argument("--verify", action="store_true", help="rebuild and compare with the cache")
    cb.add_argument("--check", action="store_true", help="exhaustive pairwise distance check")
    cb.set_defaults(func=_cmd_codebook)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
