"""Experiment runner and command-line interface.

``run`` executes a sweep and writes ``results.csv`` and ``report.json``.
The process exit code is 0 exactly when every assertion of the sweep holds.

Subcommands::

    qlinred gen        write an instance file
    qlinred run        run a suite over a sweep
    qlinred fourier    dump the spectrum of a threshold set
    qlinred qsvt-poly  dump a threshold polynomial and its grid checks
    qlinred verify     run one matrix-vector product verification
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .additive import verify_robust_bogolyubov
from .avgcase import INSTANCE_KINDS, Instance, generate_instance, threshold_set
from .fflinalg import index_to_vector, vector_to_index
from .fourier import CharacterSet, fourier_transform, spec_threshold
from .qsub import q_verify
from .qsvt import threshold_polynomial
from .reduction import MODES, ReductionConfig, Solver, large_field_reduce, matrix_shift_reduce

__all__ = [
    "SUITES",
    "CSV_COLUMNS",
    "BOGOLYUBOV_COLUMNS",
    "ExperimentSpec",
    "ExperimentReport",
    "run",
    "write_outputs",
    "main",
]

SUITES = ("end-to-end", "shift", "large-field", "bogolyubov")

CSV_COLUMNS = ("instance_id", "n", "p", "alpha", "v", "seed", "success",
               "queries_UM", "queries_ALG", "attempts", "mode")

BOGOLYUBOV_COLUMNS = ("instance_id", "n", "p", "alpha", "seed", "density", "size_R", "size_bound",
                      "dim", "dim_bound", "min_probability", "alpha5", "ok")

MAX_ROWS = 10_000_000

DEFAULT_KINDS = {"end-to-end": ("footnote-adversary",), "shift": ("matrix-avg",),
                 "large-field": ("random-profile",), "bogolyubov": ("random-set",)}


@dataclass
class ExperimentSpec:
    """One sweep.

    Instances come from ``instance_files`` if given, else from the product
    of ``kinds``, ``ns`` and ``alphas`` through the seeded generator.  Each
    instance is run for ``seeds`` seeds (``0 .. seeds-1``) and every input.
    """

    suite: str = "end-to-end"
    kinds: tuple = ()
    ns: tuple = (4,)
    p: int = 2
    alphas: tuple = (None,)
    seeds: int = 200
    instance_seed: int = 0
    delta: float = 0.1
    mode: str = "idealized"
    band: str = "narrow"
    instance_files: tuple = ()
    out: str | None = None
    workers: int = 1
    suppress_timestamp: bool = False

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.seeds < 0 or self.workers < 1:
            raise ValueError("seeds must be >= 0 and workers >= 1")
        for f in self.instance_files:
            if not Path(f).is_file():
                raise FileNotFoundError(f)
        self.kinds = tuple(self.kinds) or DEFAULT_KINDS[self.suite]
        for k in self.kinds:
            if k not in INSTANCE_KINDS and not (self.suite == "bogolyubov" and k == "random-set"):
                raise ValueError(f"unknown instance kind {k!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    columns: tuple
    rows: list = field(default_factory=list)
    instances: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def check(self, name: str, passed: bool, detail: str = ""):
        self.assertions.append(dict(name=name, passed=bool(passed), detail=detail))

    def csv_text(self, timestamp: str | None = None) -> str:
        buf = io.StringIO()
        if timestamp is not None:
            buf.write(f"# generated {timestamp}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in self.columns])
        return buf.getvalue()

    def summary(self) -> dict:
        out = dict(suite=self.spec.suite, rows=len(self.rows), ok=self.ok,
                   wall_time=round(self.wall_time, 3), spec=self.spec.to_dict(),
                   instances=self.instances, assertions=self.assertions)
        if self.rows and "queries_UM" in self.columns:
            q = {}
            for key in ("queries_UM", "queries_ALG", "attempts"):
                vals = np.array([r[key] for r in self.rows], dtype=float)
                q[key] = dict(mean=float(vals.mean()), max=float(vals.max()))
            out["queries"] = q
        return out


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(round(float(x), 12))
    return str(x)


# ------------------------------------------------------------ instances

def _instances(spec: ExperimentSpec) -> list[Instance]:
    if spec.instance_files:
        return [Instance.from_json(Path(f).read_text()) for f in spec.instance_files]
    out = []
    for kind in spec.kinds:
        for n in spec.ns:
            for a in spec.alphas:
                out.append(generate_instance(kind, n, spec.p, seed=spec.instance_seed, alpha=a))
    return out


def _config(spec: ExperimentSpec, inst: Instance, seed: int) -> ReductionConfig:
    return ReductionConfig(alpha=inst.alpha, delta=spec.delta, seed=seed, mode=spec.mode,
                           band=spec.band, record_trace=False)


def _row(inst, v, seed, res, mode) -> dict:
    return dict(instance_id=inst.instance_id, n=inst.n, p=inst.p, alpha=inst.alpha, v=int(v),
                seed=seed, success=int(res.success), queries_UM=res.queries_UM,
                queries_ALG=res.queries_ALG, attempts=res.attempts, mode=mode)


def _run_chunk(args) -> tuple[list, int]:
    """Rows for one instance and a block of seeds, plus the count of wrong returns."""
    spec, inst, seeds = args
    rows, wrong = [], 0
    N = inst.p ** inst.n
    truth = None
    if spec.suite == "end-to-end":
        alg = inst.planted()
        base = Solver(alg, _config(spec, inst, 0))
        truth = alg.answers()
        for seed in seeds:
            sol = base.with_seed(seed)
            for v in range(N):
                res = sol.solve(v)
                if res.success:
                    wrong += int(vector_to_index(res.b, inst.p) != truth[v])
                rows.append(_row(inst, v, seed, res, spec.mode))
        return rows, wrong
    M = inst.M
    for seed in seeds:
        cfg = _config(spec, inst, seed)
        for v in range(N):
            x = index_to_vector(v, inst.n, inst.p)
            if spec.suite == "shift":
                res = matrix_shift_reduce(inst.algorithm_for, M, x, cfg)
            else:
                res = large_field_reduce(inst.planted(), x, cfg)
            if res.success:
                wrong += int(not np.array_equal(res.b, (M @ x) % inst.p))
            rows.append(_row(inst, v, seed, res, spec.mode))
    return rows, wrong


def _bogolyubov_rows(spec: ExperimentSpec) -> list[dict]:
    rows = []
    for n in spec.ns:
        for a in spec.alphas:
            a = 0.5 if a is None else a
            N = spec.p ** n
            for seed in range(spec.seeds):
                rng = np.random.default_rng([spec.instance_seed, n, int(a * 1000), seed])
                X = np.zeros(N, dtype=bool)
                X[rng.choice(N, int(math.ceil(a * N)), replace=False)] = True
                R = spec_threshold(fourier_transform(X.astype(float), n, spec.p), a ** 1.5)
                rep = verify_robust_bogolyubov(X, R, alpha=a)
                rows.append(dict(instance_id=f"random-set-p{spec.p}-n{n}-a{a}", n=n, p=spec.p, alpha=a,
                                 seed=seed, density=float(X.mean()), size_R=rep.size_R,
                                 size_bound=rep.size_bound, dim=rep.dim, dim_bound=rep.dim_bound,
                                 min_probability=rep.min_probability, alpha5=a ** 5, ok=int(rep.ok)))
    return rows


# ------------------------------------------------------------------ run

def run(spec: ExperimentSpec) -> ExperimentReport:
    """Execute the sweep; per-row failures are recorded, never raised."""
    t0 = time.perf_counter()
    if spec.suite == "bogolyubov":
        rep = ExperimentReport(spec, BOGOLYUBOV_COLUMNS)
        rep.rows = _bogolyubov_rows(spec)
        bad = [r for r in rep.rows if not r["ok"]]
        rep.check("bogolyubov", not bad, f"{len(bad)} of {len(rep.rows)} sets violate the conclusion")
        rep.wall_time = time.perf_counter() - t0
        return rep

    rep = ExperimentReport(spec, CSV_COLUMNS)
    insts = _instances(spec)
    total = sum(i.p ** i.n for i in insts) * spec.seeds
    if total > MAX_ROWS:
        raise ValueError(f"sweep has {total} rows, above the limit {MAX_ROWS}")
    tasks, order = [], []
    for k, inst in enumerate(insts):
        mean = float(inst.profile.mean())
        rep.instances.append(dict(instance_id=inst.instance_id, kind=inst.kind, n=inst.n, p=inst.p,
                                  alpha=inst.alpha, mean_success=mean))
        if inst.kind != "matrix-avg" and mean < inst.alpha - 1e-12:
            rep.check(f"premise:{inst.instance_id}", False, f"mean {mean:.4g} below alpha {inst.alpha}")
            continue
        seeds = list(range(spec.seeds))
        step = max(1, math.ceil(len(seeds) / spec.workers)) if spec.mode == "idealized" else len(seeds) or 1
        for j in range(0, len(seeds), step):
            tasks.append((spec, inst, seeds[j:j + step]))
            order.append(k)
    if spec.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(spec.workers) as ex:
            results = list(ex.map(_run_chunk, tasks))
    else:
        results = [_run_chunk(t) for t in tasks]

    by_inst: dict[int, tuple[list, int]] = {}
    for k, (rows, wrong) in zip(order, results):
        acc = by_inst.setdefault(k, ([], 0))
        by_inst[k] = (acc[0] + rows, acc[1] + wrong)
    for k in sorted(by_inst):
        rows, wrong = by_inst[k]
        rows.sort(key=lambda r: (r["seed"], r["v"]))
        rep.rows.extend(rows)
        inst = insts[k]
        rates = _success_rates(rows)
        worst = min(rates.values()) if rates else 1.0
        rep.instances[k].update(min_success=worst, wrong_returns=wrong)
        rep.check(f"success:{inst.instance_id}", worst >= 1 - spec.delta,
                  f"min per-input success {worst:.4f} vs {1 - spec.delta:.4f}")
        rep.check(f"soundness:{inst.instance_id}", wrong == 0, f"{wrong} wrong returns")
    rep.wall_time = time.perf_counter() - t0
    return rep


def _success_rates(rows) -> dict[int, float]:
    tot: dict[int, list] = {}
    for r in rows:
        tot.setdefault(r["v"], []).append(r["success"])
    return {v: float(np.mean(s)) for v, s in tot.items()}


def write_outputs(rep: ExperimentReport, out: str | Path) -> tuple[Path, Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    stamp = None if rep.spec.suppress_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds")
    csv_path, json_path = out / "results.csv", out / "report.json"
    csv_path.write_text(rep.csv_text(stamp))
    json_path.write_text(json.dumps(rep.summary(), indent=2, sort_keys=True, default=_json_default) + "\n")
    return csv_path, json_path


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


# ------------------------------------------------------------------ CLI

def _parse_matrix(text: str) -> np.ndarray:
    return np.array([[int(x) for x in row.split(",")] for row in text.split(";")], dtype=np.int64)


def _parse_vector(text: str) -> np.ndarray:
    return np.array([int(x) for x in text.split(",")], dtype=np.int64)


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_or_generate(args) -> Instance:
    if args.instance:
        return Instance.from_json(Path(args.instance).read_text())
    return generate_instance(args.kind, args.n, args.p, seed=args.seed, alpha=args.alpha)


def _cmd_gen(args) -> int:
    coset = json.loads(args.coset) if args.coset is not None else None
    inst = generate_instance(args.kind, args.n, args.p, seed=args.seed, alpha=args.alpha,
                             policy=args.policy, level=args.level, coset=coset)
    if args.out:
        Path(args.out).write_text(inst.to_json() + "\n")
    else:
        print(inst.to_json())
    return 0


def _cmd_run(args) -> int:
    if args.spec:
        spec = ExperimentSpec(**json.loads(Path(args.spec).read_text()))
    else:
        spec = ExperimentSpec(suite=args.suite, kinds=tuple(args.kind or ()), ns=tuple(args.n), p=args.p,
                              alphas=tuple(args.alpha) if args.alpha else (None,), seeds=args.seeds,
                              instance_seed=args.seed, delta=args.delta, mode=args.mode, band=args.band,
                              instance_files=tuple(args.instance or ()), out=args.out,
                              workers=args.workers, suppress_timestamp=args.suppress_timestamp)
    rep = run(spec)
    out = spec.out or args.out
    if out:
        write_outputs(rep, out)
    for a in rep.assertions:
        print(f"{'PASS' if a['passed'] else 'FAIL'} {a['name']}: {a['detail']}")
    print(f"{len(rep.rows)} rows, {'ok' if rep.ok else 'FAILED'}")
    return 0 if rep.ok else 1


def _cmd_fourier(args) -> int:
    inst = _load_or_generate(args)
    tau = args.tau if args.tau is not None else inst.alpha / 2
    X = threshold_set(inst.success_profile(), tau)
    spec = fourier_transform(X.astype(float), inst.n, inst.p)
    chars = CharacterSet(tuple(int(i) for i in np.nonzero(spec.magnitudes() >= args.gamma - 1e-12)[0] if i),
                         inst.n, inst.p, args.gamma)
    rows = [dict(index=i, vector=index_to_vector(i, inst.n, inst.p).tolist(),
                 re=float(spec.coeffs[i].real), im=float(spec.coeffs[i].imag),
                 modulus=float(abs(spec.coeffs[i]))) for i in chars.indices]
    _emit(dict(instance_id=inst.instance_id, tau=tau, density=float(X.mean()), gamma=args.gamma,
               characters=rows), args.out)
    return 0


def _cmd_poly(args) -> int:
    P = threshold_polynomial(args.t, args.width, args.eps)
    lo = np.linspace(0, args.t - args.width / 2, 2001)
    hi = np.linspace(args.t + args.width / 2, 1, 2001)
    checks = dict(sup_norm=P.sup_norm(), min_high=float(P(hi).min()), max_low=float(np.abs(P(lo)).max()))
    ok = (checks["sup_norm"] <= 1 + 1e-6 and checks["min_high"] >= 1 - args.eps
          and checks["max_low"] <= args.eps)
    _emit(dict(t=args.t, width=args.width, eps=args.eps, degree=P.degree, parity=P.parity,
               coeffs=P.coeffs.tolist(), checks=checks, ok=ok), args.out)
    return 0 if ok else 1


def _cmd_verify(args) -> int:
    M, v, b = _parse_matrix(args.M), _parse_vector(args.v), _parse_vector(args.b)
    res = q_verify(M, v, b, args.eps, rng=np.random.default_rng(args.seed), p=args.p)
    _emit(dict(accept_prob=res.accept_prob, accepted=res.accepted, L=res.L, queries=res.queries,
               truth=bool(np.array_equal((M @ v) % args.p, b % args.p))), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qlinred", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp, alpha_many=False):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out")
        if alpha_many:
            sp.add_argument("--alpha", type=float, nargs="+")
        else:
            sp.add_argument("--alpha", type=float)

    g = sub.add_parser("gen", help="write an instance file")
    common(g)
    g.add_argument("--kind", choices=INSTANCE_KINDS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, default=2)
    g.add_argument("--level", type=float)
    g.add_argument("--coset", help="JSON list of [coordinate, value] constraints")
    g.add_argument("--policy", default="single-adjacent-wrong")
    g.set_defaults(fn=_cmd_gen)

    r = sub.add_parser("run", help="run a suite over a sweep")
    common(r, alpha_many=True)
    r.add_argument("--suite", choices=SUITES, default="end-to-end")
    r.add_argument("--spec", help="JSON file with ExperimentSpec fields")
    r.add_argument("--kind", nargs="+")
    r.add_argument("--instance", nargs="+", help="instance JSON files")
    r.add_argument("--n", type=int, nargs="+", default=[4])
    r.add_argument("--p", type=int, default=2)
    r.add_argument("--seeds", type=int, default=200)
    r.add_argument("--delta", type=float, default=0.1)
    r.add_argument("--mode", choices=MODES, default="idealized")
    r.add_argument("--band", choices=("narrow", "wide"), default="narrow")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--suppress-timestamp", action="store_true")
    r.set_defaults(fn=_cmd_run)

    f = sub.add_parser("fourier", help="spectrum of an instance's threshold set")
    common(f)
    f.add_argument("--instance")
    f.add_argument("--kind", choices=INSTANCE_KINDS, default="footnote-adversary")
    f.add_argument("--n", type=int, default=4)
    f.add_argument("--p", type=int, default=2)
    f.add_argument("--tau", type=float)
    f.add_argument("--gamma", type=float, default=1e-9)
    f.set_defaults(fn=_cmd_fourier)

    q = sub.add_parser("qsvt-poly", help="threshold polynomial and grid check")
    common(q)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--width", type=float, required=True)
    q.add_argument("--eps", type=float, required=True)
    q.set_defaults(fn=_cmd_poly)

    v = sub.add_parser("verify", help="one matrix-vector product verification")
    common(v)
    v.add_argument("--M", required=True, help="rows separated by ';', entries by ','")
    v.add_argument("--v", required=True)
    v.add_argument("--b", required=True)
    v.add_argument("--p", type=int, default=2)
    v.add_argument("--eps", type=float, default=0.05)
    v.set_defaults(fn=_cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
