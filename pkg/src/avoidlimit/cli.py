"""Command-line entry point: sample | compare | verify | enumerate | bridge-dp."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import dyson, permcore, plot, sampler, suites, wordpath
from .rng import SeededRng, run_replicas
from .stats import format_table

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_REFUSED = 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int
    d: int
    replicas: int
    seed: int
    grid: int | None
    out: str | None
    formats: tuple[str, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        if not 2 <= self.d <= 8:
            raise ValueError(f"d must lie in [2, 8], got {self.d}")
        if self.replicas < 1:
            raise ValueError(f"replicas must be at least 1, got {self.replicas}")

    def provenance(self) -> dict:
        """Everything that determines the output; the destination is left out."""
        return {k: v for k, v in asdict(self).items() if k != "out"}

    def header(self, **extra) -> str:
        return "# " + json.dumps({**self.provenance(), **extra}, sort_keys=True)


def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out or ".")
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SystemExit(f"cannot create output directory {path}: {exc}")
    return path


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise SystemExit(f"cannot write {path}: {exc}")


def _family_csv(family: wordpath.ScaledPathFamily, grid: int | None) -> str:
    if not grid:
        return family.to_csv()
    ts = np.arange(grid + 1) / grid
    vals = family(ts)
    lines = ["t," + ",".join(f"f_{k}" for k in range(1, family.d + 1))]
    lines += [",".join(f"{x:.17g}" for x in (t, *row)) for t, row in zip(ts, vals)]
    return "\n".join(lines) + "\n"


def _sample_one(n: int, d: int, rng: SeededRng):
    sigma = sampler.sample_avoider(n, d, rng)
    return sigma, rng.seed, rng.stream


def cmd_sample(cfg: RunConfig, args) -> int:
    out = _out_dir(cfg)
    if args.source == "dyson":
        for k in range(cfg.replicas):
            Z = dyson.sample_hermitian_bridge(cfg.d, cfg.grid or 1024, SeededRng(cfg.seed, suites.DYSON_STREAM + k))
            Z.check()
            eig = dyson.eigenvalue_process(Z)
            dyson.check_eigenvalues(eig.values)
            prov = cfg.header(stream=suites.DYSON_STREAM + k)
            if "csv" in cfg.formats:
                _write(out / f"eigen_{k}.csv", prov + "\n" + eig.to_csv())
            if "json" in cfg.formats:
                _write(out / f"bridge_{k}.json", Z.to_json())
            if "svg" in cfg.formats:
                curves = [(eig.times, eig.values[:, c], plot.PALETTE[c % 8]) for c in range(cfg.d)]
                _write(out / f"eigen_{k}.svg", plot.polylines_svg(curves, title=f"eigenvalues d={cfg.d}"))
        return EXIT_OK
    results = run_replicas(
        _SampleJob(cfg.n, cfg.d), cfg.replicas, cfg.seed, workers=args.workers
    )
    summary = []
    with open(out / "permutations.txt", "w") as perms:
        for k, (sigma, seed, stream) in enumerate(results):
            perms.write(sigma.to_text() + "\n")
            omega = permcore.words_from_perm(sigma, cfg.d)
            path = wordpath.path_from_words(omega)
            P = wordpath.build_p_sigma(sigma, cfg.d)
            S = wordpath.build_s_hat(path)
            dist = wordpath.sup_distance(P, S)
            prov = cfg.header(stream=stream)
            if "csv" in cfg.formats:
                _write(out / f"p_sigma_{k}.csv", prov + "\n" + _family_csv(P, cfg.grid))
                _write(out / f"s_hat_{k}.csv", prov + "\n" + _family_csv(S, cfg.grid))
            if "svg" in cfg.formats:
                curves, dashes = plot.family_curves(P)
                curves2, dashes2 = plot.family_curves(S, dashed=True)
                svg = plot.polylines_svg(curves + curves2, title=f"n={cfg.n} d={cfg.d}", dashed=dashes + dashes2)
                _write(out / f"paths_{k}.svg", svg)
            summary.append(
                {
                    "replica": k,
                    "seed": seed,
                    "stream": stream,
                    "sup_distance": dist,
                    "max_weyl_distance": wordpath.max_weyl_distance(path) if cfg.n <= 200_000 else None,
                }
            )
    if "json" in cfg.formats:
        _write(out / "sample.json", json.dumps({"config": cfg.provenance(), "replicas": summary}, indent=2))
    return EXIT_OK


@dataclass(frozen=True)
class _SampleJob:
    n: int
    d: int

    def __call__(self, rng: SeededRng):
        return _sample_one(self.n, self.d, rng)


def cmd_compare(cfg: RunConfig, args) -> int:
    try:
        suites.check_replicas(cfg.replicas, args.alpha)
    except ValueError as exc:
        print(f"refusing to compare: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    reports = suites.compare(cfg.n, cfg.d, cfg.replicas, cfg.seed, args.alpha, args.against, workers=args.workers)
    print(format_table(reports))
    ok = all(r.passed for r in reports)
    if cfg.out:
        out = _out_dir(cfg)
        payload = {
            "config": cfg.provenance(),
            "against": args.against,
            "alpha": args.alpha,
            "passed": ok,
            "reports": [r.to_dict() for r in reports],
        }
        _write(out / "compare.json", json.dumps(payload, indent=2))
    return EXIT_OK if ok else EXIT_FAILED


def cmd_verify(cfg: RunConfig, args) -> int:
    results = suites.verify_all(quick=args.quick)
    for r in results:
        print(f"{'pass' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    ok = all(r.passed for r in results)
    if cfg.out:
        out = _out_dir(cfg)
        _write(out / "verify.json", json.dumps({"config": cfg.provenance(), "checks": [asdict(r) for r in results]}, indent=2))
    return EXIT_OK if ok else EXIT_FAILED


def cmd_enumerate(cfg: RunConfig, args) -> int:
    try:
        perms = permcore.enumerate_avoiders(cfg.n, cfg.d, limit=args.limit)
    except ValueError as exc:
        print(exc, file=sys.stderr)
        return EXIT_REFUSED
    if args.words:
        lines = [permcore.words_from_perm(s, cfg.d).to_text() for s in perms]
    else:
        lines = [s.to_text() for s in perms]
    text = "\n".join(lines) + "\n"
    if cfg.out:
        _write(_out_dir(cfg) / "avoiders.txt", text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bridge_dp(cfg: RunConfig, args) -> int:
    try:
        table = sampler.bridge_dp(cfg.n, cfg.d, bridge=not args.full)
    except ValueError as exc:
        print(exc, file=sys.stderr)
        return EXIT_REFUSED
    print(f"N({cfg.n}, 0) = {table.count(cfg.n)}")
    out = _out_dir(cfg) if cfg.out else None
    if out is not None and "json" in cfg.formats:
        _write(out / "bridge_dp.json", table.to_json())
    if args.samples:
        rng = SeededRng(cfg.seed)
        lines = [sampler.sample_weyl_bridge(table, rng).to_text() for _ in range(args.samples)]
        text = "\n".join(lines) + "\n"
        if out is not None:
            _write(out / "bridges.txt", text)
        else:
            sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "compare": cmd_compare,
    "verify": cmd_verify,
    "enumerate": cmd_enumerate,
    "bridge-dp": cmd_bridge_dp,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=20)
    common.add_argument("--d", type=int, default=3)
    common.add_argument("--replicas", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", dest="formats", action="append", choices=("csv", "json", "svg"))
    common.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="avoidlimit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sample", parents=[common], help="sample avoiders or eigenvalue paths")
    p.add_argument("--source", choices=("avoider", "dyson"), default="avoider")
    p = sub.add_parser("compare", parents=[common], help="KS comparison of marginals")
    p.add_argument("--against", choices=("dyson", "bessel", "self"), default="dyson")
    p.add_argument("--alpha", type=float, default=1e-3)
    p = sub.add_parser("verify", parents=[common], help="exact and exhaustive checks")
    p.add_argument("--quick", action="store_true")
    p = sub.add_parser("enumerate", parents=[common], help="list Av_n by brute force")
    p.add_argument("--limit", type=int, default=permcore.BRUTE_FORCE_LIMIT)
    p.add_argument("--words", action="store_true", help="print word pairs instead of permutations")
    p = sub.add_parser("bridge-dp", parents=[common], help="count and sample confined bridges")
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--full", action="store_true", help="keep states that cannot return to the origin")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            n=args.n,
            d=args.d,
            replicas=args.replicas,
            seed=args.seed,
            grid=args.grid,
            out=args.out,
            formats=tuple(args.formats or ("csv",)),
        )
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    return COMMANDS[args.command](cfg, args)


if __name__ == "__main__":
    sys.exit(main())
