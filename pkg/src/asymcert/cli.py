"""Command-line interface: ``asymcert {bounds,simulate,certify,gap,table1}``.

Every command prints key/value records to stdout and, with ``--out``, writes
a JSON report that embeds the full run configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import jsonschema
import numpy as np

from . import __version__
from .mirror_opt import OptimizerConfig, bounds_for_target, optimize_gap
from .reference import OMEGA_TOL, TABLE1, VALUE_TOL
from .shot_sim import ShotPlan, i6_sigma, pair_sigmas, scenario_from_targets, simulate
from .verdict import ConvergenceError, certify, load_expectations
from .witness import PAIRS, TargetTriple, build_witness, i6_value, pair_values

log = logging.getLogger("asymcert")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2
EXIT_REGRESSION = 3

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "angles": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
        "cosines": {"type": "array", "items": {"type": "number", "minimum": -1, "maximum": 1},
                    "minItems": 3, "maxItems": 3},
        "restarts": {"type": "integer", "minimum": 1},
        "max_iterations": {"type": "integer", "minimum": 1},
        "improvement_tol": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "shots": {"type": "integer", "minimum": 1},
        "depolarizing": {"type": "number", "minimum": 0, "maximum": 1},
        "sigma_k": {"type": "number", "minimum": 0},
        "out": {"type": "string"},
        "expectations": {"type": "string"},
    },
    "not": {"required": ["angles", "cosines"]},
}


class InvalidInput(Exception):
    pass


@dataclass
class RunConfig:
    angles: Optional[Tuple[float, float, float]] = None
    cosines: Optional[Tuple[float, float, float]] = None
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    shots: ShotPlan = field(default_factory=ShotPlan)
    sigma_k: float = 3.0
    out: Optional[str] = None
    expectations: Optional[str] = None

    def target(self) -> TargetTriple:
        if self.cosines is not None:
            return TargetTriple(*self.cosines)
        if self.angles is not None:
            return TargetTriple.from_angles(*self.angles)
        raise InvalidInput("a target is required: pass --angles or --cosines")

    def to_dict(self) -> dict:
        return {
            "angles": None if self.angles is None else list(self.angles),
            "cosines": None if self.cosines is None else list(self.cosines),
            "optimizer": asdict(self.optimizer),
            "shots": asdict(self.shots),
            "sigma_k": self.sigma_k,
            "expectations": self.expectations,
        }


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _triple(text: str) -> Tuple[float, float, float]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number in {text!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"non-finite value in {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override it")
    target = common.add_mutually_exclusive_group()
    target.add_argument("--angles", type=_triple, metavar="A12,A13,A23", help="pairwise target angles in degrees")
    target.add_argument("--cosines", type=_triple, metavar="C12,C13,C23", help="pairwise target cosines")
    common.add_argument("--seed", type=int)
    common.add_argument("--restarts", type=int, help="optimizer restarts per permutation (default 64)")
    common.add_argument("--max-iterations", type=int)
    common.add_argument("--improvement-tol", type=float)
    common.add_argument("--out", metavar="PATH", help="write the JSON report here")
    common.add_argument("-v", "--verbose", action="store_true")

    shots = _Parser(add_help=False)
    shots.add_argument("--shots", type=int, help="shots per (x, y) cell (default 8192)")
    shots.add_argument("--depolarizing", type=float, metavar="P")
    shots.add_argument("--full-table", action="store_true", help="also sample cells the witness ignores")

    parser = _Parser(prog="asymcert", description="Mirror-asymmetry witnesses for three qubit states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("bounds", parents=[common], help="quantum and mirror-symmetric bounds for a target")
    sub.add_parser("simulate", parents=[common, shots], help="finite-shot simulation of the optimal scenario")
    p = sub.add_parser("certify", parents=[common, shots], help="verdict for observed or simulated data")
    p.add_argument("--sigma-k", type=float, metavar="K", help="required excess in standard deviations (default 3)")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--expectations", metavar="PATH", help="external 6x6 expectation table")
    src.add_argument("--observed", type=float, metavar="Q", help="observed witness value")
    p.add_argument("--observed-sigma", type=float, metavar="S", help="standard deviation of --observed")
    p = sub.add_parser("gap", parents=[common], help="search targets for the largest gap")
    p.add_argument("--candidates", type=int, default=32, help="random starting targets")
    p.add_argument("--refine", type=int, default=3, help="starts polished by local search")
    p.add_argument("--search-restarts", type=int, default=12, help="restarts used while searching")
    p.add_argument("--start-angles", type=_triple, metavar="A12,A13,A23")
    sub.add_parser("table1", parents=[common], help="recompute the reference comparison table")
    return parser


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from None
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InvalidInput(f"invalid config {path}: {exc.message}") from None
    return data


def run_config(args) -> RunConfig:
    data = _load_config(args.config)

    def pick(flag, key, default):
        value = getattr(args, flag, None)
        return data.get(key, default) if value is None else value

    angles, cosines = args.angles, args.cosines
    if angles is None and cosines is None:
        angles, cosines = data.get("angles"), data.get("cosines")
    try:
        optimizer = OptimizerConfig(
            restarts=int(pick("restarts", "restarts", 64)),
            max_iterations=int(pick("max_iterations", "max_iterations", 10000)),
            improvement_tol=float(pick("improvement_tol", "improvement_tol", 1e-12)),
            seed=int(pick("seed", "seed", 0)),
        )
        plan = ShotPlan(
            shots_per_pair=int(pick("shots", "shots", 8192)),
            seed=optimizer.seed,
            depolarizing_p=float(pick("depolarizing", "depolarizing", 0.0)),
            full_table=bool(getattr(args, "full_table", False)),
        )
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    sigma_k = float(pick("sigma_k", "sigma_k", 3.0))
    if sigma_k < 0:
        raise InvalidInput("--sigma-k must be non-negative")
    return RunConfig(
        angles=None if angles is None else tuple(angles),
        cosines=None if cosines is None else tuple(cosines),
        optimizer=optimizer,
        shots=plan,
        sigma_k=sigma_k,
        out=pick("out", "out", None),
        expectations=pick("expectations", "expectations", None),
    )


# -- output -----------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def _emit(records: List[Tuple[str, object]], report: dict, out: Optional[str]) -> None:
    width = max(len(k) for k, _ in records)
    for key, value in records:
        print(f"{key.ljust(width)} : {_fmt(value)}")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _header(command: str, cfg: RunConfig, target: Optional[TargetTriple]) -> dict:
    head = {"command": command, "version": __version__, "config": cfg.to_dict()}
    if target is not None:
        head["target"] = {"cosines": list(target.cosines()), "angles_deg": list(target.angles()),
                          "omegas": list(build_witness(target).omegas())}
    return head


def _bounds_records(rep) -> List[Tuple[str, object]]:
    return [
        ("omega12, omega13, omega23", rep.omegas),
        ("Q_mirror^123", rep.q_mirror_123),
        ("Q_mirror^213", rep.q_mirror_213),
        ("Q_mirror^312", rep.q_mirror_312),
        ("Q_max", rep.q_max),
        ("Q_mirror", rep.q_mirror),
        ("Delta", rep.delta),
        ("best permutation", "".join(map(str, rep.best_permutation))),
        ("converged", rep.converged),
        ("restarts agreeing", rep.restarts_agreeing),
    ]


def _require_converged(rep) -> None:
    if not rep.converged:
        raise ConvergenceError("mirror-bound optimizer did not converge; raise --max-iterations")


# -- commands ---------------------------------------------------------------

def cmd_bounds(cfg: RunConfig):
    target = cfg.target()
    rep = bounds_for_target(target, cfg.optimizer)
    report = _header("bounds", cfg, target)
    report["bounds"] = rep.to_dict()
    _emit(_bounds_records(rep), report, cfg.out)
    _require_converged(rep)
    return rep


def cmd_simulate(cfg: RunConfig):
    target = cfg.target()
    spec = build_witness(target)
    rep = bounds_for_target(target, cfg.optimizer)
    result = simulate(scenario_from_targets(target), spec, cfg.shots)
    report = _header("simulate", cfg, target)
    report["bounds"] = {"q_mirror": rep.q_mirror, "q_max": rep.q_max, "converged": rep.converged}
    report["simulation"] = result.to_dict()
    report["notes"] = "each (x, y) cell is sampled independently; shared preparations are not reused across pairs"
    records = [
        ("angles (deg)", target.angles()),
        ("Q_mirror", rep.q_mirror),
        ("Q_max", rep.q_max),
    ]
    records += [(f"I3_sim(omega{a}{b})", v) for (a, b), v in zip(PAIRS, result.per_pair_i3)]
    records += [
        ("Q_sim", result.i6_estimate),
        ("sigma", result.sigma),
        ("Q_exact", result.exact_i6),
        ("shots per cell", result.shots),
        ("depolarizing p", cfg.shots.depolarizing_p),
    ]
    _emit(records, report, cfg.out)
    _require_converged(rep)
    return result


def cmd_certify(cfg: RunConfig, observed: Optional[float] = None, observed_sigma: Optional[float] = None):
    target = cfg.target()
    spec = build_witness(target)
    rep = bounds_for_target(target, cfg.optimizer)
    report = _header("certify", cfg, target)
    if observed is not None:
        if observed_sigma is None:
            raise InvalidInput("--observed needs --observed-sigma")
        value, sigma, source = observed, observed_sigma, "observed"
    elif cfg.expectations:
        try:
            table = load_expectations(cfg.expectations)
            value = i6_value(spec, table)
        except (OSError, ValueError) as exc:
            raise InvalidInput(str(exc)) from None
        probs = np.clip(np.where(np.isnan(table), 0.5, (1.0 + table) / 2.0), 0.0, 1.0)
        sigma = i6_sigma(spec, probs, cfg.shots.shots_per_pair)
        source = "expectations"
        report["pair_values"] = list(pair_values(spec, np.nan_to_num(table)))
        report["pair_sigmas"] = list(pair_sigmas(spec, probs, cfg.shots.shots_per_pair))
    else:
        result = simulate(scenario_from_targets(target), spec, cfg.shots)
        value, sigma, source = result.i6_estimate, result.sigma, "simulation"
        report["simulation"] = result.to_dict()
    verdict = certify(value, sigma, rep.q_mirror, rep.q_max, cfg.sigma_k, converged=rep.converged)
    report["source"] = source
    report["verdict"] = verdict.to_dict()
    records = [
        ("source", source),
        ("I6 observed", verdict.i6_observed),
        ("sigma", verdict.sigma),
        ("Q_mirror", verdict.q_mirror),
        ("Q_max", verdict.q_max),
        ("excess", verdict.excess),
        ("significance", verdict.significance),
        ("k", verdict.k),
        ("verdict", verdict.verdict),
    ]
    _emit(records, report, cfg.out)
    return verdict


def cmd_gap(cfg: RunConfig, candidates=32, refine=3, search_restarts=12, start_angles=None):
    start = TargetTriple.from_angles(*start_angles) if start_angles else None
    if candidates < 0 or refine < 0 or search_restarts < 1:
        raise InvalidInput("--candidates/--refine must be >= 0 and --search-restarts >= 1")
    result = optimize_gap(cfg.optimizer, candidates=candidates, refine=refine,
                          search_restarts=search_restarts, start=start)
    report = _header("gap", cfg, result.target)
    report["search"] = {"candidates": candidates, "refine": refine, "search_restarts": search_restarts,
                        "start_angles": None if start_angles is None else list(start_angles),
                        "evaluations": result.evaluations}
    report["bounds"] = result.report.to_dict()
    records = [("best angles (deg)", result.target.angles()),
               ("best cosines", result.target.cosines())]
    records += _bounds_records(result.report)
    records.append(("evaluations", result.evaluations))
    _emit(records, report, cfg.out)
    _require_converged(result.report)
    return result


def table1_rows(optimizer: OptimizerConfig):
    """Recompute every published cell; yields (row, column, published, computed, tol)."""
    columns = ("q_mirror_123", "q_mirror_213", "q_mirror_312", "q_max", "q_mirror", "delta")
    for idx, row in enumerate(TABLE1, 1):
        target = TargetTriple.from_angles(*row["angles"])
        rep = bounds_for_target(target, optimizer)
        if "omegas" in row:
            for name, ref, got in zip(("omega12", "omega13", "omega23"), row["omegas"], rep.omegas):
                yield idx, name, ref, got, OMEGA_TOL, rep
        for name in columns:
            if name in row:
                yield idx, name, row[name], getattr(rep, name), VALUE_TOL, rep


def cmd_table1(cfg: RunConfig):
    cells = []
    converged = True
    print(f"{'row':>3} {'column':<13} {'published':>10} {'computed':>12} {'diff':>10}  ok")
    for idx, name, ref, got, tol, rep in table1_rows(cfg.optimizer):
        ok = abs(got - ref) <= tol
        converged &= rep.converged
        cells.append({"row": idx, "column": name, "published": ref, "computed": got,
                      "diff": got - ref, "tol": tol, "ok": ok})
        print(f"{idx:>3} {name:<13} {ref:>10.5f} {got:>12.7f} {got - ref:>+10.2e}  {'ok' if ok else 'FAIL'}")
    failed = [c for c in cells if not c["ok"]]
    report = _header("table1", cfg, None)
    report["cells"] = cells
    report["passed"] = not failed
    _emit([("cells", len(cells)), ("failed", len(failed)), ("converged", converged)], report, cfg.out)
    return cells


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = run_config(args)
        if args.command == "bounds":
            cmd_bounds(cfg)
        elif args.command == "simulate":
            cmd_simulate(cfg)
        elif args.command == "certify":
            cmd_certify(cfg, args.observed, args.observed_sigma)
        elif args.command == "gap":
            cmd_gap(cfg, args.candidates, args.refine, args.search_restarts, args.start_angles)
        elif args.command == "table1":
            cells = cmd_table1(cfg)
            if not all(c["ok"] for c in cells):
                return EXIT_REGRESSION
    except ConvergenceError as exc:
        print(f"asymcert: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (InvalidInput, ValueError) as exc:
        print(f"asymcert: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
