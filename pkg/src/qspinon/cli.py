"""Command-line driver producing figure data as CSV/JSON files.

Exit codes: 0 ok, 2 configuration error, 3 capacity exceeded, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import functools
import io
import json
import math
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from .exceptions import CapacityError, ConfigError, NumericalError
from .groundprep import VqeConfig, gutzwiller_ground_state, vbc_state, vqe_optimize, xy_ground_state
from .groundprep.common import PrepResult
from .hadamard import circuit_counts, measure_overlap_matrix, reconstruct_energy
from .lcu import run_lcu
from .models import (
    ModelKind,
    SpinModel,
    build_hamiltonian,
    commuting_groups,
    energy,
    ground_state_ed,
    haldane_shastry,
    heisenberg,
)
from .selftest import run_selftest
from .spinon import (
    MomentumGrid,
    SpinonResult,
    dispersion_exact,
    norm_exact,
    polyfit_extrapolate,
    resolve_e0,
    results_to_csv,
)
from .statevector import StateVector, fidelity

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_NUMERICAL = 0, 2, 3, 4
ROUTES = ("ed", "vbc", "xy", "vqe", "gutzwiller")
METHODS = ("exact", "lcu", "hadamard")


# ---------- argument parsing ----------


def parse_L(text: str) -> list[int]:
    """``"4..16"`` (step 2), ``"4..16:1"``, ``"8,12,16"`` or ``"8"``."""
    try:
        if ".." in text:
            rng, _, step = text.partition(":")
            lo, hi = (int(x) for x in rng.split(".."))
            out = list(range(lo, hi + 1, int(step) if step else 2))
        else:
            out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse L list {text!r}") from exc
    if not out or any(L < 2 for L in out):
        raise ConfigError(f"L list {text!r} must hold sizes >= 2")
    return out


def parse_shots(text: str | None) -> int | None:
    if text is None:
        return None
    try:
        val = float(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse shot count {text!r}") from exc
    if val < 1 or val != int(val):
        raise ConfigError(f"shot count must be a positive integer, got {text!r}")
    return int(val)


def parse_layers(text: str | None, L: int) -> int | None:
    if text is None or text == "L/2":
        return None if text is None else L // 2
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"layers must be an integer or 'L/2', got {text!r}") from exc


def make_model(kind: str, L: int, J: float = 1.0, delta: float = 1.0) -> SpinModel:
    try:
        return SpinModel(ModelKind(kind), L, J, delta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@functools.lru_cache(maxsize=1)
def build_id() -> str:
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = "0"
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5, cwd=Path(__file__).parent,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        desc = ""
    return f"{version}+{desc or 'unknown'}"


# ---------- configuration ----------


@dataclass
class ExperimentConfig:
    model: str = "heisenberg"
    J: float = 1.0
    delta: float = 1.0
    Ls: list[int] = field(default_factory=lambda: [8])
    method: str = "exact"
    route: str | None = None
    e0_source: str | None = None
    q_grid: str = "full"
    n_shots: int | None = None
    seed: int = 0
    layers: str | None = None
    restarts: int = 10
    insertion: str = "end"
    truncate_histogram: int | None = None
    out: Path = Path(".")
    fmt: str = "csv"
    jobs: int = 1

    def gs_route(self) -> str:
        if self.route:
            return self.route
        if self.method == "exact":
            return "ed"
        return "gutzwiller" if self.model == "hs" else "vqe"

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        route = self.gs_route()
        if route not in ROUTES:
            raise ConfigError(f"route must be one of {ROUTES}")
        if route == "gutzwiller" and self.model != "hs":
            raise ConfigError("the Gutzwiller route prepares the Haldane-Shastry ground state only")
        if route in ("vbc", "xy", "vqe", "gutzwiller") and any(L % 2 for L in self.Ls):
            raise ConfigError(f"route {route} needs even L")
        if self.method == "exact" and self.n_shots:
            raise ConfigError("the exact method takes no shot count")
        if self.q_grid not in ("full", "half"):
            raise ConfigError("q-grid must be 'full' or 'half'")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        for L in self.Ls:
            if self.method == "lcu" and 2 * L + 1 > 25:
                raise CapacityError(f"LCU at L={L} needs {2 * L + 1} qubits (cap 25)")
            if self.method == "hadamard" and L + 2 > 25:
                raise CapacityError(f"Hadamard test at L={L} needs {L + 2} qubits (cap 25)")
            if route == "gutzwiller" and L > 12:
                raise CapacityError(f"Gutzwiller circuit at L={L} needs {2 * L} qubits (cap 25)")
            if self.method == "exact" and L + 1 > 24:
                raise CapacityError(f"exact path capped at 24 sites, got L+1={L + 1}")

    def qs(self, L: int) -> np.ndarray:
        grid = MomentumGrid(L)
        return grid.upper_half() if self.q_grid == "half" else grid.points

    def provenance(self, e0_source: str = "") -> dict:
        return {"seed": self.seed, "method": self.method, "e0_source": e0_source, "build": build_id()}


# ---------- ground states ----------


def prepare_ground_state(cfg: ExperimentConfig, L: int) -> tuple[StateVector, PrepResult | None]:
    model = make_model(cfg.model, L, cfg.J, cfg.delta)
    route = cfg.gs_route()
    if route == "ed":
        return ground_state_ed(model).ground_state, None
    if route == "vbc":
        st = vbc_state(L)
        ref = ground_state_ed(model).ground_state
        return st, PrepResult("vbc", L, st, energy(model, st), 1 - fidelity(st, ref))
    if route == "xy":
        st = xy_ground_state(L).state
        ref = ground_state_ed(model).ground_state
        return st, PrepResult("xy", L, st, energy(model, st), 1 - fidelity(st, ref))
    if route == "vqe":
        vcfg = VqeConfig(layers=parse_layers(cfg.layers, L), restarts=cfg.restarts, seed=cfg.seed)
        res = vqe_optimize(model, vcfg)
        return res.state, res
    res = gutzwiller_ground_state(L, J=cfg.J)
    return res.state, res


# ---------- output ----------


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _rows_to_text(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


def _map(cfg: ExperimentConfig, fn, items):
    if cfg.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------- subcommands ----------


def _gs_prep_one(args: tuple[ExperimentConfig, int]) -> dict:
    cfg, L = args
    _, res = prepare_ground_state(cfg, L)
    if res is None:
        model = make_model(cfg.model, L, cfg.J, cfg.delta)
        spec = ground_state_ed(model)
        res = PrepResult("ed", L, spec.ground_state, spec.ground_energy, 0.0)
    return res.to_dict()


def cmd_gs_prep(cfg: ExperimentConfig) -> list[Path]:
    results = _map(cfg, _gs_prep_one, [(cfg, L) for L in cfg.Ls])
    route = cfg.gs_route()
    paths = []
    rows = []
    for L, d in zip(cfg.Ls, results):
        d = {**d, "model": cfg.model, "build": build_id()}
        paths.append(_write(cfg.out / f"gs_{route}_{cfg.model}_L{L}.json", json.dumps(d, indent=1) + "\n"))
        rows.append({
            "L": L, "model": cfg.model, "route": route, "energy": d["energy"],
            "infidelity": d["infidelity"], "relative_energy_error": d["relative_energy_error"],
            "success_probability": d["success_probability"], "seed": cfg.seed,
            "method": "gs-prep", "e0_source": "ED", "build": build_id(),
        })
    ext = "json" if cfg.fmt == "json" else "csv"
    paths.append(_write(cfg.out / f"gs_{route}_{cfg.model}.{ext}", _rows_to_text(rows, cfg.fmt)))
    return paths


STATE_BUILDERS = {
    "xy": lambda L: xy_ground_state(L, as_circuit=False).state,
    "vbc": vbc_state,
}


def cmd_fidelity(cfg: ExperimentConfig, pairs: list[tuple[str, str]]) -> list[Path]:
    rows = []
    for state_name, model_name in pairs:
        if state_name not in STATE_BUILDERS:
            raise ConfigError(f"unknown trial state {state_name!r}")
        for L in cfg.Ls:
            if L % 2:
                raise ConfigError("fidelity study needs even L")
            ref = ground_state_ed(make_model(model_name, L, cfg.J)).ground_state
            rows.append({
                "L": L, "state": state_name, "model": model_name,
                "fidelity": fidelity(STATE_BUILDERS[state_name](L), ref),
                "seed": cfg.seed, "method": "fidelity", "e0_source": "ED", "build": build_id(),
            })
    ext = "json" if cfg.fmt == "json" else "csv"
    return [_write(cfg.out / f"fidelity.{ext}", _rows_to_text(rows, cfg.fmt))]


def _spinon_one(args: tuple[ExperimentConfig, int]) -> tuple[list[SpinonResult], dict]:
    cfg, L = args
    model = make_model(cfg.model, L, cfg.J, cfg.delta)
    big = model.resized(L + 1)
    gs, prep = prepare_ground_state(cfg, L)
    e0, src = resolve_e0(big, cfg.e0_source)
    extras: dict = {"histograms": []}
    results: list[SpinonResult] = []
    qs = cfg.qs(L)
    # without a shot budget the circuits are simulated exactly
    mode = "sampled" if cfg.n_shots else ("statevector" if cfg.method == "lcu" else "exact")
    if cfg.method == "exact":
        results = [dispersion_exact(gs, big, float(q), src, e0=e0) for q in qs]
    elif cfg.method == "lcu":
        for k, q in enumerate(qs):
            run = run_lcu(gs, float(q), mode, cfg.n_shots, seed=cfg.seed + k, insertion=cfg.insertion)
            r = run.result
            r.e0, r.e0_source = e0, src.value
            results.append(r)
            if run.counts:
                extras["histograms"].append(json.loads(run.histogram_json(cfg.truncate_histogram)))
    else:
        p_succ = prep.success_probability if prep is not None else 1.0
        om = measure_overlap_matrix(gs, big, mode, cfg.n_shots, cfg.seed, p_succ)
        results = [reconstruct_energy(om, om, float(q), big, src, e0=e0) for q in qs]
        extras["overlap_matrix"] = om.to_dict()
    if prep is not None:
        extras["prep"] = prep.to_dict()
    return results, extras


def cmd_spinon(cfg: ExperimentConfig) -> list[Path]:
    outs = _map(cfg, _spinon_one, [(cfg, L) for L in cfg.Ls])
    paths = []
    eps0 = []
    for L, (results, extras) in zip(cfg.Ls, outs):
        stem = f"spinon_{cfg.method}_{cfg.model}_L{L}"
        prov = {"seed": cfg.seed, "build": build_id(), "route": cfg.gs_route()}
        if cfg.fmt == "json":
            rows = [{**r.to_row(), **prov} for r in results]
            paths.append(_write(cfg.out / f"{stem}.json", json.dumps(rows, indent=1) + "\n"))
        else:
            for r in results:
                r.seed = cfg.seed if r.seed is None else r.seed
            paths.append(_write(cfg.out / f"{stem}.csv",
                                results_to_csv(results, {"build": prov["build"], "route": prov["route"]})))
        if extras.get("histograms"):
            paths.append(_write(cfg.out / f"{stem}_histograms.json", json.dumps(extras["histograms"], indent=1) + "\n"))
        if "overlap_matrix" in extras:
            paths.append(_write(cfg.out / f"{stem}_overlaps.json", json.dumps(extras["overlap_matrix"]) + "\n"))
        if "prep" in extras:
            paths.append(_write(cfg.out / f"{stem}_prep.json", json.dumps(extras["prep"], indent=1) + "\n"))
        zero = [r for r in results if r.q == 0.0 and r.epsilon is not None]
        if zero:
            eps0.append((L, zero[0].epsilon))
    if cfg.method == "exact" and len(eps0) >= 3:
        intercept, coeffs = polyfit_extrapolate([L for L, _ in eps0], [e for _, e in eps0])
        fit = {
            "quantity": "epsilon(q=0) vs 1/L, quadratic fit",
            "L": [L for L, _ in eps0], "epsilon0": [e for _, e in eps0],
            "coefficients_high_to_low": coeffs.tolist(), "extrapolated": intercept,
            "model": cfg.model, "build": build_id(),
        }
        paths.append(_write(cfg.out / f"spinon_exact_{cfg.model}_fit.json", json.dumps(fit, indent=1) + "\n"))
    return paths


def parity_metric(gs: StateVector) -> float:
    """Mean norm over grid momenta in ``(pi/2, pi]``."""
    L = gs.n_qubits
    qs = [q for q in MomentumGrid(L).points if math.pi / 2 < q <= math.pi + 1e-12]
    return float(np.mean([norm_exact(gs, q) for q in qs]))


def cmd_parity_study(cfg: ExperimentConfig, models: list[str]) -> list[Path]:
    paths, summary = [], []
    for kind in models:
        for L in cfg.Ls:
            gs = ground_state_ed(make_model(kind, L, cfg.J)).ground_state
            rows = [
                {"L": L, "model": kind, "q": float(q), "norm": norm_exact(gs, float(q)),
                 "parity": "odd" if (L // 2) % 2 else "even", "seed": cfg.seed,
                 "method": "exact", "e0_source": "", "build": build_id()}
                for q in MomentumGrid(L).points
            ]
            ext = "json" if cfg.fmt == "json" else "csv"
            paths.append(_write(cfg.out / f"parity_{kind}_L{L}.{ext}", _rows_to_text(rows, cfg.fmt)))
            summary.append({"model": kind, "L": L, "parity": rows[0]["parity"],
                            "mean_norm_q_gt_pi_over_2": parity_metric(gs),
                            "norm_at_pi": norm_exact(gs, math.pi)})
    paths.append(_write(cfg.out / "parity_summary.json", json.dumps(summary, indent=1) + "\n"))
    return paths


def cmd_counts(cfg: ExperimentConfig, n_groups: int | None) -> list[Path]:
    rows = []
    for L in cfg.Ls:
        ng = n_groups or len(commuting_groups(build_hamiltonian(make_model(cfg.model, L + 1, cfg.J))))
        c = circuit_counts(L, ng)
        rows.append({
            "L": L, "model": cfg.model, "n_groups": ng,
            "norm_circuits": c["norm_circuits"], "energy_circuits": c["energy_circuits"],
            "fredkin_end": c["fredkin_per_lcu"]["end"], "fredkin_middle": c["fredkin_per_lcu"].get("middle"),
            "seed": cfg.seed, "method": "counts", "e0_source": "", "build": build_id(),
        })
    ext = "json" if cfg.fmt == "json" else "csv"
    return [_write(cfg.out / f"counts_{cfg.model}.{ext}", _rows_to_text(rows, cfg.fmt))]


# ---------- entry point ----------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="heisenberg", choices=[k.value for k in ModelKind])
    common.add_argument("--J", type=float, default=1.0)
    common.add_argument("--delta", type=float, default=1.0)
    common.add_argument("--L", default="8", help="'4..16' (step 2), '4..16:1', '8,12,16' or '8'")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=Path("."))
    common.add_argument("--format", dest="fmt", default="csv", choices=["csv", "json"])
    common.add_argument("--jobs", type=int, default=1)

    parser = argparse.ArgumentParser(prog="qspinon", description="Single-spinon ansatz experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gs-prep", parents=[common], help="prepare ground states and report quality")
    p.add_argument("--route", choices=ROUTES, default="vqe")
    p.add_argument("--layers", default=None, help="integer or 'L/2' (default L/2)")
    p.add_argument("--restarts", type=int, default=10)

    p = sub.add_parser("fidelity", parents=[common], help="warm-start overlaps with exact ground states")
    p.add_argument("--pairs", default="xy:heisenberg,xy:hs,vbc:heisenberg")

    p = sub.add_parser("spinon", parents=[common], help="norm and dispersion sweeps")
    p.add_argument("--method", choices=METHODS, default="exact")
    p.add_argument("--route", choices=ROUTES, default=None)
    p.add_argument("--layers", default=None)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--shots", default=None)
    p.add_argument("--e0", default=None, choices=["auto", "ED", "Bethe"])
    p.add_argument("--q-grid", default="full", choices=["full", "half"])
    p.add_argument("--insertion", default="end", choices=["end", "middle"])
    p.add_argument("--truncate-histogram", type=int, default=None)

    p = sub.add_parser("parity-study", parents=[common], help="norm curves for both parities of L/2")
    p.set_defaults(L="4..20")
    p.add_argument("--models", default="heisenberg,hs")

    p = sub.add_parser("counts", parents=[common], help="circuit and Fredkin cost tables")
    p.add_argument("--groups", type=int, default=None, help="measurement groups (default: computed)")

    p = sub.add_parser("selftest", help="seeded property checks")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(
        model=args.model, J=args.J, delta=args.delta, Ls=parse_L(str(args.L)),
        seed=args.seed, out=args.out, fmt=args.fmt, jobs=max(1, args.jobs),
    )
    for name in ("method", "route", "layers", "restarts", "insertion", "truncate_histogram", "q_grid"):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "e0", None) not in (None, "auto"):
        cfg.e0_source = args.e0
    cfg.n_shots = parse_shots(getattr(args, "shots", None))
    return cfg


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        report = run_selftest(args.instances, args.seed)
        for line in report.lines():
            print(line)
        return EXIT_OK if report.ok else EXIT_NUMERICAL
    cfg = config_from_args(args)
    if args.command == "gs-prep":
        cfg.method = "exact"
        cfg.validate()
        paths = cmd_gs_prep(cfg)
    elif args.command == "fidelity":
        pairs = []
        for item in args.pairs.split(","):
            st, _, mod = item.partition(":")
            if not mod:
                raise ConfigError(f"pair {item!r} must look like state:model")
            pairs.append((st.strip(), mod.strip()))
        paths = cmd_fidelity(cfg, pairs)
    elif args.command == "spinon":
        cfg.validate()
        paths = cmd_spinon(cfg)
    elif args.command == "parity-study":
        paths = cmd_parity_study(cfg, [m.strip() for m in args.models.split(",")])
    else:
        paths = cmd_counts(cfg, args.groups)
    for p in paths:
        print(p)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
