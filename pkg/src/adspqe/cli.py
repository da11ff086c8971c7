"""Scan driver: SPQE and AD(SPQE)-ASC over FCIDUMP fixtures and threshold sweeps.

Example::

    adspqe --manifest scan.json --omega-sweep 0.1,0.05,0.02 --fci --out-dir out/

Writes ``results.csv`` (one row per fixture x omega, in manifest order),
``runs.json`` (full run records) and ``summary.txt`` into ``--out-dir``.
The worker count comes from ``--workers`` or ``ADSPQE_WORKERS``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from adspqe.asc import asc_energies, map_auxiliary
from adspqe.errors import ADSPQEError
from adspqe.fci import fci_ground_energy
from adspqe.hamiltonian import hf_reference, read_fcidump
from adspqe.pauli import jordan_wigner
from adspqe.pool import POOL_RANKS
from adspqe.pqe import MicroIterConfig
from adspqe.resources import measurement_bounds
from adspqe.spqe import SPQEConfig, run_spqe

log = logging.getLogger("adspqe")

CSV_COLUMNS = [
    "label", "omega", "e_hf", "e_spqe", "e_scheme1", "e_scheme2", "e_fci",
    "err_spqe", "err_s1", "err_s2", "n_p", "n_a", "cnot", "n_res", "m_spqe", "m_ii",
]
SCHEMES = ("spqe", "asc1", "asc2")
WORKERS_ENV = "ADSPQE_WORKERS"


@dataclass
class ScanEntry:
    label: str
    fcidump: Path


@dataclass
class ScanManifest:
    entries: list[ScanEntry]
    config: SPQEConfig = field(default_factory=SPQEConfig)
    schemes: tuple[str, ...] = SCHEMES
    fci: bool = False
    omega_sweep: list[float] | None = None
    epsilon: float = 1e-3

    def __post_init__(self) -> None:
        labels = [e.label for e in self.entries]
        if len(set(labels)) != len(labels):
            raise ValueError("manifest labels must be unique")
        bad = set(self.schemes) - set(SCHEMES)
        if bad:
            raise ValueError(f"unknown scheme(s): {sorted(bad)}")

    @property
    def omegas(self) -> list[float]:
        return list(self.omega_sweep) if self.omega_sweep else [self.config.omega]


def _config_from_dict(d: dict) -> SPQEConfig:
    pool = d.get("pool", "sdtq")
    core = d.get("core_pool", pool)
    micro = MicroIterConfig(
        residual_tolerance=float(d.get("micro_tol", 1e-5)),
        max_iterations=int(d.get("micro_max_iterations", 200)),
    )
    return SPQEConfig(
        omega=float(d.get("omega", 1e-2)),
        dt=float(d.get("dt", 1e-3)),
        micro=micro,
        rank_cap=POOL_RANKS[core],
        aux_rank_cap=POOL_RANKS[pool],
        max_macro_iterations=int(d.get("max_macro_iterations", 50)),
    )


def load_manifest(path: str | Path) -> ScanManifest:
    """Read a manifest JSON file; fixture paths are relative to the manifest."""
    path = Path(path)
    data = json.loads(path.read_text())
    base = path.parent
    entries = [ScanEntry(str(e["label"]), base / e["fcidump"]) for e in data["entries"]]
    cfg_dict = data.get("config", {})
    return ScanManifest(
        entries=entries,
        config=_config_from_dict(cfg_dict),
        schemes=tuple(data.get("schemes", SCHEMES)),
        fci=bool(data.get("fci", False)),
        omega_sweep=data.get("omega_sweep"),
        epsilon=float(cfg_dict.get("epsilon", 1e-3)),
    )


def run_point(entry: ScanEntry, cfg: SPQEConfig, schemes: Sequence[str], fci: bool, epsilon: float) -> dict:
    """Run one (fixture, omega) point; returns ``{"row": ..., "record": ...}``."""
    t0 = time.perf_counter()
    h = read_fcidump(entry.fcidump)
    ref = hf_reference(h)
    H = jordan_wigner(h)
    result = run_spqe(h, cfg, H, ref)
    row: dict = {c: None for c in CSV_COLUMNS}
    row.update(label=entry.label, omega=cfg.omega, e_hf=ref.hf_energy, e_spqe=result.e_spqe,
               n_p=result.n_principal, n_a=result.n_auxiliary)
    record = {"label": entry.label, "fcidump": str(entry.fcidump), "spqe": result.to_manifest()}

    if "asc1" in schemes or "asc2" in schemes:
        aux = map_auxiliary(result, H, ref)
        energies = asc_energies(result, aux, H, ref)
        if "asc1" in schemes:
            row["e_scheme1"] = energies.e_scheme1
        if "asc2" in schemes:
            row["e_scheme2"] = energies.e_scheme2
        thetas = np.array(list(aux.thetas.values()))
        counts, edges = np.histogram(np.log10(np.abs(thetas[thetas != 0])), bins=10) if np.any(thetas) else ([], [])
        record["asc"] = {
            "e_scheme1": energies.e_scheme1,
            "e_scheme2": energies.e_scheme2,
            "term1": energies.term1,
            "term2_scheme2": energies.term2_scheme2,
            "theta_a_log10_histogram": {"counts": list(map(int, counts)), "edges": list(map(float, edges))},
            "level_shifted": [e.to_dict() for e in sorted(aux.level_shifted)],
        }

    est = measurement_bounds(result, epsilon=epsilon, H=H)
    row.update(cnot=est.cnot_count, n_res=est.residual_evaluations, m_spqe=est.m_spqe_bound, m_ii=est.m_scheme2_bound)
    record["resources"] = est.to_dict()

    if fci:
        e_fci, _ = fci_ground_energy(h, H)
        row["e_fci"] = e_fci
        for key, col in (("err_spqe", "e_spqe"), ("err_s1", "e_scheme1"), ("err_s2", "e_scheme2")):
            if row[col] is not None:
                row[key] = (row[col] - e_fci) * 1e3
    record["row"] = dict(row)
    record["seconds"] = time.perf_counter() - t0
    return {"row": row, "record": record}


def _task(args: tuple) -> dict:
    entry, cfg, schemes, fci, epsilon = args
    try:
        return run_point(entry, cfg, schemes, fci, epsilon)
    except (OSError, ADSPQEError, ValueError, IndexError) as exc:
        return {"error": f"{entry.label} (omega={cfg.omega}): {type(exc).__name__}: {exc}"}


def run_scan(manifest: ScanManifest, workers: int = 1) -> dict:
    """Run every (entry, omega) pair; results are returned in manifest order."""
    tasks = [
        (entry, replace(manifest.config, omega=omega), manifest.schemes, manifest.fci, manifest.epsilon)
        for entry in manifest.entries
        for omega in manifest.omegas
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_task, tasks))
    else:
        outputs = [_task(t) for t in tasks]
    rows = [o["row"] for o in outputs if "row" in o]
    records = [o["record"] for o in outputs if "record" in o]
    errors = [o["error"] for o in outputs if "error" in o]
    return {"rows": rows, "records": records, "errors": errors}


def _fmt(col: str, value) -> str:
    if value is None:
        return ""
    if col in ("label",):
        return str(value)
    if col in ("n_p", "n_a", "cnot", "n_res"):
        return str(int(value))
    return f"{value:.12g}"


def write_outputs(report: dict, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in report["rows"]:
            writer.writerow([_fmt(c, row[c]) for c in CSV_COLUMNS])
    records = [{k: v for k, v in r.items() if k != "seconds"} for r in report["records"]]
    (out / "runs.json").write_text(json.dumps(records, indent=1) + "\n")
    lines = []
    for row in report["rows"]:
        parts = [f"{row['label']:>8s}  omega={row['omega']:<8g} N_P={row['n_p']:<4d} CNOT={row['cnot']:<7d}"]
        for key in ("err_spqe", "err_s1", "err_s2"):
            if row[key] is not None:
                parts.append(f"{key}={row[key]:+.4f} mEh")
        lines.append("  ".join(parts))
    lines += [f"ERROR {e}" for e in report["errors"]]
    (out / "summary.txt").write_text("\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adspqe", description=__doc__.splitlines()[0])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", type=Path, help="scan manifest JSON")
    src.add_argument("--fcidump", type=Path, nargs="+", help="FCIDUMP file(s) to run without a manifest")
    p.add_argument("--omega", type=float, help="macro-iteration threshold")
    p.add_argument("--omega-sweep", type=lambda s: [float(x) for x in s.split(",")], help="comma-separated omegas")
    p.add_argument("--dt", type=float, help="residual-state evolution time (default 0.001)")
    p.add_argument("--micro-tol", type=float, help="micro-iteration max|r| tolerance (default 1e-5)")
    p.add_argument("--pool", choices=sorted(POOL_RANKS), help="excitation pool (default sdtq)")
    p.add_argument("--core-pool", choices=sorted(POOL_RANKS), help="ranks SPQE may select (default: --pool)")
    p.add_argument("--scheme", default=None, help="spqe|asc1|asc2|all (comma-separated)")
    p.add_argument("--fci", action="store_true", default=None, help="compute FCI reference energies")
    p.add_argument("--epsilon", type=float, help="measurement precision for the bounds (default 1e-3)")
    p.add_argument("--out-dir", type=Path, default=Path("adspqe_out"))
    p.add_argument("--workers", type=int, default=None, help=f"parallel scan workers (env {WORKERS_ENV})")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _apply_overrides(manifest: ScanManifest, args: argparse.Namespace) -> ScanManifest:
    cfg = manifest.config
    if args.omega is not None:
        cfg = replace(cfg, omega=args.omega)
    if args.dt is not None:
        cfg = replace(cfg, dt=args.dt)
    if args.micro_tol is not None:
        cfg = replace(cfg, micro=replace(cfg.micro, residual_tolerance=args.micro_tol))
    if args.pool is not None or args.core_pool is not None:
        pool = POOL_RANKS[args.pool] if args.pool else cfg.pool_rank
        core = POOL_RANKS[args.core_pool] if args.core_pool else pool
        cfg = replace(cfg, rank_cap=core, aux_rank_cap=pool)
    manifest.config = cfg
    if args.omega_sweep is not None:
        manifest.omega_sweep = args.omega_sweep
    elif args.omega is not None:
        manifest.omega_sweep = None
    if args.scheme is not None:
        manifest.schemes = SCHEMES if args.scheme == "all" else tuple(args.scheme.split(","))
        ScanManifest.__post_init__(manifest)
    if args.fci:
        manifest.fci = True
    if args.epsilon is not None:
        manifest.epsilon = args.epsilon
    return manifest


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.manifest is not None:
            manifest = load_manifest(args.manifest)
        else:
            manifest = ScanManifest([ScanEntry(p.stem, p) for p in args.fcidump])
        manifest = _apply_overrides(manifest, args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"adspqe: invalid input: {exc}", file=sys.stderr)
        return 2
    workers = args.workers or int(os.environ.get(WORKERS_ENV, "1"))
    report = run_scan(manifest, workers=max(1, workers))
    write_outputs(report, args.out_dir)
    for err in report["errors"]:
        log.error(err)
    print((Path(args.out_dir) / "summary.txt").read_text(), end="")
    return 1 if report["errors"] else 0


if __name__ == "__main__":
    sys.exit(main())
