"""Scan driver: ground state, filtering sweep over p_zz, measured rows, outputs.

Every output file is a pure function of the configuration snapshot; wall
times go to a separate sidecar file so the main outputs hash-compare.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .analysis import FitError, cc_fit, degeneracy_count
from .channels import build_filter_gates, channel_specs, norm_constant, px_of_pzz
from .lattice import LatticeLayout
from .models import build_doubled_hamiltonian
from .mps import (
    MPS,
    DMRGNotConverged,
    TruncationPolicy,
    apply_filter_gates,
    cluster_initial_state,
    dmrg_ground_state,
    load_mps,
    mpo_from_hamiltonian,
    save_mps,
)
from .observables import default_string_length, measure_all, symmetry_overlaps

log = logging.getLogger(__name__)

MODES = ("paired", "simplified")
OBSERVABLE_GROUPS = ("correlators", "strings", "entanglement")


@dataclass
class ScanConfig:
    L: list[int] = field(default_factory=lambda: [4])
    J_zz: float = 0.6
    p_grid: list[float] = field(default_factory=lambda: [0.0])
    mode: str = "paired"
    boundary: str = "periodic"
    max_bond: int = 128
    svd_floor: float = 1e-6
    error_budget: float = 1e-4
    dmrg_tol: float = 1e-8
    max_sweeps: int = 40
    observables: list[str] = field(default_factory=lambda: list(OBSERVABLE_GROUPS))
    k: int | None = None
    es_levels: int = 20
    region_sites: int = 8
    degeneracy_tol: float = 0.1
    ed_check_max_L: int = 5
    output_dir: str = "scan_out"
    checkpoint_dir: str | None = None
    workers: int = 1

    def __post_init__(self):
        self.L = sorted({int(x) for x in self.L})
        self.p_grid = sorted({round(float(p), 12) for p in self.p_grid})
        if not self.L or min(self.L) < 2:
            raise ValueError("L values must be >= 2")
        if not self.p_grid or self.p_grid[0] < 0 or self.p_grid[-1] > 0.5:
            raise ValueError("probabilities must lie in [0, 1/2]")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.boundary not in ("periodic", "open"):
            raise ValueError("boundary must be 'periodic' or 'open'")
        bad = set(self.observables) - set(OBSERVABLE_GROUPS)
        if bad:
            raise ValueError(f"unknown observable groups {sorted(bad)}")
        self.observables = [g for g in OBSERVABLE_GROUPS if g in self.observables]
        if self.J_zz <= 0 and self.mode == "paired" and self.p_grid[-1] > 0:
            raise ValueError("paired mode locks p_x through 1/J_zz and needs J_zz > 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ScanConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ScanConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def snapshot(self) -> dict:
        """Settings that determine the numbers (paths and worker count excluded)."""
        d = self.to_dict()
        for key in ("output_dir", "checkpoint_dir", "workers"):
            d.pop(key)
        return d

    def snapshot_hash(self) -> str:
        return _hash(self.snapshot())

    @property
    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(self.max_bond, self.svd_floor, self.error_budget)

    def ground_key(self, L: int) -> dict:
        return {"L": L, "J_zz": self.J_zz, "boundary": self.boundary, "max_bond": self.max_bond,
                "svd_floor": self.svd_floor, "dmrg_tol": self.dmrg_tol, "max_sweeps": self.max_sweeps}

    def string_length(self, L: int) -> int:
        return self.k if self.k is not None else default_string_length(L)


@dataclass
class ScanRecord:
    """Rows of one scan plus the snapshot they were produced from."""

    config_hash: str
    config: dict
    rows: list[dict]
    timing: dict = field(default_factory=dict)

    @property
    def failed(self) -> list[dict]:
        return [r for r in self.rows if r["status"] != "ok"]


def _hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def _atomic_write(path: Path, data: str | bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


# ---------------------------------------------------------------- ground state

def ground_checkpoint_path(config: ScanConfig, L: int) -> Path:
    base = Path(config.checkpoint_dir or Path(config.output_dir) / "checkpoints")
    return base / f"ground_L{L}_{_hash(config.ground_key(L))[:12]}.mps"


def build_ground_state(config: ScanConfig, L: int) -> tuple[MPS, dict]:
    """DMRG ground state of the doubled ladder seeded with the cluster state."""
    h = build_doubled_hamiltonian(L, config.J_zz, config.boundary)
    mpo = mpo_from_hamiltonian(h)
    seed = cluster_initial_state(L, config.boundary)
    result = dmrg_ground_state(mpo, h.layout, config.policy, tol=config.dmrg_tol,
                               max_sweeps=config.max_sweeps, initial=seed)
    psi = result.mps
    psi.normalize()
    psi.log_norm = 0.0
    info = {
        "L": L,
        "energy": result.energy,
        "energies": result.energies,
        "sweeps": len(result.energies),
        "bond_dims": psi.bond_dims,
        "max_truncation": result.max_truncation,
        "ground_key": config.ground_key(L),
    }
    if config.boundary == "periodic" and config.J_zz < 1:
        from .ed import free_fermion_energy

        info["energy_exact"] = 2 * free_fermion_energy(L, config.J_zz)
        info["energy_exact_error"] = result.energy - info["energy_exact"]
    if L <= config.ed_check_max_L:
        from .ed import doubled_ground_state

        _, e_ed = doubled_ground_state(L, config.J_zz, config.boundary)
        info["energy_ed"] = e_ed
        info["energy_error"] = result.energy - e_ed
        log.info("L=%d DMRG %.12f ED %.12f diff %.2e", L, result.energy, e_ed, result.energy - e_ed)
    return psi, info


def ground_state(config: ScanConfig, L: int, rebuild: bool = False) -> tuple[MPS, dict]:
    """Load the ground checkpoint for ``L`` or build and store it."""
    path = ground_checkpoint_path(config, L)
    if path.exists() and not rebuild:
        psi, meta = load_mps(path)
        if meta.get("ground_key") == config.ground_key(L):
            return psi, meta
        log.warning("checkpoint %s does not match the configuration; rebuilding", path)
    psi, info = build_ground_state(config, L)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_mps(path, psi, info)
    return psi, info


# ---------------------------------------------------------------- scan points

def _subset(rec: dict, groups: list[str]) -> dict:
    keep = {"L", "k", "odd_L"}
    if "correlators" in groups:
        keep |= {"chi_II", "chi_I", "C_II", "C_I"}
    if "strings" in groups:
        keep |= {"S1", "S2", "S1_all", "S2_all"}
    if "entanglement" in groups:
        keep |= {"ee_half", "ee_region", "es_half", "sx_profile"}
    return {k: v for k, v in rec.items() if k in keep}


def filtered_state(psi0, config: ScanConfig, p_zz: float):
    """Copy of ``psi0`` with all filter gates of one scan point applied."""
    psi = psi0.copy()
    if isinstance(psi, MPS):
        psi.trunc_log = []
        psi.warnings = []
    for spec in channel_specs(p_zz, config.J_zz, config.mode):
        gates = build_filter_gates(spec, psi.layout)
        if isinstance(psi, MPS):
            apply_filter_gates(psi, gates, config.policy)
        else:
            from .ed import filter_statevector

            psi = filter_statevector(psi, gates)
    return psi


def run_point(psi0: MPS, config: ScanConfig, L: int, p_zz: float) -> dict:
    """Filter the ground state at ``p_zz`` and measure; never raises."""
    row = {"L": L, "p_zz": p_zz, "p_x": px_of_pzz(p_zz, config.J_zz) if config.mode == "paired" else 0.0,
           "mode": config.mode, "status": "ok", "error": ""}
    try:
        psi = filtered_state(psi0, config, p_zz)
        rec = measure_all(psi, k=config.string_length(L), es_levels=config.es_levels,
                          region_sites=config.region_sites)
        row.update(_subset(rec, config.observables))
        if "entanglement" in config.observables:
            row["es_degeneracy"] = degeneracy_count(rec["es_half"], config.degeneracy_tol)
            try:
                fit = cc_fit(np.arange(1, 2 * L), rec["sx_profile"], 2 * L)
                row["cc_c_eff"] = fit.params["c_eff"]
                row["cc_B"] = fit.params["B"]
                row["cc_r2"] = fit.extra["r2"]
            except FitError as exc:
                row["cc_c_eff"] = row["cc_B"] = row["cc_r2"] = float("nan")
                log.warning("CC fit failed at L=%d p=%.4f: %s", L, p_zz, exc)
        row["sym_overlaps"] = list(symmetry_overlaps(psi).values())
        row["log_norm"] = psi.log_norm
        row["norm_constant_log"] = _log_norm_constant(config, p_zz, L)
        trunc = psi.trunc_log if isinstance(psi, MPS) else []
        row["truncation_total"] = float(sum(trunc))
        row["truncation_max"] = float(max(trunc, default=0.0))
        row["max_bond"] = psi.max_bond if isinstance(psi, MPS) else 0
        row["warnings"] = list(psi.warnings) if isinstance(psi, MPS) else []
    except Exception as exc:  # isolate the failure to this row
        log.exception("scan point L=%d p=%.4f failed", L, p_zz)
        row["status"] = "failed"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _log_norm_constant(config: ScanConfig, p_zz: float, L: int) -> float:
    """Log of the scalar prefactor dropped by the filter gates (-inf at p = 1/2)."""
    p_x = px_of_pzz(p_zz, config.J_zz) if config.mode == "paired" else 0.0
    c = norm_constant(p_zz, p_x, L)
    return math.log(c) if c > 0 else -math.inf


def _run_L(args) -> list[dict]:
    config_dict, L = args
    config = ScanConfig.from_dict(config_dict)
    out = []
    try:
        psi0, info = ground_state(config, L)
    except (DMRGNotConverged, ValueError) as exc:
        log.error("ground state for L=%d failed: %s", L, exc)
        return [{"L": L, "p_zz": p, "mode": config.mode, "status": "failed",
                 "error": f"ground state: {exc}"} for p in config.p_grid]
    for p in config.p_grid:
        t0 = time.perf_counter()
        row = run_point(psi0, config, L, p)
        row["_time_s"] = time.perf_counter() - t0
        out.append(row)
        log.info("L=%d p=%.4f %s", L, p, row["status"])
    return out


def run_scan(config: ScanConfig, write: bool = True) -> ScanRecord:
    """All (L, p_zz) points; rows sorted by (L, p_zz), outputs rewritten atomically per size."""
    rows: list[dict] = []
    timing: dict = {}
    jobs = [(config.to_dict(), L) for L in config.L]
    if config.workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        import multiprocessing as mp

        with ProcessPoolExecutor(max_workers=config.workers, mp_context=mp.get_context("spawn")) as pool:
            for chunk in pool.map(_run_L, jobs):
                _collect(chunk, rows, timing)
                if write:
                    write_outputs(config, rows, timing)
    else:
        for job in jobs:
            _collect(_run_L(job), rows, timing)
            if write:
                write_outputs(config, rows, timing)
    rows.sort(key=lambda r: (r["L"], r["p_zz"]))
    return ScanRecord(config.snapshot_hash(), config.snapshot(), rows, timing)


def _collect(chunk, rows, timing):
    for r in chunk:
        t = r.pop("_time_s", None)
        if t is not None:
            timing[f"L={r['L']},p={r['p_zz']}"] = t
        rows.append(r)


# ---------------------------------------------------------------- outputs

SCALAR_COLUMNS = ["L", "p_zz", "p_x", "mode", "status", "k", "chi_II", "chi_I", "S1", "S2", "ee_half",
                  "ee_region", "es_degeneracy", "cc_c_eff", "cc_B", "cc_r2", "max_bond", "truncation_total",
                  "truncation_max", "log_norm", "norm_constant_log", "error"]
LIST_COLUMNS = ["C_II", "C_I", "S1_all", "S2_all", "es_half", "sx_profile", "sym_overlaps", "warnings"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return json.dumps(v)
    return str(v)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = SCALAR_COLUMNS + LIST_COLUMNS
    w.writerow(cols)
    for r in sorted(rows, key=lambda r: (r["L"], r["p_zz"])):
        w.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def series(rows: list[dict]) -> dict:
    """Per-size columns ready for plotting."""
    out: dict = {}
    for r in sorted(rows, key=lambda r: (r["L"], r["p_zz"])):
        if r["status"] != "ok":
            continue
        s = out.setdefault(str(r["L"]), {})
        for key in ["p_zz", "chi_II", "chi_I", "S1", "S2", "ee_half", "ee_region", "es_half",
                    "es_degeneracy", "sx_profile", "cc_c_eff", "cc_r2", "sym_overlaps"]:
            if key in r:
                s.setdefault(key, []).append(r[key])
    return out


def _clean(obj):
    """JSON-safe copy (NaN and infinities become null)."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def write_outputs(config: ScanConfig, rows: list[dict], timing: dict | None = None) -> dict:
    out = Path(config.output_dir)
    rows = sorted(rows, key=lambda r: (r["L"], r["p_zz"]))
    doc = {"config_hash": config.snapshot_hash(), "config": config.snapshot(), "rows": rows,
           "series": series(rows)}
    paths = {"csv": out / "scan.csv", "json": out / "scan.json", "timing": out / "scan_timing.json"}
    _atomic_write(paths["csv"], rows_to_csv(rows))
    _atomic_write(paths["json"], json.dumps(_clean(doc), indent=1, sort_keys=True) + "\n")
    if timing is not None:
        _atomic_write(paths["timing"], json.dumps(timing, indent=1, sort_keys=True) + "\n")
    return paths


def load_scan(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
