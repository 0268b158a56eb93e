"""Reference values from exact statevectors, stored as JSON next to the code."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .channels import px_of_pzz
from .ed import decohered_state, doubled_from_single, exact_ground_state, oracle_observables
from .lattice import SizeGuardError
from .models import build_h0_dw

SCHEMA = "dwaspt-golden/1"
GOLDEN_DIR = Path(__file__).parent / "golden"
DEFAULT_P_GRID = (0.0, 0.1, 0.2, 0.3, 0.45)
# keys compared by the oracle harness (lists are compared elementwise)
OBSERVABLE_KEYS = ("chi_II", "chi_I", "C_II", "C_I", "S1_all", "S2_all", "ee_half", "ee_region",
                   "es_half", "sx_profile")
REQUIRED_KEYS = ("schema", "L", "J_zz", "mode", "boundary", "energy", "energy_lanczos", "points")


def golden_path(L: int, J_zz: float = 0.6, mode: str = "paired", directory=None) -> Path:
    d = Path(directory) if directory is not None else GOLDEN_DIR
    return d / f"ed_L{L}_J{J_zz:g}_{mode}.json"


def generate_golden(L: int, J_zz: float = 0.6, p_grid=DEFAULT_P_GRID, mode: str = "paired",
                    boundary: str = "periodic", k: int | None = None) -> dict:
    """Observables of the exactly filtered doubled state on ``p_grid``.

    The single-layer ground state is found twice (dense and Lanczos); both
    energies are stored so the file documents the solver agreement.
    """
    if L > 6:
        raise SizeGuardError("golden values are limited to L <= 6")
    h = build_h0_dw(L, J_zz, boundary)
    dense = exact_ground_state(h, method="dense")
    lanczos = exact_ground_state(h, method="lanczos")
    if dense.degenerate:
        raise ValueError("degenerate single-layer ground state")
    psi0 = doubled_from_single(dense.state.vector, L, boundary)
    points = []
    for p in sorted(float(x) for x in p_grid):
        st = decohered_state(L, J_zz, p, mode, boundary, initial=psi0)
        rec = oracle_observables(st, k=k)
        rec = {key: rec[key] for key in OBSERVABLE_KEYS + ("k",)}
        rec["p_zz"] = p
        rec["p_x"] = px_of_pzz(p, J_zz) if mode == "paired" else 0.0
        points.append(rec)
    return {
        "schema": SCHEMA,
        "L": L,
        "J_zz": J_zz,
        "mode": mode,
        "boundary": boundary,
        "energy": 2 * dense.energy,
        "energy_lanczos": 2 * lanczos.energy,
        "points": points,
    }


def validate_golden(doc: dict) -> None:
    missing = [k for k in REQUIRED_KEYS if k not in doc]
    if missing:
        raise ValueError(f"golden file misses keys {missing}")
    if doc["schema"] != SCHEMA:
        raise ValueError(f"unknown schema {doc['schema']!r}")
    for pt in doc["points"]:
        absent = [k for k in OBSERVABLE_KEYS + ("p_zz",) if k not in pt]
        if absent:
            raise ValueError(f"point {pt.get('p_zz')} misses {absent}")


def compare_observables(ref: dict, got: dict, tol: float, keys=OBSERVABLE_KEYS) -> list[str]:
    """Human-readable list of entries whose difference exceeds ``tol``."""
    out = []
    for key in keys:
        a = np.atleast_1d(np.asarray(ref[key], dtype=float))
        b = np.atleast_1d(np.asarray(got[key], dtype=float))
        if a.shape != b.shape:
            out.append(f"{key}: shape {a.shape} vs {b.shape}")
            continue
        if a.size == 0:
            continue
        d = float(np.max(np.abs(a - b)))
        if not d <= tol:
            out.append(f"{key}: max deviation {d:.3e} > {tol:.1e}")
    return out


def diff_golden(old: dict, new: dict, tol: float = 1e-10) -> list[str]:
    """Differences between two golden documents (empty when they agree)."""
    out = []
    for key in ("L", "J_zz", "mode", "boundary"):
        if old.get(key) != new.get(key):
            out.append(f"{key}: {old.get(key)!r} -> {new.get(key)!r}")
    if not math.isclose(old["energy"], new["energy"], rel_tol=0, abs_tol=tol):
        out.append(f"energy: {old['energy']!r} -> {new['energy']!r}")
    old_pts = {round(p["p_zz"], 12): p for p in old["points"]}
    new_pts = {round(p["p_zz"], 12): p for p in new["points"]}
    for p in sorted(set(old_pts) | set(new_pts)):
        if p not in old_pts or p not in new_pts:
            out.append(f"p_zz={p}: present only in {'new' if p in new_pts else 'old'}")
            continue
        out += [f"p_zz={p} {msg}" for msg in compare_observables(old_pts[p], new_pts[p], tol)]
    return out


def load_golden(L: int, J_zz: float = 0.6, mode: str = "paired", directory=None) -> dict:
    with open(golden_path(L, J_zz, mode, directory)) as fh:
        doc = json.load(fh)
    validate_golden(doc)
    return doc


def dump_golden(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"
