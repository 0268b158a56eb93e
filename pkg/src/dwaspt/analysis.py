"""Fits used in the transition analysis: conformal entropy profile, peak
location, finite-size extrapolation and entanglement-spectrum clustering."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np


class FitError(ValueError):
    """A fit was refused (too few points, edge maximum, singular design)."""


@dataclass
class FitResult:
    params: dict
    residual_norm: float
    window: tuple
    n_points: int
    stderr: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.residual_norm):
            raise FitError("non-finite residual")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def _lstsq(design: np.ndarray, y: np.ndarray):
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise FitError("singular design matrix")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return coef, resid


def cc_chord(x, L_e: int) -> np.ndarray:
    """``ln(2 L_e sin(pi x / L_e))``."""
    x = np.asarray(x, dtype=float)
    return np.log(2 * L_e * np.sin(np.pi * x / L_e))


def cc_fit(x, s, L_e: int) -> FitResult:
    """Least squares of ``S_x = (c/3) ln(2 L_e sin(pi x/L_e)) + B``.

    ``x`` counts rungs, ``1 <= x < L_e``. Reports ``c_eff``, ``B`` and the
    coefficient of determination ``r2`` (set to 0 for constant data with a
    nonzero residual, 1 for a perfect constant fit).
    """
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    if x.shape != s.shape:
        raise FitError("x and S_x differ in length")
    if len(np.unique(x)) < 4:
        raise FitError("need at least 4 distinct x values")
    if np.any(x < 1) or np.any(x >= L_e):
        raise FitError("x outside [1, L_e)")
    design = np.column_stack([cc_chord(x, L_e) / 3.0, np.ones_like(x)])
    (c, b), resid = _lstsq(design, s)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((s - s.mean()) ** 2))
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    return FitResult({"c_eff": float(c), "B": float(b)}, float(np.sqrt(ss_res)), (float(x.min()), float(x.max())),
                     len(x), extra={"r2": r2, "L_e": L_e})


def peak_fit(p, y, window: tuple[float, float] | None = None, degree: int = 6,
             min_points: int = 8) -> FitResult:
    """Location of the maximum of a degree-``degree`` polynomial fit.

    Raises :class:`FitError` if fewer than ``min_points`` samples fall in
    the window or if the fitted maximum sits on a window edge.
    """
    p = np.asarray(p, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is None:
        window = (float(p.min()), float(p.max()))
    lo, hi = window
    sel = (p >= lo) & (p <= hi)
    if int(sel.sum()) < min_points:
        raise FitError(f"{int(sel.sum())} points in window {window}; need {min_points}")
    ps, ys = p[sel], y[sel]
    # centred and scaled abscissa keeps the Vandermonde matrix well conditioned
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    t = (ps - mid) / half
    poly = np.polynomial.Polynomial.fit(t, ys, degree, domain=[-1, 1], window=[-1, 1])
    resid = ys - poly(t)
    crit = poly.deriv().roots()
    crit = crit[np.abs(crit.imag) < 1e-9].real
    crit = crit[(crit > -1) & (crit < 1)]
    cand = np.concatenate([[-1.0, 1.0], crit])
    vals = poly(cand)
    best = int(np.argmax(vals))
    if best < 2:
        raise FitError(f"fitted maximum at window edge {mid + cand[best] * half:.4f}; widen the window")
    t_peak = float(cand[best])
    return FitResult({"p_peak": mid + t_peak * half, "y_peak": float(vals[best]),
                      "coefficients": poly.convert(domain=[-1, 1]).coef.tolist()},
                     float(np.linalg.norm(resid)), (float(lo), float(hi)), int(sel.sum()),
                     extra={"degree": degree, "scaled_abscissa": {"center": mid, "half_width": half}})


def extrapolate_pc(peaks: dict) -> FitResult:
    """Fit ``p_peak(L) = a/L + p_c``; standard errors from the residuals."""
    if len(peaks) < 3:
        raise FitError("need at least 3 system sizes")
    Ls = np.array(sorted(peaks), dtype=float)
    y = np.array([peaks[k] for k in sorted(peaks)], dtype=float)
    design = np.column_stack([1.0 / Ls, np.ones_like(Ls)])
    (a, pc), resid = _lstsq(design, y)
    dof = len(Ls) - 2
    sigma2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(design.T @ design)
    return FitResult({"a": float(a), "p_c": float(pc)}, float(np.linalg.norm(resid)),
                     (float(Ls.min()), float(Ls.max())), len(Ls),
                     stderr={"a": float(np.sqrt(cov[0, 0])), "p_c": float(np.sqrt(cov[1, 1]))})


def degeneracy_count(levels, tol: float = 0.1, n_levels: int = 20) -> int:
    """Multiplicity of the lowest cluster of entanglement levels.

    A new cluster starts where the gap between consecutive sorted levels
    exceeds ``tol`` times the spread of the lowest ``n_levels`` levels.
    """
    lv = np.sort(np.asarray(levels, dtype=float))[:n_levels]
    if lv.size == 0:
        raise ValueError("no levels")
    spread = lv[-1] - lv[0]
    if spread == 0:
        return int(lv.size)
    gaps = np.diff(lv)
    big = np.nonzero(gaps > tol * spread)[0]
    return int(big[0] + 1) if big.size else int(lv.size)


def transition_from_curves(curves: dict, window: tuple[float, float] | None = None, degree: int = 6,
                           min_points: int = 8) -> dict:
    """Peak fit per size followed by the ``a/L + p_c`` extrapolation.

    ``curves`` maps ``L -> (p values, observable values)``. Raises
    :class:`FitError` if any size fails its peak fit or fewer than three
    sizes are available.
    """
    if len(curves) < 3:
        raise FitError("need at least 3 system sizes")
    fits = {}
    for L in sorted(curves):
        p, y = curves[L]
        try:
            fits[L] = peak_fit(p, y, window, degree, min_points)
        except FitError as exc:
            raise FitError(f"L={L}: {exc}") from exc
    ext = extrapolate_pc({L: f.params["p_peak"] for L, f in fits.items()})
    return {"peaks": {int(L): f.as_dict() for L, f in fits.items()}, "extrapolation": ext.as_dict()}
