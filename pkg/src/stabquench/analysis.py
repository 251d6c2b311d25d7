"""
Scans of the block stabilizer entropy over (L, t) and the quantities read
off them: equilibration times, second differences in L, locality lengths
and the spreading velocities of T2 and T4.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, Flag, InsufficientWindowError, ResourceError
from .fermions import FiniteChain, QuenchSpec, ThermodynamicLimit, evolved_correlation, gge_correlation
from .metrics import SEReport, se_report
from .pauli import MAX_BLOCK, moment_sums

log = logging.getLogger(__name__)

CSV_COLUMNS = ("lambda0", "lambda1", "L", "t", "purity", "S2", "W", "M2", "T2", "T4")
REPORT_FIELDS = ("purity", "S2", "W", "M2", "T2", "T4")
DEPHASED_TAG = "dephased"
ABS_FALLBACK_REF = 1e-6
ABS_FALLBACK_TOL = 1e-3
MAX_FIT_RMS = 0.5
MIN_FIT_POINTS = 4
TRANSIENT_SITES = 2


@dataclass(eq=False)
class ScanResult:
    """SE reports on an (L, t) grid; ``table[(L, j)]`` belongs to ``t_grid[j]``."""

    spec: QuenchSpec
    L_grid: tuple
    t_grid: np.ndarray
    table: dict
    dephased_row: dict | None = None

    @property
    def is_complete(self) -> bool:
        return all((L, j) in self.table for L in self.L_grid for j in range(len(self.t_grid)))

    def series(self, name: str, L: int) -> np.ndarray:
        """Observable ``name`` of block L along the time grid."""
        return np.array([getattr(self.table[(L, j)], name) for j in range(len(self.t_grid))])

    def profile(self, name: str, j: int) -> np.ndarray:
        """Observable ``name`` at time index j along the L grid."""
        return np.array([getattr(self.table[(L, j)], name) for L in self.L_grid])

    def dephased(self, name: str, L: int) -> float:
        if self.dephased_row is None:
            raise DomainError("scan was run without the dephased row")
        return getattr(self.dephased_row[L], name)


@dataclass(frozen=True)
class VelocityFit:
    """Least-squares line through l_eps(t) on the ballistic window."""

    slope: float
    intercept: float
    residual_rms: float
    window: tuple
    n_points: int
    monotone: bool

    @property
    def accepted(self) -> bool:
        return self.residual_rms < MAX_FIT_RMS


@dataclass(eq=False)
class LocalityProfile:
    """|d^2_L T| over interior L at each time, with the lengths l_eps(t) it implies."""

    kind: str
    t_grid: np.ndarray
    L_interior: np.ndarray
    second_diffs: np.ndarray
    epsilon: float
    l_eps: list = field(default_factory=list)
    velocity: VelocityFit | None = None

    def resolved(self):
        """Times and lengths where l_eps is a number."""
        pts = [(t, l) for t, l in zip(self.t_grid, self.l_eps) if l is not Flag.UNRESOLVED]
        return np.array([p[0] for p in pts]), np.array([p[1] for p in pts], dtype=float)


def _check_grid(values, name, integer=False):
    arr = np.asarray(values, dtype=int if integer else float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"{name} must be a nonempty 1-d grid")
    if np.any(np.diff(arr) <= 0):
        raise DomainError(f"{name} must be strictly increasing")
    return arr


def _spec_dict(spec: QuenchSpec) -> dict:
    size = spec.size
    if isinstance(size, FiniteChain):
        s = {"kind": "finite", "n_sites": size.n_sites}
    else:
        s = {"kind": "thermodynamic", "quadrature_points": size.quadrature_points, "safety": size.safety}
    return {"lambda0": spec.lambda0, "lambda1": spec.lambda1, "size": s}


def spec_from_dict(d: dict) -> QuenchSpec:
    s = d.get("size", {"kind": "thermodynamic"})
    if s.get("kind") == "finite":
        size = FiniteChain(int(s["n_sites"]))
    else:
        size = ThermodynamicLimit(int(s.get("quadrature_points", 4096)), float(s.get("safety", 4.0)))
    return QuenchSpec(float(d["lambda0"]), float(d["lambda1"]), size)


def _load_checkpoint(path, meta) -> dict:
    if path is None or not os.path.exists(path):
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if data.get("meta") != meta:
        log.warning("checkpoint %s belongs to a different scan; ignoring it", path)
        return {}
    return {int(L): [SEReport(**r) for r in rows] for L, rows in data["rows"].items()}


def _save_checkpoint(path, meta, done: dict):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump({"meta": meta, "rows": {str(L): [r.as_dict() for r in rows] for L, rows in done.items()}}, fh)
    os.replace(tmp, path)


def time_scan(spec: QuenchSpec, L_grid: Sequence[int], t_grid, dephased: bool = True,
              checkpoint: str | None = None) -> ScanResult:
    """SE reports of every block length in ``L_grid`` at every time in ``t_grid``.

    Blocks are the leading sub-blocks of one correlation matrix per time.
    With ``checkpoint`` set, rows are written there after each completed L
    and a rerun resumes from the rows already present.
    """
    L_arr = _check_grid(L_grid, "L_grid", integer=True)
    t_arr = _check_grid(t_grid, "t_grid")
    if L_arr[0] < 1:
        raise DomainError("block lengths must be >= 1")
    if L_arr[-1] > MAX_BLOCK:
        raise ResourceError(f"block length {L_arr[-1]} exceeds the cap {MAX_BLOCK}")
    L_max = int(L_arr[-1])
    meta = {"spec": _spec_dict(spec), "L_grid": L_arr.tolist(), "t_grid": t_arr.tolist()}
    done = _load_checkpoint(checkpoint, meta)
    gammas = [evolved_correlation(spec, L_max, float(t)) for t in t_arr]
    table = {}
    for L in map(int, L_arr):
        if L not in done:
            done[L] = [se_report(moment_sums(G.subblock(0, L))) for G in gammas]
            if checkpoint is not None:
                _save_checkpoint(checkpoint, meta, done)
        for j, rep in enumerate(done[L]):
            table[(L, j)] = rep
    row = None
    if dephased:
        G = gge_correlation(spec, L_max)
        row = {L: se_report(moment_sums(G.subblock(0, L))) for L in map(int, L_arr)}
    return ScanResult(spec, tuple(map(int, L_arr)), t_arr, table, row)


def equilibration_band(ref: float, tol: float = 0.05) -> tuple:
    """Allowed deviation from ``ref`` and whether the absolute fallback applies.

    A relative tolerance is meaningless for ref < 1e-6; then the band is
    1e-3 bits.
    """
    if not 0 < tol < 1:
        raise DomainError("tolerance must lie in (0, 1)")
    if abs(ref) < ABS_FALLBACK_REF:
        return ABS_FALLBACK_TOL, True
    return tol * abs(ref), False


def equilibration_time(t_grid, series, ref: float, tol: float = 0.05, horizon: float | None = None):
    """Smallest sampled t* with |series(t) - ref| within the band for all t* <= t <= horizon.

    Returns ``Flag.NOT_EQUILIBRATED`` when no sample qualifies.
    """
    t = np.asarray(t_grid, dtype=float)
    y = np.asarray(series, dtype=float)
    if t.shape != y.shape or t.size == 0:
        raise DomainError("series and time grid must match")
    horizon = t[-1] if horizon is None else horizon
    if horizon > t[-1] + 1e-12:
        raise DomainError("time grid does not reach the horizon")
    band, absolute = equilibration_band(ref, tol)
    if absolute:
        log.info("reference %.3g below %.0e; using an absolute band of %g bits", ref, ABS_FALLBACK_REF, band)
    keep = t <= horizon + 1e-12
    t, y = t[keep], y[keep]
    outside = np.flatnonzero(np.abs(y - ref) > band)
    if outside.size == 0:
        return float(t[0])
    if outside[-1] == t.size - 1:
        return Flag.NOT_EQUILIBRATED
    return float(t[outside[-1] + 1])


def second_difference(values) -> np.ndarray:
    """T(L+1) - 2 T(L) + T(L-1) at the interior points of consecutive L."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 3:
        raise DomainError("need at least three consecutive block lengths")
    return v[2:] - 2 * v[1:-1] + v[:-2]


def locality_length(profile, L_interior, epsilon: float = 0.01):
    """Smallest interior L* with |d^2 T| <= epsilon at every available L >= L*.

    ``Flag.UNRESOLVED`` when even the largest available L breaks the bound.
    """
    p = np.abs(np.asarray(profile, dtype=float))
    Ls = np.asarray(L_interior)
    if p.shape != Ls.shape or p.size == 0:
        raise DomainError("profile and L grid must match")
    above = np.flatnonzero(p > epsilon)
    if above.size == 0:
        return int(Ls[0])
    if above[-1] == p.size - 1:
        return Flag.UNRESOLVED
    return int(Ls[above[-1] + 1])


def locality_profile(scan: ScanResult, kind: str = "T2", epsilon: float = 0.01) -> LocalityProfile:
    """Second differences of T2 or T4 over the scan's L grid and the lengths l_eps(t)."""
    if kind not in ("T2", "T4"):
        raise DomainError("kind must be T2 or T4")
    Ls = np.asarray(scan.L_grid)
    if np.any(np.diff(Ls) != 1):
        raise DomainError("second differences need consecutive block lengths")
    diffs = np.array([np.abs(second_difference(scan.profile(kind, j))) for j in range(len(scan.t_grid))])
    interior = Ls[1:-1]
    lengths = [locality_length(row, interior, epsilon) for row in diffs]
    prof = LocalityProfile(kind, scan.t_grid, interior, diffs, epsilon, lengths)
    try:
        prof.velocity = fit_velocity(scan.t_grid, lengths)
    except InsufficientWindowError as exc:
        log.info("%s velocity not fitted: %s", kind, exc)
    return prof


def fit_velocity(t_grid, lengths, transient: int = TRANSIENT_SITES) -> VelocityFit:
    """Slope of l_eps(t) on its ballistic window.

    The window opens at the first t where l_eps exceeds its t = 0 value by
    ``transient`` sites and closes before the first UNRESOLVED time.
    """
    t = np.asarray(t_grid, dtype=float)
    if len(lengths) != t.size or t.size == 0:
        raise DomainError("lengths and time grid must match")
    l0 = lengths[0]
    if l0 is Flag.UNRESOLVED:
        raise InsufficientWindowError("l_eps unresolved at the first time")
    start = next((i for i, l in enumerate(lengths) if l is Flag.UNRESOLVED or l >= l0 + transient), None)
    if start is None or lengths[start] is Flag.UNRESOLVED:
        raise InsufficientWindowError("no resolved point past the initial transient")
    stop = start
    while stop < len(lengths) and lengths[stop] is not Flag.UNRESOLVED:
        stop += 1
    tw = t[start:stop]
    lw = np.array(lengths[start:stop], dtype=float)
    if tw.size < MIN_FIT_POINTS:
        raise InsufficientWindowError(f"only {tw.size} resolved points in the ballistic window")
    slope, intercept = np.polyfit(tw, lw, 1)
    rms = float(np.sqrt(np.mean((lw - (slope * tw + intercept)) ** 2)))
    return VelocityFit(float(slope), float(intercept), rms, (float(tw[0]), float(tw[-1])), int(tw.size),
                       bool(np.all(np.diff(lw) >= 0)))


def spreading_velocity(l2_fit: VelocityFit, l4_fit: VelocityFit) -> dict:
    """v_T2, v_T4 and v_s = max of the two, with their windows and residuals."""
    for name, f in (("T2", l2_fit), ("T4", l4_fit)):
        if f is None or f.n_points < MIN_FIT_POINTS:
            raise InsufficientWindowError(f"{name} fit has fewer than {MIN_FIT_POINTS} points")
    return {
        "v_T2": l2_fit.slope,
        "v_T4": l4_fit.slope,
        "v_s": max(l2_fit.slope, l4_fit.slope),
        "windows": {"T2": l2_fit.window, "T4": l4_fit.window},
        "residuals": {"T2": l2_fit.residual_rms, "T4": l4_fit.residual_rms},
        "accepted": l2_fit.accepted and l4_fit.accepted,
    }


def exponential_fit(L, values, floor: float = 1e-13) -> dict:
    """Least-squares fit log|v| = a - L / xi over points above ``floor``.

    The residual is the RMS of the natural-log residuals.
    """
    L = np.asarray(L, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    keep = v > floor
    if np.count_nonzero(keep) < 2:
        raise InsufficientWindowError("fewer than two points above the floor")
    x, y = L[keep], np.log(v[keep])
    slope, a = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (slope * x + a)) ** 2)))
    xi = -1.0 / slope if slope < 0 else math.inf
    return {"xi": xi, "amplitude": float(np.exp(a)), "residual_rms": rms, "n_points": int(x.size),
            "L": x.tolist()}


def extrapolate_M2(M2_L0: float, M2_L0p1: float, L0: int, L: int) -> float:
    """Linear continuation M2(L0) + (L - L0) * (M2(L0 + 1) - M2(L0))."""
    if L <= L0 + 1:
        raise DomainError("extrapolation target must exceed L0 + 1")
    return M2_L0 + (L - L0) * (M2_L0p1 - M2_L0)


def _fmt(x) -> str:
    return repr(float(x))


def write_scan_csv(scan: ScanResult, path) -> None:
    """One row per (L, t) plus one dephased row per L, floats in round-trip form."""
    lam0, lam1 = scan.spec.lambda0, scan.spec.lambda1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for L in scan.L_grid:
            for j, t in enumerate(scan.t_grid):
                r = scan.table[(L, j)]
                w.writerow([_fmt(lam0), _fmt(lam1), L, _fmt(t)] + [_fmt(getattr(r, f)) for f in REPORT_FIELDS])
        if scan.dephased_row is not None:
            for L in scan.L_grid:
                r = scan.dephased_row[L]
                w.writerow([_fmt(lam0), _fmt(lam1), L, DEPHASED_TAG] + [_fmt(getattr(r, f)) for f in REPORT_FIELDS])


def read_scan_csv(path) -> list:
    """Rows of a scan CSV as dicts with numeric fields parsed."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in CSV_COLUMNS:
            if k == "L":
                r[k] = int(r[k])
            elif not (k == "t" and r[k] == DEPHASED_TAG):
                r[k] = float(r[k])
    return rows


def scan_metadata(scan: ScanResult) -> dict:
    return {"spec": _spec_dict(scan.spec), "L_grid": list(scan.L_grid), "t_grid": scan.t_grid.tolist(),
            "dephased": scan.dephased_row is not None}


def profile_metadata(p: LocalityProfile) -> dict:
    v = p.velocity
    return {
        "kind": p.kind,
        "epsilon": p.epsilon,
        "t_grid": np.asarray(p.t_grid).tolist(),
        "L_interior": np.asarray(p.L_interior).tolist(),
        "l_eps": [l.value if isinstance(l, Flag) else l for l in p.l_eps],
        "velocity": None if v is None else {
            "slope": v.slope, "intercept": v.intercept, "residual_rms": v.residual_rms,
            "window": list(v.window), "n_points": v.n_points, "accepted": v.accepted, "monotone": v.monotone,
        },
    }
