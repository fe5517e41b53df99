"""Nonlinear least-squares estimation of the aging models.

Both models are fit by damped (Levenberg-style) least squares on analytic
Jacobians, with the timescales optimized in log space so they stay positive
and the steps are well scaled.  A trial step is accepted only if it lowers
the residual sum of squares; otherwise the damping is increased and the
step retried.  The returned point therefore never has a higher rss than the
initialization.  Box bounds are enforced by projecting trial points.

``grid_search_oracle`` provides an independent brute-force check: it
evaluates the model on an explicit parameter grid and returns the grid
minimizer, with no shared code path with the iterative fitter beyond the
model formula itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError, ValidationError
from .ensemble import ChipDataset, aggregate_series
from .model import AgingParams, TwoLogParams

__all__ = [
    "FitOptions",
    "FitResult",
    "ChipFitResult",
    "fit_single_log",
    "fit_two_log",
    "fit_chip",
    "grid_search_oracle",
    "parameter_histogram",
]

_LOG_TAU_LO = math.log(1e2)
_LOG_TAU_HI = math.log(1e8)


@dataclass(frozen=True)
class FitOptions:
    """Fit configuration: model choice, box bounds, stopping rules.

    ``init`` takes natural-unit parameters: (a, tau_s, b) for the
    single-log model, (a_int, tau_int_s, a_ext, tau_ext_s) for the two-log
    model.  ``fix_b`` pins the single-log offset (used for chip-wide shared
    b fits).
    """

    model: str = "single-log"
    a_bounds: tuple[float, float] = (0.0, 1.0)
    log_tau_bounds: tuple[float, float] = (_LOG_TAU_LO, _LOG_TAU_HI)
    b_bounds: tuple[float, float] = (1e-6, 10.0)
    max_iterations: int = 200
    step_tolerance: float = 1e-10
    residual_tolerance: float = 1e-12
    init: tuple[float, ...] | None = None
    fix_b: float | None = None

    def __post_init__(self):
        if self.model not in ("single-log", "two-log"):
            raise ValidationError(f"unknown model {self.model!r}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if self.step_tolerance <= 0 or self.residual_tolerance <= 0:
            raise ValidationError("tolerances must be > 0")
        for lo, hi in (self.a_bounds, self.log_tau_bounds, self.b_bounds):
            if not lo < hi:
                raise ValidationError("bounds must satisfy lo < hi")


@dataclass(frozen=True)
class FitResult:
    """Recovered parameters with uncertainties and convergence diagnostics."""

    params: AgingParams | TwoLogParams
    stderr: dict[str, float]
    rss: float
    converged: bool
    n_points: int
    iterations: int
    at_bounds: tuple[str, ...] = ()
    messages: tuple[str, ...] = ()
    degenerate_timescales: bool = False


@dataclass(frozen=True)
class ChipFitResult:
    """Per-junction fits plus the average-curve fit for one chip."""

    per_junction: dict[int, FitResult]
    average: FitResult
    r0_ohm: dict[int, float]
    average_r0_ohm: float
    skipped: dict[int, str]


def _check_series(series, min_points: int) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError("series must be a sequence of (t_s, ratio) pairs")
    if arr.shape[0] < min_points:
        raise InsufficientDataError(
            f"need >= {min_points} points, got {arr.shape[0]}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError("series contains non-finite values")
    t, y = arr[:, 0], arr[:, 1]
    if np.any(t < 0):
        raise ValidationError("series times must be >= 0")
    return t, y


def _span_warning(t: np.ndarray) -> list[str]:
    tpos = t[t > 0]
    if tpos.size == 0:
        raise InsufficientDataError("series needs at least one positive time")
    if tpos.max() <= tpos.min():
        raise InsufficientDataError("series time span is zero")
    if tpos.max() / tpos.min() < 10.0:
        msg = "time span below one decade; timescale is weakly constrained"
        warnings.warn(msg, stacklevel=3)
        return [msg]
    return []


def _weights(w, n: int) -> np.ndarray:
    if w is None:
        return np.ones(n)
    w = np.asarray(w, dtype=float)
    if w.shape != (n,) or np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValidationError("weights must be positive, finite, one per point")
    return np.sqrt(w)


# --- model residuals and analytic Jacobians (in log-tau parameterization) ---

def _single_log_rj(x, t, y, sw, b_fixed=None):
    if b_fixed is None:
        a, lt, b = x
    else:
        (a, lt), b = x, b_fixed
    tau = math.exp(lt)
    u = t / tau + b
    log_u = np.log(u)
    r = (1.0 + a * log_u - y) * sw
    cols = [log_u * sw, (-a * (t / tau) / u) * sw]
    if b_fixed is None:
        cols.append((a / u) * sw)
    return r, np.column_stack(cols)


def _two_log_rj(x, t, y, sw):
    ai, lti, ae, lte = x
    taui, taue = math.exp(lti), math.exp(lte)
    ui = 1.0 + t / taui
    ue = 1.0 + t / taue
    r = (1.0 + ai * np.log(ui) + ae * np.log(ue) - y) * sw
    J = np.column_stack(
        [
            np.log(ui) * sw,
            (-ai * (t / taui) / ui) * sw,
            np.log(ue) * sw,
            (-ae * (t / taue) / ue) * sw,
        ]
    )
    return r, J


def _lm_minimize(fun, x0, lo, hi, opts: FitOptions):
    """Damped least squares over a box; accepts only rss-decreasing steps."""
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    r, J = fun(x)
    rss = float(r @ r)
    lam = 1e-3
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iterations + 1):
        g = J.T @ r
        JtJ = J.T @ J
        d = np.diag(JtJ).copy()
        d[d <= 0] = 1.0
        accepted = False
        rel_step = np.inf
        improvement = np.inf
        while lam < 1e15:
            try:
                dx = np.linalg.solve(JtJ + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= 5.0
                continue
            x_trial = np.clip(x + dx, lo, hi)
            step = x_trial - x
            if not np.any(step != 0.0):
                lam *= 5.0
                continue
            r_trial, J_trial = fun(x_trial)
            rss_trial = float(r_trial @ r_trial)
            if rss_trial < rss:
                rel_step = float(
                    np.linalg.norm(step) / max(np.linalg.norm(x_trial), 1.0)
                )
                improvement = rss - rss_trial
                x, r, J, rss = x_trial, r_trial, J_trial, rss_trial
                lam = max(lam / 3.0, 1e-14)
                accepted = True
                break
            lam *= 5.0
        if not accepted:
            # No downhill step at any damping: stationary (or pinned at bounds).
            converged = True
            break
        if rel_step < opts.step_tolerance or improvement <= opts.residual_tolerance * max(rss, 1e-300):
            converged = True
            break
    return x, r, J, rss, converged, iterations


def _stderr_and_bounds(x, J, rss, n, lo, hi, names):
    p = len(x)
    stderr = {}
    try:
        cov = np.linalg.inv(J.T @ J) * (rss / (n - p) if n > p else float("nan"))
        sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except np.linalg.LinAlgError:
        sig = np.full(p, float("nan"))
    at = []
    for k, name in enumerate(names):
        stderr[name] = float(sig[k])
        if math.isclose(x[k], lo[k], rel_tol=0, abs_tol=1e-12) or math.isclose(
            x[k], hi[k], rel_tol=0, abs_tol=1e-12
        ):
            at.append(name)
    return stderr, tuple(at)


def fit_single_log(series, opts: FitOptions | None = None, weights=None) -> FitResult:
    """Fit ``1 + a ln(t/tau + b)`` to a fractional-resistance series.

    Parameters
    ----------
    series : array_like, shape (n, 2)
        Rows of (t_s, R/R0); n >= 4, times >= 0, values finite.
    opts : FitOptions, optional
        Bounds, stopping rules, explicit initialization, fixed b.
    weights : array_like, optional
        Per-point weights applied to squared residuals.

    Returns
    -------
    FitResult
        Parameters (tau reported in seconds, optimized internally in ln
        tau), per-parameter standard errors from the linearized covariance
        scaled by rss/(n - p), rss, and convergence diagnostics.  On
        non-convergence the best point so far is returned with
        ``converged=False``.
    """
    opts = opts or FitOptions()
    t, y = _check_series(series, 4)
    msgs = _span_warning(t)
    sw = _weights(weights, t.size)

    fixed_b = opts.fix_b
    if fixed_b is not None and not opts.b_bounds[0] <= fixed_b <= opts.b_bounds[1]:
        raise ParameterError("fix_b outside b bounds")

    tpos = t[t > 0]
    if opts.init is not None:
        a0, tau0 = opts.init[0], opts.init[1]
        b0 = opts.init[2] if len(opts.init) > 2 and fixed_b is None else 1.0
    else:
        a0 = (y.max() - y.min()) / math.log(tpos.max() / tpos.min())
        tau0 = tpos.min()
        b0 = 1.0

    lo = [opts.a_bounds[0], opts.log_tau_bounds[0]]
    hi = [opts.a_bounds[1], opts.log_tau_bounds[1]]
    x0 = [a0, math.log(max(tau0, 1e-300))]
    names = ["a", "tau_s"]
    if fixed_b is None:
        lo.append(opts.b_bounds[0])
        hi.append(opts.b_bounds[1])
        x0.append(b0)
        names.append("b")
    lo, hi = np.asarray(lo), np.asarray(hi)

    fun = lambda x: _single_log_rj(x, t, y, sw, b_fixed=fixed_b)
    x, r, J, rss, converged, iters = _lm_minimize(fun, x0, lo, hi, opts)

    stderr, at = _stderr_and_bounds(x, J, rss, t.size, lo, hi, names)
    # Report tau in seconds: delta method through the exp reparameterization.
    tau = math.exp(x[1])
    stderr["tau_s"] = tau * stderr["tau_s"]
    b = float(x[2]) if fixed_b is None else float(fixed_b)
    params = AgingParams(a=float(x[0]), tau_s=tau, b=b, r0_ohm=1.0)
    if fixed_b is not None:
        stderr["b"] = 0.0
        msgs = msgs + ["b fixed by caller"]
    return FitResult(
        params=params, stderr=stderr, rss=rss, converged=converged,
        n_points=int(t.size), iterations=iters, at_bounds=at, messages=tuple(msgs),
    )


def fit_two_log(series, opts: FitOptions | None = None, weights=None) -> FitResult:
    """Fit the two-channel model; channels are reported with tau_int >= tau_ext.

    Requires >= 6 points.  Near-degenerate solutions (timescales within a
    factor of 2) are flagged ``degenerate_timescales`` since the channel
    split is then practically unidentifiable.
    """
    opts = opts or FitOptions(model="two-log")
    t, y = _check_series(series, 6)
    msgs = _span_warning(t)
    sw = _weights(weights, t.size)

    tpos = t[t > 0]
    if opts.init is not None:
        ai0, ti0, ae0, te0 = opts.init
    else:
        a_total = (y.max() - y.min()) / math.log(tpos.max() / tpos.min())
        ai0 = ae0 = a_total / 2.0
        ti0 = tpos.max() / 10.0
        te0 = tpos.min()

    lo = np.asarray(
        [opts.a_bounds[0], opts.log_tau_bounds[0]] * 2
    )
    hi = np.asarray(
        [opts.a_bounds[1], opts.log_tau_bounds[1]] * 2
    )
    x0 = [ai0, math.log(max(ti0, 1e-300)), ae0, math.log(max(te0, 1e-300))]

    fun = lambda x: _two_log_rj(x, t, y, sw)
    x, r, J, rss, converged, iters = _lm_minimize(fun, x0, lo, hi, opts)

    names = ["a_int", "tau_int_s", "a_ext", "tau_ext_s"]
    stderr, at = _stderr_and_bounds(x, J, rss, t.size, lo, hi, names)
    taui, taue = math.exp(x[1]), math.exp(x[3])
    stderr["tau_int_s"] = taui * stderr["tau_int_s"]
    stderr["tau_ext_s"] = taue * stderr["tau_ext_s"]
    ai, ae = float(x[0]), float(x[2])

    if taui < taue:
        # Canonical channel order: the label exchange symmetry is resolved
        # by making the internal channel the slow one.
        ai, ae, taui, taue = ae, ai, taue, taui
        stderr = {
            "a_int": stderr["a_ext"], "tau_int_s": stderr["tau_ext_s"],
            "a_ext": stderr["a_int"], "tau_ext_s": stderr["tau_int_s"],
        }
        swap = {"a_int": "a_ext", "a_ext": "a_int",
                "tau_int_s": "tau_ext_s", "tau_ext_s": "tau_int_s"}
        at = tuple(sorted(swap[n] for n in at))

    degenerate = max(taui, taue) < 2.0 * min(taui, taue)
    if degenerate:
        msgs.append("recovered timescales within a factor of 2; channel split is "
                    "practically unidentifiable")
    params = TwoLogParams(a_int=ai, tau_int_s=taui, a_ext=ae, tau_ext_s=taue, r0_ohm=1.0)
    return FitResult(
        params=params, stderr=stderr, rss=rss, converged=converged,
        n_points=int(t.size), iterations=iters, at_bounds=at,
        messages=tuple(msgs), degenerate_timescales=degenerate,
    )


def fit_chip(
    ds: ChipDataset,
    opts: FitOptions | None = None,
    r0_override: Mapping[int, float] | None = None,
    share_b: bool = False,
    window_s: float = 600.0,
) -> ChipFitResult:
    """Fit every junction and the chip-average curve.

    Each junction is normalized by its earliest usable resistance (or by
    ``r0_override[junction_id]``); the average curve is the per-time mean
    resistance normalized by its earliest value.  Open and excluded records
    are dropped; junctions failing the prechecks are reported in
    ``skipped`` rather than aborting the chip.  With ``share_b`` the
    average-curve offset is refit into every junction as a fixed b
    (single-log model only).
    """
    opts = opts or FitOptions()
    min_pts = 4 if opts.model == "single-log" else 6
    fit_fun = fit_single_log if opts.model == "single-log" else fit_two_log

    agg = aggregate_series(ds, window_s=window_s)
    if len(agg) < min_pts:
        raise InsufficientDataError(
            f"average curve has {len(agg)} time points; need >= {min_pts}"
        )
    avg_r0 = agg[0][1]
    avg_series = [(t, m / avg_r0) for t, m, _, _ in agg]
    average = fit_fun(avg_series, opts)

    per_opts = opts
    if share_b and opts.model == "single-log":
        per_opts = replace(opts, fix_b=average.params.b)

    per_junction: dict[int, FitResult] = {}
    r0s: dict[int, float] = {}
    skipped: dict[int, str] = {}
    for j in ds.junction_ids():
        recs = [r for r in ds.for_junction(j) if r.flag == "ok"]
        if len({r.t_s for r in recs}) < min_pts:
            skipped[j] = f"fewer than {min_pts} usable time points"
            continue
        r0 = r0_override[j] if r0_override and j in r0_override else recs[0].r_ohm
        series = [(r.t_s, r.r_ohm / r0) for r in recs]
        try:
            per_junction[j] = fit_fun(series, per_opts)
            r0s[j] = r0
        except (InsufficientDataError, ValidationError) as exc:
            skipped[j] = str(exc)
    return ChipFitResult(
        per_junction=per_junction, average=average,
        r0_ohm=r0s, average_r0_ohm=avg_r0, skipped=skipped,
    )


_GRID_NODE_LIMIT = int(1e8)
_SINGLE_KEYS = ("a", "tau_s", "b")
_TWO_KEYS = ("a_int", "tau_int_s", "a_ext", "tau_ext_s")


def grid_search_oracle(series, grid: Mapping[str, Sequence[float]]):
    """Exhaustive model evaluation on an explicit parameter grid.

    ``grid`` maps parameter names to candidate values: keys (a, tau_s, b)
    select the single-log model, (a_int, tau_int_s, a_ext, tau_ext_s) the
    two-log model.  Returns ``(best_params_dict, best_rss)`` for the global
    grid minimizer.  Intended as an independent brute-force check on the
    iterative fitter; refuses grids above 1e8 nodes.
    """
    keys = tuple(sorted(grid.keys()))
    if keys == tuple(sorted(_SINGLE_KEYS)):
        names, model = _SINGLE_KEYS, "single"
        t, y = _check_series(series, 1)
    elif keys == tuple(sorted(_TWO_KEYS)):
        names, model = _TWO_KEYS, "two"
        t, y = _check_series(series, 1)
    else:
        raise ValidationError(
            f"grid keys {keys} match neither the single-log nor the two-log model"
        )
    axes = [np.asarray(grid[name], dtype=float) for name in names]
    if any(ax.ndim != 1 or ax.size < 1 for ax in axes):
        raise ValidationError("each grid axis needs at least one value")
    n_nodes = int(np.prod([ax.size for ax in axes]))
    if n_nodes > _GRID_NODE_LIMIT:
        raise ValidationError(
            f"grid has {n_nodes} nodes (> {_GRID_NODE_LIMIT}); coarsen the axes or "
            "restrict the ranges"
        )

    mesh = np.meshgrid(*axes, indexing="ij")
    flat = [m.reshape(-1) for m in mesh]
    best_rss = np.inf
    best_idx = 0
    chunk = max(1, int(2e7) // max(t.size, 1))
    for start in range(0, n_nodes, chunk):
        sl = slice(start, min(start + chunk, n_nodes))
        if model == "single":
            a, tau, b = flat[0][sl], flat[1][sl], flat[2][sl]
            f = 1.0 + a[:, None] * np.log(t[None, :] / tau[:, None] + b[:, None])
        else:
            ai, ti, ae, te = (flat[k][sl] for k in range(4))
            f = (
                1.0
                + ai[:, None] * np.log1p(t[None, :] / ti[:, None])
                + ae[:, None] * np.log1p(t[None, :] / te[:, None])
            )
        rss = np.sum((f - y[None, :]) ** 2, axis=1)
        k = int(np.argmin(rss))
        if rss[k] < best_rss:
            best_rss = float(rss[k])
            best_idx = start + k
    best = {name: float(flat[k][best_idx]) for k, name in enumerate(names)}
    return best, best_rss


_HIST_FIELDS = ("a", "tau", "log_tau", "b")


def parameter_histogram(results: Sequence[FitResult], field: str, n_bins: int):
    """Histogram one recovered parameter across fit results.

    ``field`` is one of a, tau, log_tau, b; log_tau bins are uniform in
    ln(tau).  Returns ``(counts, edges)`` as numpy arrays (np.histogram
    convention); total counts equal the number of results.
    """
    if field not in _HIST_FIELDS:
        raise ValidationError(f"unknown histogram field {field!r}; choose from {_HIST_FIELDS}")
    if not results:
        raise InsufficientDataError("need at least one fit result")
    if n_bins < 1:
        raise ValidationError("n_bins must be >= 1")
    values = []
    for res in results:
        p = res.params
        if not isinstance(p, AgingParams):
            raise ValidationError("parameter histograms expect single-log fit results")
        if field == "a":
            values.append(p.a)
        elif field == "tau":
            values.append(p.tau_s)
        elif field == "log_tau":
            values.append(math.log(p.tau_s))
        else:
            values.append(p.b)
    arr = np.asarray(values)
    vmin, vmax = float(arr.min()), float(arr.max())
    if vmin == vmax:
        vmin, vmax = vmin - 0.5, vmax + 0.5
    counts, edges = np.histogram(arr, bins=n_bins, range=(vmin, vmax))
    return counts, edges
