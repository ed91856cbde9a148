"""
Friction identification: build steady-state torque-velocity maps from
telemetry and fit the static-plus-kinetic friction model of the dynamics
module.

Fit structure
-------------
On a map with points in both rotation directions the kinetic model

    tau(w) = b_c sign(w) + b_v w + reflect(load, sign(w); mu_c)

is linear in the per-direction intercepts (A+, A-) and the slope b_v, so
those are solved by weighted least squares. The intercept sum
A+ + A- = (load / ratio) * (1/eta_driving + eta_overhauling) depends on
the load only through the transmission friction, and the bracketed factor
is strictly increasing in the friction angle, so mu_c follows from a
scalar root solve and b_c from back-substitution. mu_c is therefore only
identifiable when a nonzero, unidirectional test load was applied; with
no load the transmission term vanishes from the data and mu_c is reported
as zero with a flag.

mu_s comes from breakaway torque samples (motor torque at motion onset
after a rest), solved against the static branch of the dynamics model;
without such samples mu_s defaults to mu_c, flagged.

All fitted coefficients are motor-side referenced: b_c and b_v act on the
motor velocity and torques are at the motor shaft.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm as _norm

from . import configfile, dynamics
from .dynamics import Direction, FrictionParams, TransmissionSpec, efficiency
from .errors import (
    DomainError,
    InsufficientDataError,
    InvalidLogError,
    RankDeficientError,
)

VALID_JOINT_IDS = (1, 2, 3, 4)


@dataclass(frozen=True, eq=False)
class TelemetryLog:
    """Motor velocity/torque records, one stream per joint id."""

    time: np.ndarray
    joint_id: np.ndarray
    velocity: np.ndarray
    torque: np.ndarray
    nominal_rate_hz: float = 200.0

    def __post_init__(self):
        t = np.asarray(self.time, dtype=float)
        jid = np.asarray(self.joint_id, dtype=int)
        v = np.asarray(self.velocity, dtype=float)
        tau = np.asarray(self.torque, dtype=float)
        if not (t.shape == jid.shape == v.shape == tau.shape) or t.ndim != 1:
            raise InvalidLogError("telemetry columns must be matching 1-d arrays")
        if t.size == 0:
            raise InvalidLogError("telemetry log is empty")
        for name, arr in (("time", t), ("velocity", v), ("torque", tau)):
            if not np.all(np.isfinite(arr)):
                raise InvalidLogError(f"telemetry {name} contains non-finite values")
        bad = set(np.unique(jid)) - set(VALID_JOINT_IDS)
        if bad:
            raise InvalidLogError(f"joint_id values outside 1..4: {sorted(bad)}")
        for j in np.unique(jid):
            tj = t[jid == j]
            if np.any(np.diff(tj) <= 0.0):
                raise InvalidLogError(f"joint {j}: timestamps not strictly increasing")
            if tj.size >= 2:
                rate = 1.0 / float(np.median(np.diff(tj)))
                if abs(rate - self.nominal_rate_hz) > 0.10 * self.nominal_rate_hz:
                    raise InvalidLogError(
                        f"joint {j}: sample rate {rate:.1f} Hz is more than 10% "
                        f"off the nominal {self.nominal_rate_hz:.1f} Hz"
                    )
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "joint_id", jid)
        object.__setattr__(self, "velocity", v)
        object.__setattr__(self, "torque", tau)

    def joint_ids(self):
        return sorted(int(j) for j in np.unique(self.joint_id))

    def joint(self, joint_id: int):
        mask = self.joint_id == joint_id
        if not mask.any():
            raise InvalidLogError(f"log has no records for joint {joint_id}")
        return self.time[mask], self.velocity[mask], self.torque[mask]


def load_telemetry_csv(path, nominal_rate_hz: float = 200.0) -> TelemetryLog:
    """Read a `time_s,joint_id,velocity,torque` CSV into a TelemetryLog."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InvalidLogError(f"{path}: empty telemetry file")
        if [h.strip() for h in header] != ["time_s", "joint_id", "velocity", "torque"]:
            raise InvalidLogError(
                f"{path}: expected header 'time_s,joint_id,velocity,torque'"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise InvalidLogError(f"{path}:{lineno}: expected 4 columns")
            try:
                rows.append(
                    (float(row[0]), int(float(row[1])), float(row[2]), float(row[3]))
                )
            except ValueError:
                raise InvalidLogError(f"{path}:{lineno}: malformed record") from None
    if not rows:
        raise InvalidLogError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    return TelemetryLog(
        data[:, 0], data[:, 1].astype(int), data[:, 2], data[:, 3], nominal_rate_hz
    )


@dataclass(frozen=True)
class MapPoint:
    """One steady-state operating point (motor side)."""

    velocity: float
    torque_mean: float
    torque_std: float
    count: int


@dataclass(frozen=True)
class TorqueVelocityMap:
    """Steady-state map, points sorted by velocity ascending."""

    points: tuple[MapPoint, ...]

    def direction(self, sign: int):
        if sign > 0:
            return tuple(p for p in self.points if p.velocity > 0.0)
        return tuple(p for p in self.points if p.velocity < 0.0)


def _resolve_joint(log: TelemetryLog, joint_id):
    if joint_id is None:
        ids = log.joint_ids()
        if len(ids) != 1:
            raise DomainError(f"log holds joints {ids}; pass joint_id explicitly")
        return ids[0]
    return joint_id


def _segment_indices(v: np.ndarray, tol: float):
    """Greedy split into runs staying within tol of their running mean."""
    segments = []
    start = 0
    total = v[0]
    for i in range(1, v.size):
        count = i - start
        if abs(v[i] - total / count) > tol:
            segments.append((start, i))
            start = i
            total = v[i]
        else:
            total += v[i]
    segments.append((start, v.size))
    return segments


def extract_steady_segments(log: TelemetryLog, velocity_tolerance: float,
                            min_duration_s: float, *, joint_id=None,
                            discard_s: float = 0.25,
                            min_samples: int = 5) -> TorqueVelocityMap:
    """
    Average constant-velocity plateaus into map points. A plateau is a
    contiguous run whose velocity stays within `velocity_tolerance` of its
    running mean; the first `discard_s` seconds of each run are dropped as
    transients, and runs shorter than `min_duration_s` (after trimming),
    with fewer than `min_samples` samples, or centered within tolerance of
    zero velocity (rest periods) are discarded. Plateaus whose mean
    velocities agree within tolerance are merged count-weighted.
    """
    jid = _resolve_joint(log, joint_id)
    t, v, tau = log.joint(jid)

    raw_points = []
    for i0, i1 in _segment_indices(v, velocity_tolerance):
        keep = i0 + int(np.searchsorted(t[i0:i1], t[i0] + discard_s, side="left"))
        if i1 - keep < min_samples:
            continue
        if t[i1 - 1] - t[keep] < min_duration_s:
            continue
        v_mean = float(np.mean(v[keep:i1]))
        if abs(v_mean) <= velocity_tolerance:
            continue
        raw_points.append(
            (v_mean, float(np.mean(tau[keep:i1])), float(np.std(tau[keep:i1])),
             int(i1 - keep))
        )

    if not raw_points:
        raise InsufficientDataError("no steady segment satisfies the criteria")

    raw_points.sort()
    merged: list[list] = []
    for vm, tm, ts, n in raw_points:
        if merged and abs(vm - merged[-1][0]) <= velocity_tolerance:
            v0, t0, s0, n0 = merged[-1]
            nt = n0 + n
            vm_new = (v0 * n0 + vm * n) / nt
            tm_new = (t0 * n0 + tm * n) / nt
            msq = (n0 * (s0 * s0 + t0 * t0) + n * (ts * ts + tm * tm)) / nt
            merged[-1] = [vm_new, tm_new, math.sqrt(max(0.0, msq - tm_new * tm_new)), nt]
        else:
            merged.append([vm, tm, ts, n])

    return TorqueVelocityMap(tuple(MapPoint(*m) for m in merged))


def extract_breakaway_samples(log: TelemetryLog, velocity_tolerance: float,
                              min_duration_s: float, *, joint_id=None,
                              rest_fraction: float = 1e-3,
                              min_rest_s: float = 0.1):
    """
    Breakaway torques: for each qualifying plateau preceded by a rest, the
    motor torque at the first sample whose speed exceeds `rest_fraction`
    of the plateau level. Returns a list of (direction, torque) pairs.
    """
    jid = _resolve_joint(log, joint_id)
    t, v, tau = log.joint(jid)

    samples = []
    for i0, i1 in _segment_indices(v, velocity_tolerance):
        level = float(np.mean(v[i0:i1]))
        if abs(level) <= velocity_tolerance:
            continue
        if t[i1 - 1] - t[i0] < min_duration_s:
            continue
        threshold = rest_fraction * abs(level)
        j = i0
        while j > 0 and abs(v[j - 1]) > threshold:
            j -= 1
        if j == 0:
            continue
        rest_end = j - 1
        rest_start = rest_end
        while rest_start > 0 and abs(v[rest_start - 1]) <= threshold:
            rest_start -= 1
        if t[rest_end] - t[rest_start] < min_rest_s:
            continue
        samples.append((1 if level > 0 else -1, float(tau[rest_end + 1])))
    return samples


@dataclass(frozen=True)
class FitReport:
    """Fitted friction parameters with fit quality metadata."""

    params: FrictionParams
    residual: float
    half_widths: dict
    residuals_by_direction: dict
    flags: tuple


def _reflection_sum(rho: float, lead_angle: float) -> float:
    """1/eta_driving + eta_overhauling as a function of the friction angle."""
    mu = math.tan(rho)
    return (
        1.0 / efficiency(lead_angle, mu, Direction.DRIVING)
        + efficiency(lead_angle, mu, Direction.OVERHAULING)
    )


def _reflect_scalar(load, motion_sign, spec, mu):
    eta_d = efficiency(spec.lead_angle, mu, Direction.DRIVING)
    eta_o = efficiency(spec.lead_angle, mu, Direction.OVERHAULING)
    if load * motion_sign > 0.0:
        return load / (spec.ratio * eta_d)
    return load * eta_o / spec.ratio


def _solve_mu_c(intercept_sum, spec, test_load, flags):
    target = intercept_sum * spec.ratio / test_load
    lo = 0.0
    hi = math.pi / 2.0 - spec.lead_angle - 1e-9
    if target <= _reflection_sum(lo, spec.lead_angle):
        if target < _reflection_sum(lo, spec.lead_angle) - 1e-12:
            flags.append("non-physical mu_c estimate clamped to 0")
            warnings.warn("fitted mu_c was negative; clamped to 0", stacklevel=3)
        return 0.0
    if target >= _reflection_sum(hi, spec.lead_angle):
        flags.append("mu_c estimate clamped at the driving-domain limit")
        return math.tan(hi)
    rho = brentq(
        lambda r: _reflection_sum(r, spec.lead_angle) - target, lo, hi,
        xtol=1e-15, rtol=8.9e-16,
    )
    return math.tan(rho)


def fit_friction(tv_map: TorqueVelocityMap, spec: TransmissionSpec,
                 test_load: float = 0.0, breakaway=None,
                 confidence: float = 0.95) -> FitReport:
    """
    Fit (mu_c, b_c, b_v) to a torque-velocity map recorded under a
    constant joint-side `test_load`, plus mu_s from optional breakaway
    samples [(direction, motor torque), ...]. Every present direction
    needs at least 3 distinct velocities.
    """
    pos = tv_map.direction(+1)
    neg = tv_map.direction(-1)
    if not pos and not neg:
        raise InsufficientDataError("map has no nonzero-velocity points")
    for pts, name in ((pos, "positive"), (neg, "negative")):
        if pts and len({p.velocity for p in pts}) < 3:
            raise RankDeficientError(
                f"{name} direction has fewer than 3 distinct velocities"
            )

    flags: list[str] = []
    pts = list(pos) + list(neg)
    w = np.array([p.velocity for p in pts])
    y = np.array([p.torque_mean for p in pts])
    wt = np.sqrt(np.array([p.count for p in pts], dtype=float))

    both = bool(pos) and bool(neg)
    if both:
        x = np.column_stack([(w > 0).astype(float), (w < 0).astype(float), w])
    else:
        x = np.column_stack([np.ones_like(w), w])
    xw = x * wt[:, None]
    yw = y * wt
    coef, *_ = np.linalg.lstsq(xw, yw, rcond=None)

    if both:
        a_pos, a_neg, b_v = (float(c) for c in coef)
        if test_load == 0.0:
            mu_c = 0.0
            b_c = 0.5 * (a_pos - a_neg)
            flags.append("mu_c not identifiable without a test load; set to 0")
        else:
            mu_c = _solve_mu_c(a_pos + a_neg, spec, test_load, flags)
            b_c = a_pos - _reflect_scalar(test_load, +1.0, spec, mu_c)
    else:
        s = 1.0 if pos else -1.0
        intercept, b_v = (float(c) for c in coef)
        mu_c = 0.0
        b_c = s * (intercept - test_load / spec.ratio)
        flags.append(
            "one-direction fit: mu_c not identifiable, assumed 0; "
            "b_c uses a frictionless load reflection"
        )

    if b_c < 0.0:
        flags.append("non-physical b_c estimate clamped to 0")
        warnings.warn("fitted b_c was negative; clamped to 0", stacklevel=2)
        b_c = 0.0
    if b_v < 0.0:
        flags.append("non-physical b_v estimate clamped to 0")
        warnings.warn("fitted b_v was negative; clamped to 0", stacklevel=2)
        b_v = 0.0

    mu_s = _fit_mu_s(breakaway, spec, test_load, mu_c, b_c, flags)
    params = FrictionParams(mu_s=mu_s, mu_c=mu_c, b_c=b_c, b_v=b_v)

    predicted = _predict_map_torque(params, spec, test_load, w)
    residual = _range_nrmsd(predicted, y, flags)
    by_dir = {}
    for name, mask in (("positive", w > 0), ("negative", w < 0)):
        if mask.any():
            by_dir[name] = _range_nrmsd(predicted[mask], y[mask], flags)

    half_widths = _half_widths(
        xw, yw, coef, both, spec, test_load, confidence, flags
    )
    return FitReport(params, residual, half_widths, by_dir, tuple(flags))


def _predict_map_torque(params, spec, test_load, w):
    sgn = np.sign(w)
    eta_d = efficiency(spec.lead_angle, params.mu_c, Direction.DRIVING)
    eta_o = efficiency(spec.lead_angle, params.mu_c, Direction.OVERHAULING)
    driving = test_load * sgn > 0.0
    reflected = np.where(
        driving, test_load / (spec.ratio * eta_d), test_load * eta_o / spec.ratio
    )
    return params.b_c * sgn + params.b_v * w + reflected


def _range_nrmsd(predicted, observed, flags):
    spread = float(observed.max() - observed.min())
    rms = float(np.sqrt(np.mean((predicted - observed) ** 2)))
    if spread < 1e-12:
        if "degenerate torque range in residual" not in flags:
            flags.append("degenerate torque range in residual")
        return 0.0 if rms < 1e-12 else math.inf
    return rms / spread


def _fit_mu_s(breakaway, spec, test_load, mu_c, b_c, flags):
    if not breakaway:
        flags.append("mu_s defaulted to mu_c (no breakaway samples)")
        return mu_c
    if test_load == 0.0:
        flags.append("mu_s not identifiable from breakaway without a test load")
        return mu_c
    hi = math.tan(math.pi / 2.0 - spec.lead_angle - 1e-9)
    estimates = []
    for direction, torque in breakaway:
        s = 1.0 if direction > 0 else -1.0

        def gap(mu, s=s, torque=torque):
            return b_c * s + _reflect_scalar(test_load, s, spec, mu) - torque

        g_lo, g_hi = gap(0.0), gap(hi)
        if g_lo == 0.0:
            estimates.append(0.0)
        elif g_lo * g_hi > 0.0:
            flags.append("breakaway sample outside the representable mu_s range")
        else:
            estimates.append(brentq(gap, 0.0, hi, xtol=1e-15, rtol=8.9e-16))
    if not estimates:
        flags.append("mu_s defaulted to mu_c (no usable breakaway samples)")
        return mu_c
    mu_s = float(np.mean(estimates))
    if mu_s < mu_c:
        flags.append("mu_s estimate below mu_c; clamped to mu_c")
        return mu_c
    return mu_s


def _half_widths(xw, yw, coef, both, spec, test_load, confidence, flags):
    n, k = xw.shape
    dof = n - k
    resid = yw - xw @ coef
    if dof <= 0:
        flags.append("no degrees of freedom for confidence intervals")
        sigma2 = 0.0
    else:
        sigma2 = float(resid @ resid) / dof
    cov_lin = sigma2 * np.linalg.inv(xw.T @ xw)

    if both and test_load != 0.0:
        def transform(c):
            scratch: list[str] = []
            mu = _solve_mu_c(c[0] + c[1], spec, test_load, scratch)
            bc = c[0] - _reflect_scalar(test_load, +1.0, spec, mu)
            return np.array([mu, bc, c[2]])

        jac = np.zeros((3, 3))
        for j in range(3):
            step = max(1e-8, 1e-6 * abs(coef[j]))
            up = coef.copy()
            dn = coef.copy()
            up[j] += step
            dn[j] -= step
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                jac[:, j] = (transform(up) - transform(dn)) / (2.0 * step)
        cov = jac @ cov_lin @ jac.T
        names = ("mu_c", "b_c", "b_v")
    elif both:
        # test_load == 0: mu_c pinned at 0, b_c = (A+ - A-)/2, b_v direct.
        jac = np.array([[0.0, 0.0, 0.0], [0.5, -0.5, 0.0], [0.0, 0.0, 1.0]])
        cov = jac @ cov_lin @ jac.T
        names = ("mu_c", "b_c", "b_v")
    else:
        jac = np.array([[1.0, 0.0], [0.0, 1.0]])
        cov = jac @ cov_lin @ jac.T
        names = ("b_c", "b_v")

    z = float(_norm.ppf(0.5 * (1.0 + confidence)))
    halves = {nm: z * math.sqrt(max(0.0, cov[i, i])) for i, nm in enumerate(names)}
    if "mu_c" not in halves:
        halves["mu_c"] = math.inf
    return halves


def evaluate_model(report: FitReport, spec: TransmissionSpec,
                   traj: dynamics.JointTrajectory,
                   measured: dynamics.TorqueTrace,
                   load_torque_fn=None) -> float:
    """NRMSD between the fitted model's torque prediction and a measured trace."""
    simulated = dynamics.inverse_dynamics(spec, report.params, load_torque_fn, traj)
    return dynamics.nrmsd(simulated, measured)


def save_fit_report(path, report: FitReport, spec: TransmissionSpec,
                    precision: int = 9) -> None:
    """
    Emit the fit as a transmission/friction config (feedable back to the
    dynamics loaders unchanged) with the fit diagnostics as comments.
    """
    ff = lambda x: configfile.format_float(x, precision)
    comments = [f"fit residual_nrmsd = {ff(report.residual)}"]
    for name, value in sorted(report.residuals_by_direction.items()):
        comments.append(f"fit residual_nrmsd_{name} = {ff(value)}")
    for name, value in sorted(report.half_widths.items()):
        comments.append(f"fit half_width_{name} = {ff(value)}")
    for flag in report.flags:
        comments.append(f"fit flag: {flag}")
    dynamics.save_transmission_config(
        path, spec, report.params, comments=comments, precision=precision
    )
