"""Stability interpretation of fitted pole-zero data.

Turns fitted models into verdicts: classifies poles against the imaginary
axis, pairs poles with nearby zeros (quasi-cancellations), quantifies each
conjugate pair's contribution per observation port (the residue factor),
prunes over-modeling artifacts through sub-band re-identification, and
ranks ports by their sensitivity to a critical resonance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import UsageError
from .freqresp import slice_band
from .ratfit import (FitConfig, PartialFractionModel, fit_common_denominator,
                     poles_and_zeros)

__all__ = [
    "ClassifiedPole",
    "QuasiCancellation",
    "RhoMatrix",
    "StabilityConfig",
    "StabilityVerdict",
    "classify_poles",
    "detect_quasi_cancellations",
    "rho_factor",
    "rho_matrix",
    "subband_consistency_check",
    "auto_identify",
    "rank_ports",
    "serialize_verdict",
]


@dataclass(frozen=True)
class ClassifiedPole:
    """A pole with its resonant frequency, damping ratio and stability class."""

    value: complex
    label: str  # 'stable' | 'unstable' | 'marginal'

    @property
    def resonant_freq_hz(self):
        return abs(self.value.imag) / (2.0 * np.pi)

    @property
    def damping(self):
        mag = abs(self.value)
        return -self.value.real / mag if mag > 0 else 0.0


@dataclass(frozen=True)
class QuasiCancellation:
    """A pole-zero pair closer than the detection threshold."""

    pole: complex
    zero: complex
    rel_distance: float
    origin: str = "undecided"  # | 'physical-low-sensitivity' | 'numerical-overmodeling'


@dataclass(frozen=True)
class RhoMatrix:
    """Residue factors per (port, conjugate-pair); real poles count as pairs."""

    values: np.ndarray  # (n_ports, n_pairs)
    pair_poles: tuple[complex, ...]  # representative pole per pair
    port_names: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.port_names), len(self.pair_poles)):
            raise ValueError("rho matrix shape mismatch")
        if np.any(v < 0) or np.any(np.isnan(v)):
            raise ValueError("rho entries must be nonnegative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        if not isinstance(other, RhoMatrix):
            return NotImplemented
        return (np.array_equal(self.values, other.values)
                and self.pair_poles == other.pair_poles
                and self.port_names == other.port_names)


@dataclass(frozen=True)
class StabilityConfig:
    """Pipeline thresholds; the defaults implement the tool's house rules.

    ``margin_tol_rel`` scales with the analyzed band (times max grid omega).
    The +2 order persistence window and the 2 % location tolerance are used
    both for order selection and for sub-band consistency checks.
    """

    rms_target: float = 1e-6
    rho_floor: float = 1e-4
    cancel_threshold: float = 0.05
    margin_tol_rel: float = 1e-6
    persist_rel_tol: float = 0.02
    subband_fractions: tuple[float, ...] = (1.0, 0.5, 0.25)
    iters: int = 12
    weight: str = "uniform"
    relaxed: bool = True

    def fit_config(self, order):
        return FitConfig(order=order, method="vf", iters=self.iters,
                         weight=self.weight, relaxed=self.relaxed)


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    critical_poles: tuple[ClassifiedPole, ...]
    cancellations: tuple[QuasiCancellation, ...]
    rho: RhoMatrix | None
    model: PartialFractionModel | None
    selected_order: int | None
    converged: bool
    order_scan: tuple[tuple[int, float], ...] = ()  # (order, rms)
    audit: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()
    margin_tol: float = 0.0


def classify_poles(poles, margin_tol):
    """Classify poles as stable/unstable/marginal, sorted by descending Re."""
    if margin_tol < 0:
        raise UsageError("margin_tol must be >= 0")
    out = []
    for p in poles:
        p = complex(p)
        if abs(p.real) <= margin_tol:
            label = "marginal"
        elif p.real > 0:
            label = "unstable"
        else:
            label = "stable"
        out.append(ClassifiedPole(p, label))
    out.sort(key=lambda cp: (-cp.value.real, cp.value.imag))
    return out


def detect_quasi_cancellations(poles, zeros, threshold, omega_floor=None):
    """Optimally pair poles with zeros and report the close pairs.

    The pairing minimizes total |p - z| over one-to-one assignments (greedy
    nearest-neighbor misbinds when loci curve toward each other).
    rel_distance divides by max(|p|, omega_floor); the floor keeps pairs
    near the origin from blowing up the ratio.
    """
    if not 0.0 < threshold < 1.0:
        raise UsageError("threshold must be in (0, 1)")
    poles = np.asarray(poles, dtype=complex)
    zeros = np.asarray(zeros, dtype=complex)
    if poles.size == 0 or zeros.size == 0:
        return []
    if omega_floor is None:
        omega_floor = 1e-9 * float(np.max(np.abs(np.concatenate([poles, zeros]))))
    cost = np.abs(poles[:, None] - zeros[None, :])
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    found = []
    for i, j in zip(rows, cols):
        rel = cost[i, j] / max(abs(poles[i]), omega_floor)
        if rel <= threshold:
            found.append(QuasiCancellation(complex(poles[i]), complex(zeros[j]), float(rel)))
    found.sort(key=lambda qc: qc.rel_distance)
    return found


_RHO_GUARD = 1e-300


def _pair_contribution(model, port_idx, pair, s):
    r = model.residues[port_idx, list(pair.indices)]
    p = model.poles[list(pair.indices)]
    if np.any(np.abs(s - p) < _RHO_GUARD):
        return complex(np.inf, 0.0)
    return complex(np.sum(r / (s - p)))


def rho_factor(model, port, pair):
    """Residue factor: a conjugate pair's share of the response at resonance.

    rho = |H_pair(j w_r)| / |H_rest(j w_r)| with w_r the pair's resonant
    frequency (0 for a real pole) and H_rest the remaining terms plus the
    direct term, summed directly to avoid cancellation.  Returns +inf when
    the pair is essentially the whole response.
    """
    k = model.port_index(port)
    pairs = model.pole_pairs()
    if isinstance(pair, int):
        pair = pairs[pair]
    s = 1j * pair.resonant_omega
    num = abs(_pair_contribution(model, k, pair, s))
    if not np.isfinite(num):
        return float("inf")  # pair resonates exactly on the axis
    rest = complex(model.direct[k])
    for other in pairs:
        if other.indices != pair.indices:
            rest += _pair_contribution(model, k, other, s)
    den = abs(rest)
    if not np.isfinite(den):
        return 0.0  # some other pair dominates this frequency completely
    if den < _RHO_GUARD:
        return float("inf")
    return num / den


def rho_matrix(model):
    """Residue factors for every (port, pair) of a partial-fraction model."""
    pairs = model.pole_pairs()
    vals = np.empty((model.n_ports, len(pairs)))
    for n in range(model.n_ports):
        for k, pair in enumerate(pairs):
            vals[n, k] = rho_factor(model, n, pair)
    return RhoMatrix(vals, tuple(p.pole for p in pairs), model.port_names)


def rank_ports(verdict, pair_index):
    """Ports ordered by descending rho for one pair; ties keep declaration order."""
    rho = verdict.rho
    if rho is None or not 0 <= pair_index < len(rho.pair_poles):
        raise UsageError(f"no pair {pair_index} in the verdict")
    col = rho.values[:, pair_index]
    order = sorted(range(len(rho.port_names)), key=lambda i: (-col[i], i))
    return [(rho.port_names[i], float(col[i])) for i in order]


# ---------------------------------------------------------------------------
# order selection and over-modeling pruning

def _rel_dist(a, b, floor):
    return abs(a - b) / max(abs(b), floor)


def _poles_persist(poles_a, poles_b, tol, floor):
    """True if every pole in a has a mate in b within relative tolerance."""
    for p in poles_a:
        if poles_b.size == 0:
            return poles_a.size == 0
        if np.min(np.abs(poles_b - p)) / max(abs(p), floor) > tol:
            return False
    return True


def _scan_orders(resps, orders, cfg):
    """Fit ascending orders; pick the smallest meeting the rms target whose
    poles persist at order+2.  Returns (model, report, order, scan, ok)."""
    orders = [int(n) for n in orders]
    if not orders or any(b <= a for a, b in zip(orders, orders[1:])):
        raise UsageError("orders must be a nonempty ascending sequence")
    floor = 1e-9 * float(np.max(resps.grid.omega))
    fits = {}

    def fit_at(n):
        if n not in fits:
            fits[n] = fit_common_denominator(resps, cfg.fit_config(n))
        return fits[n]

    scan = []
    best = None
    chosen = None
    for n in orders:
        model, report = fit_at(n)
        scan.append((n, report.rms_rel_error))
        if best is None or report.rms_rel_error < best[1].rms_rel_error:
            best = (model, report, n)
        if report.rms_rel_error <= cfg.rms_target:
            model2, _ = fit_at(n + 2)
            if _poles_persist(model.poles, model2.poles, cfg.persist_rel_tol, floor):
                chosen = (model, report, n)
                break
    if chosen is not None:
        model, report, n = chosen
        return model, report, n, tuple(scan), True
    model, report, n = best
    return model, report, n, tuple(scan), False


def subband_consistency_check(resps, suspect, widths_hz, orders, cfg=StabilityConfig()):
    """Re-identify in sub-bands centered on a suspect pole's resonance.

    Physical poles reappear at the same location whatever the bandwidth;
    over-modeling artifacts drift.  Returns 'physical' only if the suspect
    is found within the location tolerance in every sub-band.
    """
    suspect = complex(suspect)
    f_r = abs(suspect.imag) / (2.0 * np.pi)
    g = resps.grid
    if not g.f_lo <= f_r <= g.f_hi:
        raise UsageError(
            f"suspect resonant frequency {f_r} Hz lies outside the grid "
            f"[{g.f_lo}, {g.f_hi}] Hz")
    floor = 1e-9 * float(np.max(g.omega))
    for width in widths_hz:
        lo = max(f_r - width / 2.0, g.f_lo)
        hi = min(f_r + width / 2.0, g.f_hi)
        try:
            sub = slice_band(resps, lo, hi)
        except ValueError as exc:
            raise UsageError(f"sub-band of width {width} Hz is too narrow: {exc}") from None
        usable = [n for n in orders if len(sub.grid) >= n + 1]
        if not usable:
            raise UsageError(f"sub-band of width {width} Hz is too narrow for any fit")
        model, _, _, _, _ = _scan_orders(sub, usable, cfg)
        if model.poles.size == 0:
            return "numerical"
        if np.min(np.abs(model.poles - suspect)) / max(abs(suspect), floor) \
                > cfg.persist_rel_tol:
            return "numerical"
    return "physical"


def auto_identify(resps, orders, cfg=StabilityConfig()):
    """Full pipeline: order scan, rho analysis, over-modeling pruning, verdict.

    RHP pairs whose best rho over all ports falls below the floor are
    routed to sub-band consistency checking; artifacts classified numerical
    are pruned before the stability verdict is read off the pole map.
    """
    model, report, order, scan, converged = _scan_orders(resps, orders, cfg)
    margin_tol = cfg.margin_tol_rel * float(np.max(resps.grid.omega))
    rho = rho_matrix(model)
    pairs = model.pole_pairs()
    band = resps.grid.f_hi - resps.grid.f_lo
    widths = tuple(frac * band for frac in cfg.subband_fractions)

    audit = []
    notes = []
    if not converged:
        notes.append(f"no order in {scan[0][0]}..{scan[-1][0]} passed the "
                     f"selection rule (rms <= {cfg.rms_target} plus pole "
                     f"persistence); best attempt order {order}")

    pruned = set()
    for k, pair in enumerate(pairs):
        rep = pair.pole
        if rep.real <= margin_tol:
            continue
        max_rho = float(np.max(rho.values[:, k]))
        if max_rho >= cfg.rho_floor:
            audit.append(f"pair {k} at {rep:.6g}: rho {max_rho:.3g} >= floor, kept")
            continue
        f_r = abs(rep.imag) / (2.0 * np.pi)
        if not resps.grid.f_lo <= f_r <= resps.grid.f_hi:
            audit.append(f"pair {k} at {rep:.6g}: resonance outside grid, kept unverified")
            continue
        origin = subband_consistency_check(resps, rep, widths, orders, cfg)
        tested = ", ".join(f"{w:.4g} Hz" for w in widths)
        audit.append(f"pair {k} at {rep:.6g}: rho {max_rho:.3g} < floor, "
                     f"re-identified in sub-bands of width {tested} -> {origin}")
        if origin == "numerical":
            pruned.add(k)

    kept_poles = []
    for k, pair in enumerate(pairs):
        if k not in pruned:
            kept_poles.extend(model.poles[list(pair.indices)])
    classified = classify_poles(kept_poles, margin_tol)
    critical = tuple(cp for cp in classified if cp.label == "unstable")

    cancellations = []
    floor = 1e-9 * float(np.max(resps.grid.omega))
    for name in model.port_names:
        _, zeros = poles_and_zeros(model, name)
        for qc in detect_quasi_cancellations(model.poles, zeros,
                                             cfg.cancel_threshold, floor):
            origin = "undecided"
            for k, pair in enumerate(pairs):
                if np.min(np.abs(model.poles[list(pair.indices)] - qc.pole)) == 0.0:
                    if k in pruned:
                        origin = "numerical-overmodeling"
                    elif pair.pole.real > margin_tol:
                        origin = "physical-low-sensitivity"
                    break
            cancellations.append(QuasiCancellation(qc.pole, qc.zero, qc.rel_distance, origin))
    cancellations.sort(key=lambda qc: (qc.rel_distance, qc.pole.real, qc.pole.imag))

    return StabilityVerdict(
        stable=not critical,
        critical_poles=critical,
        cancellations=tuple(cancellations),
        rho=rho,
        model=model,
        selected_order=order,
        converged=converged,
        order_scan=scan,
        audit=tuple(audit),
        notes=tuple(notes),
        margin_tol=margin_tol,
    )


def serialize_verdict(verdict):
    """Machine-readable report: poles, cancellation table, rho matrix,
    order-scan trace and the pruning audit log."""
    def c2p(z):
        return [float(z.real), float(z.imag)]

    doc = {
        "schema": 1,
        "stable": verdict.stable,
        "converged": verdict.converged,
        "selected_order": verdict.selected_order,
        "margin_tol_rad_s": verdict.margin_tol,
        "critical_poles": [
            {"rad_s": c2p(cp.value), "freq_hz": cp.resonant_freq_hz,
             "damping": cp.damping, "class": cp.label}
            for cp in verdict.critical_poles],
        "cancellations": [
            {"pole": c2p(qc.pole), "zero": c2p(qc.zero),
             "rel_distance": qc.rel_distance, "origin": qc.origin}
            for qc in verdict.cancellations],
        "order_scan": [{"order": n, "rms_rel_error": e} for n, e in verdict.order_scan],
        "audit": list(verdict.audit),
        "notes": list(verdict.notes),
    }
    if verdict.rho is not None:
        doc["rho"] = {
            "ports": list(verdict.rho.port_names),
            "pair_poles": [c2p(p) for p in verdict.rho.pair_poles],
            "values": [[v if np.isfinite(v) else repr(float(v)) for v in map(float, row)]
                       for row in verdict.rho.values],
        }
    if verdict.model is not None:
        doc["poles"] = [
            {"rad_s": c2p(cp.value), "freq_hz": cp.resonant_freq_hz,
             "damping": cp.damping, "class": cp.label}
            for cp in classify_poles(verdict.model.poles, verdict.margin_tol)]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
