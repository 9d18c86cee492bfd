"""Rational-model fitting of sampled frequency responses.

Two engines share the task of turning samples H(jw) into pole-zero data:

* a polynomial-ratio fitter (numerator/denominator coefficients) using the
  Levy linearization with Sanathanan-Koerner reweighting, solved as the
  unit-norm null direction of the stacked real system; and
* a partial-fraction vector-fitting engine that relocates a common pole set
  shared by all ports, then solves per-port residues and direct terms.

Neither engine enforces model stability: right-half-plane poles are kept
exactly where the data puts them, which is the whole point when the fitted
poles are read as a stability verdict.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, UsageError

__all__ = [
    "PolynomialRatioModel",
    "PartialFractionModel",
    "PolePair",
    "FitConfig",
    "FitReport",
    "RankDeficiencyError",
    "fit_polynomial_ratio",
    "fit_common_denominator",
    "poles_and_zeros",
    "evaluate_model",
    "fit_error",
    "save_model",
    "load_model",
]


class RankDeficiencyError(NumericError):
    """The fit system has no unique solution (order too high for the data)."""


@dataclass(frozen=True)
class FitConfig:
    """Knobs shared by both fitting engines.

    ``iters`` bounds the Sanathanan-Koerner reweighting or vector-fitting
    pole-relocation loop.  ``relaxed`` selects the relaxed nontriviality
    constraint for pole relocation; the classic fixed-unity constraint is
    the fallback.  ``phase_tol_deg`` is a reporting target only, never an
    optimization goal (chasing tight phase goals just fits the noise).
    """

    order: int
    method: str = "vf"
    iters: int = 12
    weight: str = "uniform"
    phase_tol_deg: float = 1.0
    relaxed: bool = True

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")
        if self.method not in ("poly", "vf"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 1 <= self.iters <= 100:
            raise ValueError("iters must be in 1..100")
        if self.weight not in ("uniform", "inverse-magnitude"):
            raise ValueError(f"unknown weight {self.weight!r}")


@dataclass(frozen=True)
class FitReport:
    rms_rel_error: float
    max_phase_err_deg: float
    iters_used: int
    converged: bool

    def __post_init__(self):
        if self.rms_rel_error < 0 or self.max_phase_err_deg < 0:
            raise ValueError("error metrics must be nonnegative")


def _readonly(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PolynomialRatioModel:
    """H(s) = A(s/s_scale)/B(s/s_scale) with real, jointly unit-norm coefficients.

    Coefficients are ascending in powers of the normalized variable;
    ``s_scale`` (rad/s) is the normalization used during fitting.
    """

    num_coeffs: np.ndarray
    den_coeffs: np.ndarray
    s_scale: float

    def __post_init__(self):
        a = np.asarray(self.num_coeffs, dtype=float)
        b = np.asarray(self.den_coeffs, dtype=float)
        if a.ndim != 1 or b.ndim != 1 or a.size == 0 or b.size == 0:
            raise ValueError("coefficient vectors must be nonempty 1-D")
        if not np.any(b):
            raise ValueError("denominator coefficients are all zero")
        if not (math.isfinite(self.s_scale) and self.s_scale > 0):
            raise ValueError("s_scale must be positive and finite")
        joint = math.hypot(np.linalg.norm(a), np.linalg.norm(b))
        a, b = a / joint, b / joint
        # deterministic sign: largest-magnitude joint coefficient positive
        stacked = np.concatenate([a, b])
        if stacked[int(np.argmax(np.abs(stacked)))] < 0:
            a, b = -a, -b
        object.__setattr__(self, "num_coeffs", _readonly(a))
        object.__setattr__(self, "den_coeffs", _readonly(b))

    def __eq__(self, other):
        if not isinstance(other, PolynomialRatioModel):
            return NotImplemented
        return (np.array_equal(self.num_coeffs, other.num_coeffs)
                and np.array_equal(self.den_coeffs, other.den_coeffs)
                and self.s_scale == other.s_scale)

    @property
    def order(self):
        return self.den_coeffs.size - 1


@dataclass(frozen=True)
class PolePair:
    """One conjugate pair (indices i, i+1) or one real pole (single index)."""

    indices: tuple[int, ...]
    pole: complex  # representative, Im >= 0

    @property
    def is_real(self):
        return len(self.indices) == 1

    @property
    def resonant_omega(self):
        """Resonant frequency |Im p| in rad/s; 0 for a real pole."""
        return abs(self.pole.imag)


@dataclass(frozen=True)
class PartialFractionModel:
    """H_n(s) = sum_k r_{n,k}/(s - p_k) + D_n with a pole set shared by all ports.

    Poles are closed under conjugation with exactly conjugate residues, so
    evaluation on conjugate-symmetric grids yields conjugate values and the
    impulse response is real.  Canonical storage: real poles first
    (ascending), then conjugate pairs (positive-imag member first).
    """

    poles: np.ndarray
    residues: np.ndarray
    direct: np.ndarray
    port_names: tuple[str, ...] = ()

    def __post_init__(self):
        p = np.asarray(self.poles, dtype=complex).reshape(-1)
        r = np.atleast_2d(np.asarray(self.residues, dtype=complex))
        d = np.asarray(self.direct, dtype=float).reshape(-1)
        if r.shape != (d.size, p.size):
            raise ValueError(f"residues shape {r.shape} != (n_ports={d.size}, n_poles={p.size})")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(r)) and np.all(np.isfinite(d))):
            raise ValueError("model parameters must be finite")
        names = tuple(self.port_names) or tuple(f"p{i + 1}" for i in range(d.size))
        if len(names) != d.size:
            raise ValueError("port_names length does not match direct terms")
        p, r = _canonical_pf(p, r)
        object.__setattr__(self, "poles", _readonly(p))
        object.__setattr__(self, "residues", _readonly(r))
        object.__setattr__(self, "direct", _readonly(d))
        object.__setattr__(self, "port_names", names)

    def __eq__(self, other):
        if not isinstance(other, PartialFractionModel):
            return NotImplemented
        return (np.array_equal(self.poles, other.poles)
                and np.array_equal(self.residues, other.residues)
                and np.array_equal(self.direct, other.direct)
                and self.port_names == other.port_names)

    @property
    def order(self):
        return self.poles.size

    @property
    def n_ports(self):
        return self.direct.size

    def port_index(self, port):
        if isinstance(port, str):
            try:
                return self.port_names.index(port)
            except ValueError:
                raise KeyError(f"no port named {port!r}") from None
        return int(port)

    def pole_pairs(self):
        """Real poles as singleton groups, then conjugate pairs."""
        pairs = []
        i = 0
        while i < self.poles.size:
            if self.poles[i].imag == 0.0:
                pairs.append(PolePair((i,), self.poles[i]))
                i += 1
            else:
                pairs.append(PolePair((i, i + 1), self.poles[i]))
                i += 2
        return tuple(pairs)


def _canonical_pf(poles, residues):
    """Validate conjugate closure and reorder into canonical form."""
    n = poles.size
    used = np.zeros(n, dtype=bool)
    reals, pairs = [], []
    for i in range(n):
        if used[i]:
            continue
        p = poles[i]
        if p.imag == 0.0:
            if np.any(residues[:, i].imag != 0.0):
                raise ValueError(f"real pole {p} has a complex residue")
            reals.append(i)
            used[i] = True
            continue
        mates = np.nonzero(~used & (poles == np.conj(p)))[0]
        mates = mates[mates != i]
        if mates.size == 0:
            raise ValueError(f"pole {p} has no exact conjugate mate")
        j = int(mates[0])
        if not np.array_equal(residues[:, j], np.conj(residues[:, i])):
            raise ValueError(f"residues at conjugate poles {p}, {np.conj(p)} are not conjugate")
        used[i] = used[j] = True
        pairs.append(i if p.imag > 0 else j)
    reals.sort(key=lambda i: poles[i].real)
    pairs.sort(key=lambda i: (poles[i].imag, poles[i].real))
    order = list(reals)
    for i in pairs:
        order.append(i)
        order.append(int(np.nonzero(poles == np.conj(poles[i]))[0][0]))
    new_p = poles[order].copy()
    new_r = residues[:, order].copy()
    # rebuild exact conjugates from the representatives
    k = len(reals)
    while k < n:
        new_p[k + 1] = np.conj(new_p[k])
        new_r[:, k + 1] = np.conj(new_r[:, k])
        k += 2
    return new_p, new_r


# ---------------------------------------------------------------------------
# evaluation and error metrics

_POLE_GUARD = 1e-300


def _eval_pf(model, port_idx, s):
    s = np.asarray(s, dtype=complex)
    delta = s[..., None] - model.poles
    if np.any(np.abs(delta) < _POLE_GUARD):
        raise NumericError("evaluation at a pole frequency")
    return np.sum(model.residues[port_idx] / delta, axis=-1) + model.direct[port_idx]


def _eval_poly(model, s_raw):
    sp = np.asarray(s_raw, dtype=complex) / model.s_scale
    num = np.polynomial.polynomial.polyval(sp, model.num_coeffs)
    den = np.polynomial.polynomial.polyval(sp, model.den_coeffs)
    if np.any(np.abs(den) < _POLE_GUARD):
        raise NumericError("evaluation at a pole frequency")
    return num / den


def evaluate_model(model, grid, port=None):
    """Evaluate a fitted model at s = j*2*pi*f over a grid.

    Partial-fraction models are evaluated term by term (never expanded) to
    preserve conditioning; ``port`` picks the response of a MIMO model and
    may be omitted for single-port models.
    """
    s = 1j * grid.omega
    if isinstance(model, PolynomialRatioModel):
        return _eval_poly(model, s)
    if port is None:
        if model.n_ports != 1:
            raise UsageError("MIMO model: name the port to evaluate")
        port = 0
    return _eval_pf(model, model.port_index(port), s)


def _wrapped_phase_deg(h_fit, h_ref):
    ratio_phase = np.angle(h_fit * np.conj(h_ref))
    return np.degrees(np.abs(ratio_phase))


def fit_error(model, resp):
    """RMS relative error and worst wrapped phase error of a model vs data.

    The RMS is over all ports and samples, each port normalized by its own
    peak magnitude.
    """
    rel_sq = []
    phase = []
    if isinstance(model, PolynomialRatioModel):
        if resp.n_ports != 1:
            raise UsageError("polynomial model is single-port")
        columns = [(0, resp.values[0])]
        fits = [_eval_poly(model, 1j * resp.grid.omega)]
    else:
        columns = []
        fits = []
        s = 1j * resp.grid.omega
        for i, p in enumerate(resp.ports):
            columns.append((i, resp.values[i]))
            fits.append(_eval_pf(model, model.port_index(p.name), s))
    for (_, h), h_fit in zip(columns, fits):
        scale = float(np.max(np.abs(h)))
        if scale == 0.0:
            scale = 1.0
        rel_sq.append(np.abs(h_fit - h) ** 2 / scale**2)
        phase.append(_wrapped_phase_deg(h_fit, h))
    rms = float(np.sqrt(np.mean(np.concatenate(rel_sq))))
    return FitReport(rms_rel_error=rms,
                     max_phase_err_deg=float(np.max(np.concatenate(phase))),
                     iters_used=0, converged=True)


def _base_weights(values, mode):
    if mode == "uniform":
        return [np.ones(v.size) for v in values]
    out = []
    for v in values:
        mag = np.abs(v)
        floor = 1e-12 * (np.max(mag) if np.max(mag) > 0 else 1.0)
        out.append(1.0 / np.maximum(mag, floor))
    return out


# ---------------------------------------------------------------------------
# polynomial-ratio fitting (Levy / Sanathanan-Koerner)

def fit_polynomial_ratio(resp, cfg):
    """Fit one response to a ratio of degree-N polynomials.

    Minimizes the linearized residual |A(jw) - H(jw) B(jw)| with iterative
    1/|B_prev| reweighting; real and imaginary parts are stacked as separate
    rows so the coefficients come out real, and the solution is the smallest
    singular direction of the stacked system (unit joint norm).  RHP poles
    are returned as fitted.
    """
    if cfg.method != "poly":
        raise UsageError("fit_polynomial_ratio requires cfg.method == 'poly'")
    if resp.n_ports != 1:
        raise UsageError("fit_polynomial_ratio takes a single-port response")
    n = cfg.order
    h = resp.values[0]
    m = h.size
    if m < 2 * (n + 1):
        raise UsageError(f"order {n} needs at least {2 * (n + 1)} grid points, got {m}")
    omega = resp.grid.omega
    s_scale = float(omega[-1])
    sp = 1j * omega / s_scale
    powers = sp[:, None] ** np.arange(n + 1)
    base_w = _base_weights([h], cfg.weight)[0]

    b_prev = np.ones(m)
    best = None
    x_prev = None
    converged = False
    iters_used = 0
    for it in range(cfg.iters):
        iters_used = it + 1
        w = base_w / b_prev
        rows = np.hstack([powers, -h[:, None] * powers]) * w[:, None]
        mat = np.vstack([rows.real, rows.imag])
        col_scale = np.linalg.norm(mat, axis=0)
        col_scale[col_scale == 0.0] = 1.0
        try:
            _, svals, vh = np.linalg.svd(mat / col_scale, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"SVD failed during polynomial fit: {exc}") from None
        # an ambiguous null space (two smallest singular values both at null
        # level and comparable) means the order is too high at the current
        # weighting.  Reweighting often repairs a borderline first pass, so
        # keep iterating while no clean iterate exists; once one does, a
        # degenerating system just ends the loop.
        noise_floor = 200.0 * np.finfo(float).eps * svals[0]
        deficient = (svals[-2] < 1e-12 * svals[0]
                     and svals[-2] < max(30.0 * svals[-1], noise_floor))
        if deficient and best is not None:
            break
        x = vh[-1] / col_scale
        x = x / np.linalg.norm(x)
        if x[int(np.argmax(np.abs(x)))] < 0:
            x = -x
        a_c, b_c = x[:n + 1], x[n + 1:]
        den = powers @ b_c
        num = powers @ a_c
        scale = np.max(np.abs(h))
        with np.errstate(divide="ignore", invalid="ignore"):
            h_fit = num / den
        resid = np.where(np.isfinite(h_fit), np.abs(h_fit - h), np.inf)
        rms = float(np.sqrt(np.mean((resid / scale) ** 2)))
        if not deficient and (best is None or rms < best[0]):
            best = (rms, a_c, b_c, iters_used)
        if not deficient and x_prev is not None and np.linalg.norm(x - x_prev) < 1e-14:
            converged = True
            break
        x_prev = x
        mag = np.abs(den)
        b_prev = np.maximum(mag, 1e-12 * np.max(mag))

    if best is None:
        raise RankDeficiencyError(
            f"order {n} is too high for the data (ambiguous null space)")
    _, a_c, b_c, _ = best
    model = PolynomialRatioModel(a_c, b_c, s_scale)
    err = fit_error(model, resp)
    report = FitReport(err.rms_rel_error, err.max_phase_err_deg, iters_used, converged)
    return model, report


# ---------------------------------------------------------------------------
# vector fitting with a common denominator

def _initial_poles(n, w_lo, w_hi):
    """N/2 conjugate pairs spaced linearly over the band, Re = -Im/100;
    odd orders add one real pole at the band center."""
    w_lo = max(w_lo, 1e-3 * w_hi)
    poles = []
    if n % 2:
        poles.append(complex(-0.5 * (w_lo + w_hi), 0.0))
    n_pairs = n // 2
    if n_pairs:
        betas = np.linspace(w_lo, w_hi, n_pairs) if n_pairs > 1 else [0.5 * (w_lo + w_hi)]
        for b in betas:
            poles.append(complex(-b / 100.0, b))
            poles.append(complex(-b / 100.0, -b))
    return np.asarray(poles, dtype=complex)


def _pair_layout(poles):
    """Indices of real poles and of pair representatives (Im > 0 member)."""
    reals, reps = [], []
    i = 0
    while i < poles.size:
        if poles[i].imag == 0.0:
            reals.append(i)
            i += 1
        else:
            reps.append(i)
            i += 2
    return reals, reps


def _pf_basis(poles, s):
    """Real-coefficient partial-fraction basis columns at sample points."""
    reals, reps = _pair_layout(poles)
    phi = np.empty((s.size, poles.size), dtype=complex)
    col = 0
    for i in reals:
        phi[:, col] = 1.0 / (s - poles[i])
        col += 1
    for i in reps:
        u = 1.0 / (s - poles[i])
        v = 1.0 / (s - np.conj(poles[i]))
        phi[:, col] = u + v
        phi[:, col + 1] = 1j * (u - v)
        col += 2
    return phi


def _coeffs_to_residues(poles, x):
    """Map real solution coefficients back to complex residues per pole."""
    reals, reps = _pair_layout(poles)
    r = np.empty(poles.size, dtype=complex)
    col = 0
    for i in reals:
        r[i] = x[col]
        col += 1
    for i in reps:
        r[i] = x[col] + 1j * x[col + 1]
        r[i + 1] = np.conj(r[i])
        col += 2
    return r


def _canonical_from_eigs(lam):
    """Group eigenvalues of a real matrix into reals + exact conjugate pairs."""
    reals = sorted(float(v.real) for v in lam[lam.imag == 0.0])
    reps = sorted((complex(v) for v in lam[lam.imag > 0.0]), key=lambda p: (p.imag, p.real))
    out = [complex(v, 0.0) for v in reals]
    for p in reps:
        out.append(p)
        out.append(np.conj(p))
    return np.asarray(out, dtype=complex)


def _relocate_poles(poles, s, f_mat, base_w, relaxed):
    """One pole-relocation step; returns the new pole set (never flipped)."""
    n = poles.size
    nc, m = f_mat.shape
    phi = _pf_basis(poles, s)
    phi1 = np.hstack([phi, np.ones((m, 1))])
    blocks = []
    rhs_blocks = []
    for kport in range(nc):
        w = base_w[kport]
        if relaxed:
            a = np.hstack([phi1, -f_mat[kport][:, None] * phi1]) * w[:, None]
            a_ri = np.vstack([a.real, a.imag])
            r = np.linalg.qr(a_ri, mode="r")
            blocks.append(r[n + 1:, n + 1:])
            rhs_blocks.append(np.zeros(n + 1))
        else:
            a = np.hstack([phi1, -f_mat[kport][:, None] * phi]) * w[:, None]
            a_ri = np.vstack([a.real, a.imag])
            b_ri = np.concatenate([(w * f_mat[kport]).real, (w * f_mat[kport]).imag])
            q, r = np.linalg.qr(a_ri, mode="reduced")
            blocks.append(r[n + 1:, n + 1:])
            rhs_blocks.append(q[:, n + 1:].T @ b_ri)
    aa = np.vstack(blocks)
    bb = np.concatenate(rhs_blocks)
    if relaxed:
        scale = float(np.linalg.norm([np.linalg.norm(w * f) for w, f in zip(base_w, f_mat)])) / m
        relax_row = np.empty(n + 1)
        relax_row[:n] = np.sum(phi.real, axis=0)
        relax_row[n] = m
        aa = np.vstack([aa, scale * relax_row])
        bb = np.concatenate([bb, [scale * m]])
    col_scale = np.linalg.norm(aa, axis=0)
    col_scale[col_scale == 0.0] = 1.0
    x, *_ = np.linalg.lstsq(aa / col_scale, bb, rcond=None)
    x = x / col_scale
    if relaxed:
        c_sigma, d_sigma = x[:n], float(x[n])
        if abs(d_sigma) < 1e-8:
            d_sigma = 1e-8 if d_sigma >= 0 else -1e-8
    else:
        c_sigma, d_sigma = x, 1.0

    # zeros of sigma: eigenvalues of the pole matrix minus the rank-one
    # update, in real block form for conjugate pairs
    reals, reps = _pair_layout(poles)
    hmat = np.zeros((n, n))
    bvec = np.zeros(n)
    col = 0
    for i in reals:
        hmat[col, col] = poles[i].real
        bvec[col] = 1.0
        col += 1
    for i in reps:
        sig, beta = poles[i].real, poles[i].imag
        hmat[col, col] = sig
        hmat[col, col + 1] = beta
        hmat[col + 1, col] = -beta
        hmat[col + 1, col + 1] = sig
        bvec[col] = 2.0
        col += 2
    hmat -= np.outer(bvec, c_sigma) / d_sigma
    try:
        lam = np.linalg.eigvals(hmat)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"defective relocation eigenproblem: {exc}") from None
    return _canonical_from_eigs(lam)


def fit_common_denominator(resps, cfg):
    """Vector-fit all ports of a response set against one shared pole set.

    Initial poles are conjugate pairs spread over the band; each iteration
    relocates them to the zeros of the fitted scaling function (relaxed
    nontriviality constraint by default).  Final residues and one real
    direct term per port are solved against the fixed relocated poles.
    Unstable poles are preserved at every stage.
    """
    if cfg.method != "vf":
        raise UsageError("fit_common_denominator requires cfg.method == 'vf'")
    n = cfg.order
    m = len(resps.grid)
    if 2 * m < 2 * (n + 1):
        raise UsageError(f"order {n} exceeds the point budget of {m} samples")
    omega = resps.grid.omega
    w_scale = float(omega[-1])
    s = 1j * omega / w_scale
    f_mat = resps.to_matrix()
    base_w = _base_weights(list(f_mat), cfg.weight)

    converged = False
    iters_used = 0
    if n == 0:
        poles = np.zeros(0, dtype=complex)
        converged = True
    else:
        poles = _initial_poles(n, float(omega[0]) / w_scale, float(omega[-1]) / w_scale)
        for it in range(cfg.iters):
            iters_used = it + 1
            new_poles = _relocate_poles(poles, s, f_mat, base_w, cfg.relaxed)
            move = np.max(np.abs(np.sort_complex(new_poles) - np.sort_complex(poles))) \
                if new_poles.size == poles.size else np.inf
            poles = new_poles
            if move < 1e-10 * max(1.0, float(np.max(np.abs(poles)))):
                converged = True
                break

    # residues per port against the fixed poles
    phi = _pf_basis(poles, s)
    phi1 = np.hstack([phi, np.ones((m, 1))])
    residues = np.empty((f_mat.shape[0], n), dtype=complex)
    direct = np.empty(f_mat.shape[0])
    for kport in range(f_mat.shape[0]):
        w = base_w[kport]
        a = phi1 * w[:, None]
        a_ri = np.vstack([a.real, a.imag])
        b_ri = np.concatenate([(w * f_mat[kport]).real, (w * f_mat[kport]).imag])
        x, *_ = np.linalg.lstsq(a_ri, b_ri, rcond=None)
        residues[kport] = _coeffs_to_residues(poles, x[:n])
        direct[kport] = x[n]

    model = PartialFractionModel(poles * w_scale, residues * w_scale, direct,
                                 resps.port_names)
    err = fit_error(model, resps)
    report = FitReport(err.rms_rel_error, err.max_phase_err_deg, iters_used, converged)
    return model, report


# ---------------------------------------------------------------------------
# pole / zero extraction

_COEFF_TRIM = 1e-13


def _trimmed_roots(coeffs):
    c = np.asarray(coeffs, dtype=float)
    keep = np.abs(c) > _COEFF_TRIM * np.max(np.abs(c))
    deg = int(np.nonzero(keep)[0][-1]) if np.any(keep) else -1
    if deg < 0:
        return None
    return np.roots(c[:deg + 1][::-1])


def _sorted_c(vals):
    vals = np.asarray(vals, dtype=complex)
    return vals[np.lexsort((vals.imag, vals.real))]


def poles_and_zeros(model, port=None):
    """Extract (poles, zeros) from a fitted model.

    For polynomial models both sets are companion-matrix eigenvalues of the
    de-normalized coefficient polynomials.  For partial-fraction models the
    poles are stored; zeros come from the single-port state-space
    realization when the direct term is significant, else from the roots of
    the expanded numerator.
    """
    if isinstance(model, PolynomialRatioModel):
        poles = _trimmed_roots(model.den_coeffs)
        if poles is None:
            raise NumericError("zero denominator polynomial")
        zeros = _trimmed_roots(model.num_coeffs)
        zeros = np.zeros(0, dtype=complex) if zeros is None else zeros
        return _sorted_c(poles * model.s_scale), _sorted_c(zeros * model.s_scale)

    if port is None:
        if model.n_ports != 1:
            raise UsageError("MIMO model: name the port whose zeros you want")
        port = 0
    k = model.port_index(port)
    poles = model.poles
    r = model.residues[k]
    d = float(model.direct[k])
    if poles.size == 0:
        return poles.copy(), np.zeros(0, dtype=complex)
    if abs(d) > 1e-12 * float(np.max(np.abs(r)) if r.size else 0.0):
        # zeros = eig(A - B D^-1 C) on the real block-diagonal realization
        reals, reps = _pair_layout(poles)
        nn = poles.size
        amat = np.zeros((nn, nn))
        bvec = np.zeros(nn)
        cvec = np.zeros(nn)
        col = 0
        for i in reals:
            amat[col, col] = poles[i].real
            bvec[col] = 1.0
            cvec[col] = r[i].real
            col += 1
        for i in reps:
            sig, beta = poles[i].real, poles[i].imag
            amat[col:col + 2, col:col + 2] = [[sig, beta], [-beta, sig]]
            bvec[col] = 2.0
            cvec[col] = r[i].real
            cvec[col + 1] = r[i].imag
            col += 2
        zeros = np.linalg.eigvals(amat - np.outer(bvec, cvec) / d)
    else:
        # expanded numerator sum_k r_k prod_{j != k} (s - p_j)
        num = np.zeros(poles.size, dtype=complex)
        for i in range(poles.size):
            rest = np.delete(poles, i)
            num += model.residues[k, i] * np.poly(rest)
        zeros = np.roots(num.real) if np.any(np.abs(num.real) > 0) else np.zeros(0, dtype=complex)
    return _sorted_c(poles), _sorted_c(zeros)


# ---------------------------------------------------------------------------
# serialization

_SCHEMA = 1


def _c2pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def save_model(model, report=None):
    """Serialize a model (and optional report) to JSON text.

    Floats are written with shortest round-trip representation, so a
    load/save cycle is stable well past 17 significant digits.
    """
    doc = {"schema": _SCHEMA}
    if isinstance(model, PolynomialRatioModel):
        doc.update(method="poly", order=model.order, s_scale=model.s_scale,
                   num_coeffs=[float(c) for c in model.num_coeffs],
                   den_coeffs=[float(c) for c in model.den_coeffs])
    elif isinstance(model, PartialFractionModel):
        doc.update(method="vf", order=model.order, s_scale=1.0,
                   poles=[_c2pair(p) for p in model.poles],
                   port_names=list(model.port_names),
                   residues={name: [_c2pair(z) for z in model.residues[i]]
                             for i, name in enumerate(model.port_names)},
                   direct={name: float(model.direct[i])
                           for i, name in enumerate(model.port_names)})
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    if report is not None:
        doc["report"] = {"rms_rel_error": report.rms_rel_error,
                         "max_phase_err_deg": report.max_phase_err_deg,
                         "iters_used": report.iters_used,
                         "converged": report.converged}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_model(text):
    """Inverse of :func:`save_model`; returns (model, report_or_None)."""
    doc = json.loads(text)
    if doc.get("schema") != _SCHEMA:
        raise ValueError(f"unsupported model schema {doc.get('schema')!r}")
    rep = doc.get("report")
    report = FitReport(**rep) if rep else None
    if doc["method"] == "poly":
        model = PolynomialRatioModel(np.asarray(doc["num_coeffs"]),
                                     np.asarray(doc["den_coeffs"]),
                                     doc["s_scale"])
    elif doc["method"] == "vf":
        names = tuple(doc["port_names"])
        poles = np.asarray([complex(a, b) for a, b in doc["poles"]])
        residues = np.asarray([[complex(a, b) for a, b in doc["residues"][n]] for n in names])
        direct = np.asarray([doc["direct"][n] for n in names])
        model = PartialFractionModel(poles, residues, direct, names)
    else:
        raise ValueError(f"unknown method {doc['method']!r}")
    return model, report
