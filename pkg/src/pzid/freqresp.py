"""Sampled frequency-response containers, file parsing and band slicing.

Responses are stored at positive frequencies only (Hz).  Conjugate symmetry
H(-jw) = conj(H(jw)) is assumed by every fitter downstream, never stored.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FrequencyGrid",
    "PortLabel",
    "FrequencyResponseSet",
    "ResponseParseError",
    "RESPONSE_KINDS",
    "parse_csv",
    "emit_csv",
    "parse_touchstone",
    "slice_band",
    "merge_sets",
]

RESPONSE_KINDS = ("impedance", "admittance", "transfer")

MIN_POINTS = 4


class ResponseParseError(ValueError):
    """Malformed response file; carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)


def _readonly(arr):
    arr = np.asarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing grid of nonnegative frequencies in Hz."""

    freqs_hz: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs_hz, dtype=float)
        if f.ndim != 1 or f.size < MIN_POINTS:
            raise ValueError(f"grid needs at least {MIN_POINTS} points, got {f.size}")
        if not np.all(np.isfinite(f)):
            raise ValueError("grid contains non-finite frequencies")
        if np.any(f < 0.0):
            raise ValueError("grid contains negative frequencies")
        if np.any(np.diff(f) <= 0.0):
            raise ValueError("grid is not strictly increasing")
        object.__setattr__(self, "freqs_hz", _readonly(f))

    def __len__(self):
        return self.freqs_hz.size

    def __eq__(self, other):
        if not isinstance(other, FrequencyGrid):
            return NotImplemented
        return np.array_equal(self.freqs_hz, other.freqs_hz)

    @property
    def omega(self):
        """Angular frequencies 2*pi*f in rad/s."""
        return 2.0 * np.pi * self.freqs_hz

    @property
    def f_lo(self):
        return float(self.freqs_hz[0])

    @property
    def f_hi(self):
        return float(self.freqs_hz[-1])


_MODAL_RE = re.compile(r"^modal:(.+)$")


def parse_excitation(text):
    """Validate an excitation descriptor string.

    Accepted forms: ``inode:<node>``, ``vbranch:<element>`` and
    ``modal:<n1>@<deg1>,<n2>@<deg2>,...``.  Returns the normalized string.
    """
    if text.startswith("inode:") and len(text) > len("inode:"):
        return text
    if text.startswith("vbranch:") and len(text) > len("vbranch:"):
        return text
    m = _MODAL_RE.match(text)
    if m:
        nodes, phases = modal_terms(text)
        if len(nodes) != len(phases):
            raise ValueError("modal excitation has mismatched node/phase lists")
        return text
    raise ValueError(f"unrecognized excitation descriptor {text!r}")


def modal_terms(text):
    """Split ``modal:n1@deg1,n2@deg2`` into node and phase-degree lists."""
    m = _MODAL_RE.match(text)
    if not m:
        raise ValueError(f"not a modal descriptor: {text!r}")
    nodes, phases = [], []
    for term in m.group(1).split(","):
        if "@" not in term:
            raise ValueError(f"modal term {term!r} missing @phase")
        node, _, deg = term.partition("@")
        if not node:
            raise ValueError(f"modal term {term!r} missing node")
        try:
            phi = float(deg)
        except ValueError:
            raise ValueError(f"bad modal phase {deg!r}") from None
        if not math.isfinite(phi):
            raise ValueError(f"bad modal phase {deg!r}")
        nodes.append(node)
        phases.append(phi)
    return nodes, phases


@dataclass(frozen=True)
class PortLabel:
    """Named observation port, optionally recording how it was excited."""

    name: str
    excitation: str | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("port name must be nonempty")
        if self.excitation is not None:
            object.__setattr__(self, "excitation", parse_excitation(self.excitation))


@dataclass(frozen=True)
class FrequencyResponseSet:
    """Complex samples for one or more ports sharing a frequency grid.

    ``kinds`` records the physical unit per port: impedance (ohm),
    admittance (siemens) or a dimensionless transfer.
    """

    grid: FrequencyGrid
    ports: tuple[PortLabel, ...]
    values: tuple[np.ndarray, ...]
    kinds: tuple[str, ...] = field(default=())

    def __post_init__(self):
        ports = tuple(self.ports)
        if not ports:
            raise ValueError("response set needs at least one port")
        names = [p.name for p in ports]
        if len(set(names)) != len(names):
            raise ValueError("duplicate port names")
        kinds = tuple(self.kinds) or ("transfer",) * len(ports)
        if len(kinds) != len(ports):
            raise ValueError("kinds length does not match ports")
        for k in kinds:
            if k not in RESPONSE_KINDS:
                raise ValueError(f"unknown response kind {k!r}")
        values = []
        for p, v in zip(ports, self.values, strict=True):
            v = np.asarray(v, dtype=complex)
            if v.shape != (len(self.grid),):
                raise ValueError(f"port {p.name}: {v.size} samples for {len(self.grid)}-point grid")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"port {p.name}: non-finite samples")
            values.append(_readonly(v))
        object.__setattr__(self, "ports", ports)
        object.__setattr__(self, "values", tuple(values))
        object.__setattr__(self, "kinds", kinds)

    def __eq__(self, other):
        if not isinstance(other, FrequencyResponseSet):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.ports == other.ports
            and self.kinds == other.kinds
            and all(np.array_equal(a, b) for a, b in zip(self.values, other.values))
        )

    @property
    def n_ports(self):
        return len(self.ports)

    @property
    def port_names(self):
        return tuple(p.name for p in self.ports)

    def port_index(self, name):
        for i, p in enumerate(self.ports):
            if p.name == name:
                return i
        raise KeyError(f"no port named {name!r}")

    def samples(self, port):
        """Samples for a port given by name or index."""
        if isinstance(port, str):
            port = self.port_index(port)
        return self.values[port]

    def to_matrix(self):
        """All samples as an (n_ports, n_samples) complex array."""
        return np.vstack(self.values)


def _split_csv_line(line):
    return [tok.strip() for tok in line.split(",")]


def _parse_directive(body, lineno, label):
    out = {}
    for item in body.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ResponseParseError(f"malformed {label} directive entry {item!r}", lineno)
        name, _, val = item.partition("=")
        out[name.strip()] = val.strip()
    return out


def parse_csv(text):
    """Parse the canonical CSV interchange format.

    Header row is ``freq_hz,<port>_re,<port>_im,...``.  ``#``-prefixed lines
    are comments; ``# kind: p=impedance,...`` and ``# excitation: p=...,...``
    directives override the per-port defaults (kind defaults to transfer).
    """
    kinds_map = {}
    excit_map = {}
    header = None
    port_names = []
    freqs = []
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("kind:"):
                kinds_map.update(_parse_directive(body[len("kind:"):], lineno, "kind"))
            elif body.startswith("excitation:"):
                excit_map.update(_parse_directive(body[len("excitation:"):], lineno, "excitation"))
            continue
        if header is None:
            header = _split_csv_line(line)
            if not header or header[0] != "freq_hz":
                raise ResponseParseError("header must start with freq_hz", lineno)
            cols = header[1:]
            if not cols or len(cols) % 2 != 0:
                raise ResponseParseError("header needs <port>_re,<port>_im column pairs", lineno)
            for re_col, im_col in zip(cols[0::2], cols[1::2]):
                if not re_col.endswith("_re") or not im_col.endswith("_im"):
                    raise ResponseParseError(
                        f"column pair {re_col!r},{im_col!r} must end in _re,_im", lineno)
                if re_col[:-3] != im_col[:-3]:
                    raise ResponseParseError(
                        f"column pair {re_col!r},{im_col!r} names disagree", lineno)
                port_names.append(re_col[:-3])
            continue
        toks = _split_csv_line(line)
        if len(toks) != 1 + 2 * len(port_names):
            raise ResponseParseError(
                f"ragged row: expected {1 + 2 * len(port_names)} fields, got {len(toks)}", lineno)
        try:
            nums = [float(t) for t in toks]
        except ValueError:
            bad = next(t for t in toks if not _is_float(t))
            raise ResponseParseError(f"unparseable number {bad!r}", lineno) from None
        if freqs and nums[0] <= freqs[-1]:
            raise ResponseParseError("non-monotone grid", lineno)
        freqs.append(nums[0])
        rows.append(nums[1:])
    if header is None:
        raise ResponseParseError("no header row found")
    if len(freqs) < MIN_POINTS:
        raise ResponseParseError(f"fewer than {MIN_POINTS} points")
    data = np.asarray(rows)
    values = [data[:, 2 * i] + 1j * data[:, 2 * i + 1] for i in range(len(port_names))]
    for extra in set(kinds_map) - set(port_names):
        raise ResponseParseError(f"kind directive for unknown port {extra!r}")
    kinds = tuple(kinds_map.get(n, "transfer") for n in port_names)
    for k in kinds:
        if k not in RESPONSE_KINDS:
            raise ResponseParseError(f"unknown kind {k!r} in directive")
    ports = tuple(PortLabel(n, excit_map.get(n)) for n in port_names)
    return FrequencyResponseSet(FrequencyGrid(np.asarray(freqs)), ports, tuple(values), kinds)


def _is_float(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def emit_csv(rset):
    """Serialize to the CSV schema; ``parse_csv`` round-trips bit-identically."""
    lines = []
    if any(k != "transfer" for k in rset.kinds):
        pairs = ",".join(f"{p.name}={k}" for p, k in zip(rset.ports, rset.kinds))
        lines.append(f"# kind: {pairs}")
    if any(p.excitation for p in rset.ports):
        pairs = ",".join(f"{p.name}={p.excitation}" for p in rset.ports if p.excitation)
        lines.append(f"# excitation: {pairs}")
    lines.append("freq_hz," + ",".join(f"{p.name}_re,{p.name}_im" for p in rset.ports))
    for i, f in enumerate(rset.grid.freqs_hz):
        cells = [repr(float(f))]
        for v in rset.values:
            cells.append(repr(float(v[i].real)))
            cells.append(repr(float(v[i].imag)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


_TS_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}


def parse_touchstone(text):
    """Parse a Touchstone v1.x one- or two-port S-parameter file.

    Only the S parameter type is supported; formats RI, MA and DB.  Each
    S_ij becomes one transfer-kind port named ``s11``, ``s21``, ...
    """
    unit = None
    fmt = None
    option_line_no = None
    data_rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if option_line_no is not None:
                continue
            toks = line[1:].strip().split()
            toks = [t.lower() for t in toks]
            toks.extend(["ghz", "s", "ma", "r", "50"][len(toks):])
            if toks[0] not in _TS_UNITS:
                raise ResponseParseError(f"unknown frequency unit {toks[0]!r}", lineno)
            if toks[1] != "s":
                raise ResponseParseError(
                    f"unsupported parameter type {toks[1].upper()}", lineno)
            if toks[2] not in ("ri", "ma", "db"):
                raise ResponseParseError(f"unknown format {toks[2]!r}", lineno)
            unit, fmt = _TS_UNITS[toks[0]], toks[2]
            option_line_no = lineno
            continue
        if option_line_no is None:
            raise ResponseParseError("data before option line (missing option line?)", lineno)
        toks = line.split()
        try:
            nums = [float(t) for t in toks]
        except ValueError:
            raise ResponseParseError(f"unparseable number in {line!r}", lineno) from None
        data_rows.append((lineno, nums))
    if option_line_no is None:
        raise ResponseParseError("missing option line")
    if not data_rows:
        raise ResponseParseError("no data rows")
    width = len(data_rows[0][1])
    if width == 3:
        labels = ["s11"]
    elif width == 9:
        labels = ["s11", "s21", "s12", "s22"]
    else:
        raise ResponseParseError(
            f"unsupported row layout ({width} values; expected 3 for 1-port or 9 for 2-port)",
            data_rows[0][0])
    freqs = []
    cols = [[] for _ in labels]
    for lineno, nums in data_rows:
        if len(nums) != width:
            raise ResponseParseError(f"ragged row: expected {width} values, got {len(nums)}", lineno)
        f = nums[0] * unit
        if freqs and f <= freqs[-1]:
            raise ResponseParseError("non-monotone grid", lineno)
        freqs.append(f)
        for k in range(len(labels)):
            a, b = nums[1 + 2 * k], nums[2 + 2 * k]
            if fmt == "ri":
                val = complex(a, b)
            elif fmt == "ma":
                val = a * np.exp(1j * np.deg2rad(b))
            else:  # db
                val = 10.0 ** (a / 20.0) * np.exp(1j * np.deg2rad(b))
            cols[k].append(val)
    if len(freqs) < MIN_POINTS:
        raise ResponseParseError(f"fewer than {MIN_POINTS} points")
    ports = tuple(PortLabel(n) for n in labels)
    values = tuple(np.asarray(c) for c in cols)
    return FrequencyResponseSet(FrequencyGrid(np.asarray(freqs)), ports,
                                values, ("transfer",) * len(labels))


def slice_band(rset, f_lo, f_hi):
    """Restrict a response set to grid points inside [f_lo, f_hi]."""
    if not f_lo < f_hi:
        raise ValueError(f"need f_lo < f_hi, got [{f_lo}, {f_hi}]")
    f = rset.grid.freqs_hz
    mask = (f >= f_lo) & (f <= f_hi)
    n = int(np.count_nonzero(mask))
    if n < MIN_POINTS:
        raise ValueError(
            f"sub-band [{f_lo}, {f_hi}] Hz has {n} grid points (< {MIN_POINTS})")
    return FrequencyResponseSet(
        FrequencyGrid(f[mask]), rset.ports,
        tuple(v[mask] for v in rset.values), rset.kinds)


def merge_sets(sets):
    """Combine single- or multi-port sets sharing one grid into one MIMO set."""
    sets = list(sets)
    if not sets:
        raise ValueError("nothing to merge")
    grid = sets[0].grid
    ports, values, kinds = [], [], []
    for s in sets:
        if s.grid != grid:
            raise ValueError("sets do not share a frequency grid")
        ports.extend(s.ports)
        values.extend(s.values)
        kinds.extend(s.kinds)
    return FrequencyResponseSet(grid, tuple(ports), tuple(values), tuple(kinds))
