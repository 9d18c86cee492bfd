"""Linear-circuit frequency-response engine via modified nodal analysis.

Node voltages are the primary unknowns, plus one branch current per inductor
and per voltage constraint, so a netlist stamps into a linear pencil
(G + sC) x = b.  Poles are then exact generalized eigenvalues of (G, C),
which makes the engine an analytic oracle for every fitted result.

Negative resistors stand in for active-device reflection gain: they make
unstable fixtures possible without nonlinear device models.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import NumericError, UsageError
from .freqresp import FrequencyResponseSet, PortLabel, modal_terms

__all__ = [
    "Element",
    "Netlist",
    "ProbeSpec",
    "TerminationPort",
    "PencilEigenvalues",
    "NetlistParseError",
    "SingularSystemError",
    "resistor",
    "inductor",
    "capacitor",
    "vccs",
    "current_probe",
    "voltage_probe",
    "modal_probe",
    "parse_probe",
    "parse_value",
    "parse_netlist",
    "frequency_response",
    "frequency_responses",
    "pencil_eigenvalues",
    "analytic_poles",
    "with_termination",
    "ground_node",
    "set_element_value",
]

GROUND = "0"

_CONDUCTING = ("R", "L", "C", "SHORT")


class NetlistParseError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)


class SingularSystemError(NumericError):
    pass


@dataclass(frozen=True)
class Element:
    """One stamped circuit element.

    kind 'R' (ohm, sign carries negative-resistor semantics), 'L' (henry),
    'C' (farad), 'G' (VCCS transconductance in siemens, 4 terminals) or
    'SHORT' (ideal 0 V constraint used for grounding and -1 reflection).
    """

    kind: str
    name: str
    nodes: tuple[str, ...]
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("R", "L", "C", "G", "SHORT"):
            raise ValueError(f"unknown element kind {self.kind!r}")
        n_terms = 4 if self.kind == "G" else 2
        if len(self.nodes) != n_terms:
            raise ValueError(f"{self.kind} element {self.name!r} needs {n_terms} terminals")
        if not math.isfinite(self.value):
            raise ValueError(f"element {self.name!r} value is not finite")
        if self.kind in ("R", "L", "C") and self.value == 0.0:
            raise ValueError(f"element {self.name!r} value must be nonzero")
        if self.kind in ("L", "C") and self.value < 0.0:
            raise ValueError(f"element {self.name!r} value must be positive")

    @property
    def described_kind(self):
        if self.kind == "R" and self.value < 0.0:
            return "negative-resistor"
        return {"R": "resistor", "L": "inductor", "C": "capacitor",
                "G": "vccs", "SHORT": "short"}[self.kind]


def resistor(name, n1, n2, ohms):
    return Element("R", name, (n1, n2), float(ohms))


def inductor(name, n1, n2, henry):
    return Element("L", name, (n1, n2), float(henry))


def capacitor(name, n1, n2, farad):
    return Element("C", name, (n1, n2), float(farad))


def vccs(name, out_p, out_n, in_p, in_n, siemens):
    """Current ``gm * (v_inp - v_inn)`` flowing from out_p to out_n."""
    return Element("G", name, (out_p, out_n, in_p, in_n), float(siemens))


@dataclass(frozen=True)
class TerminationPort:
    """Declared reference plane: a node plus its reference impedance.

    ``gamma`` is None until the port is terminated; the corresponding
    termination impedance z0*(1+gamma)/(1-gamma) is passive for |gamma| <= 1.
    """

    name: str
    node: str
    z0: float
    gamma: complex | None = None

    def __post_init__(self):
        if not (math.isfinite(self.z0) and self.z0 > 0.0):
            raise ValueError(f"port {self.name!r}: z0 must be positive and finite")
        if self.gamma is not None and abs(self.gamma) > 1.0 + 1e-12:
            raise ValueError(f"port {self.name!r}: |gamma| must be <= 1")


@dataclass(frozen=True)
class ProbeSpec:
    """Small-signal probe: current at a node, voltage in a branch, or modal.

    A modal probe injects unit currents with the listed phases at each
    listed node and reads the voltage at the first listed node.
    """

    kind: str
    node: str | None = None
    branch: str | None = None
    nodes: tuple[str, ...] = ()
    phases_deg: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "inode":
            if not self.node:
                raise ValueError("current probe needs a node")
        elif self.kind == "vbranch":
            if not self.branch:
                raise ValueError("voltage probe needs a branch element name")
        elif self.kind == "modal":
            if not self.nodes:
                raise ValueError("modal probe needs at least one node")
            if len(self.nodes) != len(self.phases_deg):
                raise ValueError("modal node and phase lists differ in length")
            for p in self.phases_deg:
                if not 0.0 <= p < 360.0:
                    raise ValueError(f"modal phase {p} outside [0, 360)")
        else:
            raise ValueError(f"unknown probe kind {self.kind!r}")

    def descriptor(self):
        if self.kind == "inode":
            return f"inode:{self.node}"
        if self.kind == "vbranch":
            return f"vbranch:{self.branch}"
        terms = ",".join(f"{n}@{_fmt_phase(p)}" for n, p in zip(self.nodes, self.phases_deg))
        return f"modal:{terms}"

    @property
    def response_kind(self):
        return {"inode": "impedance", "vbranch": "admittance", "modal": "transfer"}[self.kind]


def _fmt_phase(p):
    return f"{p:g}"


def current_probe(node):
    return ProbeSpec("inode", node=node)


def voltage_probe(branch):
    return ProbeSpec("vbranch", branch=branch)


def modal_probe(nodes, phases_deg):
    return ProbeSpec("modal", nodes=tuple(nodes), phases_deg=tuple(float(p) for p in phases_deg))


def parse_probe(text):
    """Parse ``inode:<n>``, ``vbranch:<e>`` or ``modal:<n1>@<d1>,...``."""
    if text.startswith("inode:"):
        return current_probe(text[len("inode:"):])
    if text.startswith("vbranch:"):
        return voltage_probe(text[len("vbranch:"):])
    if text.startswith("modal:"):
        nodes, phases = modal_terms(text)
        return modal_probe(nodes, [p % 360.0 for p in phases])
    raise ValueError(f"unrecognized probe descriptor {text!r}")


@dataclass(frozen=True)
class Netlist:
    """Immutable linear circuit; ground is the literal node name '0'."""

    elements: tuple[Element, ...]
    ports: tuple[TerminationPort, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "ports", tuple(self.ports))
        names = [e.name for e in self.elements]
        if len(set(names)) != len(names):
            raise ValueError("duplicate element names")
        pnames = [p.name for p in self.ports]
        if len(set(pnames)) != len(pnames):
            raise ValueError("duplicate port names")
        for p in self.ports:
            if p.node != GROUND and p.node not in self.nodes:
                raise ValueError(f"port {p.name!r} references undeclared node {p.node!r}")
        self._check_connected()

    @property
    def nodes(self):
        """All non-ground node names, sorted."""
        seen = set()
        for e in self.elements:
            seen.update(e.nodes)
        seen.discard(GROUND)
        return tuple(sorted(seen))

    def element(self, name):
        for e in self.elements:
            if e.name == name:
                return e
        raise KeyError(f"no element named {name!r}")

    def port(self, name):
        for p in self.ports:
            if p.name == name:
                return p
        raise KeyError(f"no port named {name!r}")

    def _check_connected(self):
        # Every node must reach ground through conducting (R/L/C/SHORT) edges,
        # otherwise the MNA matrix is structurally singular.
        adj = {GROUND: set()}
        for e in self.elements:
            for n in e.nodes:
                adj.setdefault(n, set())
            if e.kind in _CONDUCTING:
                a, b = e.nodes
                adj[a].add(b)
                adj[b].add(a)
        reached = {GROUND}
        stack = [GROUND]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in reached:
                    reached.add(nxt)
                    stack.append(nxt)
        floating = sorted(set(adj) - reached)
        if floating:
            raise ValueError(f"floating nodes (no conducting path to ground): {floating}")


# ---------------------------------------------------------------------------
# value / file parsing

_SUFFIX = {"p": 1e-12, "n": 1e-9, "u": 1e-6, "m": 1e-3, "k": 1e3, "M": 1e6, "G": 1e9}


def parse_value(text):
    """Parse a number with an optional engineering suffix (p n u m k M G)."""
    try:
        return float(text)
    except ValueError:
        pass
    if text and text[-1] in _SUFFIX:
        try:
            return float(text[:-1]) * _SUFFIX[text[-1]]
        except ValueError:
            pass
    raise ValueError(f"unparseable value {text!r}")


def parse_netlist(text):
    """Parse the line-based netlist format.

    ``R/L/C <name> <n1> <n2> <value>``, ``G <name> <o+> <o-> <i+> <i-> <gm>``,
    ``PORT <name> <node> <z0>``; ``#`` starts a comment; ground node is ``0``.
    """
    elements = []
    ports = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        card = toks[0].upper()
        try:
            if card in ("R", "L", "C"):
                if len(toks) != 5:
                    raise ValueError(f"{card} line needs 5 fields")
                elements.append(Element(card, toks[1], (toks[2], toks[3]), parse_value(toks[4])))
            elif card == "G":
                if len(toks) != 7:
                    raise ValueError("G line needs 7 fields")
                elements.append(Element("G", toks[1], tuple(toks[2:6]), parse_value(toks[6])))
            elif card == "PORT":
                if len(toks) != 4:
                    raise ValueError("PORT line needs 4 fields")
                ports.append(TerminationPort(toks[1], toks[2], parse_value(toks[3])))
            else:
                raise ValueError(f"unknown card {toks[0]!r}")
        except ValueError as exc:
            raise NetlistParseError(str(exc), lineno) from None
    if not elements:
        raise NetlistParseError("netlist has no elements")
    return Netlist(tuple(elements), tuple(ports))


# ---------------------------------------------------------------------------
# pencil assembly

class _Pencil:
    """Real matrices G, C with an index map; optionally a probe RHS/output."""

    def __init__(self, net, probe=None):
        nodes = list(net.nodes)
        elements = list(net.elements)
        probe_vsrc = None  # (nplus, nminus) with unit drive
        if probe is not None and probe.kind == "vbranch":
            branch = net.element(probe.branch)
            if branch.kind not in ("R", "L", "C"):
                raise UsageError(f"voltage probe target {probe.branch!r} must be R, L or C")
            mid = "__probe"
            a, b = branch.nodes
            elements[elements.index(branch)] = replace(branch, nodes=(mid, b))
            nodes.append(mid)
            probe_vsrc = (mid, a)

        self.node_idx = {n: i for i, n in enumerate(nodes)}
        nn = len(nodes)
        branches = [e for e in elements if e.kind in ("L", "SHORT")]
        self.branch_idx = {e.name: nn + i for i, e in enumerate(branches)}
        dim = nn + len(branches) + (1 if probe_vsrc else 0)
        G = np.zeros((dim, dim))
        C = np.zeros((dim, dim))

        def node(n):
            return None if n == GROUND else self.node_idx[n]

        for e in elements:
            if e.kind == "R":
                g = 1.0 / e.value
                _stamp_admittance(G, node(e.nodes[0]), node(e.nodes[1]), g)
            elif e.kind == "C":
                _stamp_admittance(C, node(e.nodes[0]), node(e.nodes[1]), e.value)
            elif e.kind == "L":
                bi = self.branch_idx[e.name]
                a, b = node(e.nodes[0]), node(e.nodes[1])
                # branch current flows nodes[0] -> nodes[1]
                if a is not None:
                    G[a, bi] += 1.0
                    G[bi, a] += 1.0
                if b is not None:
                    G[b, bi] -= 1.0
                    G[bi, b] -= 1.0
                C[bi, bi] -= e.value
            elif e.kind == "SHORT":
                bi = self.branch_idx[e.name]
                _stamp_vsource(G, bi, node(e.nodes[0]), node(e.nodes[1]))
            elif e.kind == "G":
                op, on, ip, in_ = (node(n) for n in e.nodes)
                for orow, sign in ((op, 1.0), (on, -1.0)):
                    if orow is None:
                        continue
                    if ip is not None:
                        G[orow, ip] += sign * e.value
                    if in_ is not None:
                        G[orow, in_] -= sign * e.value

        b_vec = np.zeros(dim, dtype=complex)
        c_vec = np.zeros(dim)
        if probe is not None:
            if probe.kind == "inode":
                ni = node_required(self.node_idx, probe.node)
                b_vec[ni] = 1.0
                c_vec[ni] = 1.0
            elif probe.kind == "modal":
                for n, ph in zip(probe.nodes, probe.phases_deg):
                    ni = node_required(self.node_idx, n)
                    b_vec[ni] += cmath.exp(1j * math.radians(ph))
                c_vec[node_required(self.node_idx, probe.nodes[0])] = 1.0
            else:  # vbranch
                bi = dim - 1
                _stamp_vsource(G, bi, node(probe_vsrc[0]), node(probe_vsrc[1]))
                b_vec[bi] = 1.0
                c_vec[bi] = 1.0

        self.G = G
        self.C = C
        self.b = b_vec
        self.c = c_vec
        self.n_nodes = nn


def node_required(node_idx, name):
    if name not in node_idx:
        raise UsageError(f"probe references unknown node {name!r}")
    return node_idx[name]


def _stamp_admittance(M, a, b, y):
    if a is not None:
        M[a, a] += y
    if b is not None:
        M[b, b] += y
    if a is not None and b is not None:
        M[a, b] -= y
        M[b, a] -= y


def _stamp_vsource(G, bi, nplus, nminus):
    # Constraint v(n+) - v(n-) = rhs; unknown bi is the current delivered
    # out of the n+ terminal into the circuit.
    if nplus is not None:
        G[nplus, bi] -= 1.0
        G[bi, nplus] += 1.0
    if nminus is not None:
        G[nminus, bi] += 1.0
        G[bi, nminus] -= 1.0


# ---------------------------------------------------------------------------
# operations

def frequency_response(net, probe, grid, port_name=None):
    """Closed-loop response seen by a probe, one MNA solve per grid point.

    Current probe at a node returns the impedance seen by the probe;
    voltage probe in a branch returns the admittance presented to it;
    modal probe returns the voltage at its first listed node (transfer).
    """
    pencil = _Pencil(net, probe)
    omega = grid.omega
    out = np.empty(len(grid), dtype=complex)
    for i, w in enumerate(omega):
        A = pencil.G + 1j * w * pencil.C
        try:
            x = np.linalg.solve(A, pencil.b)
        except np.linalg.LinAlgError:
            raise SingularSystemError(
                f"singular MNA system at {grid.freqs_hz[i]} Hz") from None
        out[i] = pencil.c @ x
    name = port_name or probe.descriptor()
    label = PortLabel(name, excitation=probe.descriptor())
    return FrequencyResponseSet(grid, (label,), (out,), (probe.response_kind,))


def frequency_responses(net, probes, grid, port_names=None):
    """MIMO convenience: one response set with a port per probe."""
    from .freqresp import merge_sets

    names = port_names or [None] * len(probes)
    return merge_sets([frequency_response(net, p, grid, n)
                       for p, n in zip(probes, names, strict=True)])


@dataclass(frozen=True)
class PencilEigenvalues:
    """Finite natural frequencies plus how many spurious modes were dropped."""

    poles: np.ndarray
    n_discarded: int
    cutoff: float


def _corner_frequencies(net):
    rs = [abs(e.value) for e in net.elements if e.kind == "R"]
    rs += [1.0 / abs(e.value) for e in net.elements if e.kind == "G" and e.value != 0.0]
    ls = [e.value for e in net.elements if e.kind == "L"]
    cs = [e.value for e in net.elements if e.kind == "C"]
    corners = []
    corners += [1.0 / (r * c) for r in rs for c in cs]
    corners += [r / l for r in rs for l in ls]
    corners += [1.0 / math.sqrt(l * c) for l in ls for c in cs]
    return corners


def pencil_eigenvalues(net, cutoff_factor=1e3):
    """All finite generalized eigenvalues of det(G + s C) = 0.

    Descriptor pencils carry infinite eigenvalues (algebraic constraints);
    these, and rounding artifacts beyond ``cutoff_factor`` times the largest
    element corner frequency, are discarded and counted.
    """
    pencil = _Pencil(net)
    if not np.any(pencil.C):
        return PencilEigenvalues(np.zeros(0, dtype=complex), pencil.G.shape[0], math.inf)
    try:
        lam = scipy.linalg.eigvals(-pencil.G, pencil.C)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"generalized eigenvalue solve failed: {exc}") from None
    if np.any(np.isnan(lam)):
        raise NumericError("singular pencil: det(G + sC) vanishes identically")
    corners = _corner_frequencies(net)
    cutoff = cutoff_factor * max(corners) if corners else math.inf
    finite = np.isfinite(lam) & (np.abs(lam) <= cutoff)
    poles = lam[finite]
    order = np.lexsort((poles.imag, poles.real))
    return PencilEigenvalues(poles[order], int(np.count_nonzero(~finite)), cutoff)


def analytic_poles(net, cutoff_factor=1e3):
    """Finite poles of the netlist in rad/s (see :func:`pencil_eigenvalues`)."""
    return pencil_eigenvalues(net, cutoff_factor).poles


def ground_node(net, node):
    """Short a node to ground with an ideal constraint."""
    if node not in net.nodes:
        raise UsageError(f"unknown node {node!r}")
    name = f"__gnd_{node}"
    i = 0
    while any(e.name == name for e in net.elements):
        i += 1
        name = f"__gnd_{node}_{i}"
    return Netlist(net.elements + (Element("SHORT", name, (node, GROUND)),), net.ports)


def with_termination(net, port_name, gamma, f_ref=None):
    """Attach the passive termination z0*(1+gamma)/(1-gamma) at a port.

    gamma exactly +1 is an open (no element); exactly -1 is an ideal short.
    A complex gamma maps to a series R-L or R-C network presenting the exact
    reflection coefficient at ``f_ref`` (required in that case); this keeps
    the pencil real and responses conjugate-symmetric, which constant
    complex impedances cannot.
    """
    port = net.port(port_name)
    gamma = complex(gamma)
    if abs(gamma) > 1.0 + 1e-12:
        raise UsageError(f"|gamma| = {abs(gamma)} exceeds 1")
    ports = tuple(replace(p, gamma=gamma) if p.name == port_name else p for p in net.ports)
    if gamma == 1.0:
        return Netlist(net.elements, ports)
    if gamma == -1.0:
        return Netlist(ground_node(net, port.node).elements, ports)
    z = port.z0 * (1.0 + gamma) / (1.0 - gamma)
    r, x = z.real, z.imag
    if r < 0.0:
        r = 0.0  # rounding; Re(Z) >= 0 holds for |gamma| <= 1
    prefix = f"__term_{port_name}"
    if abs(x) <= 1e-15 * abs(z):
        if r == 0.0:
            return Netlist(ground_node(net, port.node).elements, ports)
        extra = (resistor(f"{prefix}_r", port.node, GROUND, r),)
    else:
        if f_ref is None:
            raise UsageError(
                f"complex gamma {gamma} needs f_ref to realize the reactive part")
        w_ref = 2.0 * math.pi * f_ref
        mid = f"{prefix}_m"
        top = port.node
        extra = []
        if r > 0.0:
            extra.append(resistor(f"{prefix}_r", port.node, mid, r))
            top = mid
        if x > 0.0:
            extra.append(inductor(f"{prefix}_l", top, GROUND, x / w_ref))
        else:
            extra.append(capacitor(f"{prefix}_c", top, GROUND, -1.0 / (x * w_ref)))
        extra = tuple(extra)
    return Netlist(net.elements + extra, ports)


def set_element_value(net, name, value):
    """Copy of the netlist with one element's value replaced."""
    elem = net.element(name)
    elements = tuple(replace(e, value=float(value)) if e.name == name else e
                     for e in net.elements)
    del elem
    return Netlist(elements, net.ports)
