"""Port criteria are not enough: hunting a hidden internal loop.

An internal negative-resistance tank is damped only through the coupling
into the output port.  With a matched load everything looks stable, but a
short-circuit termination removes the damping and the loop takes off.  The
scan sweeps the whole reflection-coefficient disk along a single spiral
(radius growing linearly in one parameter while the phase wraps), plus the
open-like and short-like corners, and reports every termination that
produces right-half-plane poles at the internal probe.
"""

import numpy as np

import pzid

net = pzid.Netlist((
    pzid.capacitor("c1", "I", "0", 1e-12),
    pzid.inductor("l1", "I", "0", 1e-9),
    pzid.resistor("rneg", "I", "0", -150.0),
    pzid.inductor("lc", "I", "P", 0.3e-9),
    pzid.resistor("rleak", "P", "0", 1e6),
), ports=(pzid.TerminationPort("out", "P", 50.0),))

matched = pzid.with_termination(net, "out", 0.0)
shorted = pzid.with_termination(net, "out", -1.0)
print("max Re, matched load:", f"{pzid.analytic_poles(matched).real.max():+.3e}")
print("max Re, short:        ", f"{pzid.analytic_poles(shorted).real.max():+.3e}")

spiral = pzid.spiral_path(turns=11, points=40)
print(f"spiral: {len(spiral.h)} samples, ends at gamma = {spiral.gamma[-1]:.4f}")

grid = pzid.FrequencyGrid(np.linspace(0.5e9, 12e9, 300))
report = pzid.proviso_scan(net, "out", pzid.current_probe("I"), spiral,
                           grid, orders=range(2, 7))
print(f"scanned {report.n_scanned} terminations, "
      f"{len(report.findings)} produced RHP poles")
for f in report.findings[:6]:
    worst = max(f.poles, key=lambda p: p.real)
    print(f"  {f.label:>12s}  gamma={f.gamma:.3f}  worst pole {worst:.3e}")
if len(report.findings) > 6:
    print(f"  ... and {len(report.findings) - 6} more")
