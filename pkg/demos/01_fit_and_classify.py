"""Fit a simulated response and read stability off the pole map.

A parallel RLC tank with a negative resistance stands in for an active
circuit linearized about its bias point: the closed form says its poles sit
at +1e10 +- j3e10 rad/s, squarely in the right half-plane.
"""

import pathlib

import numpy as np

import pzid

OUT = pathlib.Path(__file__).with_name("out")
OUT.mkdir(exist_ok=True)

net = pzid.Netlist((
    pzid.resistor("r1", "n1", "0", -50.0),
    pzid.inductor("l1", "n1", "0", 1e-9),
    pzid.capacitor("c1", "n1", "0", 1e-12),
))

print("analytic poles (rad/s):", pzid.analytic_poles(net))

# step 1: probe the circuit with a small-signal current source and sweep
grid = pzid.FrequencyGrid(np.linspace(1e9, 9e9, 400))
resp = pzid.frequency_response(net, pzid.current_probe("n1"), grid)

# step 2: identify a rational model and scan orders for the verdict
verdict = pzid.auto_identify(resp, orders=range(2, 7))
print("stable:", verdict.stable)
for cp in verdict.critical_poles:
    print(f"  critical pole {cp.value:.4e}  ({cp.resonant_freq_hz / 1e9:.3f} GHz, "
          f"damping {cp.damping:+.3f})")

(OUT / "verdict.json").write_text(pzid.serialize_verdict(verdict))
(OUT / "pole_map.svg").write_text(pzid.render_pole_map(verdict))
print("wrote", OUT / "verdict.json", "and", OUT / "pole_map.svg")
