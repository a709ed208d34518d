"""Dump a solved orbit as a space-time heat map table.

u(theta, x) on a uniform grid over one period, written as (theta, x, value)
rows -- the standard picture of a travelling-dip cycle.  Plot with e.g.

    gnuplot> set view map
    gnuplot> splot "demo_out/heatmap.csv" every ::1 using 1:2:3 with points \
             pt 5 ps 0.6 palette

Solving from scratch takes about a minute.
"""

import pathlib

import ksorbits.flow as fl
import ksorbits.fourier as fx
import ksorbits.newton as nt
import ksorbits.orbitio as oio

import numpy as np

OUT = pathlib.Path("demo_out")
OUT.mkdir(exist_ok=True)

print("solving at 1/nu = 32.97 ...")
seed = fl.find_attracting_orbit(1.0 / 32.97)
orbit = nt.newton_solve(fl.seed_to_orbit_candidate(seed, 40, 19)).final
print(f"period T = {orbit.period:.9f}")

n_theta, n_x = 160, 128
grid = fx.eval_grid(orbit.u, n_theta, n_x)
theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
x = 2.0 * np.pi * np.arange(n_x) / n_x
oio.write_heatmap_csv(OUT / "heatmap.csv", theta, x, grid.values,
                      config={"one-over-nu": 32.97,
                              "n-theta": n_theta, "n-x": n_x})
umax = float(np.abs(grid.values).max())
print(f"wrote {OUT / 'heatmap.csv'} ({n_theta * n_x} samples, "
      f"max |u| = {umax:.3f})")