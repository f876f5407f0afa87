"""Reconstruct a discontinuous solution and print its profile.

Runs one cell of the step-solution preset at 1% noise and prints the
exact and reconstructed values along the grid.  The reconstruction is
smooth, so expect it to overshoot near the jump (a Gibbs-like edge) while
matching the flat pieces well.
"""

from dsm import PRESETS, run_cells

config = PRESETS["exp1"].override(delta_rel=(0.01,), seeds=(1,))
cell = next(iter(run_cells(config)))

print(f"model={config.model}, exact={config.exact}, n={config.n_points}, "
      f"delta_rel=0.01, seed=1")
print(f"stopped at n={cell.row.n_iterations}, rel_error={cell.row.rel_error:.4f}")
print()
print(f"{'x':>6} {'exact':>9} {'recon':>9} {'error':>10}")
nodes = cell.model.grid.nodes
exact = cell.u_exact.values
recon = cell.record.final.values
for i in range(0, len(nodes), 5):
    print(f"{nodes[i]:6.3f} {exact[i]:9.4f} {recon[i]:9.4f} "
          f"{recon[i] - exact[i]:10.2e}")
