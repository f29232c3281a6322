"""Curvature and electromagnetism on sampled metric jets.

Run with ``python demos/metric_bundle.py``.  At a few random 4D jets this
compares
  - the quadrature Lagrangian of alpha R^ij sqrt|g| with the Hilbert density,
  - the finite-difference Euler-Lagrange form of the Hilbert density with the
    Einstein tensor density,
  - the Helmholtz residuals of the Einstein and Ricci source forms,
and shows that the covariant potential gives a divergent homotopy integral.
"""
import numpy as np

from varcomp.errors import DivergentHomotopy
from varcomp.gr import (
    PI, covariant_potential_divergence_demo, einstein_density_fn, em_symmetrized_tensor,
    em_vt_closed_form, em_source_fn, hilbert_density, hilbert_density_fn, ricci_source_fn,
    sample_em_jet, sample_metric_jet,
)
from varcomp.numjet import numeric_euler_lagrange, numeric_helmholtz, numeric_vt_lagrangian


def main(seeds=(1, 2, 3)):
    alpha = -1 / (16 * PI)
    ricci = ricci_source_fn(4, alpha)
    L = hilbert_density_fn(4)
    G = einstein_density_fn(4)
    for s in seeds:
        mj = sample_metric_jet(s, order=4)
        vt = numeric_vt_lagrangian(ricci, mj.point)
        E = numeric_euler_lagrange(L, mj.point)
        ref = G(mj.point)
        print(f"seed {s}: VT {vt:+.12f} Hilbert {hilbert_density(mj):+.12f}  "
              f"|EL - G| = {np.max(np.abs(E - ref)):.1e}  "
              f"Helmholtz G {numeric_helmholtz(G, mj.point).max_abs:.1e} "
              f"Ricci {numeric_helmholtz(ricci_source_fn(4, 1.0), mj.point).max_abs:.2f}")

    ej = sample_em_jet(5, flat=True)
    T, tau = em_symmetrized_tensor(ej)
    print("flat EM: max |T - T^t| =", f"{np.max(np.abs(T - T.T)):.1e}",
          " max |tau| =", f"{np.max(np.abs(tau)):.3f}")
    ej = sample_em_jet(6)
    vt = numeric_vt_lagrangian(em_source_fn(4, -1.0), ej.point, {"g"})
    print(f"curved EM: VT {vt:+.12f} closed form {em_vt_closed_form(ej):+.12f}")
    try:
        covariant_potential_divergence_demo(ej)
    except DivergentHomotopy as exc:
        print("covariant potential:", exc)


if __name__ == "__main__":
    main()
