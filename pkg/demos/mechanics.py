"""Variational completion of damped oscillations.

Run with ``python demos/mechanics.py``.  Prints the Vainberg-Tonti
Lagrangian, its first-order reduction and the completion for a quadratic
(Rayleigh) and a cubic dissipation function.
"""
from pathlib import Path

from varcomp.calculus import canonical_completion, euler_lagrange, helmholtz, reduce_order, vt_lagrangian
from varcomp.dsl import parse_file
from varcomp.render import render

HERE = Path(__file__).resolve().parent / "problems"


def show(name):
    pf = parse_file(HERE / f"{name}.vc")
    spec = pf.spec
    eps = pf.source
    print(f"== {name}")
    H = helmholtz(eps)
    print("variational:", H.is_zero())
    lam = vt_lagrangian(eps)
    print("L_eps  =", render(lam.density, "plain", spec))
    print("L_red  =", render(reduce_order(lam).density, "plain", spec))
    tau = canonical_completion(eps)
    for i, t in enumerate(tau.components):
        print(f"tau[{i}] =", render(t, "plain", spec))
    # the completed system is the Euler-Lagrange form of L_eps
    done = eps + tau
    assert done.components == euler_lagrange(lam).components
    for i, e in enumerate(done.components):
        print(f"eps+tau[{i}] =", render(e, "latex", spec))
    print()


if __name__ == "__main__":
    for name in ("free_oscillation", "damped", "cubic_friction"):
        show(name)
