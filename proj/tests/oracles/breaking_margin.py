"""Coarse-grid brute-force descent for the cylinder quotient.

Independent of the C++ implementation: axisymmetric fields phi(z, theta) on a
uniform z grid and a midpoint theta grid, second-order differences, L-BFGS on
the raw quotient with JAX gradients. Prints radial and full minima and the
relative gap for the requested (d=3, p, Lambda) points.
"""
import sys
import numpy as np
import jax
import jax.numpy as jnp
from scipy.optimize import minimize

jax.config.update("jax_enable_x64", True)


def make_problem(lam, p, nz=121, nth=24, zmax=None):
    zmax = zmax if zmax is not None else 14.0 / np.sqrt(lam)
    z = np.linspace(-zmax, zmax, nz)
    hz = z[1] - z[0]
    hth = np.pi / nth
    th = (np.arange(nth) + 0.5) * hth
    wth = 2 * np.pi * np.sin(th) * hth  # integrates to 4 pi (midpoint)
    wth = wth * (4 * np.pi / wth.sum())
    # interface weights for the theta derivative
    thf = np.arange(1, nth) * hth
    wthf = 2 * np.pi * np.sin(thf) * hth

    def quotient(flat):
        phi = flat.reshape(nz, nth)
        dz = (phi[1:, :] - phi[:-1, :]) / hz
        dth = (phi[:, 1:] - phi[:, :-1]) / hth
        num = hz * jnp.sum(dz**2 * wth[None, :])
        num += hz * jnp.sum(dth**2 * wthf[None, :])
        num += lam * hz * jnp.sum(phi**2 * wth[None, :])
        den = (hz * jnp.sum(jnp.abs(phi) ** p * wth[None, :])) ** (2.0 / p)
        return num / den

    return z, th, jax.jit(jax.value_and_grad(quotient))


def soliton(z, lam, p):
    return (2.0 / (p * lam) * np.cosh((p - 2) / 2 * np.sqrt(lam) * z) ** 2) ** (-1.0 / (p - 2))


def run(lam, p):
    z, th, fg = make_problem(lam, p)
    base = soliton(z, lam, p)
    out = {}
    for name, seed in (("radial", np.outer(base, np.ones_like(th))),
                       ("full", np.outer(base, 1 + 0.3 * np.cos(th)))):
        fun = lambda x: tuple(np.asarray(v) for v in fg(x))
        if name == "radial":
            # restrict to theta-independent fields
            def fr(c):
                q, g = fg(np.repeat(c, len(th)))
                return float(q), np.asarray(g).reshape(len(z), len(th)).sum(axis=1)
            res = minimize(fr, base, jac=True, method="L-BFGS-B",
                           options={"maxiter": 20000, "ftol": 1e-15, "gtol": 1e-12})
        else:
            res = minimize(lambda x: (float(fg(x)[0]), np.asarray(fg(x)[1])), seed.ravel(), jac=True,
                           method="L-BFGS-B", options={"maxiter": 20000, "ftol": 1e-15, "gtol": 1e-12})
        out[name] = res.fun
    gap = (out["radial"] - out["full"]) / out["radial"]
    return out["radial"], out["full"], gap


if __name__ == "__main__":
    p = float(sys.argv[1]) if len(sys.argv) > 1 else 4.0
    d = 3
    lam_fs = 4 * (d - 1) / (p * p - 4)
    ratios = [float(r) for r in sys.argv[2:]] or [0.5, 1.5]
    for r in ratios:
        rad, full, gap = run(r * lam_fs, p)
        print(f"p={p} ratio={r} Lambda={r*lam_fs:.6f} radial={rad:.10f} full={full:.10f} gap={gap:.3e}")
