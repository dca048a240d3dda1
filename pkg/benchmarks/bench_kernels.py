"""Compare the compiled and numpy simulation kernels.

Usage: python benchmarks/bench_kernels.py [--repeat R] [--widths 3,4,5]

Times density-matrix evolution (exact sampling, process-fidelity oracle) and
batched trajectory evolution for compiled QV circuits under depolarizing
noise, and checks that both backends agree.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from mirrorbench.compiler import ConnectivityGraph, compile_exact
from mirrorbench.generators import CircuitShape, generate
from mirrorbench.sim import ErrorModel, available_backends, build_program, get_backend, unravel


def _time(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n: int, repeat: int, trajectories: int) -> dict[str, dict[str, float]]:
    c = generate("qv", CircuitShape(n, n), seed=n)
    cc = compile_exact(c, ConnectivityGraph.from_name("heavy-hexagon", n))
    em = ErrorModel(g1_pol=0.999, g2_pol=0.99, idle_z_rad=0.05)
    prog = build_program(cc.circuit, em)
    traj_prog, errors = unravel(prog, trajectories, np.random.default_rng(0))
    d = 1 << n
    out: dict[str, dict[str, float]] = {}
    finals = {}
    states = {}
    for name in available_backends():
        kern = get_backend(name)

        def dm():
            rho = np.zeros((d, d), dtype=np.complex128)
            rho[0, 0] = 1.0
            kern.run_dm(prog.nreg, prog.ops, prog.params, prog.mats, prog.ptab, rho)
            finals[name] = rho

        def sv():
            psi = np.zeros((trajectories, d), dtype=np.complex128)
            psi[:, 0] = 1.0
            kern.run_sv(traj_prog.nreg, traj_prog.ops, traj_prog.params, traj_prog.mats, errors, psi)
            states[name] = psi

        out[name] = {"density": _time(dm, repeat), "trajectories": _time(sv, repeat)}
    if len(finals) == 2:
        out["max_abs_diff"] = {
            "density": float(np.abs(finals["cython"] - finals["python"]).max()),
            "trajectories": float(np.abs(states["cython"] - states["python"]).max()),
        }
    out["ops"] = {"count": float(len(prog.ops))}
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--widths", default="3,4,5,6")
    ap.add_argument("--trajectories", type=int, default=64)
    args = ap.parse_args()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    header = f"{'n':>3} {'ops':>6} " + " ".join(f"{b + ' dm':>12} {b + ' sv':>12}" for b in backends)
    if len(backends) == 2:
        header += f" {'dm speedup':>11} {'sv speedup':>11} {'dm diff':>10} {'sv diff':>10}"
    print(header)
    for n in (int(v) for v in args.widths.split(",")):
        r = bench(n, args.repeat, args.trajectories)
        row = f"{n:>3} {int(r['ops']['count']):>6} "
        row += " ".join(f"{r[b]['density']:>12.4f} {r[b]['trajectories']:>12.4f}" for b in backends)
        if len(backends) == 2:
            row += f" {r['python']['density'] / r['cython']['density']:>11.1f}"
            row += f" {r['python']['trajectories'] / r['cython']['trajectories']:>11.1f}"
            row += f" {r['max_abs_diff']['density']:>10.1e} {r['max_abs_diff']['trajectories']:>10.1e}"
        print(row)


if __name__ == "__main__":
    main()
