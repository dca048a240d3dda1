"""High-level circuit samplers: QV, geometry-restricted random, Ising Trotter."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Circuit, GateOp, Layer, idle, sq, tq, u4
from .gates import clifford_angles, euler_angles


def make_rng(seed: int | np.random.SeedSequence | None) -> np.random.Generator:
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class CircuitShape:
    n: int
    d: int

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1:
            raise ValueError(f"invalid shape ({self.n}, {self.d})")


@dataclass(frozen=True)
class GeometrySpec:
    kind: str
    rows: int = 0
    cols: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("all-to-all", "grid", "line"):
            raise ValueError(f"unknown geometry {self.kind!r}")

    @classmethod
    def grid_for(cls, n: int) -> GeometrySpec:
        rows = max(1, math.isqrt(n))
        return cls("grid", rows, math.ceil(n / rows))

    def edges(self, n: int) -> tuple[tuple[int, int], ...]:
        if self.kind == "line":
            return tuple((i, i + 1) for i in range(n - 1))
        if self.kind == "grid":
            if self.rows * self.cols < n:
                raise ValueError(f"grid {self.rows}x{self.cols} too small for {n} qubits")
            out = []
            for v in range(n):
                r, c = divmod(v, self.cols)
                if c + 1 < self.cols and v + 1 < n:
                    out.append((v, v + 1))
                if v + self.cols < n:
                    out.append((v, v + self.cols))
            return tuple(out)
        return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@dataclass(frozen=True)
class HamSimParams:
    h_z: float
    h_x: float
    steps: int
    tau: float = 0.1
    coupling: float = 1.0

    def __post_init__(self) -> None:
        if abs(self.h_z) > 1 or abs(self.h_x) > 1:
            raise ValueError("fields must lie in [-1, 1]")
        if self.steps < 1:
            raise ValueError("need at least one Trotter step")


def sample_haar_su4(rng: np.random.Generator) -> np.ndarray:
    return _haar_su(4, rng)


def sample_haar_su2(rng: np.random.Generator) -> np.ndarray:
    return _haar_su(2, rng)


def _haar_su(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(g)
    diag = np.diag(r)
    q = q * (diag / np.abs(diag))
    det = np.linalg.det(q)
    return q / det ** (1.0 / dim)


def sample_qv_circuit(shape: CircuitShape, rng: np.random.Generator, seed: int | None = None) -> Circuit:
    """``d`` layers of Haar SU(4) blocks on random pairings."""
    n = shape.n
    layers = []
    for _ in range(shape.d):
        order = rng.permutation(n)
        gates: list[GateOp] = []
        for k in range(n // 2):
            a, b = int(order[2 * k]), int(order[2 * k + 1])
            gates.append(u4(a, b, sample_haar_su4(rng)))
        layers.append(Layer.of(n, gates))
    meta = {"family": "qv", "shape": [n, shape.d], "seed": seed}
    return Circuit(n, tuple(layers), meta)


def _expected_greedy_matching(edges: tuple[tuple[int, int], ...]) -> float:
    """Mean size of a maximal matching built from a uniformly shuffled edge list."""
    m = len(edges)
    if m == 0:
        return 0.0
    if m > 26:
        rng = np.random.default_rng(0)
        return float(np.mean([len(_greedy_matching(edges, rng)) for _ in range(20000)]))
    blocked = []
    for i, (a, b) in enumerate(edges):
        mask = 0
        for j, (c, d) in enumerate(edges):
            if {a, b} & {c, d}:
                mask |= 1 << j
        blocked.append(mask)

    @lru_cache(maxsize=None)
    def expect(avail: int) -> float:
        if avail == 0:
            return 0.0
        idx = [i for i in range(m) if (avail >> i) & 1]
        return 1.0 + sum(expect(avail & ~blocked[i]) for i in idx) / len(idx)

    return expect((1 << m) - 1)


def _greedy_matching(edges, rng: np.random.Generator) -> list[tuple[int, int]]:
    used: set[int] = set()
    out = []
    for i in rng.permutation(len(edges)):
        a, b = edges[i]
        if a not in used and b not in used:
            used.update((a, b))
            out.append((a, b))
    return out


@lru_cache(maxsize=64)
def keep_probability(geom: GeometrySpec, n: int) -> float:
    """Edge-retention probability that makes the expected block count ``n/4``."""
    mean = _expected_greedy_matching(geom.edges(n))
    if mean == 0:
        return 0.0
    return min(1.0, (n / 4) / mean)


def sample_geometry_layer(n: int, geom: GeometrySpec, rng: np.random.Generator) -> Layer:
    edges = geom.edges(n)
    keep = keep_probability(geom, n)
    gates: list[GateOp] = []
    used: set[int] = set()
    for a, b in _greedy_matching(edges, rng):
        if rng.random() < keep:
            gates.append(u4(a, b, sample_haar_su4(rng)))
            used.update((a, b))
    for q in range(n):
        if q not in used:
            gates.append(sq(q, euler_angles(sample_haar_su2(rng))))
    return Layer.of(n, gates)


def sample_geometry_circuit(
    shape: CircuitShape, geom: GeometrySpec, rng: np.random.Generator, seed: int | None = None
) -> Circuit:
    if geom.kind == "all-to-all":
        raise ValueError("geometry circuits need a grid or line geometry")
    layers = tuple(sample_geometry_layer(shape.n, geom, rng) for _ in range(shape.d))
    meta = {"family": geom.kind, "shape": [shape.n, shape.d], "seed": seed}
    if geom.kind == "grid":
        meta["grid"] = [geom.rows, geom.cols]
    return Circuit(shape.n, layers, meta)


def build_hamsim_circuit(n: int, params: HamSimParams, afm_prelude: bool = False) -> Circuit:
    """Trotterized Ising chain; one step is Rz layer, Rx layer, even then odd ZZ."""
    if n < 2:
        raise ValueError("Hamiltonian simulation needs n >= 2")
    tau, coupling = params.tau, params.coupling
    zrot = (2 * tau * params.h_z, 0.0, 0.0)
    xrot = (0.0, 2 * tau * params.h_x, 0.0)
    zz = (2 * tau * coupling, 0.0, 0.0)
    step: list[Layer] = [
        Layer.of(n, [sq(q, zrot) for q in range(n)]),
        Layer.of(n, [sq(q, xrot) for q in range(n)]),
    ]
    for start in (0, 1):
        pairs = [(q, q + 1) for q in range(start, n - 1, 2)]
        if not pairs:
            continue
        cx = Layer.of(n, [tq("CNOT", a, b) for a, b in pairs])
        step += [cx, Layer.of(n, [sq(b, zz) for _, b in pairs]), cx]
    layers: list[Layer] = []
    if afm_prelude:
        layers.append(Layer.of(n, [sq(q, (0.0, math.pi, 0.0)) for q in range(1, n, 2)]))
    layers += step * params.steps
    meta = {
        "family": "hamsim",
        "shape": [n, params.steps],
        "h_z": params.h_z,
        "h_x": params.h_x,
        "tau": tau,
        "coupling": coupling,
        "afm_prelude": afm_prelude,
    }
    return Circuit(n, tuple(layers), meta)


def sample_hamsim_params(steps: int, rng: np.random.Generator, tau: float = 0.1) -> HamSimParams:
    h_z, h_x = rng.uniform(-1.0, 1.0, size=2)
    return HamSimParams(float(h_z), float(h_x), steps, tau)


def sample_2design_layer(n: int, rng: np.random.Generator) -> Layer:
    """Independent uniformly random single-qubit Cliffords."""
    table = clifford_angles()
    picks = rng.integers(0, len(table), size=n)
    return Layer(tuple(sq(q, table[int(k)]) for q, k in enumerate(picks)))


def clifford_index_of(angles) -> int:
    """Index of the Clifford matching ``angles`` (up to phase), or -1."""
    from .gates import equal_up_to_phase, euler_matrix

    m = euler_matrix(angles)
    for i, a in enumerate(clifford_angles()):
        if equal_up_to_phase(m, euler_matrix(a)):
            return i
    return -1


def generate(family: str, shape: CircuitShape, seed: int, **kw) -> Circuit:
    """Seeded entry point used by the CLI."""
    rng = make_rng(seed)
    if family == "qv":
        return sample_qv_circuit(shape, rng, seed=seed)
    if family in ("grid", "line"):
        geom = GeometrySpec.grid_for(shape.n) if family == "grid" else GeometrySpec("line")
        return sample_geometry_circuit(shape, geom, rng, seed=seed)
    if family == "hamsim":
        params = sample_hamsim_params(shape.d, rng, tau=kw.get("tau", 0.1))
        return build_hamsim_circuit(shape.n, params, afm_prelude=kw.get("afm_prelude", False)).with_metadata(
            seed=seed
        )
    raise ValueError(f"unknown circuit family {family!r}")
