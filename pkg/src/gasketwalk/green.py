"""Level-to-level recursion of the reduced amplitude Green functions.

A level-n kernel is renormalized by solving the walk on one level-1 cell
F(1) whose six vertices carry labels

    0=(0,0)  1=(1,1)  2=(2,0)  3=(3,1)  4=(4,0)  5=(2,2)

with interior vertices 1, 2, 3 and corners 0, 4, 5 absorbing. The mirror
cell F(1)' carries the primed labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import dual
from .coin import get_coin
from .kernel import CellKernel, apply, pattern, states_of
from .lattice import CELL_LABELS, DirectedState, build_level, reflect, reflect_dir

COND_LIMIT = 1e12

# interior label orders that make the 12x12 kernel block-circulant
INTERIOR_ORDER = {"1": (0, 1, 4, 5), "2": (2, 3, 0, 1), "3": (4, 5, 2, 3)}
INTERIOR = ("1", "2", "3")
TARGETS = ("0", "4", "5")


class SingularityError(ArithmeticError):
    def __init__(self, factor: str, cond: float, nodes=None):
        self.factor = factor
        self.cond = cond
        self.nodes = nodes
        super().__init__(f"{factor} is near singular (condition estimate {cond:.3e})")


@dataclass(frozen=True)
class GreenSextet:
    """The six reduced Green functions u1..u6 at one level, batched over nodes."""

    values: object  # ndarray or Dual, shape (..., 6)
    level: int = 0

    def __getitem__(self, k: int):
        return self.values[..., k - 1]

    u1 = property(lambda s: s[1])
    u2 = property(lambda s: s[2])
    u3 = property(lambda s: s[3])
    u4 = property(lambda s: s[4])
    u5 = property(lambda s: s[5])
    u6 = property(lambda s: s[6])

    def kernel(self) -> CellKernel:
        return CellKernel(dual.linear(lambda v: v @ _SEXTET_TO_KERNEL.T, self.values), self.level)

    @classmethod
    def from_kernel(cls, k: CellKernel) -> "GreenSextet":
        c = k.coef
        pick = [0, 1, 3, 2, 6, 8]  # out_near, out_far, third_far, third_near, same, cross
        return cls(c[..., pick], k.level)


# u = (u1..u6) -> (out_near, out_far, third_near, third_far, target_near, target_far, same, swap, cross)
_SEXTET_TO_KERNEL = np.array(
    [
        [1, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, -1, 0, 0],
        [0, 0, -1, 0, 0, 0],
        [0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, -1, 0],
        [0, 0, 0, 0, 0, 1],
    ],
    dtype=float,
)


def initial_sextet(z, r: float = 0.5) -> GreenSextet:
    """u(0) = (rz, 0, 0, rz, 0, 0)."""
    basis = np.array([r, 0, 0, r, 0, 0], dtype=complex)
    return GreenSextet(dual.linear(lambda v: np.asarray(v, dtype=complex)[..., None] * basis, z), 0)


def _template(rows: list[str]) -> np.ndarray:
    """Coefficient tensor (6, 4, 4) from a 4x4 table of '±uk' / '0' strings."""
    t = np.zeros((6, 4, 4))
    for a, row in enumerate(rows):
        for b, cell in enumerate(row.split()):
            if cell == "0":
                continue
            sign = -1.0 if cell.startswith("-") else 1.0
            t[int(cell[-1]) - 1, a, b] = sign
    return t


_A = _template(["u5 -u5 u6 u6", "-u5 u5 u6 u6", "u6 u6 u5 -u5", "u6 u6 -u5 u5"])
_B = _template(["u1 u2 0 0", "u1 u2 0 0", "u4 u3 0 0", "-u4 -u3 0 0"])
_C = _template(["0 0 -u3 -u4", "0 0 u3 u4", "0 0 u2 u1", "0 0 u2 u1"])


@dataclass(frozen=True)
class BlockTriple:
    A: object
    B: object
    C: object

    def full(self):
        """The reordered 12x12 matrix (A B C / C A B / B C A)."""
        A, B, C = self.A, self.B, self.C
        return dual.block(((A, B, C), (C, A, B), (B, C, A)))


@dataclass(frozen=True)
class InverseBlocks:
    X: object
    Y: object
    Z: object
    H: object
    D: object
    Abar: object
    cond: np.ndarray  # worst condition estimate among the factored 4x4 matrices

    def full(self):
        X, Y, Z = self.X, self.Y, self.Z
        return dual.block(((X, Y, Z), (Z, X, Y), (Y, Z, X)))


def assemble_blocks(u: GreenSextet) -> BlockTriple:
    """Blocks A, B, C of the reordered interior kernel, from the sextet."""
    mk = lambda t: dual.linear(lambda v: (v @ t.reshape(6, 16)).reshape(v.shape[:-1] + (4, 4)), u.values)
    return BlockTriple(mk(_A), mk(_B), mk(_C))


@lru_cache(maxsize=None)
def _unit_geometry():
    g = build_level(1)
    site = {k: v for k, v in CELL_LABELS.items()}
    interior = [DirectedState(site[x], k) for x in INTERIOR for k in INTERIOR_ORDER[x]]
    return g, site, interior


def kernel_blocks(k: CellKernel) -> BlockTriple:
    """Blocks A, B, C read off the geometric kernel on F(1) (any coin)."""
    g, _, interior = _unit_geometry()
    full = apply(k.coef, _interior_pattern())
    return BlockTriple(full[..., 0:4, 0:4], full[..., 0:4, 4:8], full[..., 0:4, 8:12])


@lru_cache(maxsize=None)
def _interior_pattern() -> np.ndarray:
    g, _, interior = _unit_geometry()
    return pattern(g, interior, interior)


def dense_interior(k: CellKernel):
    """The reordered 12x12 interior kernel built directly from geometry."""
    return apply(k.coef, _interior_pattern())


def _norm1(v: np.ndarray) -> np.ndarray:
    return np.abs(v).sum(axis=-2).max(axis=-1)


def _checked_inv(m, bad: np.ndarray):
    """Batched inverse with a 1-norm condition estimate per node.

    Nodes that are non-finite or exactly singular get the identity in place
    of the matrix and infinite condition; ``bad`` is updated in place.
    """
    v = dual.value(m)
    finite = np.isfinite(v).all(axis=(-2, -1))
    eye = np.eye(v.shape[-1])
    if not finite.all():
        m = dual.where(finite[..., None, None], m, eye)
        v = dual.value(m)
    try:
        mi = dual.inv(m)
    except np.linalg.LinAlgError:
        with np.errstate(all="ignore"):
            sv = np.linalg.svd(v, compute_uv=False)
        singular = ~(sv[..., -1] > sv[..., 0] * 1e-15)
        m = dual.where(singular[..., None, None], eye, m)
        finite &= ~singular
        mi = dual.inv(m)
        v = dual.value(m)
    with np.errstate(all="ignore"):
        cond = _norm1(v) * _norm1(dual.value(mi))
    cond = np.where(finite & np.isfinite(cond), cond, np.inf)
    bad |= ~(cond <= COND_LIMIT)
    return mi, cond


def invert_shifted(blocks: BlockTriple, check: bool = True) -> InverseBlocks:
    """Inverse of the block-circulant (Ā B C / C Ā B / B C Ā) with Ā = A - I.

    Only 4x4 inverses are formed. Condition numbers are 1-norm estimates.
    With ``check`` a factor whose estimate exceeds ``COND_LIMIT`` at any node
    raises ``SingularityError``; without it such nodes come back as NaN and
    ``cond`` flags them.
    """
    A, B, C = blocks.A, blocks.B, blocks.C
    eye = np.eye(4)
    Abar = A - eye
    bad = np.zeros(Abar.shape[:-2], dtype=bool)
    conds = {}

    def inverse(name, m):
        mi, conds[name] = _checked_inv(m, bad)
        if check and bad.any():
            c = conds[name]
            raise SingularityError(name, float(np.max(c)), np.flatnonzero(~(c <= COND_LIMIT)))
        return mi

    Ai = inverse("Abar", Abar)
    K = Abar - B @ Ai @ C
    Ki = inverse("K", K)
    L = C - B @ Ai @ B
    M = B - C @ Ai @ C
    H = Abar - C @ Ai @ B - M @ Ki @ L
    D = M @ Ki @ B @ Ai - C @ Ai
    Z = inverse("H", H) @ D
    Y = -(Ki @ (L @ Z + B @ Ai))
    X = Ai @ (eye - B @ Z - C @ Y)
    if bad.any():
        nan = np.full((4, 4), np.nan)
        X, Y, Z = (dual.where(bad[..., None, None], nan, t) for t in (X, Y, Z))
    worst = np.maximum.reduce([conds[k] for k in ("Abar", "K", "H")])
    return InverseBlocks(X, Y, Z, H, D, Abar, worst)


def dense_inverse(blocks: BlockTriple) -> np.ndarray:
    """Reference: -(I - ρ̃)^-1 from a generic 12x12 inverse."""
    return np.linalg.inv(dual.value(blocks.full()) - np.eye(12))


@lru_cache(maxsize=None)
def _rhs_pattern(target: str) -> np.ndarray:
    g, site, interior = _unit_geometry()
    return pattern(g, interior, states_of(g, [site[target]]))


def _as_kernel(u) -> CellKernel:
    return u.kernel() if isinstance(u, GreenSextet) else u


def _blocks_for(u) -> BlockTriple:
    return assemble_blocks(u) if isinstance(u, GreenSextet) else kernel_blocks(u)


def _natural_rows(x: str) -> np.ndarray:
    order = INTERIOR_ORDER[x]
    return np.array([order.index(k) for k in sorted(order)])


def reflect_block(block):
    """g(x', y') from g(x, y): both label axes map through k -> 5 - k.

    The mirror map reverses ascending label order, so this is a flip.
    """
    return block[..., ::-1, ::-1]


def dirichlet_solve(u, target: str, inverse: InverseBlocks | None = None, check: bool = True) -> dict[str, object]:
    """Interior Green blocks g(x, target) for x in {1, 2, 3} on F(1).

    ``target`` is one of '0', '4', '5' or a primed label, in which case the
    interior keys are primed as well. Blocks use ascending label order.
    """
    return dirichlet_solve_many(u, (target,), inverse, check)[target]


def dirichlet_solve_many(u, targets, inverse: InverseBlocks | None = None, check: bool = True) -> dict[str, dict[str, object]]:
    """``dirichlet_solve`` for several targets with one 12x12 product per node."""
    bases = []
    for t in targets:
        b = t.rstrip("'")
        if b not in TARGETS:
            raise ValueError(f"target must be a corner label of F(1), got {t!r}")
        bases.append(b)
    if inverse is None:
        inverse = invert_shifted(_blocks_for(u), check=check)
    coef = _as_kernel(u).coef
    rhs = apply(coef, np.concatenate([_rhs_pattern(b) for b in bases], axis=-1))
    sol = -(inverse.full() @ rhs)
    out = {}
    for m, t in enumerate(targets):
        cols = sol[..., :, 4 * m : 4 * m + 4]
        blocks = {x: cols[..., 4 * p : 4 * p + 4, :][..., _natural_rows(x), :] for p, x in enumerate(INTERIOR)}
        if t.endswith("'"):
            blocks = {x + "'": reflect_block(g) for x, g in blocks.items()}
        out[t] = blocks
    return out


def stack_interior(blocks: dict[str, object]):
    """Stack solved blocks back into the reordered 12-row layout."""
    parts = []
    for x in INTERIOR:
        key = x if x in blocks else x + "'"
        g = blocks[key]
        order = INTERIOR_ORDER[x]
        perm = np.array([sorted(order).index(k) for k in order])
        parts.append(g[..., perm, :])
    return dual.concatenate(parts, axis=-2)


def poisson_residual(u, target: str, blocks: dict[str, object]) -> np.ndarray:
    """max |[I - ρ̃] g - ρ(·, target)| per node."""
    k = _as_kernel(u)
    rho = dual.value(dense_interior(k))
    g = dual.value(stack_interior(blocks))
    rhs = dual.value(apply(k.coef, _rhs_pattern(target)))
    res = g - rho @ g - rhs
    return np.abs(res).max(axis=(-2, -1))


@lru_cache(maxsize=None)
def _pair_pattern(x: str, y: str) -> np.ndarray:
    g, site, _ = _unit_geometry()
    return pattern(g, states_of(g, [site[x]]), states_of(g, [site[y]]))


def rho(u, x: str, y: str):
    """Kernel block ρ(x, y) between labelled vertices of F(1)."""
    return apply(_as_kernel(u).coef, _pair_pattern(x, y))


def boundary_green(u, solved: dict[str, dict[str, object]]):
    """Level-(n+1) blocks g(0, a) and g(0, 0) from solved interior blocks.

    ``solved`` maps targets '5' and '0' to the output of ``dirichlet_solve``.
    Columns 4, 5 of g(0, 0) use the mirror cell translated onto F(1), which
    puts the origin at vertex 5 and needs only the target-5 solution.
    """
    g5, g0 = solved["5"], solved["0"]
    g05 = rho(u, "0", "1") @ g5["1"] + rho(u, "0", "2") @ g5["2"]
    left = rho(u, "0", "0") + rho(u, "0", "1") @ g0["1"] + rho(u, "0", "2") @ g0["2"]
    right = rho(u, "5", "5") + rho(u, "5", "1") @ g5["1"] + rho(u, "5", "3") @ g5["3"]
    g00 = dual.concatenate([left[..., :, 0:2], right[..., :, 2:4]], axis=-1)
    return g05, g00


def read_kernel(g05, g00, level: int) -> CellKernel:
    """Reduced coefficients from g(0, a) and g(0, 0) (labels 0, 1, 4, 5 -> rows 0..3)."""
    entries = [
        g05[..., 2, 2],  # out_near: start 4 -> arrive 4
        g05[..., 2, 3],  # out_far
        g05[..., 0, 2],  # third_near: start 0 points at b
        g05[..., 0, 3],
        g05[..., 1, 2],  # target_near: start 1 points at a
        g05[..., 1, 3],
        g00[..., 0, 0],
        g00[..., 0, 1],
        g00[..., 0, 2],
    ]
    return CellKernel(dual.stack(entries, axis=-1), level)


def renormalize(u, check: bool = True):
    """One recursion step by the generic route: solve F(1), then read nine slots.

    Accepts a ``GreenSextet`` or a ``CellKernel`` and returns the same kind.
    """
    k = _as_kernel(u)
    inverse = invert_shifted(_blocks_for(u), check=check)
    solved = dirichlet_solve_many(u, ("5", "0"), inverse)
    nxt = read_kernel(*boundary_green(u, solved), k.level + 1)
    if isinstance(u, GreenSextet):
        return GreenSextet.from_kernel(nxt)
    return nxt


def iterate(u: GreenSextet, check: bool = True, inverse: InverseBlocks | None = None) -> GreenSextet:
    """Apply the six-line iteration map to a sextet.

    Primed blocks g(1', 5'), g(2', 5'), g(1', 0), g(2', 0) come from the
    unprimed solutions by reflection.
    """
    if inverse is None:
        inverse = invert_shifted(assemble_blocks(u), check=check)
    solved = dirichlet_solve_many(u, ("5", "0"), inverse)
    s5, s0 = solved["5"], solved["0"]
    p5 = {x + "'": reflect_block(b) for x, b in s5.items()}
    p0 = {x + "'": reflect_block(b) for x, b in s0.items()}
    lab = lambda x, label: _label_pos(x, label)
    g = lambda blocks, x, i, j, y="5": blocks[x][..., lab(x, i), _target_pos(y, j)]

    u1, u2, u3, u4, u5, u6 = (u[k] for k in range(1, 7))
    n1 = u1 * (g(p5, "1'", 1, 1, "5'") + g(p5, "2'", 2, 1, "5'")) + u2 * (
        g(p5, "1'", 0, 1, "5'") + g(p5, "2'", 3, 1, "5'")
    )
    n2 = u1 * (g(p5, "1'", 1, 0, "5'") + g(p5, "2'", 2, 0, "5'")) + u2 * (
        g(p5, "1'", 0, 0, "5'") + g(p5, "2'", 3, 0, "5'")
    )
    n3 = u4 * (g(s5, "1", 4, 5) - g(s5, "2", 3, 5)) + u3 * (g(s5, "1", 5, 5) - g(s5, "2", 2, 5))
    n4 = u4 * (g(s5, "1", 4, 4) - g(s5, "2", 3, 4)) + u3 * (g(s5, "1", 5, 4) - g(s5, "2", 2, 4))
    n5 = u5 + u4 * (g(s0, "1", 4, 0, "0") - g(s0, "2", 3, 0, "0")) + u3 * (
        g(s0, "1", 5, 0, "0") - g(s0, "2", 2, 0, "0")
    )
    n6 = u6 + u1 * (g(p0, "1'", 1, 4, "0") + g(p0, "2'", 2, 4, "0")) + u2 * (
        g(p0, "1'", 0, 4, "0") + g(p0, "2'", 3, 4, "0")
    )
    return GreenSextet(dual.stack([n1, n2, n3, n4, n5, n6], axis=-1), u.level + 1)


def _site_of(label: str):
    base = CELL_LABELS[label.rstrip("'")]
    return reflect(base) if label.endswith("'") else base


def _label_pos(x: str, label: int) -> int:
    return build_level(1).out[_site_of(x)].index(label)


def _target_pos(y: str, label: int) -> int:
    return build_level(1).out[_site_of(y)].index(label)


def iterate_n(u: GreenSextet, n: int, check: bool = True) -> GreenSextet:
    for _ in range(n):
        u = iterate(u, check=check)
    return u


def sextet_at_level(z, n: int, r: float = 0.5, check: bool = True) -> GreenSextet:
    return iterate_n(initial_sextet(z, r), n, check=check)


def kernel_at_level(z, n: int, coin: str = "quantum", check: bool = True) -> CellKernel:
    """Level-n reduced kernel by the generic route (works for any symmetric coin)."""
    k = CellKernel.initial(z, get_coin(coin))
    for _ in range(n):
        k = renormalize(k, check=check)
    return k


# Placement of the reduced kernel onto the level-0 doubled cell {0, a, b, a', b'}
LEVEL0_SITES = {"0": (0, 0), "a": (1, 1), "b": (2, 0), "a'": (-1, -1), "b'": (1, -1)}


def reconstruct(u, x: str, y: str):
    """4x4 block g(x, y) of the level-n walk for corners x, y in {0, a, b, a', b'}."""
    from .kernel import block

    return block(_as_kernel(u), LEVEL0_SITES[x], LEVEL0_SITES[y], level=0)


def level0_out(x: str) -> tuple[int, ...]:
    return build_level(0).out[LEVEL0_SITES[x]]


def reflect_labels(labels) -> list[int]:
    return [reflect_dir(k) for k in labels]
