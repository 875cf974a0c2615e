"""Geometric <=-CSP model, its embedding onto the Cantor crossbar, compilation
to a unit-ball independent-set instance with exact intersection predicates,
and brute-force oracles certifying the equivalence chain
SAT(I) <=> SAT(I') <=> (one disjoint ball per group exists).

Conventions: variables are identified by their grid coordinates (1-based for
input instances, crossbar coordinates for embedded ones). The value domain is
{0..Delta}^d for every variable; chain variables take axis values {0..Delta}
with zeros elsewhere, which keeps the equivalence lemma exact (values may
legitimately be 0 at both ends of a chain). Balls are open with radius 1/2,
so two balls are disjoint iff their centers' squared distance is >= 1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .fractals import CrossbarParams, decompose_crossbar, gen_f
from .geometry import GeometryError, PointSet, sq_dist


class CSPError(GeometryError):
    pass


class CompileError(CSPError):
    """Instance rejected at compile time (e.g. an empty unary relation)."""


class SearchBudgetExceeded(RuntimeError):
    """Backtracking oracle ran out of its node budget; never silent."""

    outcome = "budget"


Var = tuple
Value = tuple


@dataclass(frozen=True)
class LeqCSPInstance:
    d: int
    n: int  # side of the host grid
    delta: int
    variables: tuple  # sorted tuple of coordinate tuples
    unary: dict  # var -> frozenset of value tuples
    edges: tuple  # (a, b, axis) with b = a + e_axis, 0-based axis

    def neighbors_of(self):
        out = {v: [] for v in self.variables}
        for a, b, axis in self.edges:
            out[a].append((b, axis, +1))
            out[b].append((a, axis, -1))
        return out


def make_csp(d: int, n: int, delta: int, variables, unary) -> LeqCSPInstance:
    """Build an instance; the binary edges are forced to the full induced
    adjacency of the variable set (the primal graph must be induced)."""
    if d < 1 or n < 1 or delta < 1:
        raise CSPError("need d >= 1, n >= 1, delta >= 1")
    vs = tuple(sorted(tuple(int(c) for c in v) for v in variables))
    if len(set(vs)) != len(vs):
        raise CSPError("duplicate variables")
    vset = set(vs)
    dom = set(product(range(delta + 1), repeat=d))
    una = {}
    for v in vs:
        rel = frozenset(tuple(int(c) for c in val) for val in unary[v])
        if not rel <= dom:
            raise CSPError(f"unary relation of {v} leaves the domain")
        una[v] = rel
    edges = []
    for v in vs:
        for axis in range(d):
            w = tuple(c + (1 if i == axis else 0) for i, c in enumerate(v))
            if w in vset:
                edges.append((v, w, axis))
    return LeqCSPInstance(d, n, delta, vs, una, tuple(sorted(edges)))


def random_csp(seed: int, d: int = 2, n_max: int = 3, delta_max: int = 3) -> LeqCSPInstance:
    """Seeded random instance: random induced variable subset of [n]^d with
    random nonempty unary relations; singleton-biased relations make forced
    UNSAT cases common."""
    rng = random.Random(seed)
    n = rng.randint(1, n_max)
    delta = rng.randint(1, delta_max)
    cells = list(product(range(1, n + 1), repeat=d))
    kmin = 1
    kvars = rng.randint(kmin, len(cells))
    variables = rng.sample(cells, kvars)
    dom = list(product(range(delta + 1), repeat=d))
    unary = {}
    for v in variables:
        style = rng.random()
        if style < 0.35:
            rel = [rng.choice(dom)]
        elif style < 0.6:
            rel = rng.sample(dom, min(len(dom), rng.randint(1, 3)))
        else:
            rel = [val for val in dom if rng.random() < 0.5] or [rng.choice(dom)]
        unary[tuple(v)] = rel
    return make_csp(d, n, delta, variables, unary)


def check_assignment(inst: LeqCSPInstance, asg: dict) -> bool:
    for v in inst.variables:
        if v not in asg or tuple(asg[v]) not in inst.unary[v]:
            return False
    for a, b, axis in inst.edges:
        if asg[a][axis] > asg[b][axis]:
            return False
    return True


def _arc_consistency(domains, edges, index):
    """Exact AC for <=-on-one-coordinate constraints: a value of a is
    supported iff its axis coordinate is <= max over b's domain (and dually),
    iterated to a fixpoint. Returns False if some domain wipes out."""
    changed = True
    while changed:
        changed = False
        for a, b, axis in edges:
            ia, ib = index[a], index[b]
            hi = max(val[axis] for val in domains[ib])
            lo = min(val[axis] for val in domains[ia])
            da = [val for val in domains[ia] if val[axis] <= hi]
            db = [val for val in domains[ib] if val[axis] >= lo]
            if len(da) != len(domains[ia]):
                domains[ia] = da
                changed = True
            if len(db) != len(domains[ib]):
                domains[ib] = db
                changed = True
            if not da or not db:
                return False
    return True


def brute_solve_csp(inst: LeqCSPInstance, budget: int = 1_000_000):
    """Backtracking in variable placement (lexicographic) order after an
    exact arc-consistency pass, pruning by unary then binary constraints;
    returns the lexicographically first satisfying assignment or None.
    Raises SearchBudgetExceeded past budget."""
    variables = list(inst.variables)
    domains = [sorted(inst.unary[v]) for v in variables]
    if any(not dmn for dmn in domains):
        return None
    index0 = {v: i for i, v in enumerate(variables)}
    if not _arc_consistency(domains, list(inst.edges), index0):
        return None
    index = {v: i for i, v in enumerate(variables)}
    constraints = [[] for _ in variables]  # per var: (other_idx, axis, sign)
    for a, b, axis in inst.edges:
        ia, ib = index[a], index[b]
        # when the later variable is assigned, check against the earlier one
        if ia < ib:
            constraints[ib].append((ia, axis, -1))
        else:
            constraints[ia].append((ib, axis, +1))
    asg = [None] * len(variables)
    nodes = 0

    def ok(i, val):
        for j, axis, sign in constraints[i]:
            other = asg[j]
            if other is None:
                continue
            if sign < 0:  # other = a, this = b: need a[axis] <= b[axis]
                if other[axis] > val[axis]:
                    return False
            else:  # other = b, this = a
                if val[axis] > other[axis]:
                    return False
        return True

    def search(i):
        nonlocal nodes
        if i == len(variables):
            return True
        for val in domains[i]:
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded(f"CSP search exceeded {budget} nodes")
            if ok(i, val):
                asg[i] = val
                if search(i + 1):
                    return True
                asg[i] = None
        return False

    if search(0):
        return {v: asg[i] for i, v in enumerate(variables)}
    return None


# -- embedding onto the crossbar ---------------------------------------------


@dataclass
class Placement:
    params: CrossbarParams | None
    m: int
    var_map: dict  # original var -> crossbar coord
    chains: dict  # (a, b, axis) -> list of crossbar coords strictly between


def embed_csp(inst: LeqCSPInstance, l: int, v: int):
    """Place the variables on the crossbar core M order-preservingly and
    instantiate chain variables along the connector runs between adjacent
    placed variables. Returns (embedded instance, placement)."""
    if l % 2 == 0 or v % 2 == 0 or l <= v:
        raise CSPError("need odd l > odd v")
    d, n = inst.d, inst.n
    if d < 2:
        raise CSPError("embedding requires d >= 2")
    m = 0
    while (l - v) ** m < n:
        m += 1

    if m == 0:
        var_map = {var: (0,) * d for var in inst.variables}
        new_unary = {(0,) * d: inst.unary[inst.variables[0]]}
        emb = LeqCSPInstance(d, 1, inst.delta, ((0,) * d,), new_unary, ())
        return emb, Placement(None, 0, var_map, {})

    params = CrossbarParams(l, v, d, m)
    dec = decompose_crossbar(gen_f(params), params)
    offsets = [[int(x) for x in per_axis] for per_axis in dec.core_offsets]
    fset = {tuple(int(c) for c in p) for p in dec.all.points}

    var_map = {}
    for var in inst.variables:
        var_map[var] = tuple(offsets[a][var[a] - 1] for a in range(d))

    chains = {}
    new_vars = set(var_map.values())
    chain_axis = {}
    for a, b, axis in inst.edges:
        pa, pb = var_map[a], var_map[b]
        lo, hi = pa[axis], pb[axis]
        mid_coords = []
        for t in range(lo + 1, hi):
            coord = pa[:axis] + (t,) + pa[axis + 1 :]
            if coord not in fset:
                raise CSPError(f"connector point {coord} missing from crossbar")
            mid_coords.append(coord)
            prev = chain_axis.get(coord)
            if prev is not None and prev != axis:
                raise CSPError(f"chain point {coord} claimed by two axes")
            chain_axis[coord] = axis
        chains[(a, b, axis)] = mid_coords
        new_vars.update(mid_coords)

    axis_values = {
        axis: frozenset(
            tuple(t if i == axis else 0 for i in range(d)) for t in range(inst.delta + 1)
        )
        for axis in range(d)
    }
    new_unary = {}
    for var in sorted(new_vars):
        if var in chain_axis:
            new_unary[var] = axis_values[chain_axis[var]]
        else:
            orig = next(ov for ov, pv in var_map.items() if pv == var)
            new_unary[var] = inst.unary[orig]

    emb = make_csp(d, l**m, inst.delta, sorted(new_vars), new_unary)
    return emb, Placement(params, m, var_map, chains)


# -- ball compilation ---------------------------------------------------------


@dataclass
class BallInstance:
    """Open unit-diameter balls grouped by source variable. Within a group all
    balls pairwise intersect, so a full selection picks exactly one per group;
    target is the group count."""

    dim: int
    delta: int
    alpha: Fraction
    group_vars: list  # crossbar coords, sorted
    group_centers: list  # per group: list of center Points (exact rationals)
    radius: Fraction

    @property
    def target(self) -> int:
        return len(self.group_vars)

    def all_centers(self) -> PointSet:
        pts = [c for grp in self.group_centers for c in grp]
        return PointSet(self.dim, pts)

    def to_dict(self) -> dict:
        from .serialize import frac_pair

        return {
            "dim": self.dim,
            "Delta": self.delta,
            "alpha": frac_pair(self.alpha),
            "radius": frac_pair(self.radius),
            "groups": [
                {
                    "var": [int(c) for c in var],
                    "centers": [[frac_pair(c) for c in ctr] for ctr in centers],
                }
                for var, centers in zip(self.group_vars, self.group_centers)
            ],
        }

    @classmethod
    def from_dict(cls, doc) -> "BallInstance":
        from .serialize import frac_from_pair

        gv, gc = [], []
        for g in doc["groups"]:
            gv.append(tuple(int(c) for c in g["var"]))
            gc.append([tuple(frac_from_pair(c) for c in ctr) for ctr in g["centers"]])
        return cls(
            int(doc["dim"]),
            int(doc["Delta"]),
            frac_from_pair(doc["alpha"]),
            gv,
            gc,
            frac_from_pair(doc["radius"]),
        )


def open_balls_disjoint(c1, c2) -> bool:
    """Open unit-diameter balls: disjoint iff center distance >= 1, exactly."""
    return sq_dist(tuple(map(Fraction, c1)), tuple(map(Fraction, c2))) >= 1


def cubes_disjoint(c1, c2) -> bool:
    """Open axis-parallel unit cubes: disjoint iff l-infinity distance >= 1."""
    a = tuple(map(Fraction, c1))
    b = tuple(map(Fraction, c2))
    if len(a) != len(b):
        raise GeometryError("dimension mismatch")
    return max(abs(x - y) for x, y in zip(a, b)) >= 1


def compile_alpha(d: int, delta: int) -> Fraction:
    """Offset scale for ball centers. 1/(d*Delta^2) except when d*Delta < 4,
    where that value breaks the non-adjacent separation 2(1-alpha*Delta)^2 > 1
    (diagonal neighbors' balls would intersect); 1/(4*Delta) restores it and
    still satisfies alpha <= 1/(d*Delta^2)'s role in the adjacent-pair
    analysis, which only needs d*alpha^2*Delta^2 + (1-alpha)^2 < 1."""
    return min(Fraction(1, d * delta * delta), Fraction(1, 4 * delta))


def balls_from_csp(inst: LeqCSPInstance, check: bool = True) -> BallInstance:
    """Variable a with allowed value x yields an open radius-1/2 ball centered
    at a + alpha*x. Exact-rational compile checks: group cliques (< 1) and
    non-adjacent separation (>= 2(1-alpha*Delta)^2 > 1)."""
    d, delta = inst.d, inst.delta
    alpha = compile_alpha(d, delta)
    for var in inst.variables:
        if not inst.unary[var]:
            raise CompileError(f"variable {var} has an empty unary relation")
    group_vars = list(inst.variables)
    group_centers = []
    for var in group_vars:
        centers = [
            tuple(Fraction(c) + alpha * x for c, x in zip(var, val))
            for val in sorted(inst.unary[var])
        ]
        group_centers.append(centers)
    inst_b = BallInstance(d, delta, alpha, group_vars, group_centers, Fraction(1, 2))
    if check:
        _check_ball_instance(inst, inst_b)
    return inst_b


def _lift_centers(b: BallInstance):
    q = b.alpha.denominator
    lifted = []
    for centers in b.group_centers:
        arr = np.asarray(
            [[int(c * q) for c in ctr] for ctr in centers], dtype=np.int64
        )
        lifted.append(arr)
    return lifted, q


def _check_ball_instance(inst: LeqCSPInstance, b: BallInstance):
    lifted, q = _lift_centers(b)
    qq = q * q
    for var, arr in zip(b.group_vars, lifted):
        if len(arr) > 1:
            d2 = ((arr[:, None, :] - arr[None, :, :]) ** 2).sum(axis=2)
            np.fill_diagonal(d2, 0)
            if int(d2.max()) >= qq:
                raise CompileError(f"group {var} is not a clique of intersecting balls")
    adj = set()
    for a, bb, axis in inst.edges:
        adj.add((a, bb))
        adj.add((bb, a))
    sep = 2 * (1 - b.alpha * b.delta) ** 2  # non-adjacent separation lower bound
    for i in range(len(b.group_vars)):
        for j in range(i + 1, len(b.group_vars)):
            if (b.group_vars[i], b.group_vars[j]) in adj:
                continue
            diff = lifted[i][:, None, :] - lifted[j][None, :, :]
            d2 = (diff * diff).sum(axis=2)
            worst = Fraction(int(d2.min()), qq)
            if worst < sep or worst <= 1:
                raise CompileError(
                    f"non-adjacent groups {b.group_vars[i]}, {b.group_vars[j]} "
                    f"too close: {worst} < {sep}"
                )


def max_disjoint_one_per_group(b: BallInstance, budget: int = 1_000_000):
    """Backtracking over groups, one center per group, pairwise open-ball
    disjointness (exact). A support-pruning pass runs first: a center that
    intersects every center of some other group can never be selected.
    Returns per-group center indices or None."""
    lifted, q = _lift_centers(b)
    qq = q * q
    k = len(lifted)

    # exact geometric arc consistency between groups that can interact
    active = [np.ones(len(arr), dtype=bool) for arr in lifted]
    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            diff = lifted[i][:, None, :] - lifted[j][None, :, :]
            d2 = (diff * diff).sum(axis=2)
            if bool((d2 < qq).any()):
                pairs.append((i, j, d2))
    changed = True
    while changed:
        changed = False
        for i, j, d2 in pairs:
            ok = d2 >= qq
            sup_i = (ok[:, active[j]]).any(axis=1) & active[i]
            sup_j = (ok[active[i], :]).any(axis=0) & active[j]
            if (sup_i != active[i]).any():
                active[i] = sup_i
                changed = True
            if (sup_j != active[j]).any():
                active[j] = sup_j
                changed = True
    if any(not a.any() for a in active):
        return None
    cand = [np.nonzero(a)[0] for a in active]

    chosen = np.zeros((k, b.dim), dtype=np.int64)
    pick = [0] * k
    nodes = 0

    def search(g):
        nonlocal nodes
        if g == k:
            return True
        arr = lifted[g]
        for ci in cand[g]:
            ci = int(ci)
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded(f"ball search exceeded {budget} nodes")
            c = arr[ci]
            if g:
                diff = chosen[:g] - c
                d2 = np.einsum("ij,ij->i", diff, diff)
                if bool((d2 < qq).any()):
                    continue
            chosen[g] = c
            pick[g] = ci
            if search(g + 1):
                return True
        return False

    if search(0):
        return list(pick)
    return None


def selection_to_assignment(b: BallInstance, selection):
    """Recover the CSP assignment x = (center - a)/alpha per group."""
    asg = {}
    for var, centers, ci in zip(b.group_vars, b.group_centers, selection):
        ctr = centers[ci]
        val = tuple((c - Fraction(vc)) / b.alpha for c, vc in zip(ctr, var))
        if any(x.denominator != 1 for x in val):
            raise CSPError("selection center is not on the alpha lattice")
        asg[var] = tuple(int(x) for x in val)
    return asg


def assignment_to_selection(b: BallInstance, asg):
    sel = []
    for var, centers in zip(b.group_vars, b.group_centers):
        target = tuple(Fraction(vc) + b.alpha * x for vc, x in zip(var, asg[var]))
        sel.append(centers.index(target))
    return sel


# -- serialization -------------------------------------------------------------


def csp_to_dict(inst: LeqCSPInstance) -> dict:
    index = {v: i for i, v in enumerate(inst.variables)}
    return {
        "d": inst.d,
        "n": inst.n,
        "Delta": inst.delta,
        "vars": [list(v) for v in inst.variables],
        "unary": {str(index[v]): sorted(list(map(list, inst.unary[v]))) for v in inst.variables},
        "edges": [[index[a], index[b], axis] for a, b, axis in inst.edges],
    }


def csp_from_dict(doc) -> LeqCSPInstance:
    variables = [tuple(int(c) for c in v) for v in doc["vars"]]
    unary = {
        variables[int(i)]: [tuple(int(c) for c in val) for val in rel]
        for i, rel in doc["unary"].items()
    }
    inst = make_csp(int(doc["d"]), int(doc["n"]), int(doc["Delta"]), variables, unary)
    declared = {
        (variables[int(a)], variables[int(b)], int(axis)) for a, b, axis in doc["edges"]
    }
    if declared != set(inst.edges):
        raise CSPError("edge list is not the induced grid adjacency")
    return inst
