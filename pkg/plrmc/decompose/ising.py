"""Structure of two-site-local stabilizer groups on a chain

After one symplectic map per site, any such group is a product of free qubits
(single Z), nearest-neighbour Bell pairs and independent Ising chains. The
reduction runs in four passes:

1. one-site elements are rotated onto single Z and split off;
2. on every bond, anticommuting pairs among the left halves are symplectically
   orthogonalized and rotated onto X X and Z Z, then split off;
3. what remains at each site spans an abelian group, rotated to Z type;
4. the chains are read off the quotient of the per-site Z spaces by the group.
   Every site space embeds into that quotient and a basis adapted to all of
   them at once, chosen interval by interval, is exactly one vector per chain.

The result is checked by comparing the image of the input with the claimed
normal form.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from plrmc.core.f2core import (
    F2Matrix,
    SpanSolver,
    Subspace,
    eliminate_leading,
    inverse as f2_inverse,
    kernel,
    pack_dense,
    quotient_basis,
    solve_in_span,
    subspace_intersection,
    symplectic_products,
)
from plrmc.core.pauli import Lattice, PauliOp, Region, format_coordinate
from plrmc.core.stab import StabilizerGroup, centralizer_in_region
from plrmc.decompose.clifford import OnSiteClifford, symplectic_form
from plrmc.exceptions import DecompositionError, NonAbelianError, PreconditionError
from plrmc.telemetry import telemetry

logger = logging.getLogger(__name__)

Interval = Tuple[int, int]


def _mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return ((a.astype(np.int64) @ b.astype(np.int64)) % 2).astype(np.uint8)


def _basis(dense: np.ndarray) -> np.ndarray:
    """RREF rows spanning the same space, zero rows dropped"""
    n = dense.shape[1]
    if dense.shape[0] == 0 or n == 0:
        return np.zeros((0, n), dtype=np.uint8)
    return Subspace(n, F2Matrix.from_dense(dense, n)).basis.dense()


def _supported_within(rows: np.ndarray, cols: Sequence[int]) -> np.ndarray:
    """Basis of the row-space elements vanishing off `cols`, in `cols` coordinates"""
    inside = list(cols)
    if rows.shape[0] == 0 or not inside:
        return np.zeros((0, len(inside)), dtype=np.uint8)
    chosen = set(inside)
    outside = [c for c in range(rows.shape[1]) if c not in chosen]
    _, tail = eliminate_leading(F2Matrix.from_dense(rows[:, outside + inside]), len(outside))
    return _basis(tail.dense()[:, len(outside):])


def _form(a: np.ndarray, b: np.ndarray, omega: np.ndarray) -> int:
    return int(a.astype(np.int64) @ omega @ b.astype(np.int64)) % 2


def _unit(v: np.ndarray) -> Optional[int]:
    nz = np.flatnonzero(v)
    return int(nz[0]) if nz.size == 1 else None


def _natural_positions(pairs, zs) -> Optional[List[int]]:
    """Slots of the prescribed vectors when they already are single-slot X and Z"""
    positions = []
    for x, z in pairs:
        cx, cz = _unit(x), _unit(z)
        if cx is None or cz is None or cx % 2 or cz != cx + 1:
            return None
        positions.append(cx // 2)
    for z in zs:
        c = _unit(z)
        if c is None or c % 2 == 0:
            return None
        positions.append(c // 2)
    return positions if len(set(positions)) == len(positions) else None


def _with_products(constraints: np.ndarray, target: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Some s with <c_i, s> = target_i for every constraint row c_i"""
    m = _mul(constraints, omega)
    sol = solve_in_span(
        F2Matrix.from_dense(m.T, m.shape[0]), pack_dense(target, m.shape[0])
    )
    if sol is None:
        raise DecompositionError("prescribed local vectors are not independent")
    return sol.astype(np.uint8)


def _symplectic_pairs(rows: np.ndarray, omega: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
    pool = [r.astype(np.uint8) for r in rows]
    pairs = []
    while pool:
        a = pool.pop(0)
        k = next((j for j, b in enumerate(pool) if _form(a, b, omega)), None)
        if k is None:
            raise DecompositionError("complement of the local frame is degenerate")
        b = pool.pop(k)
        pool = [(w ^ (_form(w, b, omega) * a) ^ (_form(w, a, omega) * b)).astype(np.uint8) for w in pool]
        pairs.append((a, b))
    return pairs


def _frame(q: int, pairs=(), zs=()) -> Tuple[Optional[np.ndarray], List[int]]:
    """Symplectic map on q local slots and the slot receiving each prescribed vector

    Pair k (x, z) goes to X and Z of slot k, then zs[j] to Z of slot len(pairs) + j.
    The vectors must be independent, the pairs mutually orthogonal with <x, z> = 1
    and the zs isotropic and orthogonal to the pairs. Returns None for the map
    when every vector already sits on a single slot.
    """
    natural = _natural_positions(pairs, zs)
    if natural is not None:
        return None, natural
    omega = symplectic_form(q)
    rows = np.zeros((2 * q, 2 * q), dtype=np.uint8)
    fixed: List[np.ndarray] = []
    for k, (x, z) in enumerate(pairs):
        rows[2 * k], rows[2 * k + 1] = x, z
        fixed += [x, z]
    p = len(pairs)
    for j, z in enumerate(zs):
        rows[2 * (p + j) + 1] = z
    fixed += list(zs)
    for j in range(len(zs)):
        target = np.zeros(len(fixed), dtype=np.uint8)
        target[2 * p + j] = 1
        s = _with_products(np.array(fixed), target, omega)
        rows[2 * (p + j)] = s
        fixed.append(s)
    used = p + len(zs)
    if used < q:
        rest = kernel(F2Matrix.from_dense(_mul(np.array(fixed), omega), 2 * q)).dense()
        for k, (a, b) in enumerate(_symplectic_pairs(rest, omega), start=used):
            rows[2 * k], rows[2 * k + 1] = a, b
    return f2_inverse(F2Matrix.from_dense(rows)).dense(), list(range(used))


def _split_pairs(rows: np.ndarray, nleft: int):
    """Symplectic Gram-Schmidt on the left halves; right halves follow along

    Returns the pairs (e, f) with anticommuting left halves and the radical,
    whose left halves commute with everything.
    """
    omega = symplectic_form(nleft // 2)

    def form(a, b):
        return _form(a[:nleft], b[:nleft], omega)

    pool = [r.astype(np.uint8) for r in rows]
    pairs, radical = [], []
    while pool:
        a = pool.pop(0)
        k = next((j for j, b in enumerate(pool) if form(a, b)), None)
        if k is None:
            radical.append(a)
            continue
        b = pool.pop(k)
        pool = [(w ^ (form(w, b) * a) ^ (form(w, a) * b)).astype(np.uint8) for w in pool]
        pairs.append((a, b))
    return pairs, radical


class _Reduction:
    """The group's basis under the site maps applied so far

    Slots split off as free qubits or Bell halves leave `active`; their columns
    are cleared from the rows, which multiplies by group elements only.
    """

    def __init__(self, g: StabilizerGroup):
        self.lattice = g.lattice
        self.rows = g.canonical_basis.dense().astype(np.uint8)
        self.blocks: Dict[int, np.ndarray] = {}
        self.active: List[List[int]] = [list(range(len(qs))) for qs in self.lattice.site_qubits]

    @property
    def num_sites(self) -> int:
        return len(self.lattice.sites)

    def qubits(self, site: int) -> List[int]:
        return [self.lattice.site_qubits[site][s] for s in self.active[site]]

    def cols(self, site: int, slots: Optional[Sequence[int]] = None) -> List[int]:
        qubits = self.lattice.site_qubits[site]
        slots = self.active[site] if slots is None else slots
        return [c for s in slots for c in (2 * qubits[s], 2 * qubits[s] + 1)]

    def within(self, sites: Sequence[int]) -> np.ndarray:
        return _supported_within(self.rows, [c for s in sites for c in self.cols(s)])

    def projection(self, site: int) -> np.ndarray:
        return _basis(self.rows[:, self.cols(site)])

    def apply(self, site: int, local: Optional[np.ndarray]):
        """Compose a symplectic map on the active slots of a site"""
        if local is None:
            return
        q = len(self.lattice.site_qubits[site])
        full = np.eye(2 * q, dtype=np.uint8)
        idx = [c for s in self.active[site] for c in (2 * s, 2 * s + 1)]
        full[np.ix_(idx, idx)] = local
        self.blocks[site] = _mul(self.blocks.get(site, np.eye(2 * q, dtype=np.uint8)), full)
        cols = self.cols(site, range(q))
        self.rows[:, cols] = _mul(self.rows[:, cols], full)

    def split_off(self, site: int, positions: Sequence[int]) -> List[int]:
        """Remove active slots by position; returns their qubits"""
        slots = [self.active[site][p] for p in positions]
        qubits = [self.lattice.site_qubits[site][s] for s in slots]
        self.rows[:, self.cols(site, slots)] = 0
        self.rows = _basis(self.rows)
        for s in slots:
            self.active[site].remove(s)
        return qubits

    def clifford(self) -> OnSiteClifford:
        blocks = {
            s: b for s, b in self.blocks.items()
            if not np.array_equal(b, np.eye(b.shape[0], dtype=np.uint8))
        }
        return OnSiteClifford(self.lattice, blocks)


def _to_ops(lattice: Lattice, qubits: Sequence[int], dense: np.ndarray) -> List[PauliOp]:
    ops = []
    for row in np.atleast_2d(dense):
        nz = np.flatnonzero(row)
        ops.append(
            PauliOp(lattice, [qubits[c // 2] for c in nz if c % 2 == 0], [qubits[c // 2] for c in nz if c % 2])
        )
    return ops


def _check_chain(g: StabilizerGroup):
    lattice = g.lattice
    if lattice.dim != 1:
        raise PreconditionError(f"decomposition needs a chain lattice, got dimension {lattice.dim}")
    if lattice.periods[0] is not None:
        raise PreconditionError("periodic chains are not supported; open the ring first")
    if symplectic_products(g.matrix, g.matrix).any():
        raise NonAbelianError("input generators do not commute")
    for gen in g.generators:
        sites = {int(lattice.qubit_site[q]) for q in gen.support}
        if max(sites) - min(sites) > 1:
            raise PreconditionError(
                f"generator {gen!r} spans sites {min(sites)}..{max(sites)}; only neighbours are allowed"
            )


def _check_bond(red: _Reduction, site: int):
    if not 0 <= site < red.num_sites - 1:
        raise PreconditionError(f"no bond to the right of site {site}")
    for s in (site, site + 1):
        if red.within([s]).shape[0]:
            raise PreconditionError(f"the group has elements supported on site {s} alone")


def _peel_bell_pairs(red: _Reduction, site: int):
    """Rotate and split off the Bell pairs of bond (site, site + 1)"""
    nleft = 2 * len(red.active[site])
    bond = red.within([site, site + 1])
    local_qubits = red.qubits(site) + red.qubits(site + 1)
    pairs, radical = _split_pairs(bond, nleft)
    found = [tuple(_to_ops(red.lattice, local_qubits, np.array([e, f]))) for e, f in pairs]
    residual = _to_ops(red.lattice, local_qubits, np.array(radical)) if radical else []
    if not pairs:
        return found, residual, []
    left, lpos = _frame(nleft // 2, pairs=[(e[:nleft], f[:nleft]) for e, f in pairs])
    right, rpos = _frame(len(red.active[site + 1]), pairs=[(e[nleft:], f[nleft:]) for e, f in pairs])
    red.apply(site, left)
    red.apply(site + 1, right)
    a = red.split_off(site, lpos)
    b = red.split_off(site + 1, rpos)
    return found, residual, list(zip(a, b))


@dataclass
class BellExtraction:
    """Bell pairs of one bond and the on-site maps putting them in X X, Z Z form"""

    site: int
    clifford: OnSiteClifford
    pairs: List[Tuple[PauliOp, PauliOp]]
    bell_qubits: List[Tuple[int, int]]
    residual: List[PauliOp]


def extract_bell_pairs(g: StabilizerGroup, site: int) -> BellExtraction:
    """Split the elements on bond (site, site + 1) into Bell pairs and an abelian rest

    `pairs` are elements of g whose left halves anticommute within each pair and
    commute across pairs; under `clifford` pair k becomes X_a X_b, Z_a Z_b on
    `bell_qubits[k]`. The left halves of `residual` commute with everything.
    """
    _check_chain(g)
    red = _Reduction(g)
    _check_bond(red, site)
    pairs, residual, qubits = _peel_bell_pairs(red, site)
    logger.debug(f"bond {site}: {len(pairs)} Bell pairs, {len(residual)} residual elements")
    return BellExtraction(site, red.clifford(), pairs, qubits, residual)


@dataclass
class SiteSubspaces:
    """U (from the left bond), V (to the right bond), W = U ∩ V at one site"""

    site: int
    u: List[PauliOp]
    v: List[PauliOp]
    w: List[PauliOp]
    phi: List[Tuple[PauliOp, PauliOp]] = field(default_factory=list)

    def phi_is_permutation(self) -> bool:
        """Every basis pair is single-qubit on both sides, injectively"""
        lefts, rights = set(), set()
        for a, b in self.phi:
            if a.weight != 1 or b.weight != 1:
                return False
            lefts |= a.support
            rights |= b.support
        return len(lefts) == len(rights) == len(self.phi)


def bond_subspaces(g: StabilizerGroup) -> List[SiteSubspaces]:
    """Per-site halves of the bond groups and the bond isomorphisms V_i -> U_i+1"""
    _check_chain(g)
    red = _Reduction(g)
    n = red.num_sites
    for s in range(n):
        if red.within([s]).shape[0]:
            raise PreconditionError(f"the group has elements supported on site {s} alone")
    lattice = g.lattice
    halves: List[Tuple[np.ndarray, np.ndarray]] = []
    for s in range(n - 1):
        bond = red.within([s, s + 1])
        nleft = 2 * len(red.active[s])
        halves.append((bond[:, :nleft], bond[:, nleft:]))
    out = []
    for s in range(n):
        dim = 2 * len(red.active[s])
        qubits = red.qubits(s)
        u = _basis(halves[s - 1][1]) if s > 0 else np.zeros((0, dim), np.uint8)
        v = _basis(halves[s][0]) if s < n - 1 else np.zeros((0, dim), np.uint8)
        w = subspace_intersection(
            Subspace(dim, F2Matrix.from_dense(u, dim)), Subspace(dim, F2Matrix.from_dense(v, dim))
        ).basis.dense()
        phi = []
        if s < n - 1:
            left, right = halves[s]
            phi = list(zip(
                _to_ops(lattice, qubits, left),
                _to_ops(lattice, red.qubits(s + 1), right),
            ))
        out.append(SiteSubspaces(
            s,
            _to_ops(lattice, qubits, u),
            _to_ops(lattice, qubits, v),
            _to_ops(lattice, qubits, w),
            phi,
        ))
    return out


@dataclass
class IsingChain:
    """One qubit on each site of an interval, neighbours coupled by Z Z"""

    first_site: int
    qubits: List[int]

    @property
    def last_site(self) -> int:
        return self.first_site + len(self.qubits) - 1

    @property
    def interval(self) -> Interval:
        return (self.first_site, self.last_site)

    def couplings(self, lattice: Lattice) -> List[PauliOp]:
        return [PauliOp(lattice, (), (a, b)) for a, b in zip(self.qubits, self.qubits[1:])]


def _qubit_json(lattice: Lattice, q: int) -> Dict:
    return {
        "site": [format_coordinate(c) for c in lattice.site_of(q)],
        "qubit": lattice.slot_of(q),
    }


@dataclass
class Decomposition:
    """Depth-1 map and the normal form it produces

    Unconstrained qubits carry no stabilizer at all after the map.
    """

    lattice: Lattice
    clifford: OnSiteClifford
    chains: List[IsingChain] = field(default_factory=list)
    bell_pairs: List[Tuple[int, int]] = field(default_factory=list)
    free_qubits: List[int] = field(default_factory=list)
    unconstrained_qubits: List[int] = field(default_factory=list)

    def normal_form(self) -> StabilizerGroup:
        lattice = self.lattice
        gens = [PauliOp(lattice, (), (q,)) for q in self.free_qubits]
        for a, b in self.bell_pairs:
            gens += [PauliOp(lattice, (a, b), ()), PauliOp(lattice, (), (a, b))]
        for chain in self.chains:
            gens += chain.couplings(lattice)
        return StabilizerGroup(lattice, gens, check_abelian=False, name="normal-form")

    def participation(self) -> List[int]:
        """Number of chains through each site"""
        counts = [0] * len(self.lattice.sites)
        for chain in self.chains:
            for s in range(chain.first_site, chain.last_site + 1):
                counts[s] += 1
        return counts

    def interval_logicals(self) -> Dict[Interval, int]:
        """Logical dimension on every site interval, predicted from the normal form

        A chain meeting the interval contributes its boundary Z, plus the X string
        when it lies entirely inside; an unconstrained qubit contributes two.
        """
        n = len(self.lattice.sites)
        site_of = self.lattice.qubit_site
        out = {}
        for lo in range(n):
            for hi in range(lo, n):
                count = 2 * sum(1 for q in self.unconstrained_qubits if lo <= site_of[q] <= hi)
                for chain in self.chains:
                    first, last = chain.interval
                    if last < lo or first > hi:
                        continue
                    count += 2 if lo <= first and last <= hi else 1
                out[(lo, hi)] = count
        return out

    def to_json(self) -> Dict:
        lattice = self.lattice
        return {
            "chains": [
                {"qubits": [_qubit_json(lattice, q) for q in chain.qubits]}
                for chain in self.chains
            ],
            "bell_pairs": [
                [_qubit_json(lattice, a), _qubit_json(lattice, b)] for a, b in self.bell_pairs
            ],
            "free_qubits": [_qubit_json(lattice, q) for q in self.free_qubits],
            "unconstrained_qubits": [_qubit_json(lattice, q) for q in self.unconstrained_qubits],
            "participation": self.participation(),
            "clifford": self.clifford.to_json(),
        }


def _quotient_images(zrows: np.ndarray, n: int) -> np.ndarray:
    """Row j: image of the j-th unit vector in F2^n / rowspace(zrows)"""
    space = Subspace(n, F2Matrix.from_dense(zrows, n))
    pivots = set(space.pivots)
    free = [c for c in range(n) if c not in pivots]
    images = np.zeros((n, len(free)), dtype=np.uint8)
    basis = space.basis.dense()
    for k, p in enumerate(space.pivots):
        images[p] = basis[k, free]
    for k, c in enumerate(free):
        images[c, k] = 1
    return images


def _chain_vectors(site_images: List[np.ndarray], dim: int) -> List[Tuple[Interval, np.ndarray]]:
    """One quotient vector per chain, with the chain's interval

    Chains covering [l, r] span the intersection C[l, r] of the site images;
    those covering exactly [l, r] complete C[l-1, r] + C[l, r+1] inside it.
    """
    n = len(site_images)
    spans: Dict[Interval, Subspace] = {}
    images = [Subspace(dim, F2Matrix.from_dense(m, dim)) for m in site_images]
    for lo in range(n):
        if images[lo].dim == 0:
            continue
        cur = images[lo]
        for hi in range(lo, n):
            if hi > lo:
                cur = subspace_intersection(cur, images[hi])
            if cur.dim == 0:
                break
            spans[(lo, hi)] = cur
    out = []
    for (lo, hi), span in sorted(spans.items()):
        larger = [spans[k].basis for k in ((lo - 1, hi), (lo, hi + 1)) if k in spans]
        small = Subspace(dim)
        for b in larger:
            small = Subspace(dim, small.basis.vstack(b))
        reps = quotient_basis(span, small)
        for i in range(reps.nrows):
            out.append(((lo, hi), reps.row(i)))
    return out


def _read_chains(red: _Reduction) -> List[IsingChain]:
    n = red.num_sites
    coords = [(s, q) for s in range(n) for q in red.qubits(s)]
    total = len(coords)
    if total == 0:
        return []
    xcols = [2 * q for _, q in coords]
    if red.rows[:, xcols].any():
        raise DecompositionError("group is not Z type after the site rotations")
    zrows = red.rows[:, [2 * q + 1 for _, q in coords]]
    images = _quotient_images(zrows, total)
    dim = images.shape[1]
    site_images, offset = [], 0
    for s in range(n):
        k = len(red.active[s])
        block = images[offset:offset + k]
        if k and Subspace(dim, F2Matrix.from_dense(block, dim)).dim != k:
            raise DecompositionError(f"site {s} still carries a one-site element")
        site_images.append(block)
        offset += k
    vectors = _chain_vectors(site_images, dim) if dim else []

    chain_qubits: List[List[int]] = [[] for _ in vectors]
    for s in range(n):
        through = [c for c, ((lo, hi), _) in enumerate(vectors) if lo <= s <= hi]
        k = len(red.active[s])
        if len(through) != k:
            raise DecompositionError(
                f"site {s}: {len(through)} chains for {k} constrained qubits"
            )
        if not k:
            continue
        solver = SpanSolver(F2Matrix.from_dense(site_images[s], dim))
        coeffs = [solver.solve(vectors[c][1]) for c in through]
        if any(x is None for x in coeffs):
            raise DecompositionError(f"site {s}: a chain vector is outside the site image")
        t = np.array(coeffs, dtype=np.uint8)
        units = [_unit(row) for row in t]
        if all(u is not None for u in units) and len(set(units)) == k:
            positions = units
        else:
            frame = np.zeros((2 * k, 2 * k), dtype=np.uint8)
            t_inv = f2_inverse(F2Matrix.from_dense(t)).dense()
            frame[1::2, 1::2] = t_inv
            frame[0::2, 0::2] = t.T
            red.apply(s, frame)
            positions = list(range(k))
        qubits = red.qubits(s)
        for c, p in zip(through, positions):
            chain_qubits[c].append(qubits[p])
    return [IsingChain(interval[0], chain_qubits[c]) for c, (interval, _) in enumerate(vectors)]


def ising_decompose(g: StabilizerGroup) -> Decomposition:
    """Depth-1 on-site map taking g to free qubits, Bell pairs and Ising chains"""
    _check_chain(g)
    attributes = {"plrmc.group": g.name or "group", "plrmc.qubits": g.lattice.num_qubits}
    with telemetry.span("plrmc.decompose", attributes):
        return _decompose(g)


def _decompose(g: StabilizerGroup) -> Decomposition:
    red = _Reduction(g)
    n = red.num_sites

    free: List[int] = []
    for s in range(n):
        local = red.within([s])
        if local.shape[0]:
            frame, positions = _frame(len(red.active[s]), zs=list(local))
            red.apply(s, frame)
            free += red.split_off(s, positions)

    bell: List[Tuple[int, int]] = []
    for s in range(n - 1):
        bell += _peel_bell_pairs(red, s)[2]

    unconstrained: List[int] = []
    for s in range(n):
        proj = red.projection(s)
        q = len(red.active[s])
        if proj.shape[0]:
            if symplectic_products(F2Matrix.from_dense(proj), F2Matrix.from_dense(proj)).any():
                raise DecompositionError(f"site {s} is not abelian after removing Bell pairs")
            frame, positions = _frame(q, zs=list(proj))
            red.apply(s, frame)
        else:
            positions = []
        idle = [p for p in range(q) if p not in positions]
        unconstrained += red.split_off(s, idle) if idle else []

    chains = _read_chains(red)
    result = Decomposition(
        g.lattice, red.clifford(), chains, bell, sorted(free), sorted(unconstrained)
    )
    if result.clifford.apply_group(g) != result.normal_form():
        raise DecompositionError("image of the group differs from the claimed normal form")
    logger.info(
        f"Decomposed {g.name or 'group'}: {len(chains)} chains, {len(bell)} Bell pairs, "
        f"{len(free)} free qubits, {len(unconstrained)} unconstrained"
    )
    return result


def brute_force_interval_logicals(g: StabilizerGroup) -> Dict[Interval, int]:
    """Logical dimension of g on every site interval, computed directly

    The count is the commutant of g on the interval's qubits modulo the
    stabilizers supported there; it does not depend on any decomposition.
    """
    _check_chain(g)
    lattice = g.lattice
    n = len(lattice.sites)
    out = {}
    for lo in range(n):
        for hi in range(lo, n):
            qubits = [q for s in range(lo, hi + 1) for q in lattice.site_qubits[s]]
            out[(lo, hi)] = len(centralizer_in_region(g, Region(lattice, qubits)))
    return out
