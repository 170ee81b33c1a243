"""Depth-1 Clifford circuits: one symplectic matrix per site"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional
import logging

import numpy as np

from plrmc.core.f2core import F2Matrix, inverse as f2_inverse
from plrmc.core.pauli import Lattice, PauliOp, format_coordinate
from plrmc.core.stab import StabilizerGroup
from plrmc.exceptions import DecompositionError, LatticeMismatchError

logger = logging.getLogger(__name__)


def symplectic_form(q: int) -> np.ndarray:
    omega = np.zeros((2 * q, 2 * q), dtype=np.uint8)
    for i in range(q):
        omega[2 * i, 2 * i + 1] = 1
        omega[2 * i + 1, 2 * i] = 1
    return omega


def is_symplectic(m: np.ndarray) -> bool:
    omega = symplectic_form(m.shape[0] // 2)
    return bool(np.array_equal((m.astype(np.int64) @ omega @ m.T.astype(np.int64)) % 2, omega))


def transvection(v: np.ndarray) -> np.ndarray:
    """Matrix of x ↦ x + <x, v> v in row convention"""
    n = v.shape[0]
    omega = symplectic_form(n // 2)
    return (np.eye(n, dtype=np.int64) + np.outer(omega @ v, v)).astype(np.uint8) % 2


def random_symplectic(q: int, rng: np.random.Generator, steps: Optional[int] = None) -> np.ndarray:
    m = np.eye(2 * q, dtype=np.uint8)
    for _ in range(steps if steps is not None else 4 * q + 2):
        v = rng.integers(0, 2, size=2 * q).astype(np.uint8)
        if v.any():
            m = (m.astype(np.int64) @ transvection(v)) % 2
    return m.astype(np.uint8)


@dataclass
class OnSiteClifford:
    """Local Pauli vector v at a site (interleaved x, z per slot) maps to v · block"""

    lattice: Lattice
    blocks: Dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for site, block in self.blocks.items():
            q = len(self.lattice.site_qubits[site])
            if block.shape != (2 * q, 2 * q):
                raise DecompositionError(f"block for site {site} must be {2 * q}x{2 * q}")
            if not is_symplectic(block):
                raise DecompositionError(f"block for site {site} is not symplectic")

    @classmethod
    def identity(cls, lattice: Lattice) -> "OnSiteClifford":
        return cls(lattice, {})

    @classmethod
    def random(cls, lattice: Lattice, rng: np.random.Generator) -> "OnSiteClifford":
        return cls(
            lattice,
            {s: random_symplectic(len(qs), rng) for s, qs in enumerate(lattice.site_qubits)},
        )

    def block(self, site: int) -> np.ndarray:
        q = len(self.lattice.site_qubits[site])
        return self.blocks.get(site, np.eye(2 * q, dtype=np.uint8))

    def is_identity(self) -> bool:
        return all(np.array_equal(b, np.eye(b.shape[0], dtype=np.uint8)) for b in self.blocks.values())

    def apply(self, op: PauliOp) -> PauliOp:
        if op.lattice != self.lattice:
            raise LatticeMismatchError("operator lives on another lattice")
        sites = {int(self.lattice.qubit_site[q]) for q in op.support}
        xs, zs = set(op.x), set(op.z)
        for s in sites:
            if s not in self.blocks:
                continue
            qubits = self.lattice.site_qubits[s]
            v = np.zeros(2 * len(qubits), dtype=np.int64)
            for i, q in enumerate(qubits):
                v[2 * i] = q in op.x
                v[2 * i + 1] = q in op.z
            w = (v @ self.blocks[s]) % 2
            for i, q in enumerate(qubits):
                xs.discard(q)
                zs.discard(q)
                if w[2 * i]:
                    xs.add(q)
                if w[2 * i + 1]:
                    zs.add(q)
        return PauliOp(self.lattice, xs, zs)

    def apply_group(self, g: StabilizerGroup) -> StabilizerGroup:
        return StabilizerGroup(g.lattice, [self.apply(op) for op in g.generators], False, g.name)

    def then(self, other: "OnSiteClifford") -> "OnSiteClifford":
        """Apply self, then other"""
        sites = set(self.blocks) | set(other.blocks)
        blocks = {
            s: (self.block(s).astype(np.int64) @ other.block(s) % 2).astype(np.uint8)
            for s in sites
        }
        return OnSiteClifford(self.lattice, blocks)

    def inverse(self) -> "OnSiteClifford":
        blocks = {}
        for s, b in self.blocks.items():
            blocks[s] = f2_inverse(F2Matrix.from_dense(b)).dense()
        return OnSiteClifford(self.lattice, blocks)

    def to_json(self) -> List[Dict]:
        out = []
        for s in sorted(self.blocks):
            b = self.blocks[s]
            if np.array_equal(b, np.eye(b.shape[0], dtype=np.uint8)):
                continue
            out.append({
                "site": [format_coordinate(c) for c in self.lattice.sites[s]],
                "matrix": ["".join(str(int(x)) for x in row) for row in b],
            })
        return out
