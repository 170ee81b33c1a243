"""Cyclic sequences of instantaneous stabilizer groups and their verification"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Tuple
import logging

from plrmc.core.pauli import Lattice, Region, to_doubled
from plrmc.core.stab import StabilizerGroup
from plrmc.dynamics.rev import ConjugateBases, TransitionReport, is_reversible_pair
from plrmc.exceptions import NotReversibleError, PreconditionError
from plrmc.telemetry import telemetry

logger = logging.getLogger(__name__)


@dataclass
class IsgSequence:
    """Measurement circuit as the cycle steps[0] → steps[1] → … → steps[0]

    A trailing copy of steps[0] is dropped; repeated consecutive groups are idle
    steps. Non-periodic sequences (a single open run of transitions) set
    periodic=False.
    """

    lattice: Lattice
    steps: List[StabilizerGroup]
    radius: Fraction = Fraction(1)
    name: str = ""
    interface: Optional[Region] = None
    axis: Optional[int] = None
    window: Optional[Fraction] = None
    periodic: bool = True
    conjugate_bases: List[Optional[ConjugateBases]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    # transition index -> conjugate bases fixed by the model instead of searched
    pinned: Dict[int, ConjugateBases] = field(default_factory=dict)

    def __post_init__(self):
        if not self.steps:
            raise PreconditionError("a sequence needs at least one stabilizer group")
        for g in self.steps:
            if g.lattice != self.lattice:
                raise PreconditionError("every step must live on the sequence lattice")
        self.radius = Fraction(self.radius)
        if self.periodic and len(self.steps) > 1 and self.steps[-1] == self.steps[0]:
            self.steps = self.steps[:-1]
        if len(self.conjugate_bases) != self.num_transitions:
            self.conjugate_bases = [None] * self.num_transitions
        for t in self.pinned:
            if not 0 <= t < self.num_transitions:
                raise PreconditionError(f"pinned conjugate bases for missing transition {t}")

    @property
    def period(self) -> int:
        return len(self.steps)

    @property
    def base(self) -> StabilizerGroup:
        return self.steps[0]

    @property
    def num_transitions(self) -> int:
        if self.periodic:
            return len(self.steps) if len(self.steps) > 1 else 0
        return len(self.steps) - 1

    def transitions(self) -> Iterator[Tuple[int, StabilizerGroup, StabilizerGroup]]:
        for t in range(self.num_transitions):
            yield t, self.steps[t], self.steps[(t + 1) % len(self.steps)]

    def conjugates(self, t: int) -> ConjugateBases:
        """Conjugate bases of transition t, searched on first use"""
        cb = self.conjugate_bases[t]
        if cb is None:
            a, b = self.steps[t], self.steps[(t + 1) % len(self.steps)]
            report = is_reversible_pair(a, b, radius=self.radius, pinned=self.pinned.get(t))
            if not report.locally_reversible:
                raise NotReversibleError(
                    f"transition {t} of {self.name or 'sequence'} is not locally reversible "
                    f"at radius {self.radius}"
                )
            cb = report.conjugate_bases
            self.conjugate_bases[t] = cb
        return cb

    def with_idle(self, after: List[int]) -> "IsgSequence":
        """Copy with each listed step repeated once"""
        steps: List[StabilizerGroup] = []
        moved: Dict[int, int] = {}
        for t, g in enumerate(self.steps):
            steps.append(g)
            steps.extend([g] * after.count(t))
            moved[t] = len(steps) - 1
        return IsgSequence(
            self.lattice, steps, self.radius, self.name, self.interface, self.axis,
            self.window, self.periodic, metadata=dict(self.metadata),
            pinned={moved[t]: cb for t, cb in self.pinned.items()},
        )

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "period": self.period,
            "qubits": self.lattice.num_qubits,
            "radius": str(self.radius),
            "periodic": self.periodic,
            "interface_qubits": len(self.interface) if self.interface is not None else 0,
        }


@dataclass
class TransitionResult:
    index: int
    report: TransitionReport

    @property
    def passed(self) -> bool:
        return self.report.reversible and self.report.locally_reversible


@dataclass
class VerifyReport:
    name: str
    period: int
    radius: Fraction
    transitions: List[TransitionResult]
    periodic: bool = True

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.transitions)

    def failures(self) -> List[TransitionResult]:
        return [t for t in self.transitions if not t.passed]

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "period": self.period,
            "radius": str(self.radius),
            "periodic": self.periodic,
            "passed": self.passed,
            "transitions": [
                {"index": t.index, "passed": t.passed, **t.report.to_json()}
                for t in self.transitions
            ],
        }


def verify(seq: IsgSequence) -> VerifyReport:
    """Check every transition for reversibility and local conjugate bases

    Found conjugate bases are stored on the sequence for later evolution.
    """
    attributes = {
        "plrmc.model": seq.name,
        "plrmc.qubits": seq.lattice.num_qubits,
        "plrmc.steps": seq.period,
    }
    with telemetry.span("plrmc.verify", attributes) as span:
        results = []
        for t, a, b in seq.transitions():
            report = is_reversible_pair(a, b, radius=seq.radius, pinned=seq.pinned.get(t))
            if report.locally_reversible:
                seq.conjugate_bases[t] = report.conjugate_bases
            logger.debug(
                "transition %d: reversible=%s local=%s radius=%s",
                t, report.reversible, report.locally_reversible, report.radius_used,
            )
            results.append(TransitionResult(t, report))
        out = VerifyReport(seq.name, seq.period, seq.radius, results, seq.periodic)
        if span is not None:
            span.set_attribute("plrmc.passed", out.passed)
    if out.passed:
        logger.info("%s: all %d transitions locally reversible", seq.name or "sequence", len(results))
    else:
        logger.info(
            "%s: %d of %d transitions failed",
            seq.name or "sequence", len(out.failures()), len(results),
        )
    return out


def window_margin(seq: IsgSequence) -> int:
    """Doubled width kept clear of window edges: period · radius + 2ℓ"""
    ell2 = max(g.radius2 for g in seq.steps)
    return seq.period * to_doubled(seq.radius) + 2 * ell2
