"""Gate-level circuits with exact branch-enumerating execution.

Measurement never samples here: ``run_exact`` forks one branch per
outcome and carries exact probabilities, so per-branch claims can be
verified directly.  Shot noise only enters through ``sample_counts``,
which draws from the exact distribution with a seeded numpy PCG64
generator (``np.random.default_rng(seed)``), making counts
bit-reproducible for a fixed seed.

Text format (one step per line, ``#`` starts a comment):

    qubits 6          # optional header; otherwise inferred from indices
    H 0
    CNOT 0 1
    M 3 -> c0
    X 5 if c0

Gate names: H X Y Z S CNOT SWAP.  ``M q -> name`` measures one qubit
into a named classical bit.  ``<gate> <targets> if <bit>`` applies the
gate when the named bit reads 1.  CUSTOM gates have no text form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qstate import StateVector, apply_unitary, basis_state, _check_unitary

_SQ2 = 1 / np.sqrt(2)
GATE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}
GATE_ARITY = {"H": 1, "X": 1, "Y": 1, "Z": 1, "S": 1, "CNOT": 2, "SWAP": 2}


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple
    matrix: np.ndarray | None = None  # CUSTOM only

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.kind == "CUSTOM":
            if self.matrix is None:
                raise ValueError("CUSTOM gate needs a matrix")
            m = _check_unitary(self.matrix, len(self.targets))
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        else:
            if self.kind not in GATE_ARITY:
                raise ValueError(f"unknown gate kind {self.kind!r}")
            if len(self.targets) != GATE_ARITY[self.kind]:
                raise ValueError(
                    f"{self.kind} takes {GATE_ARITY[self.kind]} target(s), "
                    f"got {len(self.targets)}"
                )

    def unitary(self) -> np.ndarray:
        return self.matrix if self.kind == "CUSTOM" else GATE_MATRICES[self.kind]


@dataclass(frozen=True)
class Measure:
    qubits: tuple
    bits: tuple  # classical bit names, one per qubit

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "bits", tuple(self.bits))
        if len(self.qubits) != len(self.bits):
            raise ValueError("one classical bit per measured qubit")


@dataclass(frozen=True)
class ClassicallyControlled:
    gate: Gate
    bit: str
    value: int = 1


class Circuit:
    """Ordered list of gates, measurements, and classically controlled gates."""

    def __init__(self, num_qubits: int):
        if num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        self.num_qubits = num_qubits
        self.steps: list = []

    # -- builders ----------------------------------------------------------
    def add(self, step):
        if isinstance(step, Gate) or (
            isinstance(step, ClassicallyControlled) and isinstance(step.gate, Gate)
        ):
            targets = step.targets if isinstance(step, Gate) else step.gate.targets
            for q in targets:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"qubit {q} out of range")
        elif isinstance(step, Measure):
            for q in step.qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"qubit {q} out of range")
        else:
            raise TypeError(f"not a circuit step: {step!r}")
        self.steps.append(step)
        return self

    def gate(self, kind, *targets):
        return self.add(Gate(kind, targets))

    def h(self, q):
        return self.gate("H", q)

    def x(self, q):
        return self.gate("X", q)

    def z(self, q):
        return self.gate("Z", q)

    def cnot(self, ctrl, tgt):
        return self.gate("CNOT", ctrl, tgt)

    def custom(self, matrix, targets):
        return self.add(Gate("CUSTOM", tuple(targets), np.asarray(matrix)))

    def measure(self, qubit, bit):
        return self.add(Measure((qubit,), (bit,)))

    def c_if(self, kind, targets, bit, value=1):
        return self.add(ClassicallyControlled(Gate(kind, tuple(targets)), bit, value))

    def bell_measure(self, q1, q2, bit1, bit2):
        """CNOT(q1->q2), H(q1), then measure q1 -> bit1 and q2 -> bit2.

        Outcome (b1, b2) names the Bell state of (q1, q2):
        00 -> phi+, 01 -> psi+, 10 -> phi-, 11 -> psi-.
        """
        if q1 == q2:
            raise ValueError("bell_measure needs two distinct qubits")
        self.cnot(q1, q2)
        self.h(q1)
        self.measure(q1, bit1)
        self.measure(q2, bit2)
        return self

    # -- bookkeeping -------------------------------------------------------
    def classical_bits(self) -> list:
        """Bit names in first-write order."""
        order = []
        for step in self.steps:
            if isinstance(step, Measure):
                for b in step.bits:
                    if b not in order:
                        order.append(b)
        return order

    def validate(self):
        written = set()
        for step in self.steps:
            if isinstance(step, Measure):
                written.update(step.bits)
            elif isinstance(step, ClassicallyControlled):
                if step.bit not in written:
                    raise ValueError(
                        f"classical bit {step.bit!r} read before it is written"
                    )


@dataclass(frozen=True)
class BranchEntry:
    bits: str  # classical bit values in first-write order
    probability: float
    state: StateVector


@dataclass(frozen=True)
class BranchDistribution:
    bit_names: tuple
    entries: tuple  # of BranchEntry, lexicographic by bits

    def probabilities(self) -> dict:
        return {e.bits: e.probability for e in self.entries}


_PRUNE = 1e-12


def _measure_qubit(psi: StateVector, qubit: int):
    """Yield (outcome, probability, post state) for nonzero outcomes."""
    n = psi.num_qubits
    t = psi.amplitudes.reshape([2] * n)
    for outcome in (0, 1):
        idx = [slice(None)] * n
        idx[qubit] = outcome
        sub = t[tuple(idx)]
        p = float(np.sum(np.abs(sub) ** 2))
        if p <= _PRUNE:
            continue
        post = np.zeros_like(t)
        post[tuple(idx)] = sub / np.sqrt(p)
        yield outcome, p, StateVector(n, post.reshape(-1))


def run_exact(c: Circuit, initial: StateVector | None = None) -> BranchDistribution:
    """Execute exactly, forking one branch per measurement outcome.

    Branches with probability below 1e-12 are dropped; output is ordered
    lexicographically by classical bit values (first-write bit order).
    """
    c.validate()
    state = initial if initial is not None else basis_state(c.num_qubits, 0)
    if state.num_qubits != c.num_qubits:
        raise ValueError("initial state qubit count does not match circuit")
    branches = [({}, 1.0, state)]
    for step in c.steps:
        if isinstance(step, Gate):
            branches = [
                (bits, p, apply_unitary(psi, step.unitary(), step.targets))
                for bits, p, psi in branches
            ]
        elif isinstance(step, ClassicallyControlled):
            branches = [
                (
                    bits,
                    p,
                    apply_unitary(psi, step.gate.unitary(), step.gate.targets)
                    if bits.get(step.bit) == step.value
                    else psi,
                )
                for bits, p, psi in branches
            ]
        elif isinstance(step, Measure):
            for qubit, bit in zip(step.qubits, step.bits):
                forked = []
                for bits, p, psi in branches:
                    for outcome, pq, post in _measure_qubit(psi, qubit):
                        nb = dict(bits)
                        nb[bit] = outcome
                        forked.append((nb, p * pq, post))
                branches = forked
        else:  # pragma: no cover - add() blocks this
            raise TypeError(f"malformed circuit step: {step!r}")
    names = c.classical_bits()
    entries = [
        BranchEntry("".join(str(bits[b]) for b in names), p, psi)
        for bits, p, psi in branches
    ]
    entries.sort(key=lambda e: e.bits)
    return BranchDistribution(tuple(names), tuple(entries))


def sample_counts(c: Circuit, shots: int, seed: int) -> dict:
    """Multinomial shot sampling over the exact branch distribution.

    Reproducible: uses numpy's PCG64 generator seeded with ``seed``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    dist = run_exact(c)
    rng = np.random.default_rng(seed)
    probs = np.array([e.probability for e in dist.entries])
    draws = rng.multinomial(shots, probs / probs.sum())
    return {
        e.bits: int(k) for e, k in zip(dist.entries, draws) if k > 0
    }


# -- text serialization -----------------------------------------------------


class CircuitParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def to_text(c: Circuit) -> str:
    lines = [f"qubits {c.num_qubits}"]
    for step in c.steps:
        if isinstance(step, Gate):
            if step.kind == "CUSTOM":
                raise ValueError("CUSTOM gates have no text form")
            lines.append(f"{step.kind} {' '.join(map(str, step.targets))}")
        elif isinstance(step, Measure):
            for q, b in zip(step.qubits, step.bits):
                lines.append(f"M {q} -> {b}")
        elif isinstance(step, ClassicallyControlled):
            g = step.gate
            if g.kind == "CUSTOM":
                raise ValueError("CUSTOM gates have no text form")
            lines.append(f"{g.kind} {' '.join(map(str, g.targets))} if {step.bit}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Circuit:
    steps = []
    num_qubits = None
    max_qubit = -1

    def parse_int(tok, line_no):
        try:
            return int(tok)
        except ValueError:
            raise CircuitParseError(line_no, f"expected integer, got {tok!r}") from None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0].upper()
        if head == "QUBITS":
            if len(toks) != 2:
                raise CircuitParseError(line_no, "usage: qubits N")
            num_qubits = parse_int(toks[1], line_no)
            continue
        if head == "M":
            if len(toks) != 4 or toks[2] != "->":
                raise CircuitParseError(line_no, "usage: M <qubit> -> <bit>")
            q = parse_int(toks[1], line_no)
            max_qubit = max(max_qubit, q)
            steps.append(Measure((q,), (toks[3],)))
            continue
        if head not in GATE_ARITY:
            raise CircuitParseError(line_no, f"unknown gate {toks[0]!r}")
        arity = GATE_ARITY[head]
        cond = None
        body = toks[1:]
        if "if" in [t.lower() for t in body]:
            i = [t.lower() for t in body].index("if")
            if len(body) != i + 2:
                raise CircuitParseError(line_no, "usage: <gate> <targets> if <bit>")
            cond = body[i + 1]
            body = body[:i]
        if len(body) != arity:
            raise CircuitParseError(
                line_no, f"{head} takes {arity} target(s), got {len(body)}"
            )
        targets = tuple(parse_int(t, line_no) for t in body)
        max_qubit = max(max_qubit, *targets)
        gate = Gate(head, targets)
        steps.append(ClassicallyControlled(gate, cond) if cond else gate)

    if max_qubit < 0 and num_qubits is None:
        raise CircuitParseError(1, "empty circuit and no qubits header")
    n = num_qubits if num_qubits is not None else max_qubit + 1
    c = Circuit(n)
    for step in steps:
        c.add(step)
    c.validate()
    return c
