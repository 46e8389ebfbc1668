"""Teleportation schemes over two Bell pairs, the five-qubit-cluster
baseline, the generalized-Bell-type compression step, and resource
accounting.

Correction convention: a Bell measurement (CNOT then H, reading bits
(b1, b2)) maps outcomes to receiver Paulis 00 -> I, 01 -> X, 10 -> Z,
11 -> Z.X (X applied first).  The tables below are locked by tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from .circuit import Circuit
from .circuit import run_exact
from .qstate import (
    StateVector,
    apply_unitary,
    basis_state,
    prep_unitary,
    project_qubits,
    single_qubit_state,
    split_product,
    tensor,
)

NORM_ATOL = 1e-10


@dataclass(frozen=True)
class GeneralizedBellTypeState:
    """Symbolic alpha|x> + beta|x-bar> on n qubits (x-bar = bitwise complement)."""

    n: int
    x: int
    alpha: complex
    beta: complex

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= self.x < 2 ** self.n:
            raise ValueError(f"x={self.x} out of range for n={self.n}")
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0) > NORM_ATOL:
            raise ValueError("|alpha|^2 + |beta|^2 must be 1")

    @property
    def x_bar(self) -> int:
        return (2 ** self.n - 1) ^ self.x

    def to_statevector(self) -> StateVector:
        amps = np.zeros(2 ** self.n, dtype=complex)
        amps[self.x] = self.alpha
        amps[self.x_bar] = self.beta
        return StateVector(self.n, amps)


@dataclass(frozen=True)
class TwoQubitState:
    """General two-qubit input alpha|00> + beta|01> + gamma|10> + delta|11>."""

    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def __post_init__(self):
        s = sum(abs(c) ** 2 for c in (self.alpha, self.beta, self.gamma, self.delta))
        if abs(s - 1.0) > NORM_ATOL:
            raise ValueError("coefficients must be normalized")

    def to_statevector(self) -> StateVector:
        return StateVector(
            2, np.array([self.alpha, self.beta, self.gamma, self.delta], dtype=complex)
        )


@dataclass(frozen=True)
class TeleportBranch:
    outcome_bits: str
    corrections: tuple  # of (receiver, pauli, qubit)
    probability: float
    output: StateVector


@dataclass(frozen=True)
class ResourceReport:
    bell_pairs: int
    channel_qubits: int
    unknown_coefficients: int

    def __post_init__(self):
        expected = count_bell_pairs(self.unknown_coefficients)
        if self.bell_pairs != expected:
            raise ValueError(
                f"bell_pairs={self.bell_pairs}, expected ceil(log2("
                f"{self.unknown_coefficients})) = {expected}"
            )
        if self.channel_qubits != 2 * self.bell_pairs:
            raise ValueError("channel_qubits must be 2 * bell_pairs")


def count_bell_pairs(unknown_coefficients: int) -> int:
    if unknown_coefficients < 1:
        raise ValueError("need at least one coefficient")
    return ceil(log2(unknown_coefficients))


def count_bell_resources(unknown_coefficients: int) -> ResourceReport:
    """Bell pairs needed for a state with the given number of unknown
    coefficients: ceil(log2 m)."""
    pairs = count_bell_pairs(unknown_coefficients)
    return ResourceReport(pairs, 2 * pairs, unknown_coefficients)


# -- state constructors ------------------------------------------------------


def make_ghz_class(m: int, alpha: complex, beta: complex) -> StateVector:
    """alpha|0...0> + beta|1...1> on m qubits."""
    return GeneralizedBellTypeState(m, 0, alpha, beta).to_statevector()


def prepare_bell() -> StateVector:
    """|phi+> = (|00> + |11>) / sqrt(2)."""
    s = 1 / np.sqrt(2)
    return StateVector(2, np.array([s, 0, 0, s], dtype=complex))


def prepare_cluster5() -> StateVector:
    """The five-qubit cluster channel (|00000>+|01011>+|10100>+|11111>)/2."""
    amps = np.zeros(32, dtype=complex)
    for idx in (0b00000, 0b01011, 0b10100, 0b11111):
        amps[idx] = 0.5
    return StateVector(5, amps)


# -- compression of generalized Bell-type states -----------------------------


@dataclass(frozen=True)
class InversionRecord:
    """How to undo the CNOT-ladder compression: which tail qubits were
    flipped and whether the head qubit was relabeled with an X."""

    n: int
    head_flip: bool
    tail_flips: tuple  # qubit indices in 1..n-1


def compress_ghz_class(s: GeneralizedBellTypeState):
    """Reduce alpha|x> + beta|x-bar> to (alpha|0> + beta|1>) on one qubit.

    CNOT ladder from qubit 0, X on tail qubits left at 1, and an X on the
    head if bit 0 of x is set.  Returns the compressed qubit and the
    record ``expand_ghz_class`` needs to invert the reduction.
    """
    n = s.n
    bits = [(s.x >> (n - 1 - q)) & 1 for q in range(n)]
    head_flip = bits[0] == 1
    tail_flips = tuple(q for q in range(1, n) if bits[q] ^ bits[0])
    psi = s.to_statevector()
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    for q in range(1, n):
        psi = apply_unitary(psi, cnot, [0, q])
    for q in tail_flips:
        psi = apply_unitary(psi, x, [q])
    if head_flip:
        psi = apply_unitary(psi, x, [0])
    if n > 1:
        compressed = project_qubits(psi, {q: 0 for q in range(1, n)})
    else:
        compressed = psi
    return compressed, InversionRecord(n, head_flip, tail_flips)


def expand_ghz_class(q: StateVector, record: InversionRecord) -> StateVector:
    """Invert ``compress_ghz_class``: rebuild the n-qubit state from the
    teleported single qubit and fresh |0> ancillas."""
    if q.num_qubits != 1:
        raise ValueError("expand takes a single-qubit state")
    if record.n < 1 or any(not 1 <= t < record.n for t in record.tail_flips):
        raise ValueError("malformed inversion record")
    psi = q if record.n == 1 else tensor(q, basis_state(record.n - 1, 0))
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    if record.head_flip:
        psi = apply_unitary(psi, x, [0])
    for t in record.tail_flips:
        psi = apply_unitary(psi, x, [t])
    for t in range(1, record.n):
        psi = apply_unitary(psi, cnot, [0, t])
    return psi


# -- teleportation ------------------------------------------------------------

# Bell outcome (b1, b2) -> Paulis the receiver applies, in application order.
CORRECTION_TABLE = {
    "00": (),
    "01": ("X",),
    "10": ("Z",),
    "11": ("X", "Z"),
}


def _corrections_for(bits: str, receiver: int, qubits) -> tuple:
    out = []
    b1, b2 = bits
    if b2 == "1":
        out.extend((receiver, "X", q) for q in qubits)
    if b1 == "1":
        out.append((receiver, "Z", qubits[0]))
    return tuple(out)


def teleport_single(psi: StateVector) -> list:
    """Standard one-qubit teleportation over |phi+>, all four branches.

    Qubit layout: 0 = input, (1, 2) = Bell pair, receiver holds 2.
    """
    if psi.num_qubits != 1:
        raise ValueError("teleport_single takes a single-qubit state")
    c = Circuit(3)
    c.custom(prep_unitary(psi.amplitudes), [0])
    c.h(1)
    c.cnot(1, 2)
    c.bell_measure(0, 1, "b1", "b2")
    c.c_if("X", (2,), "b2")
    c.c_if("Z", (2,), "b1")
    dist = run_exact(c)
    branches = []
    for e in dist.entries:
        out = project_qubits(e.state, {0: int(e.bits[0]), 1: int(e.bits[1])})
        branches.append(
            TeleportBranch(e.bits, _corrections_for(e.bits, 1, (0,)), e.probability, out)
        )
    return branches


def multi_output_teleport(
    chi_a: GeneralizedBellTypeState, chi_b: GeneralizedBellTypeState
):
    """Teleport an m-qubit and an (m+1)-qubit generalized Bell-type state
    to two receivers over exactly two Bell pairs.

    Both inputs are compressed to single qubits, sent through independent
    standard teleportations, and re-expanded at the receivers.  Returns
    (branches, resource report); the joint output of every branch is
    chi_a (x) chi_b.
    """
    if chi_b.n != chi_a.n + 1:
        raise ValueError("chi_b must have exactly one more qubit than chi_a")
    qa, rec_a = compress_ghz_class(chi_a)
    qb, rec_b = compress_ghz_class(chi_b)
    branches = []
    for ba in teleport_single(qa):
        out_a = expand_ghz_class(ba.output, rec_a)
        for bb in teleport_single(qb):
            out_b = expand_ghz_class(bb.output, rec_b)
            corrections = _corrections_for(ba.outcome_bits, 1, tuple(range(chi_a.n)))
            corrections += _corrections_for(bb.outcome_bits, 2, tuple(range(chi_b.n)))
            branches.append(
                TeleportBranch(
                    ba.outcome_bits + bb.outcome_bits,
                    corrections,
                    ba.probability * bb.probability,
                    tensor(out_a, out_b),
                )
            )
    branches.sort(key=lambda b: b.outcome_bits)
    report = ResourceReport(bell_pairs=2, channel_qubits=4, unknown_coefficients=4)
    return branches, report


def teleport_two_qubit_general(s: TwoQubitState):
    """Teleport a general (possibly entangled) two-qubit state with two
    Bell pairs: one standard teleportation per qubit.

    Qubit layout: (0, 1) input pair, (2, 3) and (4, 5) Bell pairs;
    the receiver side holds 3 and 5.
    """
    c = Circuit(6)
    c.custom(prep_unitary(s.to_statevector().amplitudes), [0, 1])
    c.h(2)
    c.cnot(2, 3)
    c.h(4)
    c.cnot(4, 5)
    c.bell_measure(0, 2, "b1", "b2")
    c.bell_measure(1, 4, "b3", "b4")
    c.c_if("X", (3,), "b2")
    c.c_if("Z", (3,), "b1")
    c.c_if("X", (5,), "b4")
    c.c_if("Z", (5,), "b3")
    dist = run_exact(c)
    branches = []
    for e in dist.entries:
        assign = {0: int(e.bits[0]), 2: int(e.bits[1]), 1: int(e.bits[2]), 4: int(e.bits[3])}
        out = project_qubits(e.state, assign)  # remaining qubits (3, 5)
        corrections = _corrections_for(e.bits[:2], 1, (0,)) + _corrections_for(
            e.bits[2:], 2, (1,)
        )
        branches.append(TeleportBranch(e.bits, corrections, e.probability, out))
    report = ResourceReport(bell_pairs=2, channel_qubits=4, unknown_coefficients=4)
    return branches, report


def cluster_channel_teleport(
    chi_a: GeneralizedBellTypeState, chi_b: GeneralizedBellTypeState
):
    """Baseline multi-output teleportation over the five-qubit cluster
    channel, for the m=1 case (chi_a on 1 qubit, chi_b on 2).

    The channel is exactly the five-qubit cluster state; its qubit 3 goes
    to receiver 1 and qubits 4, 5 to receiver 2.  Alice compresses her
    inputs locally, which turns her entangled-basis measurement into two
    Bell measurements; every branch then admits local Pauli corrections.
    """
    if chi_a.n != 1 or chi_b.n != 2:
        raise ValueError("cluster baseline is defined for m = 1")
    qa, rec_a = compress_ghz_class(chi_a)
    _, rec_b = compress_ghz_class(chi_b)

    # Register: 0 = chi_a, (1, 2) = chi_b, 3..7 = cluster qubits 1..5.
    c = Circuit(8)
    c.custom(prep_unitary(chi_a.to_statevector().amplitudes), [0])
    c.custom(prep_unitary(chi_b.to_statevector().amplitudes), [1, 2])
    c.custom(prep_unitary(prepare_cluster5().amplitudes), [3, 4, 5, 6, 7])
    # Alice's local compressions.
    if rec_a.head_flip:
        c.x(0)
    c.cnot(1, 2)
    for t in rec_b.tail_flips:
        c.x(1 + t)
    if rec_b.head_flip:
        c.x(1)
    # Bell measurements against the cluster qubits Alice keeps.
    c.bell_measure(0, 3, "b1", "b2")
    c.bell_measure(1, 4, "b3", "b4")
    # Receiver 1 on cluster qubit 3; receiver 2 on the (4, 5) code pair,
    # where logical X is X(x)X and logical Z acts on either qubit.
    c.c_if("X", (5,), "b2")
    c.c_if("Z", (5,), "b1")
    c.c_if("X", (6,), "b4")
    c.c_if("X", (7,), "b4")
    c.c_if("Z", (6,), "b3")
    dist = run_exact(c)

    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    branches = []
    for e in dist.entries:
        assign = {0: int(e.bits[0]), 3: int(e.bits[1]), 1: int(e.bits[2]), 4: int(e.bits[3]), 2: 0}
        joint = project_qubits(e.state, assign)  # qubits (5, 6, 7)
        bob1, bob2 = split_product(joint, [1, 2])
        out_a = expand_ghz_class(bob1, rec_a)
        # Receiver 2 holds alpha|00> + beta|11>; a final CNOT frees the
        # compressed qubit, then the record rebuilds chi_b.
        pair = apply_unitary(bob2, cnot, [0, 1])
        qb_out = project_qubits(pair, {1: 0})
        out_b = expand_ghz_class(qb_out, rec_b)
        corrections = _corrections_for(e.bits[:2], 1, (0,)) + _corrections_for(
            e.bits[2:], 2, (0, 1)
        )
        branches.append(
            TeleportBranch(e.bits, corrections, e.probability, tensor(out_a, out_b))
        )
    return branches


# -- the experiment circuit ---------------------------------------------------


def experiment_circuit(
    input_a: StateVector | None = None,
    input_b: StateVector | None = None,
    measure_outputs: bool = True,
) -> Circuit:
    """The six-qubit two-teleportation experiment circuit.

    Defaults teleport |+> and |+> (prepared with Hadamards).  Layout:
    0, 3 information qubits; (1, 2) and (4, 5) Bell pairs; receivers
    hold 2 and 5.  With ``measure_outputs`` the receiver qubits land in
    classical bits out1, out2.
    """
    c = Circuit(6)
    if input_a is None:
        c.h(0)
    else:
        c.custom(prep_unitary(input_a.amplitudes), [0])
    if input_b is None:
        c.h(3)
    else:
        c.custom(prep_unitary(input_b.amplitudes), [3])
    c.h(1)
    c.cnot(1, 2)
    c.h(4)
    c.cnot(4, 5)
    c.bell_measure(0, 1, "b1", "b2")
    c.bell_measure(3, 4, "b3", "b4")
    c.c_if("X", (2,), "b2")
    c.c_if("Z", (2,), "b1")
    c.c_if("X", (5,), "b4")
    c.c_if("Z", (5,), "b3")
    if measure_outputs:
        c.measure(2, "out1")
        c.measure(5, "out2")
    return c


EXPERIMENT_RECEIVER_QUBITS = (2, 5)
EXPERIMENT_OUTPUT_BITS = ("out1", "out2")
