"""Calibration-driven noise: CSV ingestion, Kraus channel construction,
and density-matrix execution of circuits.

Model summary, per gate on a calibrated device:

* amplitude damping with p = 1 - exp(-t / T1),
* pure dephasing at rate max(0, 1/T2 - 1/(2 T1)) over the gate duration,
  realized as a phase-flip channel,
* a depolarizing channel whose average gate infidelity equals the
  reported Pauli-X / CNOT error (uniform over nontrivial Paulis with
  probability p = err * (d + 1) / d),
* symmetric per-qubit readout confusion with flip probability equal to
  the reported readout assignment error.

Idle qubits decohere for the duration of each step (one gate per step).
Gate durations are not part of the calibration table; the defaults
below are typical for this device family and are overridable.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .circuit import Circuit, ClassicallyControlled, Gate, Measure
from .qstate import DensityMatrix, apply_kraus, apply_unitary_dm

CSV_HEADER = ["qubit", "t1_us", "t2_us", "freq_ghz", "readout_err", "x_err", "cnot_errs"]

_I2 = np.eye(2, dtype=complex)
_PAULI = {
    "I": _I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class CalibrationRecord:
    qubit: int
    t1_us: float
    t2_us: float
    frequency_ghz: float
    readout_error: float
    pauli_x_error: float
    cnot_errors: dict  # neighbor qubit -> error

    def __post_init__(self):
        if self.t1_us <= 0 or self.t2_us <= 0:
            raise ValueError("T1 and T2 must be positive")
        if self.t2_us > 2 * self.t1_us + 1e-6:
            raise ValueError("T2 must not exceed 2*T1")
        for p in [self.readout_error, self.pauli_x_error, *self.cnot_errors.values()]:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} out of [0, 1]")


@dataclass(frozen=True)
class DurationConfig:
    single_qubit_gate_ns: float = 35.5
    cnot_ns: float = 300.0
    readout_ns: float = 1500.0

    def __post_init__(self):
        if min(self.single_qubit_gate_ns, self.cnot_ns, self.readout_ns) <= 0:
            raise ValueError("durations must be positive")


class CalibrationError(ValueError):
    pass


def _parse_cnot_tokens(raw: str, row_qubit: int) -> dict:
    out = {}
    raw = raw.strip()
    if not raw:
        return out
    for token in raw.split(";"):
        token = token.strip()
        try:
            name, value = token.split(":")
            if not name.startswith("cx"):
                raise ValueError
            i, j = name[2:].split("_")
            i, j = int(i), int(j)
            err = float(value)
        except ValueError:
            raise CalibrationError(f"unparsable CNOT token {token!r}") from None
        if row_qubit not in (i, j):
            raise CalibrationError(
                f"CNOT token {token!r} does not involve qubit {row_qubit}"
            )
        out[j if i == row_qubit else i] = err
    return out


def load_calibration(path) -> list:
    """Read calibration records from CSV (see CSV_HEADER for the format).

    CNOT entries are completed symmetrically: cx0_1 under qubit 0 also
    registers under qubit 1.  T2 > 2*T1 is clamped with a warning.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != CSV_HEADER:
            raise CalibrationError(
                f"bad header: expected {','.join(CSV_HEADER)}, got {reader.fieldnames}"
            )
        rows = list(reader)
    if not rows:
        raise CalibrationError("no records")

    parsed = []
    for row in rows:
        if any(row[k] is None for k in CSV_HEADER):
            raise CalibrationError(f"missing column in row {row}")
        q = int(row["qubit"])
        t1 = float(row["t1_us"])
        t2 = float(row["t2_us"])
        if t2 > 2 * t1:
            warnings.warn(f"qubit {q}: T2={t2} > 2*T1={2 * t1}, clamping")
            t2 = 2 * t1
        parsed.append(
            dict(
                qubit=q,
                t1_us=t1,
                t2_us=t2,
                frequency_ghz=float(row["freq_ghz"]),
                readout_error=float(row["readout_err"]),
                pauli_x_error=float(row["x_err"]),
                cnot_errors=_parse_cnot_tokens(row["cnot_errs"], q),
            )
        )

    # Symmetric completion across rows.
    by_qubit = {p["qubit"]: p for p in parsed}
    for p in parsed:
        for nb, err in p["cnot_errors"].items():
            if nb in by_qubit:
                by_qubit[nb]["cnot_errors"].setdefault(p["qubit"], err)
    return [CalibrationRecord(**p) for p in parsed]


# -- Kraus constructors ------------------------------------------------------


def amplitude_damping_kraus(p: float) -> list:
    return [
        np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex),
        np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex),
    ]


def phase_flip_kraus(p: float) -> list:
    return [np.sqrt(1 - p) * _I2, np.sqrt(p) * _PAULI["Z"]]


def depolarizing_kraus(p: float, num_qubits: int) -> list:
    """Uniform Pauli channel: identity with prob 1-p, each nontrivial
    Pauli with prob p / (d^2 - 1)."""
    d = 2 ** num_qubits
    ops = [np.sqrt(1 - p) * np.eye(d, dtype=complex)]
    labels = [l for l in product("IXYZ", repeat=num_qubits) if set(l) != {"I"}]
    for label in labels:
        m = np.array([[1]], dtype=complex)
        for ch in label:
            m = np.kron(m, _PAULI[ch])
        ops.append(np.sqrt(p / (d ** 2 - 1)) * m)
    return ops


def depolarizing_strength(gate_error: float, num_qubits: int) -> float:
    """Map average gate infidelity to the uniform-Pauli probability:
    p = err * (d + 1) / d."""
    d = 2 ** num_qubits
    return min(1.0, gate_error * (d + 1) / d)


def compose_kraus(first: list, second: list) -> list:
    """Kraus set of (second after first)."""
    return [b @ a for a in first for b in second]


@dataclass(frozen=True)
class NoiseModel:
    """Immutable per-qubit noise parameters compiled from calibration."""

    t1_ns: dict
    t2_ns: dict
    x_depol: dict  # qubit -> depolarizing probability for 1q gates
    cnot_depol: dict  # frozenset({a, b}) -> depolarizing probability
    confusion: dict  # qubit -> 2x2 column-stochastic matrix, P(read r | true t)
    durations: DurationConfig = field(default_factory=DurationConfig)

    def qubits(self):
        return set(self.t1_ns)

    def idle_kraus(self, qubit: int, duration_ns: float) -> list:
        """Amplitude damping then dephasing over the given duration."""
        if duration_ns <= 0:
            return [_I2.copy()]
        t1 = self.t1_ns[qubit]
        t2 = self.t2_ns[qubit]
        p_amp = 1.0 - np.exp(-duration_ns / t1)
        rate_phi = max(0.0, 1.0 / t2 - 1.0 / (2.0 * t1))
        p_flip = 0.5 * (1.0 - np.exp(-rate_phi * duration_ns))
        return compose_kraus(amplitude_damping_kraus(p_amp), phase_flip_kraus(p_flip))

    def single_gate_kraus(self, qubit: int) -> list:
        decay = self.idle_kraus(qubit, self.durations.single_qubit_gate_ns)
        depol = depolarizing_kraus(self.x_depol[qubit], 1)
        return compose_kraus(decay, depol)

    def cnot_gate_kraus(self, a: int, b: int) -> list:
        key = frozenset((a, b))
        if key not in self.cnot_depol:
            raise CalibrationError(f"no CNOT calibration for qubits {a}, {b}")
        decay_a = self.idle_kraus(a, self.durations.cnot_ns)
        decay_b = self.idle_kraus(b, self.durations.cnot_ns)
        decay = [np.kron(ka, kb) for ka in decay_a for kb in decay_b]
        return compose_kraus(decay, depolarizing_kraus(self.cnot_depol[key], 2))


def ideal_noise_model(num_qubits: int, durations: DurationConfig | None = None) -> NoiseModel:
    """A noise model with no decoherence, gate error, or readout error."""
    qubits = range(num_qubits)
    return NoiseModel(
        t1_ns={q: np.inf for q in qubits},
        t2_ns={q: np.inf for q in qubits},
        x_depol={q: 0.0 for q in qubits},
        cnot_depol={frozenset((a, b)): 0.0 for a in qubits for b in qubits if a < b},
        confusion={q: np.eye(2) for q in qubits},
        durations=durations or DurationConfig(),
    )


def build_noise_model(records, durations: DurationConfig | None = None) -> NoiseModel:
    durations = durations or DurationConfig()
    t1 = {r.qubit: r.t1_us * 1000.0 for r in records}
    t2 = {r.qubit: r.t2_us * 1000.0 for r in records}
    x_depol = {r.qubit: depolarizing_strength(r.pauli_x_error, 1) for r in records}
    cnot_depol = {}
    for r in records:
        for nb, err in r.cnot_errors.items():
            cnot_depol[frozenset((r.qubit, nb))] = depolarizing_strength(err, 2)
    confusion = {}
    for r in records:
        e = r.readout_error
        confusion[r.qubit] = np.array([[1 - e, e], [e, 1 - e]])
    return NoiseModel(t1, t2, x_depol, cnot_depol, confusion, durations)


# -- density-matrix execution -------------------------------------------------


def _project_dm(rho: np.ndarray, qubit: int, outcome: int, n: int) -> np.ndarray:
    """Unnormalized projection of the density matrix onto an outcome."""
    proj = np.zeros((2, 2), dtype=complex)
    proj[outcome, outcome] = 1.0
    return apply_kraus(rho, [proj], [qubit], n)


class _NoisyRun:
    """Branch-per-classical-assignment density-matrix evolution."""

    def __init__(self, c: Circuit, nm: NoiseModel):
        c.validate()
        self.n = c.num_qubits
        if c.num_qubits > 7:
            raise ValueError("noisy simulation is limited to 7 qubits")
        missing = set(range(self.n)) - nm.qubits()
        if missing:
            raise CalibrationError(f"no calibration for qubit(s) {sorted(missing)}")
        self.c = c
        self.nm = nm
        self.bit_names = c.classical_bits()
        self.measured_qubit = {}  # bit name -> qubit index

    def _idle_all(self, rho, duration, skip=()):
        for q in range(self.n):
            if q not in skip:
                rho = apply_kraus(rho, self.nm.idle_kraus(q, duration), [q], self.n)
        return rho

    def _apply_gate(self, rho, gate: Gate):
        rho = apply_unitary_dm(rho, gate.unitary(), list(gate.targets), self.n)
        dur = self.nm.durations
        if len(gate.targets) == 1:
            q = gate.targets[0]
            rho = apply_kraus(rho, self.nm.single_gate_kraus(q), [q], self.n)
            rho = self._idle_all(rho, dur.single_qubit_gate_ns, skip=gate.targets)
        elif gate.kind == "SWAP":
            # Decomposes to 3 CNOTs on hardware: triple duration and error.
            a, b = gate.targets
            for _ in range(3):
                rho = apply_kraus(rho, self.nm.cnot_gate_kraus(a, b), [a, b], self.n)
            rho = self._idle_all(rho, 3 * dur.cnot_ns, skip=gate.targets)
        else:
            a, b = gate.targets
            rho = apply_kraus(rho, self.nm.cnot_gate_kraus(a, b), [a, b], self.n)
            rho = self._idle_all(rho, dur.cnot_ns, skip=gate.targets)
        return rho

    def run(self, initial_rho: np.ndarray | None = None):
        """Returns (branches, final_rho) where branches maps classical-bit
        tuples to (probability, normalized density matrix)."""
        dim = 2 ** self.n
        if initial_rho is None:
            rho0 = np.zeros((dim, dim), dtype=complex)
            rho0[0, 0] = 1.0
        else:
            rho0 = np.array(initial_rho, dtype=complex)
        branches = {(): (1.0, rho0)}
        dur = self.nm.durations
        for step in self.c.steps:
            if isinstance(step, Gate):
                branches = {
                    key: (p, self._apply_gate(rho, step))
                    for key, (p, rho) in branches.items()
                }
            elif isinstance(step, ClassicallyControlled):
                new = {}
                for key, (p, rho) in branches.items():
                    bits = dict(zip(self.bit_names, key))
                    if bits.get(step.bit) == step.value:
                        rho = self._apply_gate(rho, step.gate)
                    else:
                        # Feedforward window: idle everyone either way.
                        span = (
                            dur.single_qubit_gate_ns
                            if len(step.gate.targets) == 1
                            else dur.cnot_ns
                        )
                        rho = self._idle_all(rho, span)
                    new[key] = (p, rho)
                branches = new
            elif isinstance(step, Measure):
                for qubit, bit in zip(step.qubits, step.bits):
                    self.measured_qubit[bit] = qubit
                    forked = {}
                    for key, (p, rho) in branches.items():
                        for outcome in (0, 1):
                            sub = _project_dm(rho, qubit, outcome, self.n)
                            w = float(np.trace(sub).real)
                            if w <= 1e-12:
                                continue
                            sub = self._idle_all(sub / w, dur.readout_ns)
                            forked[key + (outcome,)] = (p * w, sub)
                    branches = forked
        final = sum(p * rho for p, rho in branches.values())
        return branches, final


def noisy_distribution(c: Circuit, nm: NoiseModel, initial_rho: np.ndarray | None = None):
    """Exact outcome distribution over classical bits after readout
    confusion, plus the pre-readout final density matrix."""
    run = _NoisyRun(c, nm)
    branches, final = run.run(initial_rho)
    names = run.bit_names
    dist = {}
    for key, (p, _) in branches.items():
        # Convolve each recorded bit with its qubit's confusion matrix.
        recorded = [("", p)]
        for name, true_bit in zip(names, key):
            conf = nm.confusion[run.measured_qubit[name]]
            recorded = [
                (bits + str(r), q * conf[r, true_bit])
                for bits, q in recorded
                for r in (0, 1)
                if conf[r, true_bit] > 0
            ]
        for bits, q in recorded:
            dist[bits] = dist.get(bits, 0.0) + q
    final_dm = DensityMatrix(c.num_qubits, 0.5 * (final + final.conj().T))
    return final_dm, dist


def sample_distribution(dist: dict, shots: int, seed: int) -> dict:
    """Multinomial counts from an outcome -> probability map, using a
    seeded PCG64 generator."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    outcomes = sorted(dist)
    probs = np.array([dist[o] for o in outcomes])
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs / probs.sum())
    return {o: int(k) for o, k in zip(outcomes, draws) if k > 0}


def run_noisy(c: Circuit, nm: NoiseModel, shots: int, seed: int):
    """Noisy execution: (final density matrix before readout, counts after
    readout confusion).  Counts are keyed by classical bits in first-write
    order and sampled with a seeded PCG64 generator."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    final_dm, dist = noisy_distribution(c, nm)
    return final_dm, sample_distribution(dist, shots, seed)
