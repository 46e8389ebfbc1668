"""End-to-end experiment pipelines: the routed two-teleportation circuit
on the device graph, noisy shot histograms, and tomography-based
fidelity repetitions.

The noisy outcome distribution is deterministic given the model, so the
nine tomography setting distributions are computed once and repetitions
only re-sample shot noise with derived seeds.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

from .channels import NoiseModel, noisy_distribution, sample_distribution
from .circuit import Circuit
from .protocols import (
    EXPERIMENT_OUTPUT_BITS,
    EXPERIMENT_RECEIVER_QUBITS,
    experiment_circuit,
)
from .qstate import DensityMatrix, StateVector, partial_trace, plus_state, tensor, to_density
from .tomography import (
    _BASIS_ROTATION,
    expectations_from_settings,
    fidelity,
    pure_fidelity,
    reconstruct,
    settings,
)
from .transpile import CouplingGraph, casablanca_topology, route


def child_seeds(seed: int, count: int) -> list:
    """Deterministic per-task seeds derived from one master seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


@lru_cache(maxsize=8)
def _routed_default(graph: CouplingGraph):
    logical = experiment_circuit(measure_outputs=False)
    layout, routed, report = route(logical, graph)
    receivers = tuple(layout.mapping[q] for q in EXPERIMENT_RECEIVER_QUBITS)
    return layout, routed, receivers, report


def routed_experiment(graph: CouplingGraph | None = None):
    """Route the |+>,|+> two-teleportation circuit (without output
    measurement) onto the device graph.  Returns (layout, routed circuit,
    receiver physical qubits, cost report)."""
    return _routed_default(graph or casablanca_topology())


def marginal_counts(counts: dict, bit_names, wanted) -> dict:
    positions = [list(bit_names).index(b) for b in wanted]
    out = {}
    for bits, k in counts.items():
        key = "".join(bits[p] for p in positions)
        out[key] = out.get(key, 0) + k
    return out


def post_correction_state(nm: NoiseModel, graph=None):
    """Exact noisy density matrix after the teleportation corrections.

    Classical control ends with the corrections, so the measurement
    branches can be merged here; tomography settings continue from this
    state."""
    _, routed, receivers, _ = routed_experiment(graph)
    final_dm, _ = noisy_distribution(routed, nm)
    return final_dm, receivers


def _tail_circuit(num_qubits, receivers, rotations: str | None):
    c = Circuit(num_qubits)
    if rotations:
        for q, axis in zip(receivers, rotations):
            if axis != "Z":
                c.custom(_BASIS_ROTATION[axis], [q])
    for q, bit in zip(receivers, EXPERIMENT_OUTPUT_BITS):
        c.measure(q, bit)
    return c


def noisy_output_distribution(nm: NoiseModel, graph=None, rotations: str | None = None):
    """Exact noisy distribution over the two receiver bits (readout
    confusion included), plus the post-correction density matrix."""
    post_dm, receivers = post_correction_state(nm, graph)
    tail = _tail_circuit(post_dm.num_qubits, receivers, rotations)
    _, dist = noisy_distribution(tail, nm, initial_rho=post_dm.entries)
    return dist, post_dm


def noisy_histogram(nm: NoiseModel, shots: int, seed: int, graph=None):
    """Shot histogram over the two receiver bits of the routed experiment
    under the given noise model."""
    dist, final_dm = noisy_output_distribution(nm, graph)
    _, _, receivers, _ = routed_experiment(graph)
    return sample_distribution(dist, shots, seed), final_dm, receivers


def ideal_output_state() -> StateVector:
    return tensor(plus_state(), plus_state())


def noisy_setting_distributions(nm: NoiseModel, graph=None) -> dict:
    """Per-tomography-setting exact outcome distributions over the two
    receiver bits, sharing one post-correction state."""
    post_dm, receivers = post_correction_state(nm, graph)
    out = {}
    for s in settings(2):
        tail = _tail_circuit(post_dm.num_qubits, receivers, s)
        _, dist = noisy_distribution(tail, nm, initial_rho=post_dm.entries)
        out[s] = dist
    return out


def _tomography_from_distributions(setting_dists: dict, shots: int, seed: int):
    seeds = child_seeds(seed, len(setting_dists))
    setting_counts = {
        setting: sample_distribution(dist, shots, s)
        for (setting, dist), s in zip(sorted(setting_dists.items()), seeds)
    }
    rho = reconstruct(expectations_from_settings(setting_counts, 2), 2)
    return rho, fidelity(to_density(ideal_output_state()), rho)


def noisy_tomography(nm: NoiseModel, shots: int, seed: int, graph=None):
    """Hardware-style tomography of the receiver qubits: all nine Pauli
    settings at ``shots`` shots each (readout confusion included),
    linear-inversion reconstruction.  Returns (density matrix, fidelity
    vs the ideal |+>|+> output)."""
    return _tomography_from_distributions(
        noisy_setting_distributions(nm, graph), shots, seed
    )


def noisy_tomography_fidelity(nm: NoiseModel, shots: int, seed: int, graph=None) -> float:
    return noisy_tomography(nm, shots, seed, graph)[1]


def repeat_noisy_fidelities(
    nm: NoiseModel, shots: int, seed: int, reps: int, workers: int = 1, graph=None
) -> list:
    """Tomography-based fidelities for ``reps`` independently seeded
    repetitions.  Deterministic regardless of worker count."""
    setting_dists = noisy_setting_distributions(nm, graph)
    seeds = child_seeds(seed, reps)

    def one(s):
        return _tomography_from_distributions(setting_dists, shots, s)[1]

    if workers <= 1:
        return [one(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, seeds))


def deterministic_noisy_fidelity(nm: NoiseModel, graph=None) -> float:
    """Shot-free reference: fidelity of the receiver qubits' exact noisy
    marginal against the ideal output."""
    _, routed, receivers, _ = routed_experiment(graph)
    final_dm, _ = noisy_distribution(routed, nm)
    marginal = partial_trace(final_dm, set(receivers))
    # partial_trace keeps ascending order; receiver 1 may map above receiver 2.
    if receivers[0] > receivers[1]:
        swap = np.array(
            [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
        )
        marginal = DensityMatrix(2, swap @ marginal.entries @ swap)
    return pure_fidelity(ideal_output_state(), marginal)
