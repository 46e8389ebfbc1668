"""Pure- and mixed-state primitives: state vectors, density matrices, and
the linear-algebra operations the rest of the library is built on.

Bit ordering convention
-----------------------
Qubit 0 is the *most significant* bit of the basis index, so the ket
|01011> on five qubits sits at index 0b01011 = 11.  All modules in this
package share this convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_ATOL = 1e-10
HERM_ATOL = 1e-10
EIG_FLOOR = -1e-9


def _as_complex(a) -> np.ndarray:
    return np.asarray(a, dtype=complex)


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitude vector over ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        amps = _as_complex(self.amplitudes).reshape(-1)
        if amps.shape[0] != 2 ** self.num_qubits:
            raise ValueError(
                f"expected {2 ** self.num_qubits} amplitudes, got {amps.shape[0]}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state not normalized: |psi| = {norm}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 2 ** self.num_qubits


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, trace-one matrix over ``num_qubits`` qubits."""

    num_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        d = 2 ** self.num_qubits
        m = _as_complex(self.entries)
        if m.shape != (d, d):
            raise ValueError(f"expected {d}x{d} matrix, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERM_ATOL:
            raise ValueError("matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > NORM_ATOL:
            raise ValueError(f"trace is {np.trace(m)}, expected 1")
        if np.min(np.linalg.eigvalsh(m)) < EIG_FLOOR:
            raise ValueError("matrix has a negative eigenvalue beyond tolerance")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return 2 ** self.num_qubits


def basis_state(num_qubits: int, index: int) -> StateVector:
    """|index> in the computational basis (qubit 0 = MSB of index)."""
    amps = np.zeros(2 ** num_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(num_qubits, amps)


def single_qubit_state(alpha: complex, beta: complex) -> StateVector:
    return StateVector(1, np.array([alpha, beta], dtype=complex))


def plus_state() -> StateVector:
    return single_qubit_state(1 / np.sqrt(2), 1 / np.sqrt(2))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product; a's qubits become the leading (most significant) ones."""
    return StateVector(a.num_qubits + b.num_qubits, np.kron(a.amplitudes, b.amplitudes))


def tensor_dm(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(a.num_qubits + b.num_qubits, np.kron(a.entries, b.entries))


def to_density(psi: StateVector) -> DensityMatrix:
    amps = psi.amplitudes
    return DensityMatrix(psi.num_qubits, np.outer(amps, amps.conj()))


def _check_targets(targets, num_qubits):
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits: {targets}")
    for q in targets:
        if not 0 <= q < num_qubits:
            raise ValueError(f"target qubit {q} out of range for {num_qubits} qubits")
    return targets


def _check_unitary(u, k):
    u = _as_complex(u)
    d = 2 ** k
    if u.shape != (d, d):
        raise ValueError(f"matrix shape {u.shape} does not match {k} target qubit(s)")
    if np.max(np.abs(u.conj().T @ u - np.eye(d))) > 1e-10:
        raise ValueError("matrix is not unitary within 1e-10")
    return u


def apply_unitary(state: StateVector, u, targets) -> StateVector:
    """Apply a k-qubit unitary to the listed target qubits of a pure state.

    targets[0] addresses the most significant index bit of ``u``.
    """
    n = state.num_qubits
    targets = _check_targets(targets, n)
    k = len(targets)
    u = _check_unitary(u, k)
    psi = state.amplitudes.reshape([2] * n)
    psi = np.moveaxis(psi, targets, range(k))
    psi = (u @ psi.reshape(2 ** k, -1)).reshape([2] * n)
    psi = np.moveaxis(psi, range(k), targets)
    return StateVector(n, psi.reshape(-1))


def apply_unitary_dm(rho: np.ndarray, u: np.ndarray, targets, num_qubits: int) -> np.ndarray:
    """rho -> U rho U^dagger on a raw 2^n x 2^n array (no validation)."""
    out = _mat_on_rows(rho, u, targets, num_qubits)
    return _mat_on_cols(out, u, targets, num_qubits)


def apply_kraus(rho: np.ndarray, kraus, targets, num_qubits: int) -> np.ndarray:
    """rho -> sum_i K_i rho K_i^dagger on a raw array."""
    out = np.zeros_like(rho)
    for k in kraus:
        term = _mat_on_rows(rho, k, targets, num_qubits)
        out += _mat_on_cols(term, k, targets, num_qubits)
    return out


def _mat_on_rows(rho, m, targets, n):
    k = len(targets)
    t = rho.reshape([2] * (2 * n))
    t = np.moveaxis(t, targets, range(k))
    t = (np.asarray(m, dtype=complex) @ t.reshape(2 ** k, -1)).reshape([2] * (2 * n))
    t = np.moveaxis(t, range(k), targets)
    return t.reshape(2 ** n, 2 ** n)


def _mat_on_cols(rho, m, targets, n):
    col_axes = [n + q for q in targets]
    k = len(targets)
    t = rho.reshape([2] * (2 * n))
    t = np.moveaxis(t, col_axes, range(k))
    t = (np.asarray(m, dtype=complex).conj() @ t.reshape(2 ** k, -1)).reshape([2] * (2 * n))
    t = np.moveaxis(t, range(k), col_axes)
    return t.reshape(2 ** n, 2 ** n)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every qubit not in ``keep``.

    Kept qubits appear in the result in ascending original order.
    """
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    n = rho.num_qubits
    for q in keep:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range")
    t = rho.entries.reshape([2] * (2 * n))
    traced = [q for q in range(n) if q not in keep]
    # Trace the highest axes first so lower axis numbers stay valid.
    cur_n = n
    for q in sorted(traced, reverse=True):
        t = np.trace(t, axis1=q, axis2=cur_n + q)
        cur_n -= 1
    d = 2 ** len(keep)
    return DensityMatrix(len(keep), t.reshape(d, d))


def project_qubits(state: StateVector, assignments: dict) -> StateVector:
    """Slice a pure state at fixed computational values of some qubits.

    ``assignments`` maps qubit -> 0/1.  The remaining qubits (ascending
    order) form the returned state, renormalized.  Raises if the slice
    has (numerically) zero weight.
    """
    n = state.num_qubits
    idx = [slice(None)] * n
    for q, b in assignments.items():
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range")
        idx[q] = b
    sub = state.amplitudes.reshape([2] * n)[tuple(idx)].reshape(-1)
    norm = np.linalg.norm(sub)
    if norm < 1e-9:
        raise ValueError("projection has zero weight")
    return StateVector(n - len(assignments), sub / norm)


def split_product(state: StateVector, sizes) -> list[StateVector]:
    """Split a product state into factors with the given qubit counts.

    Raises ValueError if the state is not (numerically) a product across
    the requested cut(s).  Factor global phases are not meaningful.
    """
    if sum(sizes) != state.num_qubits:
        raise ValueError("sizes must sum to num_qubits")
    factors = []
    rest = state.amplitudes
    remaining = state.num_qubits
    for size in sizes[:-1]:
        m = rest.reshape(2 ** size, -1)
        col = int(np.argmax(np.linalg.norm(m, axis=0)))
        a = m[:, col]
        a = a / np.linalg.norm(a)
        row = int(np.argmax(np.abs(a)))
        b = m[row, :] / a[row]
        b = b / np.linalg.norm(b)
        if np.max(np.abs(m - np.outer(a, b))) > 1e-8:
            raise ValueError("state is not a product across the requested cut")
        factors.append(StateVector(size, a))
        rest = b
        remaining -= size
    factors.append(StateVector(remaining, rest))
    return factors


def hermitian_sqrt(m) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix.

    Eigenvalues in [-1e-9, 0) are clipped to zero; anything more negative
    signals a corrupted matrix and raises.
    """
    m = _as_complex(m)
    if np.max(np.abs(m - m.conj().T)) > 1e-9:
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    if np.min(w) < EIG_FLOOR:
        raise ValueError(f"eigenvalue {np.min(w)} below {EIG_FLOOR}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def prep_unitary(target: np.ndarray) -> np.ndarray:
    """A unitary whose first column is ``target`` (maps |0...0> to it).

    Completed by Gram-Schmidt against the standard basis; deterministic.
    """
    v = _as_complex(target).reshape(-1)
    d = v.shape[0]
    v = v / np.linalg.norm(v)
    cols = [v]
    for i in range(d):
        e = np.zeros(d, dtype=complex)
        e[i] = 1.0
        for c in cols:
            e = e - c * np.vdot(c, e)
        norm = np.linalg.norm(e)
        if norm > 1e-8:
            cols.append(e / norm)
        if len(cols) == d:
            break
    return np.column_stack(cols)
