"""Input validation helpers shared by the public API."""

import numbers

import numpy as np

DIM = 16
ATOL = 1e-12


def check_state(psi, *, dim=DIM, atol=ATOL, name="psi"):
    """Validate a single state vector and return it as a complex array.

    Zero or non-normalised vectors are rejected rather than rescaled.
    """
    arr = np.asarray(psi, dtype=np.complex128)
    if arr.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite amplitudes")
    norm = np.linalg.norm(arr)
    if norm == 0.0:
        raise ValueError(f"{name} is the zero vector")
    if abs(norm**2 - 1.0) > atol:
        raise ValueError(f"{name} is not normalised: |psi|^2 = {norm**2!r}")
    return arr


def check_states(X, *, dim=DIM, atol=ATOL):
    """Validate a batch of state vectors laid out as rows of ``X``.

    A single vector is promoted to a batch of one. Complex input is allowed,
    which is why ``sklearn.utils.check_array`` is not used here.
    """
    arr = np.asarray(X, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"expected an array of shape (n_samples, {dim}), got {np.shape(X)}")
    if arr.shape[0] == 0:
        raise ValueError("empty batch of states")
    if not np.all(np.isfinite(arr)):
        raise ValueError("states contain non-finite amplitudes")
    norms = np.sum(np.abs(arr) ** 2, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > atol)
    if bad.size:
        raise ValueError(
            f"{bad.size} state(s) not normalised, first offender row {bad[0]} "
            f"with |psi|^2 = {norms[bad[0]]!r}"
        )
    return arr


def check_density_matrix(rho, *, dim=DIM, atol=ATOL):
    arr = np.asarray(rho, dtype=np.complex128)
    if arr.shape != (dim, dim):
        raise ValueError(f"density matrix must have shape ({dim}, {dim}), got {arr.shape}")
    if not np.allclose(arr, arr.conj().T, rtol=0.0, atol=atol):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(arr)
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density matrix has trace {tr!r}, expected 1")
    return arr


def check_photon(photon):
    if photon not in (1, 2):
        raise ValueError(f"photon must be 1 or 2, got {photon!r}")
    return int(photon)


def check_angle(angle, name="angle"):
    if isinstance(angle, bool) or not isinstance(angle, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(angle).__name__}")
    if not np.isfinite(angle):
        raise ValueError(f"{name} must be finite, got {angle!r}")
    return float(angle)


def check_shots(shots):
    if isinstance(shots, bool) or not isinstance(shots, numbers.Integral):
        raise TypeError(f"shots must be an integer, got {type(shots).__name__}")
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    return int(shots)
