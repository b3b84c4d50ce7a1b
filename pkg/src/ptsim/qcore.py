"""Complex linear algebra kernel: matrix exponentials that stay correct at
defective (exceptional) points, trace distance, entropies and partial traces.

All operators are plain complex ndarrays of dimension 2 or 4 (hbar = 1
throughout).  Density matrices are validated ndarrays; ``as_density_matrix``
is the single entry point that symmetrizes and checks the invariants.
"""

import numpy as np

from .errors import DimMismatch, InvalidDensityMatrix, InvalidMatrix

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

KET_H = np.array([1, 0], dtype=complex)
KET_V = np.array([0, 1], dtype=complex)

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-10   # more negative than this is a hard error
ENTROPY_CUTOFF = 1e-12
EIG_CONDITION_LIMIT = 1e6   # eigenvector condition number above which eig is unsafe

_POLARIZATION_KETS = {
    "H": KET_H,
    "V": KET_V,
    "P+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "M": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "R": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "L": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}


def polarization_ket(label: str) -> np.ndarray:
    """Qubit basis ket by polarization label: H, V, P+ = (H+V)/sqrt2,
    M = (H-V)/sqrt2, R = (H+iV)/sqrt2, L = (H-iV)/sqrt2."""
    try:
        return _POLARIZATION_KETS[label].copy()
    except KeyError:
        raise ValueError(
            f"unknown state label {label!r}; expected one of {sorted(_POLARIZATION_KETS)}"
        ) from None


def check_matrix(mat, dims=(2, 4)) -> np.ndarray:
    """Coerce to a square complex ndarray of an allowed dimension."""
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] not in dims:
        raise InvalidMatrix(f"dimension {m.shape[0]} not in {dims}")
    if not np.all(np.isfinite(m.view(float))):
        raise InvalidMatrix("matrix has non-finite entries")
    return m


def as_density_matrix(mat) -> np.ndarray:
    """Validate a density matrix and return its Hermitian-symmetrized form.

    The input must be Hermitian within 1e-10 (max entry of M - M^dag), have
    unit trace within 1e-10, and eigenvalues >= -1e-10.  Roundoff from
    arithmetic is absorbed by returning (M + M^dag)/2.
    """
    m = check_matrix(mat)
    herm_defect = np.abs(m - m.conj().T).max()
    if herm_defect > HERMITICITY_TOL:
        raise InvalidDensityMatrix(f"not Hermitian: defect {herm_defect:.3e}")
    m = (m + m.conj().T) / 2
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidDensityMatrix(f"trace {tr!r} is not 1")
    lo = np.linalg.eigvalsh(m).min()
    if lo < EIGENVALUE_FLOOR:
        raise InvalidDensityMatrix(f"negative eigenvalue {lo:.3e}")
    return m


def pure_state(ket) -> np.ndarray:
    """Projector |psi><psi| of a (not necessarily normalized) state vector."""
    v = np.asarray(ket, dtype=complex).reshape(-1)
    n2 = np.vdot(v, v).real
    if n2 <= 0:
        raise InvalidMatrix("cannot project a zero vector")
    return np.outer(v, v.conj()) / n2


def normalized(ket) -> np.ndarray:
    v = np.asarray(ket, dtype=complex).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0:
        raise InvalidMatrix("cannot normalize a zero vector")
    return v / n


def mat_exp(H, t: float) -> np.ndarray:
    """Evolution operator e^{-iHt} for a 2x2 or 4x4 complex matrix H.

    Uses an eigendecomposition when the eigenvector matrix is well
    conditioned.  Near an exceptional point the Hamiltonian is defective and
    eigendecomposition silently loses accuracy, so the fallback is scaling
    and squaring of a truncated Taylor series, which has no such blind spot.
    """
    H = check_matrix(H)
    if not np.isfinite(t):
        raise InvalidMatrix("time must be finite")
    w, V = np.linalg.eig(H)
    try:
        cond = np.linalg.cond(V)
    except np.linalg.LinAlgError:
        cond = np.inf
    if np.isfinite(cond) and cond < EIG_CONDITION_LIMIT:
        return (V * np.exp(-1j * w * t)) @ np.linalg.inv(V)
    return _expm_taylor(-1j * t * H)


def _expm_taylor(A: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring e^A with a truncated Taylor series."""
    norm = np.linalg.norm(A, 1)
    s = int(np.ceil(np.log2(norm / 0.25))) if norm > 0.25 else 0
    B = A / 2**s
    X = np.eye(A.shape[0], dtype=complex)
    term = X
    for k in range(1, 60):
        term = term @ B / k
        X = X + term
        if np.linalg.norm(term, 1) <= 1e-18 * np.linalg.norm(X, 1):
            break
    for _ in range(s):
        X = X @ X
    return X


def trace_distance(rho1, rho2) -> float:
    """Half the trace norm of rho1 - rho2; in [0, 1] for density matrices."""
    r1 = np.asarray(rho1, dtype=complex)
    r2 = np.asarray(rho2, dtype=complex)
    if r1.shape != r2.shape:
        raise DimMismatch(f"shape {r1.shape} vs {r2.shape}")
    d = r1 - r2
    d = (d + d.conj().T) / 2
    val = 0.5 * np.sum(np.abs(np.linalg.eigvalsh(d)))
    return float(min(max(val, 0.0), 1.0))


def von_neumann_entropy(rho) -> float:
    """Entropy -sum lambda log2 lambda over eigenvalues above 1e-12.

    Base-2 logarithm, so a maximally mixed qubit has entropy exactly 1.
    Eigenvalues in [-1e-10, 0] are clipped to zero; anything more negative
    is rejected as unphysical.
    """
    w = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    if w.min() < EIGENVALUE_FLOOR:
        raise InvalidDensityMatrix(f"negative eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    w = w[w > ENTROPY_CUTOFF]
    return float(-np.sum(w * np.log2(w)))


def partial_trace(rho, keep: str) -> np.ndarray:
    """Reduce a two-qubit operator over one factor.

    Tensor ordering is ancilla (x) system: basis |u,H>, |u,V>, |d,H>, |d,V>.
    ``keep`` selects the surviving factor, "system" or "ancilla".
    """
    r = np.asarray(rho, dtype=complex)
    if r.shape != (4, 4):
        raise DimMismatch(f"partial trace needs a 4x4 matrix, got {r.shape}")
    blocks = r.reshape(2, 2, 2, 2)
    if keep == "system":
        return np.einsum("asat->st", blocks)
    if keep == "ancilla":
        return np.einsum("asbs->ab", blocks)
    raise ValueError(f"keep must be 'system' or 'ancilla', got {keep!r}")


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    r = np.asarray(rho, dtype=complex)
    s = np.asarray(sigma, dtype=complex)
    if r.shape != s.shape:
        raise DimMismatch(f"shape {r.shape} vs {s.shape}")
    w, V = np.linalg.eigh((r + r.conj().T) / 2)
    sq = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
    inner = sq @ s @ sq
    ev = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0.0, None)
    if ev.max() > 0:
        # the square root amplifies epsilon-level eigenvalue noise of
        # rank-deficient inner matrices; drop modes below the noise floor
        ev[ev < 8 * np.finfo(float).eps * ev.max()] = 0.0
    val = np.sum(np.sqrt(ev)) ** 2
    return float(min(max(val, 0.0), 1.0))
