"""Jones-calculus wave-plate models and numeric circuit synthesis.

A single-qubit non-unitary operator is realized as rotation / loss / rotation,
where rotations are quarter-half-quarter wave-plate sandwiches and the loss
element is an anti-diagonal polarization-flipping attenuator built from beam
displacers.  Several variants constrain subsets of the twelve mount angles:

* ``full12``        all twelve angles free, loss entries complex
* ``symmetric5``    simplified loss, outermost first-stage QWP fixed at 0;
                    the variant used to synthesize operators with equal
                    off-diagonal entries (five independent target parameters)
* ``pt-simplified`` three free angles (theta2, theta_H, theta_V); every
                    realized matrix has the form [[A, iB], [iB, D]] with
                    A, B, D real
* ``two-qubit``     the layered four-mode circuit U5,6 . G2 . U3,4 . G1 . U1,2

Angle synthesis minimizes the global-phase-aligned Frobenius distance to a
target with Nelder-Mead local searches from uniform-random restarts.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NotPassive, NotUnitary

SUCCESS_RESIDUAL = 1e-6
MAX_ITER_PER_RESTART = 5000
OBJECTIVE_TOL = 1e-10


class DecompositionVariant(str, Enum):
    FULL12 = "full12"
    SYMMETRIC5 = "symmetric5"
    PT_SIMPLIFIED = "pt-simplified"
    TWO_QUBIT = "two-qubit"


_FREE_ANGLES = {
    DecompositionVariant.FULL12: (
        "phi1", "theta1", "phi2",
        "phi3", "phi4", "theta_V", "phi5", "phi6", "theta_H",
        "phi7", "theta2", "phi8",
    ),
    DecompositionVariant.SYMMETRIC5: (
        "phi1", "theta1", "theta_H", "theta_V", "phi7", "theta2", "phi8",
    ),
    DecompositionVariant.PT_SIMPLIFIED: ("theta2", "theta_H", "theta_V"),
    DecompositionVariant.TWO_QUBIT: tuple(
        [f"phi{j}" for j in range(1, 7)]
        + [f"theta{j}" for j in range(1, 7)]
        + [f"nu{j}" for j in range(1, 7)]
        + ["delta41", "delta75", "delta85", "delta86"]
    ),
}


def free_angle_names(variant: DecompositionVariant) -> tuple:
    """Ordered free-parameter names of a decomposition variant."""
    return _FREE_ANGLES[DecompositionVariant(variant)]


@dataclass
class AngleSolution:
    """Wave-plate setting angles with the achieved synthesis residual.

    ``residual`` is the Frobenius distance to the target after optimal
    global-phase alignment; ``success`` means it beat the 1e-6 goal.  Angle
    values are wrapped to (-pi, pi]; solutions are highly degenerate under
    wave-plate periodicity and no canonical representative is claimed.
    """

    variant: DecompositionVariant
    angles: dict = field(default_factory=dict)
    residual: float = np.inf
    global_phase: float = 0.0
    success: bool = False
    restarts_used: int = 0

    def vector(self) -> np.ndarray:
        return np.array([self.angles[n] for n in free_angle_names(self.variant)])


def qwp(phi: float) -> np.ndarray:
    """Jones matrix of a quarter-wave plate at mount angle phi."""
    c, s = np.cos(phi), np.sin(phi)
    off = (1 - 1j) * s * c
    return np.array([[c * c + 1j * s * s, off], [off, s * s + 1j * c * c]])


def hwp(theta: float) -> np.ndarray:
    """Jones matrix of a half-wave plate at mount angle theta."""
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def loss_simplified(theta_H: float, theta_V: float) -> np.ndarray:
    """Anti-diagonal loss element with the four inner QWPs at fixed settings."""
    return np.array(
        [[0, np.sin(2 * theta_V)], [np.sin(2 * theta_H), 0]], dtype=complex
    )


def loss_full(phi3, phi4, theta_V, phi5, phi6, theta_H) -> np.ndarray:
    """Anti-diagonal loss element with the inner QWP angles free."""
    xi = 0.5 * (
        1j * np.sin(2 * theta_V)
        - np.sin(2 * (theta_V - phi3))
        + np.sin(2 * (theta_V - phi4))
        + 1j * np.sin(2 * (theta_V - phi3 - phi4))
    )
    et = 0.5 * (
        1j * np.sin(2 * theta_H)
        + np.sin(2 * (theta_H - phi5))
        - np.sin(2 * (theta_H - phi6))
        + 1j * np.sin(2 * (theta_H - phi5 - phi6))
    )
    return np.array([[0, xi], [et, 0]])


def loss_operator(variant, angles: dict) -> np.ndarray:
    """Loss element of a single-qubit variant from named angles."""
    variant = DecompositionVariant(variant)
    if variant is DecompositionVariant.FULL12:
        return loss_full(
            angles["phi3"], angles["phi4"], angles["theta_V"],
            angles["phi5"], angles["phi6"], angles["theta_H"],
        )
    if variant in (DecompositionVariant.SYMMETRIC5, DecompositionVariant.PT_SIMPLIFIED):
        return loss_simplified(angles["theta_H"], angles["theta_V"])
    raise ValueError("the two-qubit variant has no single loss element")


def realize_single(variant, angles: dict) -> np.ndarray:
    """Matrix realized by a single-qubit variant at the given angles."""
    variant = DecompositionVariant(variant)
    x = np.array([angles[n] for n in _FREE_ANGLES[variant]], dtype=float)
    return _realize_single_vec(variant, x)


# The synthesis objective evaluates the realized matrix tens of thousands of
# times per target, so the 2x2 chain is composed in plain complex scalars
# (entry tuples ordered a00, a01, a10, a11) rather than ndarray products.

def _mm2(a, b):
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    )


def _qwp_entries(phi):
    c, s = math.cos(phi), math.sin(phi)
    off = (1 - 1j) * s * c
    return (c * c + 1j * s * s, off, off, s * s + 1j * c * c)


def _hwp_entries(theta):
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return (complex(c), complex(s), complex(s), complex(-c))


def _sandwich(phi_out, theta, phi_in):
    return _mm2(_qwp_entries(phi_out), _mm2(_hwp_entries(theta), _qwp_entries(phi_in)))


def _apply_loss(xi, eta, r):
    # [[0, xi], [eta, 0]] @ r
    return (xi * r[2], xi * r[3], eta * r[0], eta * r[1])


def _single_entries(variant: DecompositionVariant, x):
    if variant is DecompositionVariant.FULL12:
        r1 = _sandwich(x[2], x[1], x[0])
        xi = 0.5 * (
            1j * math.sin(2 * x[5])
            - math.sin(2 * (x[5] - x[3]))
            + math.sin(2 * (x[5] - x[4]))
            + 1j * math.sin(2 * (x[5] - x[3] - x[4]))
        )
        eta = 0.5 * (
            1j * math.sin(2 * x[8])
            + math.sin(2 * (x[8] - x[6]))
            - math.sin(2 * (x[8] - x[7]))
            + 1j * math.sin(2 * (x[8] - x[6] - x[7]))
        )
        return _mm2(_sandwich(x[11], x[10], x[9]), _apply_loss(xi, eta, r1))
    if variant is DecompositionVariant.SYMMETRIC5:
        # the stage-1 QWP next to the loss element is fixed at 0
        r1 = _sandwich(0.0, x[1], x[0])
        lossed = _apply_loss(math.sin(2 * x[3]), math.sin(2 * x[2]), r1)
        return _mm2(_sandwich(x[6], x[5], x[4]), lossed)
    if variant is DecompositionVariant.PT_SIMPLIFIED:
        # outer QWPs removed; phi1 = 0, theta1 = theta2 + pi/4, phi7 = 2 theta2
        theta2, th, tv = x
        r1 = _mm2(_hwp_entries(theta2 + np.pi / 4), _qwp_entries(0.0))
        r2 = _mm2(_hwp_entries(theta2), _qwp_entries(2 * theta2))
        return _mm2(r2, _apply_loss(math.sin(2 * tv), math.sin(2 * th), r1))
    raise ValueError("use realize_two_qubit for the two-qubit variant")


def _realize_single_vec(variant: DecompositionVariant, x) -> np.ndarray:
    return np.array(_single_entries(variant, x)).reshape(2, 2)


def build_g1(delta41: float) -> np.ndarray:
    """First beam-displacer block; unitary for any delta41."""
    s, c = np.sin(2 * delta41), np.cos(2 * delta41)
    return np.array(
        [
            [0, -1, 0, 0],
            [s, 0, 0, c],
            [c, 0, 0, -s],
            [0, 0, 1, 0],
        ],
        dtype=complex,
    )


def build_g2(delta75: float, delta85: float, delta86: float) -> np.ndarray:
    """Second beam-displacer block; unitary only when |sin 2delta75| =
    |sin 2delta86| = 1, which the synthesis is free to select."""
    s75 = np.sin(2 * delta75)
    s85, c85 = np.sin(2 * delta85), np.cos(2 * delta85)
    s86 = np.sin(2 * delta86)
    return np.array(
        [
            [0, -s75, 0, 0],
            [s85, 0, 0, c85],
            [c85, 0, 0, -s85],
            [0, 0, s86, 0],
        ],
        dtype=complex,
    )


def realize_two_qubit(angles: dict) -> np.ndarray:
    """Layered two-qubit circuit from named angles."""
    x = np.array(
        [angles[n] for n in _FREE_ANGLES[DecompositionVariant.TWO_QUBIT]], dtype=float
    )
    return _realize_two_qubit_vec(x)


def _qwp_stack(phis: np.ndarray) -> np.ndarray:
    c, s = np.cos(phis), np.sin(phis)
    out = np.empty((len(phis), 2, 2), dtype=complex)
    out[:, 0, 0] = c * c + 1j * s * s
    out[:, 1, 1] = s * s + 1j * c * c
    out[:, 0, 1] = out[:, 1, 0] = (1 - 1j) * s * c
    return out


def _hwp_stack(thetas: np.ndarray) -> np.ndarray:
    c, s = np.cos(2 * thetas), np.sin(2 * thetas)
    out = np.empty((len(thetas), 2, 2), dtype=complex)
    out[:, 0, 0] = c
    out[:, 1, 1] = -c
    out[:, 0, 1] = out[:, 1, 0] = s
    return out


def _realize_two_qubit_vec(x: np.ndarray) -> np.ndarray:
    # x: phi1..6, theta1..6, nu1..6, delta41, delta75, delta85, delta86
    rot = _qwp_stack(x[12:18]) @ _hwp_stack(x[6:12]) @ _qwp_stack(x[0:6])
    layers = np.zeros((3, 4, 4), dtype=complex)
    layers[:, :2, :2] = rot[0::2]
    layers[:, 2:, 2:] = rot[1::2]
    g1 = build_g1(x[18])
    g2 = build_g2(x[19], x[20], x[21])
    return layers[2] @ g2 @ layers[1] @ g1 @ layers[0]


def _wrap_angle(x: float) -> float:
    """Wrap to the half-open interval (-pi, pi]."""
    return float(np.pi - np.mod(np.pi - x, 2 * np.pi))


def _aligned_residual(realized: np.ndarray, target: np.ndarray):
    """Global phase maximizing overlap, and the Frobenius residual at it."""
    z = np.vdot(target, realized)
    phase = z / abs(z) if abs(z) > 1e-300 else 1.0 + 0j
    return phase, float(np.linalg.norm(realized - phase * target))


def _nelder_mead(f, x0, scale, maxfev, fatol, xatol, stop_at):
    """Simplex minimization with dimension-adaptive coefficients.

    Returns once the simplex collapses below the tolerances, the evaluation
    budget runs out, or the best value drops below ``stop_at`` (the last exit
    is what keeps synthesis cheap when a restart lands in the right basin).
    """
    n = len(x0)
    reflect = 1.0
    expand = 1.0 + 2.0 / n
    contract = 0.75 - 1.0 / (2 * n)
    shrink = 1.0 - 1.0 / n

    sim = np.tile(np.asarray(x0, dtype=float), (n + 1, 1))
    for i in range(n):
        sim[i + 1, i] += scale
    fs = np.array([f(v) for v in sim])
    evals = n + 1
    while evals < maxfev:
        order = np.argsort(fs)
        sim, fs = sim[order], fs[order]
        if fs[0] < stop_at:
            break
        if fs[-1] - fs[0] < fatol and np.abs(sim[1:] - sim[0]).max() < xatol:
            break
        centroid = sim[:-1].mean(axis=0)
        xr = centroid + reflect * (centroid - sim[-1])
        fr = f(xr)
        evals += 1
        if fr < fs[0]:
            xe = centroid + expand * (xr - centroid)
            fe = f(xe)
            evals += 1
            sim[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = centroid + contract * (xr - centroid)
        else:
            xc = centroid - contract * (centroid - sim[-1])
        fc = f(xc)
        evals += 1
        if fc < min(fr, fs[-1]):
            sim[-1], fs[-1] = xc, fc
            continue
        sim[1:] = sim[0] + shrink * (sim[1:] - sim[0])
        fs[1:] = [f(v) for v in sim[1:]]
        evals += n
    best = int(np.argmin(fs))
    return sim[best], float(fs[best]), evals


def _compile(target, variant, objective, realize_vec, restarts, seed, success_residual):
    names = _FREE_ANGLES[variant]
    n = len(names)
    stop_at = success_residual * 1e-4
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    best_f, best_x, used = np.inf, None, 0
    for i in range(restarts):
        used = i + 1
        rng = np.random.default_rng(seeds[i])
        x, fx, _ = _nelder_mead(
            objective, rng.uniform(-np.pi, np.pi, n), scale=0.5,
            maxfev=MAX_ITER_PER_RESTART, fatol=OBJECTIVE_TOL, xatol=1e-10,
            stop_at=stop_at,
        )
        # rejuvenate: a fresh small simplex at the endpoint escapes the
        # degenerate-simplex stalls Nelder-Mead is prone to in high dimension.
        # Chains of segments keep running while they pay off, so a slowly
        # converging run is finished instead of being thrown away, while a
        # genuine local minimum stops the chain after one flat segment.
        for _ in range(12):
            if fx < stop_at:
                break
            x2, fx2, _ = _nelder_mead(
                objective, x, scale=0.05,
                maxfev=MAX_ITER_PER_RESTART, fatol=OBJECTIVE_TOL, xatol=1e-10,
                stop_at=stop_at,
            )
            worthwhile = fx2 < 0.7 * fx
            if fx2 < fx:
                x, fx = x2, fx2
            if not worthwhile:
                break
        if fx < best_f:
            best_f, best_x = fx, x
        # stop searching once the goal is met; stop_at only short-circuits
        # the simplex itself when it plunges well below the goal
        if best_f < success_residual:
            break

    phase, residual = _aligned_residual(realize_vec(best_x), target)
    return AngleSolution(
        variant=variant,
        angles={name: _wrap_angle(v) for name, v in zip(names, best_x)},
        residual=residual,
        global_phase=float(np.angle(phase)),
        success=residual < success_residual,
        restarts_used=used,
    )


def compile_single_qubit(
    target,
    variant,
    restarts: int = 50,
    seed: int | None = None,
    success_residual: float = SUCCESS_RESIDUAL,
) -> AngleSolution:
    """Find wave-plate angles realizing a passive single-qubit operator.

    The target must have spectral norm <= 1 (up to 1e-9); the circuit is a
    contraction and cannot amplify.  A failed budget is reported through
    ``success=False`` on the returned solution rather than an exception, so
    the best residual found stays available to the caller.
    """
    variant = DecompositionVariant(variant)
    if variant is DecompositionVariant.TWO_QUBIT:
        raise ValueError("use compile_two_qubit for the two-qubit variant")
    target = np.asarray(target, dtype=complex)
    if target.shape != (2, 2):
        raise ValueError(f"expected a 2x2 target, got {target.shape}")
    norm = np.linalg.norm(target, 2)
    if norm > 1 + 1e-9:
        raise NotPassive(f"spectral norm {norm:.6g} exceeds 1")

    t00, t01, t10, t11 = target.reshape(-1)
    c00, c01, c10, c11 = target.conj().reshape(-1)

    def objective(x):
        r = _single_entries(variant, x)
        z = c00 * r[0] + c01 * r[1] + c10 * r[2] + c11 * r[3]
        mag = abs(z)
        if mag < 1e-300:
            phase = 1.0 + 0j
        else:
            phase = z / mag
        return math.sqrt(
            abs(r[0] - phase * t00) ** 2
            + abs(r[1] - phase * t01) ** 2
            + abs(r[2] - phase * t10) ** 2
            + abs(r[3] - phase * t11) ** 2
        )

    return _compile(
        target, variant, objective,
        lambda x: _realize_single_vec(variant, x),
        restarts, seed, success_residual,
    )


def compile_two_qubit(
    target,
    restarts: int = 50,
    seed: int | None = None,
    success_residual: float = SUCCESS_RESIDUAL,
) -> AngleSolution:
    """Find angles for the layered two-qubit circuit realizing a unitary."""
    target = np.asarray(target, dtype=complex)
    if target.shape != (4, 4):
        raise ValueError(f"expected a 4x4 target, got {target.shape}")
    defect = np.abs(target.conj().T @ target - np.eye(4)).max()
    if defect > 1e-9:
        raise NotUnitary(f"unitarity defect {defect:.3g}")

    def objective(x):
        realized = _realize_two_qubit_vec(x)
        z = np.vdot(target, realized)
        mag = abs(z)
        phase = z / mag if mag > 1e-300 else 1.0 + 0j
        return float(np.linalg.norm(realized - phase * target))

    return _compile(
        target, DecompositionVariant.TWO_QUBIT, objective,
        _realize_two_qubit_vec, restarts, seed, success_residual,
    )


def solution_record(sol: AngleSolution) -> str:
    """Flat key-value text record of an angle solution (one pair per line)."""
    lines = [
        f"variant = {sol.variant.value}",
        f"residual = {sol.residual:.17g}",
        f"global_phase = {sol.global_phase:.17g}",
        f"success = {str(sol.success).lower()}",
        f"restarts_used = {sol.restarts_used}",
    ]
    lines += [f"{name} = {val:.17g}" for name, val in sol.angles.items()]
    return "\n".join(lines) + "\n"
