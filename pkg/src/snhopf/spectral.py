"""Linear analysis of scalar delay equations with finitely many point delays.

The linear part is a finite atomic measure (list of delay points and real
weights); that keeps the characteristic function, its derivative and the
adjoint pairing in closed form, and it covers every construction used by
the realizability machinery, which only ever places polynomial
nonlinearities at point delays.

Provided here: characteristic values, inverse eigen-placement (choose
weights so the spectrum contains a prescribed zero root and Hopf pairs),
a windowed root scan cross-checked by the argument principle, hypothesis
verification (simplicity, rational non-resonance up to a height bound,
spectral margin), and the dual-basis values at zero that weight every
center-manifold reduction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import HypothesisError, NumericalError, PreconditionError

#: |Delta(root)| tolerance for certified roots
ROOT_TOL = 1e-10
#: simplicity threshold for |Delta'(root)|
SIMPLE_TOL = 1e-8
#: |Re lambda| below this counts as "on the imaginary axis"
AXIS_TOL = 1e-7
#: integer-relation tolerance for the non-resonance scan
RESONANCE_TOL = 1e-8


@dataclass(frozen=True)
class DelayKernel:
    """Discrete measure representation of the linear part: sum_i w_i delta(theta - theta_i)."""

    r: float
    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.r > 0:
            raise PreconditionError("history length r must be positive")
        if len(self.atoms) == 0:
            raise PreconditionError("kernel needs at least one atom")
        thetas = [t for t, _ in self.atoms]
        if len(set(thetas)) != len(thetas):
            raise PreconditionError("duplicate delay points in kernel")
        for t, _ in self.atoms:
            if not (-self.r <= t <= 0):
                raise PreconditionError(
                    f"delay point {t} outside [-r, 0] = [{-self.r}, 0]")

    @property
    def thetas(self) -> np.ndarray:
        return np.array([t for t, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])


def char_value(kernel: DelayKernel, lam: complex) -> complex:
    """Characteristic function: lam - sum_i w_i exp(lam theta_i)."""
    th, w = kernel.thetas, kernel.weights
    return complex(lam - np.sum(w * np.exp(lam * th)))


def char_derivative(kernel: DelayKernel, lam: complex) -> complex:
    """d/dlam of the characteristic function: 1 - sum_i w_i theta_i exp(lam theta_i)."""
    th, w = kernel.thetas, kernel.weights
    return complex(1.0 - np.sum(w * th * np.exp(lam * th)))


@dataclass(frozen=True)
class DesignReport:
    condition_number: float
    max_root_residual: float


def design_kernel(omegas: Sequence[float], delay_points: Sequence[float],
                  r: float | None = None) -> tuple[DelayKernel, DesignReport]:
    """Choose atom weights so the spectrum contains 0 and +-i omega_j.

    Solves the real (2p+1) x (2p+1) system Delta(0) = 0, Re Delta(i omega_j) = 0,
    Im Delta(i omega_j) = 0 for the weights at the given delay points.
    Whether the placed roots are the only ones on the axis (and simple) is
    then certified separately by the root scan.
    """
    omegas = [float(w) for w in omegas]
    p = len(omegas)
    th = [float(t) for t in delay_points]
    if len(th) != 2 * p + 1:
        raise PreconditionError(
            f"need {2 * p + 1} delay points for p={p}, got {len(th)}")
    if len(set(th)) != len(th):
        raise PreconditionError("duplicate delay points")
    if r is None:
        r = max(1.0, -min(th))
    A = np.zeros((2 * p + 1, 2 * p + 1))
    b = np.zeros(2 * p + 1)
    A[0, :] = 1.0
    tharr = np.array(th)
    for j, om in enumerate(omegas):
        A[1 + 2 * j, :] = np.cos(om * tharr)
        A[2 + 2 * j, :] = np.sin(om * tharr)
        b[2 + 2 * j] = om
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(
            f"singular delay placement: condition number {cond:.3e}")
    w = np.linalg.solve(A, b)
    kernel = DelayKernel(r=r, atoms=tuple(zip(th, (float(x) for x in w))))
    roots = [0.0 + 0.0j] + [1j * om for om in omegas]
    resid = max(abs(char_value(kernel, lam)) for lam in roots)
    return kernel, DesignReport(condition_number=cond, max_root_residual=resid)


# ---------------------------------------------------------------------------
# root scanning
# ---------------------------------------------------------------------------

def _newton_harvest(kernel: DelayKernel, re_window: float, im_window: float,
                    grid: int) -> list[complex]:
    re_seeds = np.linspace(-re_window, re_window, grid)
    im_seeds = np.linspace(-im_window, im_window, grid)
    lam = (re_seeds[None, :] + 1j * im_seeds[:, None]).ravel()
    th, w = kernel.thetas, kernel.weights
    for _ in range(60):
        ex = np.exp(np.outer(lam, th))
        f = lam - ex @ w
        fp = 1.0 - ex @ (w * th)
        step = np.where(np.abs(fp) > 1e-14, f / np.where(fp == 0, 1.0, fp), 0.0)
        lam = lam - step
        bad = ~np.isfinite(lam)
        lam[bad] = 1e6
    ex = np.exp(np.outer(lam, th))
    resid = np.abs(lam - ex @ w)
    scale = np.maximum(1.0, np.abs(lam))
    ok = resid <= 1e-11 * scale
    inside = (np.abs(lam.real) <= re_window * (1 + 1e-9)) & \
             (np.abs(lam.imag) <= im_window * (1 + 1e-9))
    cands = lam[ok & inside]
    roots: list[complex] = []
    for z in cands:
        if not any(abs(z - z0) < 1e-6 for z0 in roots):
            roots.append(complex(z))
    return sorted(roots, key=lambda z: (round(z.imag, 9), round(z.real, 9)))


def _winding_number(kernel: DelayKernel, re_window: float, im_window: float
                    ) -> tuple[int, float]:
    """Zero count inside the rectangle via the argument principle.

    Adaptive boundary sampling: refine until every step turns the phase of
    the characteristic value by < pi/2.  Returns (count, min |Delta| on the
    boundary) so the caller can nudge the window off near-boundary roots.
    """
    corners = [complex(-re_window, -im_window), complex(re_window, -im_window),
               complex(re_window, im_window), complex(-re_window, im_window),
               complex(-re_window, -im_window)]
    n = 512
    for _ in range(8):
        pts = []
        for a, b in zip(corners[:-1], corners[1:]):
            t = np.linspace(0.0, 1.0, n, endpoint=False)
            pts.append(a + (b - a) * t)
        path = np.concatenate(pts + [np.array([corners[0]])])
        th, w = kernel.thetas, kernel.weights
        vals = path - np.exp(np.outer(path, th)) @ w
        min_abs = float(np.min(np.abs(vals)))
        if min_abs == 0.0:
            return -1, 0.0
        dphi = np.angle(vals[1:] / vals[:-1])
        if np.max(np.abs(dphi)) < math.pi / 2:
            total = float(np.sum(dphi)) / (2 * math.pi)
            count = int(round(total))
            if abs(total - count) > 0.1:
                raise NumericalError(
                    f"argument principle did not close: winding {total:.4f}")
            return count, min_abs
        n *= 2
    raise NumericalError("boundary sampling failed to resolve the phase")


@dataclass
class RootScan:
    """Result of a windowed scan: certified axis roots, the other roots seen
    in the window, and the spectral margin (min |Re| among the others; by
    convention the window half-width when the rest of the window is clean)."""

    axis_roots: tuple[complex, ...]
    other_roots: tuple[complex, ...]
    margin: float
    winding_count: int
    re_window: float
    im_window: float

    @property
    def roots(self) -> tuple[complex, ...]:
        return tuple(sorted(self.axis_roots + self.other_roots,
                            key=lambda z: (round(z.imag, 9), round(z.real, 9))))


def find_imaginary_roots(kernel: DelayKernel, omega_max: float,
                         grid: int = 40, re_window: float = 1.0) -> RootScan:
    """Find all characteristic roots in |Im| <= omega_max, |Re| <= re_window.

    Newton iteration from a seed grid harvests the roots; an
    argument-principle count over the (slightly nudged, root-free) boundary
    certifies that none were missed.  A count mismatch raises, with the
    advice to refine the grid.
    """
    if omega_max <= 0:
        raise PreconditionError("omega_max must be positive")
    rew, imw = float(re_window), float(omega_max)
    count, min_abs = -1, 0.0
    for attempt in range(6):
        try:
            count, min_abs = _winding_number(kernel, rew, imw)
        except NumericalError:
            count, min_abs = -1, 0.0
        if count >= 0 and min_abs > 1e-9:
            break
        rew *= 1.0 + 1.7e-3
        imw *= 1.0 + 1.3e-3
    else:
        raise NumericalError("could not find a root-free scan boundary")
    roots = [z for z in _newton_harvest(kernel, rew, imw, grid)
             if abs(z.real) < rew and abs(z.imag) < imw]
    if len(roots) != count:
        raise NumericalError(
            f"root harvest ({len(roots)}) disagrees with the argument "
            f"principle ({count}); refine the seed grid")
    axis = tuple(z for z in roots if abs(z.real) <= AXIS_TOL)
    other = tuple(z for z in roots if abs(z.real) > AXIS_TOL)
    margin = min((abs(z.real) for z in other), default=rew)
    return RootScan(axis_roots=axis, other_roots=other, margin=float(margin),
                    winding_count=count, re_window=rew, im_window=imw)


# ---------------------------------------------------------------------------
# spectral data and hypothesis verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralData:
    """Verified axis spectrum {0, +-i omega_j}, the characteristic-derivative
    values there, and the dual-basis weights used by every reduction.

    ``psi0[k] = 1 / Delta'(root_k)`` with roots ordered
    (0, i omega_1, -i omega_1, ..., i omega_p, -i omega_p); the first entry
    is real.  ``margin`` is the scanned distance of the rest of the spectrum
    from the imaginary axis (reported, never thresholded here).
    """

    omegas: tuple[float, ...]
    roots: tuple[complex, ...]
    delta_primes: tuple[complex, ...]
    psi0: tuple[complex, ...]
    margin: float

    @property
    def p(self) -> int:
        return len(self.omegas)

    @property
    def u0(self) -> float:
        return self.psi0[0].real

    def u(self, j: int) -> complex:
        """Weight of the x_j row, j = 1..p."""
        return self.psi0[2 * j - 1]


def projection_weights(kernel: DelayKernel, roots: Sequence[complex]
                       ) -> tuple[tuple[complex, ...], float]:
    """Dual-basis first-column values at zero: 1/Delta'(root) per axis root.

    Also returns the dual value attached to the nilpotent direction, which
    vanishes identically (the pairing forces it against the nonzero
    Delta'(0)), hence the constant 0.0 second member.
    """
    out = []
    for lam in roots:
        dp = char_derivative(kernel, lam)
        if abs(dp) < SIMPLE_TOL:
            raise HypothesisError(
                f"root {lam:g} is not numerically simple: |Delta'| = {abs(dp):.2e}")
        out.append(1.0 / dp)
    return tuple(out), 0.0


def analyze_kernel(kernel: DelayKernel, expected_omegas: Sequence[float] | None = None,
                   omega_max: float | None = None, re_window: float = 1.0,
                   grid: int = 40) -> SpectralData:
    """Scan, classify and verify the axis spectrum of a kernel.

    Requires a (numerically) zero root and conjugate Hopf pairs; compares
    against ``expected_omegas`` when given.  Raises HypothesisError when the
    axis spectrum does not have the saddle-node/multi-Hopf shape.
    """
    if omega_max is None:
        if not expected_omegas:
            raise PreconditionError("need omega_max or expected_omegas")
        omega_max = 3.0 * max(expected_omegas)
    scan = find_imaginary_roots(kernel, omega_max, grid=grid, re_window=re_window)
    axis = list(scan.axis_roots)
    zeros = [z for z in axis if abs(z) <= 1e-6]
    if len(zeros) != 1:
        raise HypothesisError(
            f"expected exactly one zero axis root, found {len(zeros)} "
            f"(axis roots: {axis})")
    pos = sorted((z for z in axis if z.imag > 1e-6), key=lambda z: z.imag)
    neg = sorted((z for z in axis if z.imag < -1e-6), key=lambda z: -z.imag)
    if len(pos) != len(neg):
        raise HypothesisError("axis spectrum is not conjugation symmetric")
    for zp, zn in zip(pos, neg):
        if abs(zp - np.conj(zn)) > 1e-8:
            raise HypothesisError("axis roots do not pair into conjugates")
    omegas = tuple(z.imag for z in pos)
    if expected_omegas is not None:
        exp = tuple(float(w) for w in expected_omegas)
        if len(exp) != len(omegas) or any(abs(a - b) > 1e-6
                                          for a, b in zip(sorted(exp), omegas)):
            raise HypothesisError(
                f"declared frequencies {exp} do not match scanned axis "
                f"spectrum {omegas}")
    roots = [0.0 + 0.0j]
    for om, zp, zn in zip(omegas, pos, neg):
        roots.extend([zp, zn])
    for lam in roots:
        if abs(char_value(kernel, lam)) > ROOT_TOL:
            raise NumericalError(
                f"scanned root {lam} fails |Delta| <= {ROOT_TOL:g}")
    psi0, _ = projection_weights(kernel, roots)
    u0 = psi0[0]
    if abs(u0.imag) > 1e-12 * max(1.0, abs(u0)):
        raise NumericalError(f"dual weight at the zero root is not real: {u0}")
    dps = tuple(char_derivative(kernel, lam) for lam in roots)
    return SpectralData(omegas=omegas, roots=tuple(roots), delta_primes=dps,
                        psi0=(complex(u0.real),) + tuple(psi0[1:]),
                        margin=scan.margin)


@dataclass
class HypothesisReport:
    simple_ok: bool
    min_abs_delta_prime: float
    nonresonant_ok: bool
    violation: tuple[int, ...] | None
    resonance_height: int
    margin: float

    @property
    def passed(self) -> bool:
        return self.simple_ok and self.nonresonant_ok

    def summary(self) -> str:
        res = "none" if self.violation is None else f"r={self.violation}"
        return (f"simple={self.simple_ok} (min |Delta'|={self.min_abs_delta_prime:.3e}), "
                f"nonresonant={self.nonresonant_ok} up to height "
                f"{self.resonance_height} (violation: {res}), margin={self.margin:.3g}")


def verify_hypothesis(data: SpectralData, r_max: int = 12) -> HypothesisReport:
    """Check simplicity and rational independence of the frequencies.

    Exact rational independence of floating-point frequencies is
    undecidable; the certificate covers integer relations of height up to
    ``r_max`` at tolerance 1e-8 and reports the first violating relation.
    """
    min_dp = min(abs(d) for d in data.delta_primes)
    simple_ok = min_dp >= SIMPLE_TOL
    violation = None
    p = data.p
    if p > 0:
        om = np.array(data.omegas)
        for r in itertools.product(range(-r_max, r_max + 1), repeat=p):
            h = sum(abs(x) for x in r)
            if h == 0 or h > r_max:
                continue
            if next((x for x in r if x != 0)) < 0:
                continue  # report each +-pair once
            if abs(float(np.dot(r, om))) <= RESONANCE_TOL:
                violation = tuple(r)
                break
    return HypothesisReport(
        simple_ok=simple_ok, min_abs_delta_prime=float(min_dp),
        nonresonant_ok=violation is None, violation=violation,
        resonance_height=r_max, margin=data.margin)


def eigenfunction_pairing(kernel: DelayKernel, lam: complex, lam2: complex
                          ) -> complex:
    """Adjoint-pairing value of the normalized dual exponential at ``lam``
    against the exponential eigenfunction at ``lam2``, in closed form.

    Equals 1 for lam == lam2 a simple root and 0 for two distinct roots.
    The equal-argument case is only defined at roots and is rejected
    elsewhere.
    """
    lam, lam2 = complex(lam), complex(lam2)
    th, w = kernel.thetas, kernel.weights
    dp = char_derivative(kernel, lam)
    if abs(dp) < SIMPLE_TOL:
        raise HypothesisError(f"|Delta'({lam})| = {abs(dp):.2e}: not simple")
    if abs(lam - lam2) <= 1e-12 * max(1.0, abs(lam)):
        if abs(char_value(kernel, lam)) > SIMPLE_TOL:
            raise PreconditionError(
                "equal-argument pairing is only defined at a characteristic root")
        numer = 1.0 - np.sum(w * th * np.exp(lam * th))
        return complex(numer / dp)
    s1 = np.sum(w * np.exp(lam * th))
    s2 = np.sum(w * np.exp(lam2 * th))
    numer = 1.0 - (s2 - s1) / (lam2 - lam)
    return complex(numer / dp)
