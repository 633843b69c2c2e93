"""Delay lifts, composite radial maps, rank scans and the realizability solvers.

The chain goes: a polynomial in the delayed values (one slot per delay,
optionally paired with a slot that receives the unfolding variable) is
lifted onto the center coordinates by evaluating the center basis at the
delay points and weighting by the dual values at zero; the torus projection
and the polar radial map then land it in the reflection-equivariant radial
space.  Realizing a target radial jet is inverting that composite map
degree by degree, with the corrections induced by lower-degree
normal-form transformations subtracted first.

For generic delay tuples the composite map is onto; the scans here witness
that empirically (numerical rank over samples), including the optimality
experiments with fewer slots than the generic count p+1.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import NumericalError, PreconditionError, RankDeficiencyError
from .poly import (CENTER, DELAY_PAIRED, DELAY_PLAIN, FULL, MU_INDEPENDENT,
                   NU_INDEPENDENT, VANISHING_AT_MU0, Monomial, SpaceDesc,
                   VectorPoly, enumerate_basis, split_parameter)
from .poly import _expand_state_monomial
from .spectral import SpectralData
from .symmetry import (RadialJet, _radial_image_monomial, is_resonant,
                       radial_space, zp2_equivariant_basis)

PAIRED = "paired"
PLAIN = "plain"

#: numerical-rank threshold factor: sigma > RANK_FACTOR * max(m, n) * sigma_max
RANK_FACTOR = 1e-12
#: tolerance of the factorization identity between the two composite routes
FACTORIZATION_TOL = 1e-10
#: per-degree relative round-trip residual required of a realization
REALIZE_TOL = 1e-9


@dataclass(frozen=True)
class DelayTuple:
    """Tuple of distinct delay points; the realization theorems use p+1 of
    them, the optimality experiments fewer."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) == 0:
            raise PreconditionError("empty delay tuple")
        if len(set(vals)) != len(vals):
            raise PreconditionError(f"delay points must be distinct: {vals}")

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def within(self, r: float) -> bool:
        return all(-r <= t <= 0 for t in self.values)


def delay_evaluation_matrices(data: SpectralData, tau: DelayTuple
                              ) -> tuple[np.ndarray, np.ndarray]:
    """Evaluation of the center basis at the delay points.

    Returns (paired, plain): ``paired`` has, per delay, one row
    (1, e^{i w_1 t}, e^{-i w_1 t}, ..., t) feeding a value slot and one row
    (0, ..., 0, 1) feeding the unfolding slot, over the 2p+2 center state
    variables; ``plain`` keeps only the value rows over the 2p+1 rotation
    variables (no nu column).
    """
    p = data.p
    d = len(tau)
    paired = np.zeros((2 * d, 2 * p + 2), dtype=complex)
    plain = np.zeros((d, 2 * p + 1), dtype=complex)
    for i, t in enumerate(tau):
        row = [1.0] + [z for om in data.omegas
                       for z in (np.exp(1j * om * t), np.exp(-1j * om * t))]
        paired[2 * i, :2 * p + 1] = row
        paired[2 * i, 2 * p + 1] = t
        paired[2 * i + 1, 2 * p + 1] = 1.0
        plain[i] = row
    return paired, plain


# ---------------------------------------------------------------------------
# the restriction between the paired and plain delay domains
# ---------------------------------------------------------------------------

def _delay_space(p: int, s: int, ell: int, kind: str, nslots: int) -> SpaceDesc:
    layout = DELAY_PAIRED if kind == PAIRED else DELAY_PLAIN
    return SpaceDesc(p, s, ell, ncomp=1, flavor=FULL, layout=layout,
                     nslots=nslots)


def restrict_w(h: VectorPoly) -> VectorPoly:
    """Set every unfolding slot w_i to zero: paired domain -> plain domain."""
    sp = h.space
    if sp.layout != DELAY_PAIRED:
        raise PreconditionError("restrict_w expects the paired delay layout")
    d = sp.nslots
    out_space = sp.with_(layout=DELAY_PLAIN)
    comps: list[dict] = [dict() for _ in range(sp.ncomp)]
    for k, m, c in h.terms():
        if any(m[2 * i + 1] for i in range(d)):
            continue
        new = tuple(m[2 * i] for i in range(d)) + tuple(m[2 * d:])
        comps[k][Monomial(new)] = comps[k].get(Monomial(new), 0.0) + c
    return VectorPoly(out_space, comps, _validate=False)


def embed_plain(h: VectorPoly) -> VectorPoly:
    """Right inverse of ``restrict_w``: view a plain-domain polynomial in the
    paired domain with zero exponents on every unfolding slot."""
    sp = h.space
    if sp.layout != DELAY_PLAIN:
        raise PreconditionError("embed_plain expects the plain delay layout")
    d = sp.nslots
    out_space = sp.with_(layout=DELAY_PAIRED)
    comps: list[dict] = [dict() for _ in range(sp.ncomp)]
    for k, m, c in h.terms():
        new = tuple(x for i in range(d) for x in (m[i], 0)) + tuple(m[d:])
        comps[k][Monomial(new)] = c
    return VectorPoly(out_space, comps, _validate=False)


def restriction_matrix(p: int, s: int, ell: int, nslots: int) -> np.ndarray:
    """Matrix of ``restrict_w`` over the enumerated scalar bases."""
    dom = enumerate_basis(_delay_space(p, s, ell, PAIRED, nslots))
    tgt_idx = {km: i for i, km in
               enumerate(enumerate_basis(_delay_space(p, s, ell, PLAIN, nslots)))}
    R = np.zeros((len(tgt_idx), len(dom)))
    d = nslots
    for col, (_, m) in enumerate(dom):
        if any(m[2 * i + 1] for i in range(d)):
            continue
        new = Monomial(tuple(m[2 * i] for i in range(d)) + tuple(m[2 * d:]))
        R[tgt_idx[(0, new)], col] = 1.0
    return R


# ---------------------------------------------------------------------------
# lifting a delayed polynomial onto the center coordinates
# ---------------------------------------------------------------------------

def lift_to_center(h: VectorPoly, data: SpectralData, tau: DelayTuple,
                   kind: str = PAIRED) -> VectorPoly:
    """Vector field induced on the center coordinates by a delayed scalar
    polynomial: substitute the delay evaluations into every slot and weight
    component k by the dual value u_k.

    kind="paired": value slots receive the full evaluation including the
    t*nu drift and unfolding slots receive nu itself; the result depends
    on nu.  kind="plain": value slots receive only the rotation part; the
    result is nu-independent.
    """
    p, s = data.p, h.space.s
    paired, plain = delay_evaluation_matrices(data, tau)
    if kind == PAIRED:
        if h.space.layout != DELAY_PAIRED:
            raise PreconditionError("paired lift expects the paired layout")
        M = paired
        out = SpaceDesc(p, s, h.space.ell, ncomp=1, flavor=FULL, layout=CENTER)
    elif kind == PLAIN:
        if h.space.layout != DELAY_PLAIN:
            raise PreconditionError("plain lift expects the plain layout")
        M = plain
        out = SpaceDesc(p, s, h.space.ell, ncomp=1, flavor=NU_INDEPENDENT,
                        layout=CENTER)
    else:
        raise PreconditionError(f"unknown lift kind {kind!r}")
    if h.space.nslots != len(tau):
        raise PreconditionError(
            f"polynomial has {h.space.nslots} slots but {len(tau)} delays given")
    if h.space.ncomp != 1:
        raise PreconditionError("lift_to_center expects a scalar polynomial")

    cache: dict = {}
    ns = h.space.nstate
    n_new_state = M.shape[1]
    scalar: dict[Monomial, complex] = {}
    for _, m, c in h.terms():
        m_state, m_mu = tuple(m[:ns]), tuple(m[ns:])
        for new_state, ec in _expand_state_monomial(m_state, M, cache).items():
            if kind == PLAIN:
                key = Monomial(new_state + (0,) + m_mu)
            else:
                key = Monomial(new_state + m_mu)
            scalar[key] = scalar.get(key, 0.0) + c * ec
    ncomp = 2 * p + 1
    out_vec = out.with_(ncomp=ncomp)
    comps = [{m: data.psi0[k] * c for m, c in scalar.items()}
             for k in range(ncomp)]
    return VectorPoly(out_vec, comps, _validate=False)


# ---------------------------------------------------------------------------
# composite matrices
# ---------------------------------------------------------------------------

def numerical_rank(singular_values: np.ndarray, shape: tuple[int, int]) -> int:
    sv = np.asarray(singular_values)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > RANK_FACTOR * max(shape) * sv[0]))


@dataclass
class CompositeMatrix:
    """Matrix of the degree-ell composite map from a delay domain to the
    reflection-equivariant radial space, with its singular values and (for
    the paired route) the residual of the factorization through the plain
    route, which is checked on construction."""

    kind: str
    p: int
    s: int
    ell: int
    tau: DelayTuple
    matrix: np.ndarray
    singular_values: np.ndarray
    domain_basis: tuple
    target_basis: tuple
    factorization_residual: float | None = None

    @property
    def rank(self) -> int:
        return numerical_rank(self.singular_values, self.matrix.shape)

    @property
    def target_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def sigma_min(self) -> float:
        k = min(self.matrix.shape)
        return float(self.singular_values[k - 1]) if k else 0.0

    @property
    def surjective(self) -> bool:
        return self.rank == self.target_dim


def _composite_columns(data: SpectralData, tau: DelayTuple, ell: int, s: int,
                       kind: str, nslots: int) -> tuple[np.ndarray, tuple, tuple]:
    p = data.p
    dom_space = _delay_space(p, s, ell, kind, nslots)
    dom_basis = enumerate_basis(dom_space)
    tgt_space = radial_space(p, s, ell)
    tgt_basis = zp2_equivariant_basis(tgt_space)
    tgt_idx = {km: i for i, km in enumerate(tgt_basis)}
    center = SpaceDesc(p, s, ell, ncomp=2 * p + 1, flavor=FULL, layout=CENTER)
    nu = center.nu_index

    paired_M, plain_M = delay_evaluation_matrices(data, tau)
    M = paired_M if kind == PAIRED else plain_M
    cache: dict = {}
    ns = dom_space.nstate
    out = np.zeros((len(tgt_basis), len(dom_basis)), dtype=complex)
    for col, (_, m) in enumerate(dom_basis):
        m_state, m_mu = tuple(m[:ns]), tuple(m[ns:])
        expansion = _expand_state_monomial(m_state, M, cache)
        for new_state, ec in expansion.items():
            if kind == PAIRED:
                full = new_state + m_mu
                if full[nu] != 0:
                    continue
            else:
                full = new_state + (0,) + m_mu
            mono = Monomial(full)
            # component 0 and the value rows; conjugate rows are redundant
            if is_resonant(center, 0, mono):
                comp, rmono = _radial_image_monomial(p, 0, mono)
                out[tgt_idx[(comp, rmono)], col] += data.psi0[0] * ec
            for j in range(1, p + 1):
                k = 2 * j - 1
                if is_resonant(center, k, mono):
                    comp, rmono = _radial_image_monomial(p, k, mono)
                    out[tgt_idx[(comp, rmono)], col] += \
                        (data.psi0[k] * ec).real
    imag = float(np.max(np.abs(out.imag))) if out.size else 0.0
    scale = float(np.max(np.abs(out))) if out.size else 1.0
    if imag > 1e-9 * max(scale, 1.0):
        raise NumericalError(
            f"composite matrix has imaginary residue {imag:g}")
    return out.real.copy(), dom_basis, tgt_basis


def composite_matrix(data: SpectralData, tau: DelayTuple, ell: int, s: int,
                     kind: str = PAIRED,
                     nslots: int | None = None) -> CompositeMatrix:
    """Degree-ell matrix of (radial part) o (projection) o (delay lift).

    For the paired route the factorization through the plain route and the
    slot restriction is verified on construction to 1e-10; its residual is
    stored on the result.
    """
    if nslots is None:
        nslots = len(tau)
    if nslots != len(tau):
        raise PreconditionError("nslots must match the delay tuple")
    mat, dom_basis, tgt_basis = _composite_columns(data, tau, ell, s, kind,
                                                   nslots)
    sv = np.linalg.svd(mat, compute_uv=False) if mat.size else np.zeros(0)
    fact = None
    if kind == PAIRED:
        plain_mat, _, _ = _composite_columns(data, tau, ell, s, PLAIN, nslots)
        R = restriction_matrix(data.p, s, ell, nslots)
        ref = float(np.linalg.norm(plain_mat)) or 1.0
        fact = float(np.linalg.norm(mat - plain_mat @ R)) / ref
        if fact > FACTORIZATION_TOL:
            raise NumericalError(
                f"factorization identity violated: residual {fact:g}")
    return CompositeMatrix(kind=kind, p=data.p, s=s, ell=ell, tau=tau,
                           matrix=mat, singular_values=sv,
                           domain_basis=dom_basis, target_basis=tgt_basis,
                           factorization_residual=fact)


# ---------------------------------------------------------------------------
# rank scans
# ---------------------------------------------------------------------------

def sample_delays(rng: np.random.Generator, r: float, d: int, count: int,
                  min_separation: float | None = None) -> list[DelayTuple]:
    """Uniform samples on [-r, 0]^d with pairwise separation >= r/100,
    which keeps the evaluation rows away from near-degenerate geometry."""
    if min_separation is None:
        min_separation = r / 100.0
    out: list[DelayTuple] = []
    while len(out) < count:
        cand = -r * rng.random(d)
        if d > 1:
            gaps = np.min(np.abs(cand[:, None] - cand[None, :])
                          + np.eye(d) * (2 * r))
            if gaps < min_separation:
                continue
        out.append(DelayTuple(tuple(float(t) for t in cand)))
    return out


@dataclass
class RankScanRow:
    tau: DelayTuple
    degree: int
    rank: int
    target_dim: int
    sigma_min: float

    @property
    def surjective(self) -> bool:
        return self.rank == self.target_dim


@dataclass
class RankScanReport:
    kind: str
    p: int
    s: int
    ell: int
    nslots: int
    rows: list[RankScanRow] = field(default_factory=list)

    def fraction_surjective(self, degree: int | None = None) -> float:
        if degree is None:
            by_tau: dict[tuple, bool] = {}
            for row in self.rows:
                key = row.tau.values
                by_tau[key] = by_tau.get(key, True) and row.surjective
            vals = list(by_tau.values())
        else:
            vals = [r.surjective for r in self.rows if r.degree == degree]
        return sum(vals) / len(vals) if vals else 0.0

    def min_sigma_surjective(self) -> float:
        vals = [r.sigma_min for r in self.rows if r.surjective]
        return min(vals) if vals else float("nan")

    def structural_deficiency_degree(self) -> int | None:
        """First degree at which every sample is rank deficient."""
        for deg in sorted({r.degree for r in self.rows}):
            degr = [r for r in self.rows if r.degree == deg]
            if degr and all(not r.surjective for r in degr):
                return deg
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"tau{i+1}" for i in range(self.nslots)]
                   + ["degree", "rank", "target_dim", "sigma_min"])
        for row in self.rows:
            w.writerow([f"{t:.17g}" for t in row.tau]
                       + [row.degree, row.rank, row.target_dim,
                          f"{row.sigma_min:.17g}"])
        return buf.getvalue()


def _scan_one(args) -> list[tuple]:
    data, tau, degrees, s, kind = args
    rows = []
    for deg in degrees:
        cm = composite_matrix(data, tau, deg, s, kind)
        rows.append((tau.values, deg, cm.rank, cm.target_dim, cm.sigma_min))
    return rows


def rank_scan(data: SpectralData, ell: int, s: int,
              tau_samples: Sequence[DelayTuple], kind: str = PAIRED,
              workers: int | None = None) -> RankScanReport:
    """Numerical rank of the composite map over a set of delay samples,
    for every degree 2..ell.  Deterministic: results are merged in sample
    order regardless of worker count (SNHOPF_WORKERS or ``workers``)."""
    if not tau_samples:
        raise PreconditionError("no delay samples given")
    nslots = len(tau_samples[0])
    degrees = list(range(2, ell + 1))
    if workers is None:
        workers = int(os.environ.get("SNHOPF_WORKERS", "1"))
    jobs = [(data, tau, degrees, s, kind) for tau in tau_samples]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_one, jobs, chunksize=4))
    else:
        results = [_scan_one(j) for j in jobs]
    report = RankScanReport(kind=kind, p=data.p, s=s, ell=ell, nslots=nslots)
    for rows in results:
        for tau_vals, deg, rank, tdim, smin in rows:
            report.rows.append(RankScanRow(DelayTuple(tau_vals), deg, rank,
                                           tdim, smin))
    return report


# ---------------------------------------------------------------------------
# realization
# ---------------------------------------------------------------------------

MODE_ODE_REDUCTION = "ode_reduction"
MODE_LEADING = "leading"


@dataclass
class RealizationResult:
    """Realized nonlinearity: the mu-independent jet ``eta`` and the
    vanishing-at-mu=0 jet ``xi`` over the delay slots, with the per-degree
    round-trip residuals of the forward pipeline in the mode used."""

    tau: DelayTuple
    eta: dict[int, VectorPoly]
    xi: dict[int, VectorPoly]
    residuals: dict[int, float]
    mode: str

    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def _target_vector(tgt: VectorPoly, basis: Sequence) -> np.ndarray:
    idx = {km: i for i, km in enumerate(basis)}
    b = np.zeros(len(basis))
    for k, m, c in tgt.terms():
        cc = complex(c)
        if (k, m) not in idx:
            if abs(cc) > 1e-10:
                raise PreconditionError(
                    f"target monomial {tuple(m)} in row {k} is not "
                    "reflection equivariant")
            continue
        b[idx[(k, m)]] = cc.real
    return b


def _coeffs_to_jets(cm: CompositeMatrix, coeff: np.ndarray
                    ) -> tuple[VectorPoly, VectorPoly]:
    dom_space = _delay_space(cm.p, cm.s, cm.ell, cm.kind,
                             len(cm.tau))
    # the solver's cross-block round-off (the map is exactly block diagonal
    # over the mu split) is stripped relative to the solution scale
    tol = 1e-13 * float(np.max(np.abs(coeff))) if coeff.size else 0.0
    comps: list[dict] = [dict()]
    for (k, m), c in zip(cm.domain_basis, coeff):
        if abs(c) > tol:
            comps[0][m] = complex(c)
    full = VectorPoly(dom_space, comps, _validate=False)
    return split_parameter(full)


def _forward_radial(data: SpectralData, tau: DelayTuple,
                    eta: Mapping[int, VectorPoly],
                    xi: Mapping[int, VectorPoly],
                    order: int, s: int, mode: str) -> RadialJet:
    """Radial jet produced by the forward pipeline on the given nonlinearity."""
    from .engine import RfdeModel, normal_form, reduce_to_ode
    from .symmetry import project_equivariant_nu0, radial_part
    eta = {j: f for j, f in eta.items() if j <= order and not f.is_zero()}
    xi = {j: f for j, f in xi.items() if j <= order and not f.is_zero()}
    model = RfdeModel(kernel=None, delays=tau, eta=eta, xi=xi, s=s,
                      order=order)
    jet = reduce_to_ode(model, data)
    if mode == MODE_LEADING:
        out = RadialJet.zero(data.p, s)
        for j in range(2, order + 1):
            g = project_equivariant_nu0(jet.term(j))
            out = out.with_term(j, radial_part(g))
        return out
    nf = normal_form(jet, order)
    return nf.radial


def realize_jet(data: SpectralData, tau: DelayTuple, target_h: RadialJet,
                target_q: RadialJet | None = None,
                mode: str = MODE_ODE_REDUCTION) -> RealizationResult:
    """Find delayed polynomial jets whose center-manifold radial normal form
    equals the target, degree by degree.

    ``target_h`` holds the mu-independent part, ``target_q`` the part
    vanishing at mu=0.  Ascending over degrees, the correction induced at
    the current degree by the transformations that normalized the lower
    ones is computed with the forward engine (mode "ode_reduction") or
    ignored (mode "leading"), subtracted from the target, and the composite
    matrix is solved in the minimal-norm sense.  Rank deficiency at the
    given delays raises; almost every delay tuple works, so resampling is
    the advertised fix.
    """
    if mode not in (MODE_ODE_REDUCTION, MODE_LEADING):
        raise PreconditionError(f"unknown mode {mode!r}")
    p = data.p
    if target_h.p != p or (target_q is not None and target_q.p != p):
        raise PreconditionError("target jet has wrong number of Hopf pairs")
    s = target_h.s if target_q is None else max(target_h.s, target_q.s)
    target_h = target_h.extend_mu(s)
    target_q = (target_q.extend_mu(s) if target_q is not None
                else RadialJet.zero(p, s))
    for j, f in target_h.terms.items():
        if not split_parameter(f)[1].is_zero():
            raise PreconditionError("target_h must be mu-independent")
    for j, f in target_q.terms.items():
        if not split_parameter(f)[0].is_zero():
            raise PreconditionError("target_q must vanish at mu = 0")
    order = max([2] + target_h.degrees() + target_q.degrees())

    mats = {j: composite_matrix(data, tau, j, s, PLAIN)
            for j in range(2, order + 1)}
    for j, cm in mats.items():
        if not cm.surjective:
            raise RankDeficiencyError(
                f"composite map rank {cm.rank} < {cm.target_dim} at degree "
                f"{j} for tau={tuple(tau)}; resample the delay tuple "
                "(generic tuples are full rank)")

    eta: dict[int, VectorPoly] = {}
    xi: dict[int, VectorPoly] = {}
    for j in range(2, order + 1):
        target_j = target_h.term(j) + target_q.term(j)
        if mode == MODE_ODE_REDUCTION and j > 2 and (eta or xi):
            induced = _forward_radial(data, tau, eta, xi, j, s,
                                      MODE_ODE_REDUCTION)
            target_j = target_j - induced.term(j)
        cm = mats[j]
        b = _target_vector(target_j, cm.target_basis)
        coeff, *_ = np.linalg.lstsq(cm.matrix, b, rcond=RANK_FACTOR)
        resid = float(np.linalg.norm(cm.matrix @ coeff - b))
        if resid > REALIZE_TOL * max(1.0, float(np.linalg.norm(b))):
            raise NumericalError(
                f"degree-{j} solve residual {resid:g} too large")
        ej, qj = _coeffs_to_jets(cm, coeff)
        eta[j] = ej
        xi[j] = qj

    achieved = _forward_radial(data, tau, eta, xi, order, s, mode)
    target = target_h + target_q
    residuals = {}
    for j in range(2, order + 1):
        diff = (achieved.term(j) - target.term(j)).norm()
        residuals[j] = diff / max(target.term(j).norm(), 1.0)
    result = RealizationResult(tau=tau, eta=eta, xi=xi, residuals=residuals,
                               mode=mode)
    if result.max_residual() > REALIZE_TOL:
        raise NumericalError(
            f"round-trip residuals {residuals} exceed {REALIZE_TOL:g}")
    return result


@dataclass
class UnfoldingResult:
    tau: DelayTuple
    xi: dict[int, VectorPoly]
    residuals: dict[int, float]
    mu0_drift: float
    mode: str = MODE_ODE_REDUCTION


def realize_unfolding(data: SpectralData, tau: DelayTuple, base_model,
                      target: RadialJet,
                      constrained_degrees: Sequence[int] | None = None
                      ) -> UnfoldingResult:
    """Realize a parameter unfolding of an existing model's radial jet.

    The base nonlinearity stays untouched; only a vanishing-at-mu=0 jet on
    the same delays is added.  Requires the mu=0 slice of the target to
    equal the base model's computed radial jet, and leaves that slice
    unchanged (checked and reported as ``mu0_drift``).

    ``constrained_degrees`` lists the degrees whose parameter-dependent
    parts must be hit exactly; by default these are the degrees where the
    target actually carries parameter terms, so a low-degree unfolding stays
    low degree (higher-degree parameter corrections induced by the
    transformations are then unconstrained, as in a versal unfolding).
    Pass the full degree range for exact-jet semantics.
    """
    from .engine import normal_form, reduce_to_ode
    from .poly import extend_mu
    p = data.p
    s = target.s
    if s < 1:
        raise PreconditionError("nothing to unfold: target has no parameters")
    if tuple(base_model.delays) != tuple(tau):
        raise PreconditionError(
            "the unfolding delays must match the base model's delay tuple; "
            "re-stage the base model on the combined tuple first")
    order = max([2] + target.degrees() + [base_model.order])
    if constrained_degrees is None:
        constrained_degrees = target.mu_vanishing().degrees()
    constrained = sorted(set(int(j) for j in constrained_degrees))
    if any(j < 2 or j > order for j in constrained):
        raise PreconditionError(f"constrained degrees {constrained} outside "
                                f"2..{order}")

    base_nf = normal_form(reduce_to_ode(base_model, data), order)
    base_jet = base_nf.radial.extend_mu(s)
    drift0 = (target.mu_zero() - base_jet.mu_zero()).norm()
    if drift0 > 1e-10 * max(base_jet.norm(), 1.0):
        raise PreconditionError(
            f"target at mu=0 differs from the base radial jet by {drift0:g}")

    eta = {j: extend_mu(f, s) for j, f in base_model.eta.items()}
    base_xi = {j: extend_mu(f, s) for j, f in base_model.xi.items()}

    xi: dict[int, VectorPoly] = dict(base_xi)
    for j in constrained:
        current = _forward_radial(data, tau, eta, xi, j, s,
                                  MODE_ODE_REDUCTION)
        gap = target.term(j) - current.term(j)
        gap_h, gap_q = split_parameter(gap)
        if gap_h.norm() > 1e-9 * max(1.0, target.norm()):
            raise NumericalError(
                f"mu-independent gap {gap_h.norm():g} at degree {j}: the "
                "unfolding cannot reach it")
        cm = composite_matrix(data, tau, j, s, PLAIN)
        dom_space = _delay_space(p, s, j, PLAIN, len(tau))
        cols = np.array([i for i, (_, m) in enumerate(cm.domain_basis)
                         if dom_space.mu_degree(m) >= 1], dtype=int)
        if cols.size == 0:
            if gap_q.norm() > 1e-12:
                raise RankDeficiencyError(
                    f"no vanishing-at-mu0 columns at degree {j}")
            continue
        sub = cm.matrix[:, cols]
        b = _target_vector(gap_q, cm.target_basis)
        coeff, *_ = np.linalg.lstsq(sub, b, rcond=RANK_FACTOR)
        resid = float(np.linalg.norm(sub @ coeff - b))
        if resid > REALIZE_TOL * max(1.0, float(np.linalg.norm(b))):
            raise RankDeficiencyError(
                f"unfolding solve residual {resid:g} at degree {j}; "
                "resample the delay tuple")
        fullc = np.zeros(cm.matrix.shape[1])
        fullc[cols] = coeff
        _, qj = _coeffs_to_jets(cm, fullc)
        xi[j] = (xi[j] + qj) if j in xi else qj

    achieved = _forward_radial(data, tau, eta, xi, order, s,
                               MODE_ODE_REDUCTION)
    residuals = {}
    for j in constrained:
        diff = (achieved.mu_vanishing().term(j)
                - target.mu_vanishing().term(j)).norm()
        residuals[j] = diff / max(target.term(j).norm(), 1.0)
    mu0_drift = (achieved.mu_zero() - base_jet.mu_zero()).norm()
    added_xi = {}
    for j, f in xi.items():
        base = base_xi.get(j)
        added = f - base if base is not None else f
        if not added.is_zero():
            added_xi[j] = added
    res = UnfoldingResult(tau=tau, xi=added_xi, residuals=residuals,
                          mu0_drift=mu0_drift)
    if max(residuals.values(), default=0.0) > REALIZE_TOL:
        raise NumericalError(f"unfolding round trip failed: {residuals}")
    if mu0_drift > 1e-10 * max(1.0, base_jet.norm()):
        raise NumericalError(
            f"unfolding perturbed the mu=0 slice by {mu0_drift:g}")
    return res
