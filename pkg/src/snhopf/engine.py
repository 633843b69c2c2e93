"""Center-manifold reduction and equivariant normal forms, degree by degree.

A scalar delay model with the saddle-node forcing reduces, on the center
coordinates, to a finite family of homogeneous vector fields obtained by
lifting the delayed nonlinearity.  Each degree is then split by the frozen
torus projection into an equivariant part (kept) and a complement that is
removed by solving the homological equation; the removing transformation is
pushed through every retained higher degree by exact truncated
substitution, which is where the cross-degree correction terms come from.

Degree-2 output is exact.  From degree 3 on, only the finite-dimensional
part of the transformation is available here: the output carries the
"ode_reduction" mode tag so downstream consumers cannot mistake it for the
full infinite-dimensional normal form of the delay equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import NumericalError, PreconditionError
from .homological import apply_homological, solve_homological
from .poly import (CENTER, DELAY_PLAIN, FULL, MU_INDEPENDENT,
                   VANISHING_AT_MU0, Monomial, SpaceDesc, VectorPoly,
                   check_reality, dict_diff, dict_mul, split_parameter)
from .realize import PAIRED, DelayTuple, embed_plain, lift_to_center
from .spectral import DelayKernel, SpectralData
from .symmetry import (RadialJet, angular_part, project_equivariant_nu0,
                       radial_part)

MODE_ODE_REDUCTION = "ode_reduction"

#: reality drift allowed per normal-form degree (relative to the term norm)
REALITY_TOL = 1e-9


@dataclass
class RfdeModel:
    """Scalar delay model at the singularity: linear kernel, the distinguished
    constant forcing by the unfolding variable, and a polynomial nonlinearity
    in the delayed values split into a mu-independent jet ``eta`` and a
    vanishing-at-mu=0 jet ``xi`` (degrees 2..order, each a scalar polynomial
    over the delay slots)."""

    kernel: DelayKernel | None
    delays: DelayTuple
    eta: dict[int, VectorPoly]
    xi: dict[int, VectorPoly]
    s: int
    order: int
    nu_forcing: bool = True

    def __post_init__(self):
        if self.order < 2:
            raise PreconditionError("model order must be at least 2")
        if self.kernel is not None and not self.delays.within(self.kernel.r):
            raise PreconditionError(
                f"delays {tuple(self.delays)} leave [-r, 0] for r={self.kernel.r}")
        for name, jets, want in (("eta", self.eta, MU_INDEPENDENT),
                                 ("xi", self.xi, VANISHING_AT_MU0)):
            for deg, f in jets.items():
                sp = f.space
                if sp.layout != DELAY_PLAIN or sp.ncomp != 1:
                    raise PreconditionError(
                        f"{name}[{deg}] must be a scalar polynomial over the "
                        "delay slots")
                if sp.nslots != len(self.delays):
                    raise PreconditionError(
                        f"{name}[{deg}] has {sp.nslots} slots, model has "
                        f"{len(self.delays)} delays")
                if sp.s != self.s:
                    raise PreconditionError(
                        f"{name}[{deg}] has s={sp.s}, model has s={self.s}")
                if sp.ell != deg:
                    raise PreconditionError(
                        f"{name}[{deg}] has degree {sp.ell}")
                if not (2 <= deg <= self.order):
                    raise PreconditionError(
                        f"{name} degree {deg} outside 2..{self.order}")
                h, q = split_parameter(f)
                bad = q if want == MU_INDEPENDENT else h
                if not bad.is_zero():
                    raise PreconditionError(
                        f"{name}[{deg}] violates its parameter flavor")


@dataclass
class OdeJet:
    """The reduced equation on the center coordinates: rotations plus the
    nilpotent forcing as the linear skeleton, and one homogeneous vector
    field per degree (already weighted by the dual values at zero)."""

    data: SpectralData
    s: int
    order: int
    terms: dict[int, VectorPoly]

    @property
    def p(self) -> int:
        return self.data.p

    @property
    def omegas(self) -> tuple[float, ...]:
        return self.data.omegas

    def space(self, degree: int) -> SpaceDesc:
        return SpaceDesc(self.p, self.s, degree, ncomp=2 * self.p + 1,
                         flavor=FULL, layout=CENTER)

    def term(self, degree: int) -> VectorPoly:
        f = self.terms.get(degree)
        return f if f is not None else VectorPoly.zero(self.space(degree))


def reduce_to_ode(model: RfdeModel, data: SpectralData) -> OdeJet:
    """Lift the model nonlinearity onto the center coordinates.

    Every delay slot receives the evaluation of the center basis at its
    delay point (including the t*nu drift of the nilpotent direction), and
    component k of the result is weighted by the dual value u_k.  The split
    into eta/xi parts survives verbatim because the parameters pass through.
    """
    if not model.nu_forcing:
        raise PreconditionError(
            "the reduction requires the saddle-node forcing term")
    terms: dict[int, VectorPoly] = {}
    for j in range(2, model.order + 1):
        parts = [jets[j] for jets in (model.eta, model.xi) if j in jets]
        if not parts:
            continue
        h = parts[0] if len(parts) == 1 else parts[0] + parts[1]
        if h.is_zero():
            continue
        terms[j] = lift_to_center(embed_plain(h), data, model.delays, PAIRED)
    return OdeJet(data=data, s=model.s, order=model.order, terms=terms)


# ---------------------------------------------------------------------------
# pushing a near-identity transformation through the retained degrees
# ---------------------------------------------------------------------------

def _vf_to_dicts(f: VectorPoly) -> list[dict]:
    return [dict(comp) for comp in f.coeffs]


def _substituted_field(terms: Mapping[int, VectorPoly], U: VectorPoly,
                       order: int) -> list[dict]:
    """All degrees of sum_k f_k(x + U(x)) truncated at the working order."""
    space = U.space
    nx = 2 * space.p + 1
    nvars = space.nvars
    subs: list[dict] = []
    for i in range(nx):
        base = {tuple(1 if t == i else 0 for t in range(nvars)): 1.0 + 0.0j}
        for m, c in U.coeffs[i].items():
            base[tuple(m)] = base.get(tuple(m), 0.0) + c
        subs.append(base)
    out: list[dict] = [dict() for _ in range(nx)]
    for k in sorted(terms):
        f = terms[k]
        for comp, mono, c in f.terms():
            # start from the nu/mu part of the monomial; only the rotation
            # block is substituted
            start = tuple([0] * nx + list(mono[nx:]))
            poly = {start: c}
            for i in range(nx):
                for _ in range(mono[i]):
                    poly = dict_mul(poly, subs[i], order)
            acc = out[comp]
            for m2, c2 in poly.items():
                acc[m2] = acc.get(m2, 0.0) + c2
    return out


def _jacobian_apply(U: VectorPoly, W: list[dict], order: int) -> list[dict]:
    """DU(x) . W with truncation; derivatives only in the rotation block."""
    nx = 2 * U.space.p + 1
    out: list[dict] = [dict() for _ in range(nx)]
    for k in range(nx):
        Uk = {tuple(m): c for m, c in U.coeffs[k].items()}
        for i in range(nx):
            dki = dict_diff(Uk, i)
            if not dki or not W[i]:
                continue
            prod = dict_mul(dki, W[i], order)
            acc = out[k]
            for m, c in prod.items():
                acc[m] = acc.get(m, 0.0) + c
    return out


def _push_through(terms: dict[int, VectorPoly], U: VectorPoly,
                  order: int, omegas: Sequence[float]) -> dict[int, VectorPoly]:
    """Transform the retained field under x -> x + U(x), truncated.

    With G = sum f_k(x + U) and L the homological operator, the transformed
    nonlinear part R solves R = G - L U - DU . R; the iteration terminates
    because DU raises degree.  Degrees below deg(U) are untouched, the
    degree of U itself becomes f - L U, and the higher degrees accumulate
    the correction terms.
    """
    space = next(iter(terms.values())).space if terms else U.space
    nx = 2 * space.p + 1
    G = _substituted_field(terms, U, order)
    LU = _vf_to_dicts(apply_homological(U, omegas))
    base = [dict() for _ in range(nx)]
    for k in range(nx):
        acc = dict(G[k])
        for m, c in LU[k].items():
            acc[m] = acc.get(m, 0.0) - c
        base[k] = {m: c for m, c in acc.items() if c != 0}
    R = [dict(b) for b in base]
    ju = U.space.ell
    n_iter = max(1, math.ceil((order - 2) / max(1, ju - 1)) + 1)
    for _ in range(n_iter):
        correction = _jacobian_apply(U, R, order)
        R = [
            {m: c for m, c in
             {**base[k],
              **{m2: base[k].get(m2, 0.0) - c2
                 for m2, c2 in correction[k].items()}}.items() if c != 0}
            for k in range(nx)
        ]
    out: dict[int, VectorPoly] = {}
    for deg in range(2, order + 1):
        comps: list[dict] = [dict() for _ in range(nx)]
        nonzero = False
        for k in range(nx):
            for m, c in R[k].items():
                if sum(m) == deg and c != 0:
                    comps[k][Monomial(m)] = c
                    nonzero = True
        if nonzero:
            sp = space.with_(ell=deg, flavor=FULL)
            out[deg] = VectorPoly(sp, comps, _validate=False)
    return out


@dataclass
class NormalFormOutput:
    """Per-degree equivariant terms, the transformations that produced them,
    and their polar decoupling.  ``mode`` travels with the output: degree-2
    terms are exact, higher degrees carry only the finite-dimensional
    transformation contributions."""

    p: int
    s: int
    order: int
    omegas: tuple[float, ...]
    mode: str
    g: dict[int, VectorPoly]
    transforms: dict[int, VectorPoly]
    radial: RadialJet
    angular: dict[int, VectorPoly]

    def caveats(self) -> list[str]:
        if self.order >= 3:
            return [
                f"mode={self.mode}: transformation contributions from the "
                "infinite-dimensional complement are not included at "
                "degree >= 3 (degree-2 output is exact)"]
        return []


def _audit_reality(f: VectorPoly, what: str) -> None:
    tol = REALITY_TOL * max(1.0, f.norm())
    ok, viol = check_reality(f, tol=tol)
    if not ok:
        k, m, res = viol
        raise NumericalError(
            f"reality violated in {what}: component {k}, monomial {tuple(m)}, "
            f"residual {res:g}")


def normal_form(jet: OdeJet, order: int | None = None) -> NormalFormOutput:
    """Equivariant normal form of the reduced equation up to the given order.

    Ascending over degrees: project the current degree onto the equivariant
    complement, solve the homological equation for the rest, and push the
    transformation through the higher retained degrees.  Both outputs of a
    degree are audited for reality before moving on.  Feeding the output
    back in reproduces it (all complements are already zero).
    """
    if order is None:
        order = jet.order
    if order < 2:
        raise PreconditionError("normal form starts at degree 2")
    omegas = jet.omegas
    terms: dict[int, VectorPoly] = {}
    for j in range(2, order + 1):
        terms[j] = jet.term(j)
    g: dict[int, VectorPoly] = {}
    transforms: dict[int, VectorPoly] = {}
    for j in range(2, order + 1):
        tj = terms[j]
        gj = project_equivariant_nu0(tj)
        rest = tj - gj
        if rest.is_zero(1e-300):
            Uj = VectorPoly.zero(jet.space(j))
        else:
            Uj, _ = solve_homological(rest, omegas)
        _audit_reality(gj, f"degree-{j} normal form term")
        _audit_reality(Uj, f"degree-{j} transformation")
        g[j] = gj
        transforms[j] = Uj
        if not Uj.is_zero() and j < order:
            pushed = _push_through(terms, Uj, order, omegas)
            for deg in range(2, order + 1):
                new = pushed.get(deg)
                if new is None:
                    new = VectorPoly.zero(jet.space(deg))
                if deg < j:
                    drift = (new - g[deg]).norm()
                    if drift > 1e-9 * max(1.0, g[deg].norm()):
                        raise NumericalError(
                            f"degree-{deg} term drifted ({drift:g}) while "
                            f"transforming degree {j}")
                elif deg == j:
                    drift = (new - gj).norm()
                    if drift > 1e-9 * max(1.0, gj.norm()):
                        raise NumericalError(
                            f"degree-{j} term missed its normal form by "
                            f"{drift:g}")
                    terms[j] = gj
                else:
                    terms[deg] = new
        else:
            terms[j] = gj
    radial = RadialJet(jet.p, jet.s,
                       {j: radial_part(g[j]) for j in g})
    angular = {j: angular_part(g[j]) for j in g}
    return NormalFormOutput(p=jet.p, s=jet.s, order=order, omegas=omegas,
                            mode=MODE_ODE_REDUCTION, g=g,
                            transforms=transforms, radial=radial,
                            angular=angular)


@dataclass
class PolarSystem:
    """Polar form of an equivariant normal form: the closed radial block
    (with the constant unfolding forcing in the first row) and the driven
    angular rates (constants omega_j plus polynomial corrections)."""

    omegas: tuple[float, ...]
    nu_in_rho0: bool
    radial: RadialJet
    angular: dict[int, VectorPoly]


def polar_decouple(nf: NormalFormOutput) -> PolarSystem:
    """Re-derive the polar decoupling from the equivariant terms.

    The equivariance filter guarantees the radial block closes on itself
    (no angles on any right-hand side); the unfolding variable survives
    only as the constant forcing of the first radial equation.
    """
    radial = RadialJet(nf.p, nf.s, {j: radial_part(f) for j, f in nf.g.items()})
    angular = {j: angular_part(f) for j, f in nf.g.items()}
    return PolarSystem(omegas=nf.omegas, nu_in_rho0=True, radial=radial,
                       angular=angular)


# ---------------------------------------------------------------------------
# the classic codimension-two interaction, quadratic + cubic
# ---------------------------------------------------------------------------

@dataclass
class SnHopfCoefficients:
    """Named coefficients of the cubic radial normal form at a
    saddle-node/single-Hopf interaction:
    rho0' = nu + a1 rho0^2 + a2 rho1^2 + a3 rho0^3 + a4 rho0 rho1^2,
    rho1' = b1 rho0 rho1 + b2 rho1^3 + b3 rho1 rho0^2."""

    a1: float
    a2: float
    a3: float
    a4: float
    b1: float
    b2: float
    b3: float

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in
                ("a1", "a2", "a3", "a4", "b1", "b2", "b3")}


_SNHOPF_KEYS = ("A20", "A11", "A02", "A30", "A21", "A12", "A03")


def saddle_node_hopf_example(coeffs: Mapping[str, float],
                             tau: Sequence[float] | DelayTuple,
                             data: SpectralData
                             ) -> tuple[SnHopfCoefficients, NormalFormOutput]:
    """Quadratic+cubic nonlinearity on two delays at a single Hopf pair:
    run the full pipeline to cubic order and name the seven radial
    coefficients."""
    if data.p != 1:
        raise PreconditionError("this example needs exactly one Hopf pair")
    missing = [k for k in _SNHOPF_KEYS if k not in coeffs]
    if missing:
        raise PreconditionError(f"missing coefficients: {missing}")
    tau = tau if isinstance(tau, DelayTuple) else DelayTuple(tuple(tau))
    if len(tau) != 2:
        raise PreconditionError("this example uses exactly two delays")
    sp2 = SpaceDesc(1, 0, 2, ncomp=1, flavor=MU_INDEPENDENT,
                    layout=DELAY_PLAIN, nslots=2)
    sp3 = sp2.with_(ell=3)
    eta = {
        2: VectorPoly(sp2, [{(2, 0): coeffs["A20"], (1, 1): coeffs["A11"],
                             (0, 2): coeffs["A02"]}]),
        3: VectorPoly(sp3, [{(3, 0): coeffs["A30"], (2, 1): coeffs["A21"],
                             (1, 2): coeffs["A12"], (0, 3): coeffs["A03"]}]),
    }
    model = RfdeModel(kernel=None, delays=tau, eta=eta, xi={}, s=0, order=3)
    nf = normal_form(reduce_to_ode(model, data), 3)

    def rc(deg: int, comp: int, exps: tuple[int, ...]) -> float:
        val = nf.radial.term(deg).coeffs[comp].get(Monomial(exps), 0.0)
        return float(complex(val).real)

    out = SnHopfCoefficients(
        a1=rc(2, 0, (2, 0)), a2=rc(2, 0, (0, 2)),
        a3=rc(3, 0, (3, 0)), a4=rc(3, 0, (1, 2)),
        b1=rc(2, 1, (1, 1)), b2=rc(3, 1, (0, 3)), b3=rc(3, 1, (2, 1)),
    )
    return out, nf
