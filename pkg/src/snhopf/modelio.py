"""Model and target files (JSON) and the report formats the CLI emits.

One model file drives every command; realization targets are separate
files so a run is reproducible from exactly two artifacts.  Machine blocks
print floats with 17 significant digits; human tables use 6.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Sequence

from .engine import NormalFormOutput, RfdeModel
from .errors import ParseError
from .poly import (DELAY_PLAIN, MU_INDEPENDENT, VANISHING_AT_MU0, Monomial,
                   SpaceDesc, VectorPoly)
from .realize import DelayTuple
from .spectral import DelayKernel
from .symmetry import RadialJet, radial_space, zp2_ok


def _need(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    return obj[key]


def _as_number(val, where: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ParseError(f"{where}: expected a number, got {val!r}")
    return float(val)


def _as_int(val, where: str) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        raise ParseError(f"{where}: expected an integer, got {val!r}")
    return val


def _as_exponents(val, length: int, where: str) -> tuple[int, ...]:
    if not isinstance(val, list) or len(val) != length:
        raise ParseError(f"{where}: expected a list of {length} exponents")
    out = []
    for i, e in enumerate(val):
        e = _as_int(e, f"{where}[{i}]")
        if e < 0:
            raise ParseError(f"{where}[{i}]: negative exponent")
        out.append(e)
    return tuple(out)


def load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from exc


def parse_kernel(doc: Mapping, where: str = "kernel") -> DelayKernel:
    r = _as_number(_need(doc, "r", where), f"{where}.r")
    atoms_doc = _need(doc, "atoms", where)
    if not isinstance(atoms_doc, list) or not atoms_doc:
        raise ParseError(f"{where}.atoms: expected a non-empty list")
    atoms = []
    for i, a in enumerate(atoms_doc):
        theta = _as_number(_need(a, "theta", f"{where}.atoms[{i}]"),
                           f"{where}.atoms[{i}].theta")
        weight = _as_number(_need(a, "weight", f"{where}.atoms[{i}]"),
                            f"{where}.atoms[{i}].weight")
        atoms.append((theta, weight))
    try:
        return DelayKernel(r=r, atoms=tuple(atoms))
    except Exception as exc:
        raise ParseError(f"{where}: {exc}") from exc


def _parse_scalar_jet(entries, nslots: int, s: int, flavor: str, p: int,
                      where: str) -> dict[int, VectorPoly]:
    if not isinstance(entries, list):
        raise ParseError(f"{where}: expected a list")
    by_degree: dict[int, dict] = {}
    for i, ent in enumerate(entries):
        loc = f"{where}[{i}]"
        exps = _as_exponents(_need(ent, "exponents", loc), nslots,
                             f"{loc}.exponents")
        mu = _as_exponents(ent.get("mu_exponents", [0] * s), s,
                           f"{loc}.mu_exponents")
        coeff = _as_number(_need(ent, "coeff", loc), f"{loc}.coeff")
        deg = sum(exps) + sum(mu)
        if deg < 2:
            raise ParseError(f"{loc}: total degree {deg} below 2 (constant "
                             "and linear terms are part of the linear model)")
        mono = Monomial(exps + mu)
        by_degree.setdefault(deg, {})
        by_degree[deg][mono] = by_degree[deg].get(mono, 0.0) + coeff
    out = {}
    for deg, coeffs in by_degree.items():
        space = SpaceDesc(p, s, deg, ncomp=1, flavor=flavor,
                          layout=DELAY_PLAIN, nslots=nslots)
        try:
            out[deg] = VectorPoly(space, [coeffs])
        except ValueError as exc:
            raise ParseError(f"{where}: degree {deg}: {exc}") from exc
    return out


def load_model(path: str) -> tuple[RfdeModel, dict]:
    """Parse a model file into the model plus its spectrum-scan settings."""
    doc = load_json(path)
    kernel = parse_kernel(_need(doc, "kernel", path), "kernel")
    spec_doc = _need(doc, "spectrum", path)
    omegas = _need(spec_doc, "omegas", "spectrum")
    if not isinstance(omegas, list) or not all(
            isinstance(w, (int, float)) and not isinstance(w, bool)
            for w in omegas):
        raise ParseError("spectrum.omegas: expected a list of numbers")
    omegas = [float(w) for w in omegas]
    p = len(omegas)
    if p < 1:
        raise ParseError("spectrum.omegas: at least one frequency required")
    scan = spec_doc.get("scan", {})
    scan_cfg = {
        "omegas": omegas,
        "omega_max": _as_number(scan.get("omega_max", 3.0 * max(omegas)),
                                "spectrum.scan.omega_max"),
        "margin_window": _as_number(scan.get("margin_window", 1.0),
                                    "spectrum.scan.margin_window"),
    }
    delays_doc = _need(doc, "delays", path)
    if not isinstance(delays_doc, list) or not delays_doc:
        raise ParseError("delays: expected a non-empty list")
    try:
        delays = DelayTuple(tuple(_as_number(t, f"delays[{i}]")
                                  for i, t in enumerate(delays_doc)))
    except Exception as exc:
        raise ParseError(f"delays: {exc}") from exc
    s = _as_int(_need(_need(doc, "params", path), "s", "params"), "params.s")
    if s < 0:
        raise ParseError("params.s: must be >= 0")
    order = _as_int(_need(doc, "order", path), "order")
    nl = doc.get("nonlinearity", {})
    eta = _parse_scalar_jet(nl.get("eta", []), len(delays), s,
                            MU_INDEPENDENT, p, "nonlinearity.eta")
    xi = _parse_scalar_jet(nl.get("xi", []), len(delays), s,
                           VANISHING_AT_MU0, p, "nonlinearity.xi")
    nu_forcing = doc.get("nu_forcing", True)
    if not isinstance(nu_forcing, bool):
        raise ParseError("nu_forcing: expected a boolean")
    try:
        model = RfdeModel(kernel=kernel, delays=delays, eta=eta, xi=xi, s=s,
                          order=order, nu_forcing=nu_forcing)
    except Exception as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return model, scan_cfg


def _parse_radial_entries(entries, p: int, s: int, where: str) -> RadialJet:
    if not isinstance(entries, list):
        raise ParseError(f"{where}: expected a list")
    by_degree: dict[int, list[dict]] = {}
    for i, ent in enumerate(entries):
        loc = f"{where}[{i}]"
        comp = _as_int(_need(ent, "component", loc), f"{loc}.component")
        if not (0 <= comp <= p):
            raise ParseError(f"{loc}.component: outside 0..{p}")
        exps = _as_exponents(_need(ent, "exponents", loc), p + 1,
                             f"{loc}.exponents")
        mu = _as_exponents(ent.get("mu_exponents", [0] * s), s,
                           f"{loc}.mu_exponents")
        coeff = _as_number(_need(ent, "coeff", loc), f"{loc}.coeff")
        deg = sum(exps) + sum(mu)
        if deg < 2:
            raise ParseError(f"{loc}: total degree {deg} below 2")
        if not zp2_ok(p, comp, exps + mu):
            raise ParseError(
                f"{loc}: monomial {list(exps)} in component {comp} is not "
                "reflection equivariant")
        comps = by_degree.setdefault(deg, [dict() for _ in range(p + 1)])
        mono = Monomial(exps + mu)
        comps[comp][mono] = comps[comp].get(mono, 0.0) + coeff
    jet = RadialJet.zero(p, s)
    for deg, comps in by_degree.items():
        jet = jet.with_term(deg, VectorPoly(radial_space(p, s, deg), comps))
    return jet


def load_target(path: str, p: int) -> dict:
    """Parse a realization target.

    kind="jet": fields h (mu-independent entries) and q (entries that must
    carry mu exponents).  kind="unfolding": field add with the parameter
    terms to graft onto the base model's radial jet, and optionally
    constrained_degrees.  Both carry s explicitly.
    """
    doc = load_json(path)
    kind = doc.get("kind", "jet")
    if kind not in ("jet", "unfolding"):
        raise ParseError(f"{path}: unknown target kind {kind!r}")
    s = _as_int(_need(doc, "s", path), "s")
    if kind == "jet":
        h = _parse_radial_entries(doc.get("h", []), p, s, "h")
        q = _parse_radial_entries(doc.get("q", []), p, s, "q")
        for deg in h.degrees():
            if not h.mu_vanishing().term(deg).is_zero():
                raise ParseError("h: entries must be mu-independent")
        for deg in q.degrees():
            if not q.mu_zero().term(deg).is_zero():
                raise ParseError("q: entries must vanish at mu = 0")
        return {"kind": "jet", "s": s, "h": h, "q": q}
    add = _parse_radial_entries(doc.get("add", []), p, s, "add")
    constrained = doc.get("constrained_degrees")
    if constrained is not None:
        if not isinstance(constrained, list):
            raise ParseError("constrained_degrees: expected a list")
        constrained = [_as_int(x, "constrained_degrees[]") for x in constrained]
    return {"kind": "unfolding", "s": s, "add": add,
            "constrained": constrained}


# ---------------------------------------------------------------------------
# report formatting
# ---------------------------------------------------------------------------

def format_float(x: float, digits: int = 17) -> str:
    return f"{float(x):.{digits}g}"


def to_jsonable(obj: Any, digits: int = 17) -> Any:
    """Recursive conversion with fixed-significance floats (as strings for
    exact reproducibility) and complex numbers as [re, im] pairs."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return format_float(obj, digits)
    if isinstance(obj, complex):
        return [format_float(obj.real, digits), format_float(obj.imag, digits)]
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, digits) for v in obj]
    return str(obj)


def machine_block(payload: Mapping, digits: int = 17) -> str:
    return json.dumps(to_jsonable(payload, digits), indent=2, sort_keys=True)


def poly_entries(f: VectorPoly) -> list[dict]:
    out = []
    for k, m, c in f.terms():
        cc = complex(c)
        ent: dict[str, Any] = {"component": k, "exponents": list(m)}
        if abs(cc.imag) > 0:
            ent["coeff"] = cc
        else:
            ent["coeff"] = cc.real
        out.append(ent)
    out.sort(key=lambda e: (e["component"], tuple(e["exponents"])))
    return out


def nf_report_lines(nf: NormalFormOutput, digits: int = 6) -> list[str]:
    """Structured text report: one line per (degree, block, component,
    monomial, coefficient)."""
    lines = [f"normal form to order {nf.order} "
             f"(p={nf.p}, s={nf.s}, mode={nf.mode})",
             "omegas: " + ", ".join(f"{w:.{digits}g}" for w in nf.omegas)]
    for cav in nf.caveats():
        lines.append("note: " + cav)
    lines.append("radial part (rho0' also carries the constant nu):")
    for deg in sorted(nf.radial.terms):
        for ent in poly_entries(nf.radial.terms[deg]):
            c = ent["coeff"]
            cstr = (f"{c:.{digits}g}" if isinstance(c, float)
                    else f"{c.real:.{digits}g}{c.imag:+.{digits}g}i")
            lines.append(f"  degree {deg}  rho{ent['component']}'  "
                         f"exps={ent['exponents']}  coeff={cstr}")
    lines.append("angular part (theta_j' = omega_j + ...):")
    for deg in sorted(nf.angular):
        for ent in poly_entries(nf.angular[deg]):
            c = ent["coeff"]
            cstr = (f"{c:.{digits}g}" if isinstance(c, float)
                    else f"{c.real:.{digits}g}{c.imag:+.{digits}g}i")
            lines.append(f"  degree {deg}  theta{ent['component'] + 1}'  "
                         f"exps={ent['exponents']}  coeff={cstr}")
    return lines


def nf_report_csv(nf: NormalFormOutput) -> str:
    rows = ["block,degree,component,exponents,coeff_re,coeff_im"]
    for block, terms in (("equivariant", nf.g), ("radial", nf.radial.terms),
                         ("angular", nf.angular)):
        for deg in sorted(terms):
            for k, m, c in terms[deg].terms():
                cc = complex(c)
                rows.append(
                    f"{block},{deg},{k},\"{' '.join(str(e) for e in m)}\","
                    f"{format_float(cc.real)},{format_float(cc.imag)}")
    return "\n".join(rows) + "\n"


def jet_payload(jet_terms: Mapping[int, VectorPoly]) -> dict:
    return {str(deg): poly_entries(f) for deg, f in sorted(jet_terms.items())}
