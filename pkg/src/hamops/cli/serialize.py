"""Text and JSON encodings of hamops values.

The text form uses the :mod:`hamops.cli.parser` grammar, so
``parse_expr(to_text(e), e.space) == e``.  The JSON form is meant for golden
files: keys are sorted and every term is a (numerator, denominator, odd
monomial) triple with multi-indices written as count maps.
"""

from __future__ import annotations

import json
from fractions import Fraction

import flint

from ..kernel import EvenJet, Expr, IndepVar, OddJet, Parameter
from ..ratfunc import RationalFunction

__all__ = ["to_text", "to_json", "to_jsonable", "expr_from_json", "serialize", "space_to_json"]


def _poly_text(p) -> str:
    return str(p)


def _is_single_term(p) -> bool:
    return len(p) == 1


def coeff_text(c: RationalFunction) -> str:
    if c.den.is_one():
        return _poly_text(c.num)
    return f"({_poly_text(c.num)})/({_poly_text(c.den)})"


def _term_text(space, mon, c: RationalFunction) -> str:
    if not mon:
        # the even part always sorts first, so a bare multi-term sum is safe
        return coeff_text(c)
    odd = "*".join(space.odd_names[o] for o in mon)
    if c.den.is_one():
        if c.num.is_one():
            return odd
        if (-c.num).is_one():
            return "-" + odd
        if _is_single_term(c.num):
            return f"{_poly_text(c.num)}*{odd}"
        return f"({_poly_text(c.num)})*{odd}"
    return f"{coeff_text(c)}*{odd}"


def _term_order(space):
    return lambda item: (len(item[0]), item[0])


def to_text(e: Expr) -> str:
    if not e.terms:
        return "0"
    items = sorted(e.terms.items(), key=_term_order(e.space))
    parts = []
    for k, (mon, c) in enumerate(items):
        t = _term_text(e.space, mon, c)
        if k == 0:
            parts.append(t)
        elif t.startswith("-"):
            parts.append(" - " + t[1:])
        else:
            parts.append(" + " + t)
    return "".join(parts)


# JSON -------------------------------------------------------------------------
def _sigma_map(space, sigma) -> dict:
    return {space.indep[k]: c for k, c in enumerate(sigma) if c}


def _atom_json(space, atom, exp=None) -> dict:
    if isinstance(atom, IndepVar):
        d = {"indep": space.indep[atom.index]}
    elif isinstance(atom, Parameter):
        d = {"param": atom.name}
    elif isinstance(atom, EvenJet):
        d = {"var": space.dep[atom.dep], "sigma": _sigma_map(space, atom.sigma)}
    else:
        d = {"var": space.odd[atom.odd], "sigma": _sigma_map(space, atom.sigma)}
    if exp is not None:
        d["exp"] = exp
    return d


def _fmpq_text(q) -> str:
    q = flint.fmpq(q)
    return str(int(q.p)) if int(q.q) == 1 else f"{int(q.p)}/{int(q.q)}"


def _poly_json(space, p) -> list:
    out = []
    for exps, coeff in p.terms():
        factors = [
            _atom_json(space, space.gen_atoms[g], int(e)) for g, e in enumerate(exps) if e
        ]
        out.append({"coeff": _fmpq_text(coeff), "factors": factors})
    return out


def space_to_json(space) -> dict:
    return {
        "indep": list(space.indep),
        "dep": list(space.dep),
        "odd": list(space.odd),
        "params": list(space.params),
        "total_order": space.total_order,
    }


def expr_to_json(e: Expr, with_space: bool = True) -> dict:
    sp = e.space
    terms = []
    for mon, c in sorted(e.terms.items(), key=_term_order(sp)):
        terms.append(
            {
                "num": _poly_json(sp, c.num),
                "den": _poly_json(sp, c.den),
                "odd": [_atom_json(sp, sp.odd_atoms[o]) for o in mon],
            }
        )
    d = {"type": "expr", "terms": terms}
    if with_space:
        d["space"] = space_to_json(sp)
    return d


def _atom_from_json(space, d):
    if "indep" in d:
        return IndepVar(space.indep.index(d["indep"]))
    if "param" in d:
        return Parameter(d["param"])
    sigma = tuple(d.get("sigma", {}).get(nm, 0) for nm in space.indep)
    if d["var"] in space.dep:
        return EvenJet(space.dep.index(d["var"]), sigma)
    return OddJet(space.odd.index(d["var"]), sigma)


def _poly_from_json(space, items):
    nv = len(space.gen_atoms)
    data = {}
    for item in items:
        exps = [0] * nv
        for f in item["factors"]:
            exps[space.gen_index(_atom_from_json(space, f))] = f["exp"]
        data[tuple(exps)] = flint.fmpq(Fraction(item["coeff"]).numerator, Fraction(item["coeff"]).denominator)
    return space.ctx.from_dict(data) if data else space.ctx.constant(0)


def expr_from_json(d: dict, space=None) -> Expr:
    if space is None:
        from ..jetspace import SpaceSpec

        s = d["space"]
        space = SpaceSpec(s["indep"], s["dep"], s["odd"], s["total_order"], s["params"])
    out = Expr(space)
    for t in d["terms"]:
        num = _poly_from_json(space, t["num"])
        den = _poly_from_json(space, t["den"])
        coeff = Expr.from_coefficient(space, RationalFunction(num, den))
        odd = Expr.constant(space, 1)
        for a in t["odd"]:
            odd = odd * space.atom_expr(_atom_from_json(space, a))
        out = out + coeff * odd
    return out


def to_jsonable(value, with_space: bool = True):
    """Convert a hamops value (or nested lists/dicts of them) to JSON data."""
    from ..schouten import CDiffOp, Superfun
    from ..varcalc import EulerResult

    if isinstance(value, Expr):
        return expr_to_json(value, with_space)
    if isinstance(value, Superfun):
        d = {
            "type": "superfun",
            "degree": value.degree,
            "comps": [expr_to_json(c, False) for c in value.comps],
        }
        if with_space:
            d["space"] = space_to_json(value.space)
        return d
    if isinstance(value, CDiffOp):
        entries = []
        for (i, j), col in sorted(value.comps.items()):
            for sigma, coeff in sorted(col.items()):
                entries.append(
                    {
                        "i": i,
                        "j": j,
                        "sigma": _sigma_map(value.space, sigma),
                        "coeff": expr_to_json(coeff, False),
                    }
                )
        d = {"type": "cdiffop", "rows": value.rows, "cols": value.cols, "entries": entries}
        if with_space:
            d["space"] = space_to_json(value.space)
        return d
    if isinstance(value, EulerResult):
        return {
            "type": "euler",
            "even": [expr_to_json(c, False) for c in value.even_part],
            "odd": [expr_to_json(c, False) for c in value.odd_part],
            "is_zero": value.is_zero(),
        }
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v, with_space) for v in value]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v, with_space) for k, v in value.items()}
    if isinstance(value, Fraction):
        return str(value)
    if hasattr(value, "to_jsonable"):
        return value.to_jsonable()
    return value


def to_json(value, with_space: bool = True) -> str:
    return json.dumps(to_jsonable(value, with_space), sort_keys=True, indent=2)


def value_text(value) -> str:
    """Human-readable text for any hamops value."""
    from ..schouten import CDiffOp, Superfun
    from ..varcalc import EulerResult

    if isinstance(value, Expr):
        return to_text(value)
    if isinstance(value, Superfun):
        return "{" + ", ".join(to_text(c) for c in value.comps) + "}"
    if isinstance(value, EulerResult):
        ev = ", ".join(to_text(c) for c in value.even_part)
        od = ", ".join(to_text(c) for c in value.odd_part)
        return "{{" + ev + "},{" + od + "}}"
    if isinstance(value, CDiffOp):
        return value.to_text()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return "{" + ", ".join(value_text(v) for v in value) + "}"
    if hasattr(value, "to_text"):
        return value.to_text()
    return str(value)


def serialize(value, format: str = "text") -> bytes:
    if format == "text":
        return value_text(value).encode()
    if format == "json":
        return to_json(value).encode()
    raise ValueError(f"unknown format {format!r}")
