"""Command-line interface.

Inputs are inline JSON or ``@path`` to a JSON file.  Exit status is 0 on
success, 2 on a domain rejection (message printed verbatim) and 1 on I/O or
parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import abelian, elliptic
from .family import SectionK, VerticalSection, laur, laur_contour
from .frames import (
    FrameSet,
    GermSection,
    NodalConfiguration,
    dimension_count,
    frame_normalize,
    mat_from_json,
    mat_to_json,
)
from .pairing import (
    DEFAULT_TAUS,
    CoordinateChange,
    PairingResult,
    compplum_all,
    lp_pairing,
    normal_cocycle,
    plumbing_pairing,
    plumbing_pairing_limit,
)
from .series import ComplexSeries, DomainError, compose, diagonal, dumps, partial

TRUNC_ENV = "NODAL_PLUMBING_TRUNC"
FALLBACK_TRUNC = 8


class UsageError(Exception):
    """Bad arguments or unreadable input (exit status 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def default_trunc() -> int:
    raw = os.environ.get(TRUNC_ENV)
    if raw is None:
        return FALLBACK_TRUNC
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{TRUNC_ENV}={raw!r} is not an integer")
    if value < 0:
        raise UsageError(f"{TRUNC_ENV} must be non-negative")
    return value


def _load(text: str) -> Any:
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {text[1:]}: {exc.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON: {exc}")


def _complex_arg(text: str) -> complex:
    """``re,im`` or a bare real."""
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}; use re,im")
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise UsageError(f"cannot parse complex number {text!r}; use re,im")


def cnum(c) -> dict:
    c = complex(c)
    return {"re": c.real, "im": c.imag}


def _series(obj) -> ComplexSeries:
    return ComplexSeries.from_json_obj(obj)


def _univariate(obj, name: str, trunc: int) -> ComplexSeries:
    """A series object, or a list of coefficients of ``x, x^2, ...`` (numbers or ``[re, im]``)."""
    if isinstance(obj, list):
        coeffs = [complex(*c) if isinstance(c, list) else complex(c) for c in obj]
        return ComplexSeries((name,), max(trunc, len(coeffs)), {(k + 1,): c for k, c in enumerate(coeffs)})
    return _series(obj)


# -- subcommands ------------------------------------------------------------------------


def cmd_series(args) -> dict:
    a = _series(_load(args.a))
    op = args.op
    if op == "show":
        out = a
    elif op in ("add", "mul"):
        if args.b is None:
            raise UsageError(f"--op {op} needs --b")
        b = _series(_load(args.b))
        out = a + b if op == "add" else a * b
    elif op == "partial":
        out = partial(a, _need(args.var, "--var"))
    elif op == "diagonal":
        out = diagonal(a, args.out_var or "t")
    elif op == "coefficient":
        exp = _load(_need(args.exp, "--exp"))
        return {"coefficient": cnum(a.coefficient(tuple(exp)))}
    elif op == "compose":
        assign = _load(_need(args.assign, "--assign"))
        out = compose(a, {k: _series(v) for k, v in assign.items()})
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(op)
    return {"series": out.to_json_obj()}


def _need(value, flag):
    if value is None:
        raise UsageError(f"missing {flag}")
    return value


def cmd_laur(args) -> dict:
    eta = SectionK.from_json_obj(_load(args.section))
    return {"laur": laur(eta).to_json_obj()}


def cmd_pair(args) -> dict:
    eta = SectionK.from_json_obj(_load(args.section))
    out: dict = {}
    if args.vertical is not None:
        lam = VerticalSection.from_json_obj(_load(args.vertical))
        out["lp"] = PairingResult(lp_pairing(lam, eta), "closed_form").to_json_obj()
    if args.t is not None:
        t = _complex_arg(args.t)
        out["pairing"] = PairingResult(plumbing_pairing(eta, t), "closed_form").to_json_obj()
        out["t"] = cnum(t)
    else:
        out["limit"] = PairingResult(plumbing_pairing_limit(eta), "closed_form").to_json_obj()
    if args.verify:
        out["verify"] = _verify_pair(eta, args)
    return out


def _verify_pair(eta: SectionK, args) -> dict:
    t = _complex_arg(args.t) if args.t is not None else 1e-2
    L = laur(eta)
    if L.vars[1:]:
        return {"skipped": "section has base parameters; numeric contour check needs values"}
    series_value = L.evaluate({L.vars[0]: t})
    contour = [laur_contour(eta, t, r) for r in (0.2, 0.4)]
    resid = max(abs(c - series_value) for c in contour) / max(abs(series_value), 1e-300)
    return {
        "laur_series": cnum(series_value),
        "laur_contour_r02": cnum(contour[0]),
        "laur_contour_r04": cnum(contour[1]),
        "relative_residual": resid,
        "pass": bool(resid <= 1e-10 or abs(series_value) < 1e-300 and max(abs(c) for c in contour) < 1e-14),
    }


def cmd_compplum(args) -> dict:
    T = args.trunc
    change = CoordinateChange(_univariate(_load(args.F), "z", T), _univariate(_load(args.G), "w", T))
    phi = SectionK.from_json_obj(_load(args.section))
    taus = DEFAULT_TAUS if args.taus is None else tuple(float(x) for x in args.taus.split(","))
    results = compplum_all(change, phi, taus)
    by = {r.method: complex(r.value) for r in results}
    out: dict = {
        "results": [r.to_json_obj() for r in results],
        "normal_cocycle": cnum(normal_cocycle(change)),
    }
    oracle = by["coordinate_change_oracle"]
    if abs(by["closed_form"]) > 0:
        out["oracle_over_closed_form"] = cnum(oracle / by["closed_form"])
    if args.verify:
        fd = by["finite_difference"]
        scale = max(abs(oracle), abs(fd))
        rel = abs(oracle - fd) / scale if scale > 0 else 0.0
        out["verify"] = {"oracle_relative_difference": rel, "pass": bool(rel <= 1e-6 or scale < 1e-12)}
    return out


def _frame_from_json(obj) -> FrameSet:
    """``{"base_vars": [...], "smoothing": "t", "sections": [SectionK...], "eval_matrix": [[series]]}``.

    All sections are germs in a single node chart whose product is ``smoothing``.
    """
    try:
        smoothing = obj["smoothing"]
        sections = [
            GermSection({"node": SectionK.from_json_obj(s)}, {"node": smoothing}) for s in obj["sections"]
        ]
        base_vars = tuple(obj["base_vars"])
        matrix = mat_from_json(obj["eval_matrix"])
    except (KeyError, TypeError) as exc:
        raise UsageError(f"frame JSON is missing or mistypes a field: {exc}")
    return FrameSet(tuple(sections), matrix, base_vars)


def cmd_frames(args) -> dict:
    frame = _frame_from_json(_load(args.frame))
    normalized = frame_normalize(frame)
    out = {
        "condition_number": frame.condition,
        "normalized": {
            "sections": [s.germs["node"].to_json_obj() for s in normalized.sections],
            "eval_matrix": mat_to_json(normalized.eval_matrix),
        },
    }
    return out


def cmd_dims(args) -> dict:
    cfg = NodalConfiguration.from_json_obj(_load(args.config))
    return {
        "dimension": dimension_count(cfg),
        "closed": cfg.closed,
        "euler_characteristic": cfg.euler_characteristic,
        "arithmetic_genus": cfg.arithmetic_genus,
    }


def cmd_example(args) -> dict:
    if args.name == "elliptic":
        return _example_elliptic(args)
    return _example_abelian(args)


def _example_elliptic(args) -> dict:
    tau = _complex_arg(args.tau) if args.tau else 1j
    germ = elliptic.build_family_germ(tau, max(args.trunc, 2))
    table = elliptic.cotangent_frame_table(germ)
    involutions = {}
    for which in ("iota_E", "iota_P"):
        _, rep = elliptic.involution_action(germ, which)
        involutions[which] = {
            "parameter_map": rep.parameter_map,
            "section_signs": rep.section_signs,
            "max_residual": rep.max_residual,
            "squares_to_identity": rep.squares_to_identity,
        }
    out = {
        "tau": cnum(tau),
        "g2": cnum(germ.weierstrass.g2),
        "g3": cnum(germ.weierstrass.g3),
        "residues": {k: {n: cnum(v) for n, v in row.items()} for k, row in germ.residue_table().items()},
        "laur_at_origin": {k: {n: cnum(v) for n, v in row.items()} for k, row in germ.laur_table().items()},
        "simple_pole_coefficients": {
            k: {b: cnum(v) for b, v in row.items()} for k, row in germ.simple_pole_coefficients.items()
        },
        "cotangent_table": {
            "rows": list(elliptic.COTANGENT_ROWS),
            "columns": list(elliptic.COTANGENT_COLUMNS),
            "values": [[cnum(x) for x in row] for row in table.values],
            "provenance": [list(r) for r in table.provenance],
        },
        "involutions": involutions,
    }
    if args.verify:
        points = [0.1, 0.2j, 0.15 - 0.12j]
        wp = elliptic.weierstrass_series(tau, 40)
        diffs = [abs(wp.evaluate(z) - elliptic.weierstrass_lattice_extrapolated(tau, z)) for z in points]
        out["verify"] = {
            "wp_vs_lattice_max": max(diffs),
            "identity_table": bool(np.allclose(table.values, np.eye(3), atol=1e-12)),
            "pass": bool(max(diffs) <= 1e-8 and np.allclose(table.values, np.eye(3), atol=1e-12)),
        }
    return out


def _example_abelian(args) -> dict:
    p_hat = _complex_arg(args.p_hat) if args.p_hat else 0.0
    t = _complex_arg(args.t) if args.t else 1e-2
    model = abelian.PeriodModel(p_hat, t)
    way1, way2 = abelian.derivative_two_ways(model)
    dt = abelian.dt_identity(t)
    out = {
        "p_hat": cnum(p_hat),
        "t": cnum(t),
        "period": cnum(abelian.period(model)),
        "laur_of_square": cnum(abelian.laur_of_square()),
        "derivative_direct": cnum(way1),
        "derivative_via_pairing": cnum(way2),
        "relative_residual": abs(way1 - way2) / abs(way1),
        "dt_pairing": cnum(dt.pairing),
    }
    if args.verify:
        out["verify"] = {"pass": bool(abs(way1 - way2) / abs(way1) <= 1e-13 and dt.ok)}
    return out


# -- text rendering ----------------------------------------------------------------------


def _render_text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(obj, dict):
        if set(obj) == {"re", "im"}:
            return [pad + _fmt(obj)]
        if "terms" in obj and "vars" in obj:
            return [pad + ComplexSeries.from_json_obj(obj).to_string()]
        for k, v in obj.items():
            sub = _render_text(v, indent + 1)
            if len(sub) == 1:
                lines.append(f"{pad}{k}: {sub[0].strip()}")
            else:
                lines.append(f"{pad}{k}:")
                lines.extend(sub)
    elif isinstance(obj, list):
        if all(isinstance(x, dict) and set(x) == {"re", "im"} for x in obj):
            return [pad + "[" + ", ".join(_fmt(x) for x in obj) + "]"]
        for v in obj:
            lines.extend(_render_text(v, indent))
    else:
        lines.append(f"{pad}{obj}")
    return lines


def _fmt(c: dict) -> str:
    re_, im = c["re"], c["im"]
    if im == 0:
        return f"{re_:.12g}"
    return f"{re_:.12g}{im:+.12g}j"


# -- entry point -----------------------------------------------------------------------------


def build_parser(trunc: int) -> argparse.ArgumentParser:
    p = _Parser(prog="nodal-plumbing", description="Series calculus on the plumbing model zw = t.")
    p.add_argument("--format", choices=("json", "text"), default="json")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, verify=False):
        sp.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)
        sp.add_argument("--trunc", type=int, default=trunc)
        if verify:
            sp.add_argument("--verify", action="store_true")

    s = sub.add_parser("series", help="series arithmetic")
    common(s)
    s.add_argument("--op", choices=("show", "add", "mul", "partial", "diagonal", "coefficient", "compose"),
                   default="show")
    s.add_argument("--a", required=True)
    s.add_argument("--b")
    s.add_argument("--var")
    s.add_argument("--out-var", dest="out_var")
    s.add_argument("--exp")
    s.add_argument("--assign", help='JSON object mapping variable names to series')
    s.set_defaults(func=cmd_series)

    s = sub.add_parser("laur", help="Laurent coefficient series of a weight-2 section")
    common(s)
    s.add_argument("--section", required=True)
    s.set_defaults(func=cmd_laur)

    s = sub.add_parser("pair", help="plumbing-tangent and Laurent pairings")
    common(s, verify=True)
    s.add_argument("--section", required=True)
    s.add_argument("--t", help="re,im; omit for the t -> 0 limit")
    s.add_argument("--vertical", help="vertical section JSON for the Laurent pairing")
    s.set_defaults(func=cmd_pair)

    s = sub.add_parser("compplum", help="compare plumbings under a coordinate change")
    common(s, verify=True)
    s.add_argument("--F", required=True)
    s.add_argument("--G", required=True)
    s.add_argument("--section", required=True)
    s.add_argument("--taus", help="comma-separated decreasing positive values")
    s.set_defaults(func=cmd_compplum)

    s = sub.add_parser("frames", help="normalize a frame")
    common(s)
    s.add_argument("--frame", required=True)
    s.set_defaults(func=cmd_frames)

    s = sub.add_parser("dims", help="dimension count of a nodal configuration")
    common(s)
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_dims)

    s = sub.add_parser("example", help="worked examples")
    common(s, verify=True)
    s.add_argument("name", choices=("elliptic", "abelian"))
    s.add_argument("--tau", help="re,im (elliptic)")
    s.add_argument("--p-hat", dest="p_hat", help="re,im (abelian)")
    s.add_argument("--t", help="re,im (abelian)")
    s.set_defaults(func=cmd_example)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser(default_trunc()).parse_args(argv)
        result = args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return 1
    if args.format == "text":
        print("\n".join(_render_text(result)))
    else:
        print(dumps(result))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
