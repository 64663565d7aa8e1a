"""Sparse truncated multivariate power and Laurent series with complex coefficients.

A :class:`ComplexSeries` stores a map ``exponent tuple -> complex`` together with
an ordered variable list, a truncation order and per-variable lower exponent
bounds.  Truncation is by (weighted) total degree: a term ``x^e`` has degree
``sum(w_i * e_i)`` and only terms of degree ``<= trunc`` are known.  Unit
weights are the default; non-unit weights appear where a series is pulled back
to a fibre annulus (``w = t/zeta`` has weight one when ``t`` carries weight two).

Every operation records the tightest truncation it can certify.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

STRUCTURAL_ZERO = 1e-300

Exponent = tuple[int, ...]


class DomainError(ValueError):
    """A violated mathematical contract (bad input for the operation)."""


class SeriesError(DomainError):
    pass


def _as_complex(value) -> complex:
    c = complex(value)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise SeriesError(f"non-finite coefficient {value!r}")
    return c


class ComplexSeries:
    """Immutable truncated series ``sum c_e x^e`` in named variables.

    Terms of weighted degree above ``trunc`` are silently discarded at
    construction; exponents below the declared lower bound are rejected.
    """

    __slots__ = ("vars", "trunc", "lower", "weights", "_terms")

    def __init__(
        self,
        vars: Sequence[str],
        trunc: int,
        terms: Mapping[Sequence[int], complex] | None = None,
        lower: Sequence[int] | None = None,
        weights: Sequence[int] | None = None,
    ):
        vars = tuple(vars)
        if len(set(vars)) != len(vars) or not all(isinstance(v, str) and v for v in vars):
            raise SeriesError(f"variable names must be distinct non-empty strings: {list(vars)}")
        if isinstance(trunc, bool) or int(trunc) != trunc or trunc < 0:
            raise SeriesError(f"truncation order must be a non-negative integer, got {trunc!r}")
        n = len(vars)
        lower = tuple(int(x) for x in lower) if lower is not None else (0,) * n
        weights = tuple(int(x) for x in weights) if weights is not None else (1,) * n
        if len(lower) != n or len(weights) != n:
            raise SeriesError("lower bounds and weights must have one entry per variable")
        if any(x > 0 for x in lower):
            raise SeriesError(f"lower exponent bounds must be <= 0, got {list(lower)}")
        if any(x < 1 for x in weights):
            raise SeriesError(f"degree weights must be positive, got {list(weights)}")
        trunc = int(trunc)
        clean: dict[Exponent, complex] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n:
                raise SeriesError(f"exponent {exp} has length {len(exp)}, expected {n} for vars {list(vars)}")
            for e, lo, name in zip(exp, lower, vars):
                if e < lo:
                    raise SeriesError(
                        f"exponent {e} of {name!r} is below its lower bound {lo}"
                        + (" (Laurent mode is opt-in per variable)" if lo == 0 else "")
                    )
            if sum(w * e for w, e in zip(weights, exp)) > trunc:
                continue
            c = _as_complex(c)
            if abs(c) < STRUCTURAL_ZERO:
                continue
            clean[exp] = c
        self.vars = vars
        self.trunc = trunc
        self.lower = lower
        self.weights = weights
        self._terms = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, vars, trunc, lower=None, weights=None) -> ComplexSeries:
        return cls(vars, trunc, {}, lower, weights)

    @classmethod
    def constant(cls, value, vars, trunc, lower=None, weights=None) -> ComplexSeries:
        vars = tuple(vars)
        return cls(vars, trunc, {(0,) * len(vars): value}, lower, weights)

    @classmethod
    def variable(cls, name, vars, trunc, lower=None, weights=None) -> ComplexSeries:
        vars = tuple(vars)
        if name not in vars:
            raise SeriesError(f"unknown variable {name!r}; series variables are {list(vars)}")
        exp = tuple(1 if v == name else 0 for v in vars)
        return cls(vars, trunc, {exp: 1.0}, lower, weights)

    @classmethod
    def monomial(cls, exp, coeff, vars, trunc, lower=None, weights=None) -> ComplexSeries:
        return cls(vars, trunc, {tuple(exp): coeff}, lower, weights)

    def _like(self, terms, trunc=None, lower=None) -> ComplexSeries:
        return ComplexSeries(
            self.vars, self.trunc if trunc is None else trunc, terms,
            self.lower if lower is None else lower, self.weights,
        )

    # -- basic queries --------------------------------------------------------

    @property
    def terms(self) -> dict[Exponent, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree_of(self, exp: Sequence[int]) -> int:
        return sum(w * e for w, e in zip(self.weights, exp))

    def valuation(self) -> float:
        """Smallest weighted degree among stored terms (``inf`` for the zero series)."""
        if not self._terms:
            return math.inf
        return min(self.degree_of(e) for e in self._terms)

    def constant_term(self) -> complex:
        return self._terms.get((0,) * len(self.vars), 0j)

    def index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise SeriesError(f"unknown variable {name!r}; series variables are {list(self.vars)}") from None

    def coefficient(self, exp: Sequence[int]) -> complex:
        return coefficient(self, exp)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexSeries):
            return NotImplemented
        return (
            self.vars == other.vars and self.trunc == other.trunc and self.lower == other.lower
            and self.weights == other.weights and self._terms == other._terms
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"ComplexSeries({self.to_string()}, vars={list(self.vars)}, trunc={self.trunc})"

    def to_string(self, digits: int = 6) -> str:
        if not self._terms:
            return "0"
        parts = []
        for exp in sorted(self._terms):
            c = self._terms[exp]
            mono = "*".join(
                (v if e == 1 else f"{v}^{e}") for v, e in zip(self.vars, exp) if e != 0
            )
            cs = _fmt_complex(c, digits)
            parts.append(cs if not mono else f"{cs}*{mono}")
        return " + ".join(parts)

    def _check_same_ring(self, other: ComplexSeries, op: str):
        if self.vars != other.vars:
            raise SeriesError(
                f"{op}: variable-set mismatch {list(self.vars)} vs {list(other.vars)}"
            )
        if self.weights != other.weights:
            raise SeriesError(
                f"{op}: degree weights differ {list(self.weights)} vs {list(other.weights)}"
            )

    def _coerce(self, other) -> ComplexSeries:
        if isinstance(other, ComplexSeries):
            return other
        if isinstance(other, (int, float, complex, np.number)):
            # scalars are exact: give them the receiver's truncation
            return ComplexSeries.constant(other, self.vars, self.trunc, weights=self.weights)
        return NotImplemented

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, other)

    __radd__ = __add__

    def __neg__(self) -> ComplexSeries:
        return self._like({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, -other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(other, -self)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        if not isinstance(other, ComplexSeries):
            return NotImplemented
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            if other == 0:
                raise SeriesError("division by zero scalar")
            return self.scale(1 / complex(other))
        if isinstance(other, ComplexSeries):
            return mul(self, other.reciprocal())
        return NotImplemented

    def __pow__(self, n: int) -> ComplexSeries:
        if int(n) != n:
            raise SeriesError(f"integer powers only, got {n!r}")
        n = int(n)
        base = self if n >= 0 else self.reciprocal()
        n = abs(n)
        result = ComplexSeries.constant(1.0, self.vars, self.trunc, weights=self.weights)
        while n:
            if n & 1:
                result = mul(result, base)
            n >>= 1
            if n:
                base = mul(base, base)
        return result

    def scale(self, c) -> ComplexSeries:
        c = _as_complex(c)
        return self._like({e: c * v for e, v in self._terms.items()})

    def truncate(self, trunc: int) -> ComplexSeries:
        return self._like(self._terms, trunc=min(trunc, self.trunc))

    def reciprocal(self) -> ComplexSeries:
        """Inverse of a unit by geometric-series expansion to the truncation."""
        c0 = self.constant_term()
        if abs(c0) < STRUCTURAL_ZERO:
            raise SeriesError("reciprocal requires a nonzero constant term")
        zero = (0,) * len(self.vars)
        rest = {e: c / c0 for e, c in self._terms.items() if e != zero}
        if any(self.degree_of(e) <= 0 for e in rest):
            raise SeriesError(
                "reciprocal requires every non-constant term to have positive degree"
            )
        r = self._like(rest)
        acc = ComplexSeries.constant(1.0, self.vars, self.trunc, weights=self.weights)
        power = acc
        for _ in range(self.trunc):
            power = mul(power, -r)
            if power.is_zero():
                break
            acc = add(acc, power)
        return acc.scale(1 / c0)._relower(self.lower)

    def _relower(self, lower) -> ComplexSeries:
        return ComplexSeries(self.vars, self.trunc, self._terms, _tight_lower(lower, self._terms, len(self.vars)), self.weights)

    def mul_monomial(self, exp: Sequence[int], coeff=1.0) -> ComplexSeries:
        """Multiply by ``coeff * x^exp`` (exponents may be negative)."""
        exp = tuple(int(e) for e in exp)
        if len(exp) != len(self.vars):
            raise SeriesError("monomial exponent length mismatch")
        shifted = {tuple(a + b for a, b in zip(e, exp)): coeff * c for e, c in self._terms.items()}
        trunc = self.trunc + self.degree_of(exp)
        if trunc < 0:
            raise SeriesError("monomial shift leaves no certified terms")
        lower = tuple(min(lo, lo + x) for lo, x in zip(self.lower, exp))
        lower = tuple(min(0, x) for x in lower)
        return ComplexSeries(self.vars, trunc, shifted, lower, self.weights)

    def derivative(self, var: str) -> ComplexSeries:
        return partial(self, var)

    # -- structural operations -----------------------------------------------

    def with_vars(self, new_vars: Sequence[str]) -> ComplexSeries:
        """Reorder and/or embed into a ring with additional variables.

        Dropped variables must not appear in any stored term.
        """
        new_vars = tuple(new_vars)
        pos = {v: i for i, v in enumerate(self.vars)}
        for v in self.vars:
            if v not in new_vars and any(e[pos[v]] != 0 for e in self._terms):
                raise SeriesError(f"cannot drop variable {v!r}: it occurs in the series")
        def pick(seq, default):
            return tuple(seq[pos[v]] if v in pos else default for v in new_vars)
        if len(set(self.weights)) > 1 and any(v not in pos for v in new_vars):
            raise SeriesError("embedding a weighted series needs explicit weights")
        weights = pick(self.weights, self.weights[0] if self.weights else 1)
        terms = {pick(e, 0): c for e, c in self._terms.items()}
        return ComplexSeries(new_vars, self.trunc, terms, pick(self.lower, 0), weights)

    def rename(self, mapping: Mapping[str, str]) -> ComplexSeries:
        new_vars = tuple(mapping.get(v, v) for v in self.vars)
        return ComplexSeries(new_vars, self.trunc, self._terms, self.lower, self.weights)

    def set_zero(self, names: Iterable[str]) -> ComplexSeries:
        """Restrict to ``x = 0`` for the named variables and remove them.

        Exact: the remaining truncation is unchanged.
        """
        names = set(names)
        idx = [self.index(n) for n in names]
        for i in idx:
            if self.lower[i] < 0 and any(e[i] < 0 for e in self._terms):
                raise SeriesError(f"cannot set Laurent variable {self.vars[i]!r} to zero")
        keep = [i for i in range(len(self.vars)) if i not in idx]
        terms = {}
        for e, c in self._terms.items():
            if all(e[i] == 0 for i in idx):
                terms[tuple(e[i] for i in keep)] = c
        return ComplexSeries(
            [self.vars[i] for i in keep], self.trunc, terms,
            [self.lower[i] for i in keep], [self.weights[i] for i in keep],
        )

    def extract(self, name: str, power: int = 0) -> ComplexSeries:
        """Coefficient of ``name^power`` as a series in the remaining variables.

        The result keeps the weights of the remaining variables; its truncation is
        ``trunc - weight*power``.
        """
        i = self.index(name)
        shift = self.weights[i] * power
        if self.trunc - shift < 0:
            raise SeriesError(f"{name}^{power} lies beyond the truncation order {self.trunc}")
        keep = [j for j in range(len(self.vars)) if j != i]
        terms = {tuple(e[j] for j in keep): c for e, c in self._terms.items() if e[i] == power}
        return ComplexSeries(
            [self.vars[j] for j in keep], self.trunc - shift, terms,
            [self.lower[j] for j in keep], [self.weights[j] for j in keep],
        )

    def reweight(self, weights: Sequence[int], trunc: int) -> ComplexSeries:
        """Re-express with new degree weights, keeping only certified terms.

        Valid when every monomial of new degree ``<= trunc`` had old degree
        ``<= self.trunc``; checked for power series (all lower bounds zero).
        """
        weights = tuple(int(w) for w in weights)
        if any(lo < 0 for lo in self.lower):
            raise SeriesError("reweight is only defined for power series")
        if len(weights) != len(self.vars) or any(w < 1 for w in weights):
            raise SeriesError("invalid weights")
        ratio = max(Fraction(o, n) for o, n in zip(self.weights, weights))
        if trunc * ratio > self.trunc:
            raise SeriesError(
                f"truncation {trunc} under weights {list(weights)} is not certified by "
                f"order {self.trunc} under weights {list(self.weights)}"
            )
        return ComplexSeries(self.vars, trunc, self._terms, self.lower, weights)

    # -- numerics ------------------------------------------------------------

    def _arrays(self):
        n = len(self.vars)
        if not self._terms:
            return np.zeros((0, n), dtype=int), np.zeros(0, dtype=complex)
        exps = np.array(list(self._terms.keys()), dtype=int).reshape(len(self._terms), n)
        coeffs = np.array(list(self._terms.values()), dtype=complex)
        return exps, coeffs

    def evaluate(self, point) -> complex | np.ndarray:
        """Evaluate the truncated polynomial.

        ``point`` is a mapping ``name -> value`` or a sequence in variable order;
        values may be numpy arrays (broadcast together).
        """
        if isinstance(point, Mapping):
            missing = [v for v in self.vars if v not in point]
            if missing:
                raise SeriesError(f"missing values for variables {missing}")
            values = [point[v] for v in self.vars]
        else:
            values = list(point)
            if len(values) != len(self.vars):
                raise SeriesError("point has wrong number of coordinates")
        values = np.broadcast_arrays(*[np.asarray(v, dtype=complex) for v in values]) if values else []
        exps, coeffs = self._arrays()
        shape = values[0].shape if values else ()
        total = np.zeros(shape, dtype=complex)
        for e, c in zip(exps, coeffs):
            term = np.full(shape, c, dtype=complex)
            for x, k in zip(values, e):
                if k:
                    term = term * x ** int(k)
            total = total + term
        if total.ndim == 0:
            return complex(total)
        return total

    def allclose(self, other: ComplexSeries, rtol: float = 0.0, atol: float = 0.0) -> bool:
        self._check_same_ring(other, "allclose")
        keys = set(self._terms) | set(other._terms)
        for k in keys:
            a = self._terms.get(k, 0j)
            b = other._terms.get(k, 0j)
            if abs(a - b) > atol + rtol * max(abs(a), abs(b)):
                return False
        return True

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    # -- JSON ----------------------------------------------------------------

    def to_json_obj(self) -> dict:
        obj = {"vars": list(self.vars), "trunc": self.trunc, "lower": list(self.lower)}
        if any(w != 1 for w in self.weights):
            obj["weights"] = list(self.weights)
        obj["terms"] = [
            {"exp": list(e), "re": float(self._terms[e].real), "im": float(self._terms[e].imag)}
            for e in sorted(self._terms)
        ]
        return obj

    @classmethod
    def from_json_obj(cls, obj) -> ComplexSeries:
        if not isinstance(obj, Mapping):
            raise SeriesError("series JSON must be an object")
        try:
            vars = obj["vars"]
            trunc = obj["trunc"]
        except KeyError as exc:
            raise SeriesError(f"series JSON missing key {exc.args[0]!r}") from None
        if not isinstance(vars, list) or not isinstance(trunc, int) or isinstance(trunc, bool):
            raise SeriesError("series JSON: 'vars' must be a list and 'trunc' an integer")
        lower = obj.get("lower")
        weights = obj.get("weights")
        terms: dict[Exponent, complex] = {}
        for item in obj.get("terms", []):
            exp = item.get("exp")
            if not isinstance(exp, list) or not all(isinstance(e, int) and not isinstance(e, bool) for e in exp):
                raise SeriesError(f"series JSON: bad exponent {exp!r}")
            key = tuple(exp)
            if key in terms:
                raise SeriesError(f"series JSON: duplicate exponent tuple {exp}")
            c = complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))
            terms[key] = c
        series = cls(vars, trunc, {}, lower, weights)
        for key in terms:
            if len(key) == len(series.vars) and series.degree_of(key) > trunc:
                raise SeriesError(f"series JSON: term {list(key)} lies beyond truncation order {trunc}")
        return cls(vars, trunc, terms, lower, weights)

    def to_json(self) -> str:
        return dumps(self.to_json_obj())

    @classmethod
    def from_json(cls, text: str) -> ComplexSeries:
        return cls.from_json_obj(json.loads(text))


def dumps(obj) -> str:
    """Deterministic JSON text: insertion-ordered keys, shortest round-trip floats."""
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False)


def _fmt_complex(c: complex, digits: int = 6) -> str:
    if c.imag == 0:
        return f"{c.real:.{digits}g}"
    if c.real == 0:
        return f"{c.imag:.{digits}g}j"
    return f"({c.real:.{digits}g}{c.imag:+.{digits}g}j)"


def _tight_lower(declared: Sequence[int], terms, n: int) -> tuple[int, ...]:
    lows = list(min(0, x) for x in declared)
    for e in terms:
        for i in range(n):
            if e[i] < lows[i]:
                lows[i] = e[i]
    return tuple(lows)


# -- spec-level operations ----------------------------------------------------


def add(a: ComplexSeries, b: ComplexSeries) -> ComplexSeries:
    """Coefficient-wise sum; the result is known to ``min(a.trunc, b.trunc)``."""
    a._check_same_ring(b, "add")
    terms = dict(a._terms)
    for e, c in b._terms.items():
        terms[e] = terms.get(e, 0j) + c
    lower = tuple(min(x, y) for x, y in zip(a.lower, b.lower))
    return ComplexSeries(a.vars, min(a.trunc, b.trunc), terms, lower, a.weights)


def mul(a: ComplexSeries, b: ComplexSeries) -> ComplexSeries:
    """Truncated Cauchy product.

    A factor of valuation ``v`` loses nothing below ``trunc + v`` of the other
    factor, so the certified order is ``min(a.trunc + val(b), b.trunc + val(a))``;
    it never exceeds the larger working order ``max(a.trunc, b.trunc)``.
    """
    a._check_same_ring(b, "mul")
    cert = min(a.trunc + b.valuation(), b.trunc + a.valuation())
    trunc = int(min(cert, max(a.trunc, b.trunc)))
    if trunc < 0:
        raise SeriesError("product has no certified terms (negative valuation)")
    w = a.weights
    bd = [(e, c, sum(x * y for x, y in zip(w, e))) for e, c in b._terms.items()]
    out: dict[Exponent, complex] = {}
    for ea, ca in a._terms.items():
        da = sum(x * y for x, y in zip(w, ea))
        for eb, cb, db in bd:
            if da + db > trunc:
                continue
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0j) + ca * cb
    lower = tuple(min(0, x, y, x + y) for x, y in zip(a.lower, b.lower))
    return ComplexSeries(a.vars, trunc, out, _tight_lower(lower, out, len(a.vars)), w)


def coefficient(a: ComplexSeries, exp: Sequence[int]) -> complex:
    """Stored coefficient of ``x^exp`` (zero if absent); indeterminate beyond truncation."""
    exp = tuple(exp)
    if len(exp) != len(a.vars):
        raise SeriesError(f"exponent {list(exp)} does not match variables {list(a.vars)}")
    if a.degree_of(exp) > a.trunc:
        raise SeriesError(
            f"coefficient of {list(exp)} is indeterminate: degree {a.degree_of(exp)} "
            f"exceeds truncation order {a.trunc}"
        )
    return a._terms.get(exp, 0j)


def partial(a: ComplexSeries, var: str) -> ComplexSeries:
    """Formal partial derivative; the truncation drops by the variable's weight."""
    i = a.index(var)
    trunc = a.trunc - a.weights[i]
    if trunc < 0:
        raise SeriesError(f"derivative of a series truncated at order {a.trunc} has no certified terms")
    out = {}
    for e, c in a._terms.items():
        if e[i] == 0:
            continue
        ne = list(e)
        ne[i] -= 1
        out[tuple(ne)] = c * e[i]
    lower = list(a.lower)
    if lower[i] < 0:
        lower[i] -= 1
    return ComplexSeries(a.vars, trunc, out, lower, a.weights)


def diagonal(a: ComplexSeries, out_var: str = "t", z: str | None = None, w: str | None = None) -> ComplexSeries:
    """Map ``sum a_mn(s) z^m w^n`` to ``sum a_mm(s) t^m`` in variables ``(t, s...)``.

    The result has unit weights and truncation ``floor(trunc / 2)``.
    """
    z = a.vars[0] if z is None else z
    w = a.vars[1] if w is None else w
    if z not in a.vars or w not in a.vars:
        raise SeriesError(f"diagonal needs variables {z!r} and {w!r}; series has {list(a.vars)}")
    iz, iw = a.index(z), a.index(w)
    if a.weights[iz] != 1 or a.weights[iw] != 1:
        raise SeriesError("diagonal expects unit weights on the chart variables")
    rest = [i for i in range(len(a.vars)) if i not in (iz, iw)]
    out_vars = (out_var,) + tuple(a.vars[i] for i in rest)
    if len(set(out_vars)) != len(out_vars):
        raise SeriesError(f"output variable {out_var!r} clashes with {list(out_vars[1:])}")
    terms = {}
    for e, c in a._terms.items():
        if e[iz] == e[iw]:
            terms[(e[iz],) + tuple(e[i] for i in rest)] = c
    trunc = a.trunc // 2
    return ComplexSeries(out_vars, trunc, terms, (0,) + tuple(a.lower[i] for i in rest))


def compose(
    outer: ComplexSeries,
    assignments: Mapping[str, ComplexSeries],
    trunc: int | None = None,
) -> ComplexSeries:
    """Substitute series for variables of ``outer``.

    All assigned series share one variable ring; outer variables without an
    assignment pass through to the same-named inner variable.  A variable may
    receive a series with zero constant term (only non-negative powers allowed)
    or, when ``outer`` declares Laurent mode in it, a unit whose reciprocal is
    expanded geometrically.  Substituting a unit treats ``outer`` as exact in
    that variable.
    """
    if not assignments:
        raise SeriesError("compose needs at least one assignment")
    for name in assignments:
        outer.index(name)
    inner = list(assignments.values())
    ring = inner[0]
    for s in inner[1:]:
        ring._check_same_ring(s, "compose")
    subs: list[ComplexSeries] = []
    for name in outer.vars:
        if name in assignments:
            subs.append(assignments[name])
        else:
            if name not in ring.vars:
                raise SeriesError(
                    f"outer variable {name!r} has no assignment and is not an inner variable"
                )
            big = max(s.trunc for s in inner)
            subs.append(ComplexSeries.variable(name, ring.vars, big, weights=ring.weights))
    n = len(outer.vars)
    mins = [min((e[i] for e in outer._terms), default=0) for i in range(n)]
    maxs = [max((e[i] for e in outer._terms), default=0) for i in range(n)]
    vals = []
    for i, (name, s) in enumerate(zip(outer.vars, subs)):
        c0 = s.constant_term()
        if abs(c0) < STRUCTURAL_ZERO:
            if mins[i] < 0:
                raise SeriesError(
                    f"cannot substitute a series with zero constant term into a negative power of {name!r}"
                )
        elif (mins[i] or maxs[i]) and (outer.lower[i] >= 0 or maxs[i] > 0):
            raise SeriesError(
                f"substituting a series with nonzero constant term into {name!r} needs a "
                f"Laurent-mode outer series with only negative powers of {name!r}"
            )
        if abs(c0) >= STRUCTURAL_ZERO:
            vals.append(0)
        else:
            # a zero series is only known to vanish through its truncation order
            vals.append(s.valuation() if not s.is_zero() else s.trunc + 1)

    used = [i for i in range(n) if mins[i] != 0 or maxs[i] != 0]
    if all(vals[i] >= 1 for i in used) and all(outer.lower[i] >= 0 for i in range(n)):
        if used:
            ratio = min(Fraction(vals[i]) / outer.weights[i] for i in used)
            cert_outer = math.ceil(ratio * (outer.trunc + 1)) - 1
        else:
            cert_outer = math.inf
    else:
        cert_outer = math.inf

    if all(len(s) == 1 for s in subs) and all(
        # a monomial with a negative power must be a nonzero constant
        mins[i] >= 0 or next(iter(subs[i]._terms)) == (0,) * len(ring.vars)
        for i in range(n)
    ):
        result = _compose_monomial(outer, subs, ring)
    else:
        result = _compose_horner(outer, subs, ring)
    cap = max(s.trunc for s in inner)
    final = min(result.trunc, cert_outer, cap)
    if trunc is not None:
        final = min(final, trunc)
    return result.truncate(int(final))


def _compose_monomial(outer, subs, ring) -> ComplexSeries:
    mons = [next(iter(s._terms.items())) for s in subs]
    degs = [ring.degree_of(m[0]) for m in mons]
    out: dict[Exponent, complex] = {}
    cert = math.inf
    m = len(ring.vars)
    for e, c in outer._terms.items():
        key = [0] * m
        coeff = c
        for k, (me, mc) in zip(e, mons):
            if k:
                coeff *= mc ** k
                for j in range(m):
                    key[j] += k * me[j]
        key = tuple(key)
        deg = ring.degree_of(key)
        for k, s, d in zip(e, subs, degs):
            if k:
                cert = min(cert, s.trunc - d + deg)
        out[key] = out.get(key, 0j) + coeff
    if cert == math.inf:
        cert = max(s.trunc for s in subs)
    cert = int(cert)
    if cert < 0:
        raise SeriesError("composition has no certified terms")
    lower = _tight_lower(ring.lower, out, m)
    return ComplexSeries(ring.vars, cert, {k: v for k, v in out.items() if ring.degree_of(k) <= cert}, lower, ring.weights)


def _compose_horner(outer, subs, ring) -> ComplexSeries:
    cache: dict[tuple[int, int], ComplexSeries] = {}

    def power(i: int, k: int) -> ComplexSeries:
        key = (i, k)
        if key not in cache:
            s = subs[i]
            cache[key] = s ** k if k >= 0 else s.reciprocal() ** (-k)
        return cache[key]

    def horner(terms: dict, i: int) -> ComplexSeries | None:
        if i == len(subs):
            (c,) = terms.values()
            big = max(s.trunc for s in subs)
            return ComplexSeries.constant(c, ring.vars, big, ring.lower, ring.weights)
        groups: dict[int, dict] = {}
        for e, c in terms.items():
            groups.setdefault(e[0], {})[e[1:]] = c
        coeffs = {k: horner(g, i + 1) for k, g in groups.items()}
        lo, hi = min(coeffs), max(coeffs)
        if lo == hi:
            acc = coeffs[hi]
        else:
            s = subs[i]
            acc = coeffs[hi]
            for k in range(hi - 1, lo - 1, -1):
                acc = mul(acc, s)
                if k in coeffs:
                    acc = add(acc, coeffs[k])
        if lo != 0:
            acc = mul(acc, power(i, lo))
        return acc

    if outer.is_zero():
        big = max(s.trunc for s in subs)
        return ComplexSeries.zero(ring.vars, big, ring.lower, ring.weights)
    return horner(dict(outer._terms), 0)


def reversion(f: ComplexSeries, out_var: str | None = None) -> ComplexSeries:
    """Compositional inverse of a univariate series with ``f(0) = 0``, ``f'(0) != 0``."""
    if len(f.vars) != 1 or f.lower != (0,) or f.weights != (1,):
        raise SeriesError("reversion needs a univariate power series")
    if abs(f.constant_term()) >= STRUCTURAL_ZERO:
        raise SeriesError("reversion needs zero constant term")
    if f.trunc < 1:
        raise SeriesError("reversion needs truncation order >= 1")
    lin = f.coefficient((1,))
    if abs(lin) < STRUCTURAL_ZERO:
        raise SeriesError("reversion needs a nonzero linear coefficient")
    name = out_var or f.vars[0]
    u = ComplexSeries.variable(name, (name,), f.trunc)
    nonlinear = f - ComplexSeries.monomial((1,), lin, f.vars, f.trunc)
    x = u.scale(1 / lin)
    for _ in range(f.trunc):
        x = (u - compose(nonlinear, {f.vars[0]: x})).scale(1 / lin)
    return x
