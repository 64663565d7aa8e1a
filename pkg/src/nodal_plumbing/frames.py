"""Dimension counts, frames of quadratic differentials and linear algebra over the series ring.

A global section is never materialized.  It is carried by its germs at the
nodes (:class:`GermSection`).  At a node with smoothing parameter ``t_k`` the
germ is a :class:`~nodal_plumbing.family.SectionK` in ``(u, v) + other base
parameters``, and ``t_k`` itself is the chart product ``u v``.  Matrices are
nested tuples of :class:`ComplexSeries` over the base ring.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .family import SectionK, laur
from .series import STRUCTURAL_ZERO, ComplexSeries, DomainError, compose, dumps

Matrix = tuple[tuple[ComplexSeries, ...], ...]


class FrameError(DomainError):
    pass


# -- dimension counting ----------------------------------------------------------------


@dataclass(frozen=True)
class NodalConfiguration:
    """Parts ``(genus, punctures)`` of a noded surface and the number of nodes.

    Punctures not used by nodes are external marked points.
    """

    parts: tuple[tuple[int, int], ...]
    nodes: int = 0

    def __post_init__(self):
        parts = tuple((int(g), int(n)) for g, n in self.parts)
        object.__setattr__(self, "parts", parts)
        if not parts:
            raise FrameError("a configuration needs at least one part")
        for i, (g, n) in enumerate(parts):
            if g < 0 or n < 0:
                raise FrameError(f"part {i} = (g={g}, n={n}) has a negative entry")
            if 2 * g - 2 + n <= 0:
                raise FrameError(f"part {i} = (g={g}, n={n}) is unstable: 2g-2+n = {2 * g - 2 + n} <= 0")
        if self.nodes < 0:
            raise FrameError("node count must be non-negative")
        if 2 * self.nodes > self.punctures:
            raise FrameError(f"{self.nodes} nodes need {2 * self.nodes} punctures, only {self.punctures} present")

    @property
    def punctures(self) -> int:
        return sum(n for _, n in self.parts)

    @property
    def closed(self) -> bool:
        return self.punctures == 2 * self.nodes

    @property
    def euler_characteristic(self) -> int:
        return sum(2 - 2 * g - n for g, n in self.parts)

    @property
    def arithmetic_genus(self) -> int:
        """Genus of the smoothed surface, assuming the nodal graph is connected."""
        return sum(g for g, _ in self.parts) + self.nodes - len(self.parts) + 1

    def to_json_obj(self) -> dict:
        return {"parts": [{"g": g, "n": n} for g, n in self.parts], "nodes": self.nodes}

    @classmethod
    def from_json_obj(cls, obj) -> NodalConfiguration:
        try:
            parts = tuple((p["g"], p["n"]) for p in obj["parts"])
            nodes = obj.get("nodes", 0)
        except (KeyError, TypeError) as exc:
            raise FrameError(f'configuration JSON needs {{"parts": [{{"g":..,"n":..}}], "nodes": ..}}: {exc}')
        return cls(parts, nodes)


def dimension_count(config: NodalConfiguration) -> int:
    """``sum (3g - 3 + 2n) - nodes``: regular quadratic differentials with double poles at the punctures."""
    return sum(3 * g - 3 + 2 * n for g, n in config.parts) - config.nodes


def stable_configurations(max_genus: int) -> Iterable[NodalConfiguration]:
    """All closed, connectable stable configurations with smoothed genus in ``[2, max_genus]``.

    Each part contributes ``2g - 2 + n >= 1`` to ``2 g_hat - 2``, which bounds
    the search.  Parts are listed in non-increasing order to avoid repeats.
    """
    budget = 2 * max_genus - 2
    kinds = sorted(
        ((g, n) for g in range(max_genus + 1) for n in range(budget + 3) if 1 <= 2 * g - 2 + n <= budget),
        reverse=True,
    )

    def extend(prefix, start, used):
        if prefix:
            total_n = sum(n for _, n in prefix)
            if total_n % 2 == 0:
                nodes = total_n // 2
                connectable = len(prefix) == 1 or (
                    all(n >= 1 for _, n in prefix) and nodes >= len(prefix) - 1
                )
                if connectable:
                    cfg = NodalConfiguration(tuple(prefix), nodes)
                    if 2 <= cfg.arithmetic_genus <= max_genus:
                        yield cfg
        for i in range(start, len(kinds)):
            g, n = kinds[i]
            cost = 2 * g - 2 + n
            if used + cost <= budget:
                yield from extend(prefix + [kinds[i]], i, used + cost)

    yield from extend([], 0, 0)


# -- series matrices ----------------------------------------------------------------


def _ring_of(rows: Sequence[Sequence[ComplexSeries]]) -> ComplexSeries:
    return rows[0][0]


def as_matrix(rows) -> Matrix:
    m = tuple(tuple(r) for r in rows)
    if not m or any(len(r) != len(m[0]) for r in m):
        raise FrameError("matrix rows must be non-empty and of equal length")
    return m


def mat_shape(a: Matrix) -> tuple[int, int]:
    return len(a), len(a[0])


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    (n, k), (k2, m) = mat_shape(a), mat_shape(b)
    if k != k2:
        raise FrameError(f"cannot multiply {n}x{k} by {k2}x{m}")
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for h in range(1, k):
                acc = acc + a[i][h] * b[h][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    if mat_shape(a) != mat_shape(b):
        raise FrameError("matrix shapes differ")
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def identity_matrix(n: int, like: ComplexSeries) -> Matrix:
    one = ComplexSeries.constant(1.0, like.vars, like.trunc, like.lower, like.weights)
    zero = ComplexSeries.zero(like.vars, like.trunc, like.lower, like.weights)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def constant_part(a: Matrix) -> np.ndarray:
    return np.array([[x.constant_term() for x in row] for row in a], dtype=complex)


def _from_numpy(m: np.ndarray, like: ComplexSeries) -> Matrix:
    return tuple(
        tuple(ComplexSeries.constant(complex(x), like.vars, like.trunc, like.lower, like.weights) for x in row)
        for row in m
    )


def condition_number(a: Matrix) -> float:
    return float(np.linalg.cond(constant_part(a)))


def mat_inverse(a: Matrix) -> Matrix:
    """Inverse over the truncated series ring.

    ``a = a0 (I + N)`` with ``N`` vanishing at the origin, so
    ``a^{-1} = (I - N + N^2 - ...) a0^{-1}``, a finite sum modulo truncation.
    """
    n, m = mat_shape(a)
    if n != m:
        raise FrameError(f"cannot invert a non-square {n}x{m} matrix")
    like = _ring_of(a)
    if any(s.lower != (0,) * len(s.vars) for row in a for s in row):
        raise FrameError("matrix entries must be power series (no Laurent terms)")
    a0 = constant_part(a)
    try:
        a0_inv = np.linalg.inv(a0)
    except np.linalg.LinAlgError:
        raise FrameError("singular constant term: the matrix is not invertible at the origin")
    if not np.all(np.isfinite(a0_inv)) or np.linalg.cond(a0) > 1e14:
        raise FrameError(f"constant term is numerically singular (condition {np.linalg.cond(a0):.3g})")
    inv0 = _from_numpy(a0_inv, like)
    ident = identity_matrix(n, like)
    shifted = mat_mul(inv0, a)
    N = tuple(tuple(x - y for x, y in zip(r1, r2)) for r1, r2 in zip(shifted, ident))
    trunc = max(s.trunc for row in a for s in row)
    total = ident
    power = ident
    for k in range(1, trunc + 1):
        power = mat_mul(power, N)
        if all(s.is_zero() for row in power for s in row):
            break
        term = power if k % 2 == 0 else tuple(tuple(-s for s in row) for row in power)
        total = mat_add(total, term)
    return mat_mul(total, inv0)


def mat_solve(a: Matrix, b: Sequence[ComplexSeries]) -> tuple[ComplexSeries, ...]:
    n, _ = mat_shape(a)
    if len(b) != n:
        raise FrameError(f"right-hand side has length {len(b)}, matrix has {n} rows")
    x = mat_mul(mat_inverse(a), tuple((s,) for s in b))
    return tuple(row[0] for row in x)


def mat_to_json(a: Matrix) -> list:
    return [[s.to_json_obj() for s in row] for row in a]


def mat_from_json(obj) -> Matrix:
    return as_matrix([[ComplexSeries.from_json_obj(s) for s in row] for row in obj])


# -- germ sections -----------------------------------------------------------------


def lift_to_chart(f: ComplexSeries, chart_vars: Sequence[str], smoothing: str) -> ComplexSeries:
    """A base function as a function on the node chart: ``smoothing -> u v``, others pass through."""
    if smoothing not in f.vars:
        raise FrameError(f"smoothing parameter {smoothing!r} is not a base variable {list(f.vars)}")
    u, v = chart_vars[:2]
    ring_vars = tuple(chart_vars)
    ring = dict(vars=ring_vars, trunc=2 * f.trunc + 1)
    subs = {smoothing: ComplexSeries.monomial(
        tuple(1 if x in (u, v) else 0 for x in ring_vars), 1.0, **ring)}
    for p in f.vars:
        if p != smoothing:
            if p not in ring_vars:
                raise FrameError(f"base variable {p!r} is missing from the chart variables {ring_vars}")
            subs[p] = ComplexSeries.variable(p, **ring)
    return compose(f, subs)


@dataclass(frozen=True)
class GermSection:
    """A weight-``k`` section given by its germs at a set of nodes.

    ``smoothing[node]`` names the base parameter that equals ``u v`` in that
    node's chart.
    """

    germs: Mapping[str, SectionK]
    smoothing: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "germs", dict(self.germs))
        object.__setattr__(self, "smoothing", dict(self.smoothing))
        if set(self.germs) != set(self.smoothing):
            raise FrameError("every node needs both a germ and a smoothing parameter")
        ks = {g.k for g in self.germs.values()}
        if len(ks) != 1:
            raise FrameError(f"germs disagree on the weight: {sorted(ks)}")

    @property
    def k(self) -> int:
        return next(iter(self.germs.values())).k

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(self.germs)

    def _zip(self, other: GermSection, op):
        if self.smoothing != other.smoothing:
            raise FrameError("germ sections live on different node sets")
        return GermSection({n: op(self.germs[n], other.germs[n]) for n in self.germs}, self.smoothing)

    def __add__(self, other: GermSection) -> GermSection:
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other: GermSection) -> GermSection:
        return self._zip(other, lambda a, b: a - b)

    def times_base(self, f: ComplexSeries) -> GermSection:
        """Multiply by a function of the base parameters."""
        out = {}
        for node, germ in self.germs.items():
            lifted = lift_to_chart(f, germ.coeff.vars, self.smoothing[node])
            out[node] = SectionK(germ.k, germ.coeff * lifted.truncate(min(germ.coeff.trunc, lifted.trunc)))
        return GermSection(out, self.smoothing)

    def laur_at(self, node: str, base_vars: Sequence[str]) -> ComplexSeries:
        """``Laur`` at one node as a series in the full list of base variables."""
        germ = self.germs[node]
        return laur(germ, self.smoothing[node]).with_vars(tuple(base_vars))

    def to_json_obj(self) -> dict:
        return {
            "germs": {n: self.germs[n].to_json_obj() for n in sorted(self.germs)},
            "smoothing": {n: self.smoothing[n] for n in sorted(self.smoothing)},
        }


def base_variable(name: str, base_vars: Sequence[str], trunc: int) -> ComplexSeries:
    return ComplexSeries.variable(name, tuple(base_vars), trunc)


# -- frames ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameSet:
    """Weight-2 germ sections and their evaluation matrix ``E[i][j] = ell_i(section_j)``."""

    sections: tuple[GermSection, ...]
    eval_matrix: Matrix
    base_vars: tuple[str, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "sections", tuple(self.sections))
        object.__setattr__(self, "base_vars", tuple(self.base_vars))
        m = as_matrix(self.eval_matrix)
        object.__setattr__(self, "eval_matrix", m)
        n = len(self.sections)
        if mat_shape(m) != (n, n):
            raise FrameError(f"evaluation matrix is {mat_shape(m)}, expected {n}x{n}")
        for row in m:
            for s in row:
                if s.vars != self.base_vars:
                    raise FrameError(f"matrix entry in {list(s.vars)}, base ring is {list(self.base_vars)}")
        if any(s.k != 2 for s in self.sections):
            raise FrameError("frames consist of weight-2 sections")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"phi_{i + 1}" for i in range(n)))
        elif len(self.labels) != n:
            raise FrameError("one label per section")

    @property
    def origin_value(self) -> np.ndarray:
        return constant_part(self.eval_matrix)

    @property
    def condition(self) -> float:
        return condition_number(self.eval_matrix)

    def to_json_obj(self) -> dict:
        return {
            "base_vars": list(self.base_vars),
            "labels": list(self.labels),
            "sections": [s.to_json_obj() for s in self.sections],
            "eval_matrix": mat_to_json(self.eval_matrix),
        }

    def to_json(self) -> str:
        return dumps(self.to_json_obj())


def _combine(sections: Sequence[GermSection], weights: Sequence[ComplexSeries]) -> GermSection:
    acc = sections[0].times_base(weights[0])
    for s, c in zip(sections[1:], weights[1:]):
        acc = acc + s.times_base(c)
    return acc


def frame_normalize(raw: FrameSet) -> FrameSet:
    """Sections ``phi_j = sum_k psi_k (E^{-1})_{kj}`` so that the evaluation matrix becomes ``I``."""
    inv = mat_inverse(raw.eval_matrix)
    n = len(raw.sections)
    sections = tuple(_combine(raw.sections, [inv[k][j] for k in range(n)]) for j in range(n))
    return FrameSet(sections, mat_mul(raw.eval_matrix, inv), raw.base_vars, raw.labels)


def second_frame(first: FrameSet, t_indices: Mapping[int, str] | Sequence[int],
                 smoothing: Sequence[str] | None = None) -> FrameSet:
    """Multiply the chosen sections by their node's smoothing parameter.

    ``t_indices`` maps section index to base variable; a plain list pairs the
    indices with ``smoothing`` in order.
    """
    if not isinstance(t_indices, Mapping):
        idx = list(t_indices)
        if smoothing is None or len(smoothing) != len(idx):
            raise FrameError("a list of indices needs a matching list of smoothing parameters")
        t_indices = dict(zip(idx, smoothing))
    n = len(first.sections)
    for i, t in t_indices.items():
        if not 0 <= i < n:
            raise FrameError(f"section index {i} out of range 0..{n - 1}")
        if t not in first.base_vars:
            raise FrameError(f"{t!r} is not a base variable")
    like = first.eval_matrix[0][0]
    sections = list(first.sections)
    cols = [list(col) for col in zip(*first.eval_matrix)]
    labels = list(first.labels)
    for i, t in t_indices.items():
        tv = base_variable(t, first.base_vars, like.trunc)
        sections[i] = sections[i].times_base(tv)
        cols[i] = [e * tv for e in cols[i]]
        labels[i] = f"{t}*{labels[i]}"
    rows = tuple(zip(*cols))
    return FrameSet(tuple(sections), rows, first.base_vars, tuple(labels))


def t_divisibility(coeffs: ComplexSeries | Sequence[ComplexSeries], t_var: str):
    """The quotient ``f / t`` of a series vanishing on ``{t = 0}``; lists are handled elementwise."""
    if not isinstance(coeffs, ComplexSeries):
        return [t_divisibility(c, t_var) for c in coeffs]
    f = coeffs
    i = f.index(t_var)
    bad = [e for e, _ in f.items() if e[i] <= 0]
    if bad:
        shown = ", ".join(str(e) for e in bad[:5])
        raise FrameError(f"not divisible by {t_var}: monomials {shown} have {t_var}-exponent 0 ({list(f.vars)})")
    shift = tuple(-1 if j == i else 0 for j in range(len(f.vars)))
    q = f.mul_monomial(shift)
    return ComplexSeries(f.vars, f.trunc - f.weights[i], q.terms, weights=f.weights)


def frame_coordinates(frame: FrameSet, values: Sequence[ComplexSeries]) -> tuple[ComplexSeries, ...]:
    """Coefficients ``c`` with ``ell_i(eta) = sum_j E_ij c_j``, i.e. ``eta = sum c_j phi_j``."""
    return mat_solve(frame.eval_matrix, values)


def frame_transform(frame: FrameSet, jacobian) -> FrameSet:
    """``sections' = J sections`` and ``E' = E J^T``."""
    J = as_matrix(jacobian)
    n = len(frame.sections)
    if mat_shape(J) != (n, n):
        raise FrameError(f"jacobian is {mat_shape(J)}, frame has {n} sections")
    try:
        np.linalg.inv(constant_part(J))
    except np.linalg.LinAlgError:
        raise FrameError("jacobian is singular at the origin")
    if abs(np.linalg.det(constant_part(J))) < STRUCTURAL_ZERO:
        raise FrameError("jacobian is singular at the origin")
    sections = tuple(_combine(frame.sections, J[i]) for i in range(n))
    Jt = tuple(zip(*J))
    return FrameSet(sections, mat_mul(frame.eval_matrix, Jt), frame.base_vars, frame.labels)


def solve_extension(laur_targets: Sequence[ComplexSeries], laur_matrix) -> tuple[ComplexSeries, ...]:
    """Coefficients ``b`` with ``laur_matrix . b = laur_targets``.

    With targets ``-Laur_k(beta)`` and ``laur_matrix[k][h] = Laur_k(beta_h)``
    the combination ``beta + sum b_h beta_h`` has vanishing Laurent series.
    """
    M = as_matrix(laur_matrix)
    n, m = mat_shape(M)
    if n != m:
        raise FrameError(f"the Laurent system must be square, got {n}x{m}")
    return mat_solve(M, laur_targets)


def laur_matrix(sections: Sequence[GermSection], nodes: Sequence[str], base_vars: Sequence[str]) -> Matrix:
    return tuple(tuple(s.laur_at(node, base_vars) for s in sections) for node in nodes)


def extend_section(beta: GermSection, basis: Sequence[GermSection], nodes: Sequence[str],
                   base_vars: Sequence[str]) -> tuple[GermSection, tuple[ComplexSeries, ...]]:
    """``beta + sum b_h basis_h`` with every node's Laurent series killed."""
    targets = [-beta.laur_at(node, base_vars) for node in nodes]
    b = solve_extension(targets, laur_matrix(basis, nodes, base_vars))
    out = beta
    for s, c in zip(basis, b):
        out = out + s.times_base(c)
    return out, b

