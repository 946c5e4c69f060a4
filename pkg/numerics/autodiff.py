"""
Differentiation engine.

Reverse mode: a :class:`Tape` records array-valued primitives as they execute;
:meth:`Tape.backward` sweeps the records in reverse recording order.

Forward mode: :class:`DualSecond` carries (value, d1, d2) along one input
direction.  Its components may themselves be tape variables, so parameter
gradients flow through input derivatives (derivatives of derivatives).
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from typing import Any, Union

import numpy as np
from scipy import linalg

from core.exceptions import FactorizationError, InvalidArgumentError, NonFiniteError

logger = logging.getLogger(__name__)

ArrayLike = Union["Var", np.ndarray, float]
Vjp = Callable[[np.ndarray], np.ndarray]

_LOG_2PI = float(np.log(2.0 * np.pi))


# =====================================================
# Tape
# =====================================================

class Tape:
    """Linear record of primitive operations."""

    def __init__(self) -> None:
        self._values: list[np.ndarray] = []
        self._parents: list[tuple[tuple[int, Vjp], ...]] = []

    def __len__(self) -> int:
        return len(self._values)

    def var(self, value: Any) -> Var:
        """Register an independent variable."""
        return self._push(np.array(value, dtype=float), ())

    def _push(self, value: np.ndarray, parents: tuple[tuple[int, Vjp], ...]) -> Var:
        self._values.append(value)
        self._parents.append(parents)
        return Var(self, len(self._values) - 1, value)

    def backward(self, output: Var, seed: np.ndarray | None = None) -> list[np.ndarray | None]:
        """Adjoints of every recorded node with respect to ``output``."""
        if output.tape is not self:
            raise InvalidArgumentError("output variable belongs to a different tape")
        adjoints: list[np.ndarray | None] = [None] * len(self._values)
        adjoints[output.index] = (
            np.ones_like(output.value) if seed is None else np.asarray(seed, dtype=float)
        )
        for i in range(output.index, -1, -1):
            g = adjoints[i]
            if g is None:
                continue
            for parent, vjp in self._parents[i]:
                contribution = vjp(g)
                current = adjoints[parent]
                adjoints[parent] = contribution if current is None else current + contribution
        return adjoints

    def gradient(self, output: Var, wrt: Var | Sequence[Var]) -> np.ndarray | list[np.ndarray]:
        adjoints = self.backward(output)

        def pick(v: Var) -> np.ndarray:
            g = adjoints[v.index]
            return np.zeros_like(v.value) if g is None else np.asarray(g, dtype=float)

        if isinstance(wrt, Var):
            return pick(wrt)
        return [pick(v) for v in wrt]


class Var:
    """A tape node; supports numpy-style arithmetic."""

    __slots__ = ("tape", "index", "value")
    __array_ufunc__ = None  # numpy defers binary operators to Var

    def __init__(self, tape: Tape, index: int, value: np.ndarray):
        self.tape = tape
        self.index = index
        self.value = value

    def __repr__(self) -> str:
        return f"Var(index={self.index}, shape={self.value.shape})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def size(self) -> int:
        return self.value.size

    @property
    def T(self) -> Var:
        return transpose(self)

    def __len__(self) -> int:
        return len(self.value)

    def __add__(self, other: ArrayLike) -> Var:
        if isinstance(other, DualSecond):
            return NotImplemented
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> Var:
        if isinstance(other, DualSecond):
            return NotImplemented
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> Var:
        if isinstance(other, DualSecond):
            return NotImplemented
        return subtract(self, other)

    def __rsub__(self, other: ArrayLike) -> Var:
        if isinstance(other, DualSecond):
            return NotImplemented
        return subtract(other, self)

    def __mul__(self, other: ArrayLike) -> Var:
        if isinstance(other, DualSecond):
            return NotImplemented
        return multiply(self, other)

    def __rmul__(self, other: ArrayLike) -> Var:
        if isinstance(other, DualSecond):
            return NotImplemented
        return multiply(other, self)

    def __truediv__(self, other: ArrayLike) -> Var:
        return divide(self, other)

    def __rtruediv__(self, other: ArrayLike) -> Var:
        return divide(other, self)

    def __neg__(self) -> Var:
        return negative(self)

    def __pow__(self, exponent: float) -> Var:
        return power(self, exponent)

    def __matmul__(self, other: ArrayLike) -> Var:
        return matmul(self, other)

    def __rmatmul__(self, other: ArrayLike) -> Var:
        return matmul(other, self)

    def __getitem__(self, key: Any) -> Var:
        return getitem(self, key)

    def reshape(self, *shape: Any) -> Var:
        return reshape(self, shape[0] if len(shape) == 1 else shape)

    def sum(self, axis: int | None = None) -> Var:
        return sum_(self, axis=axis)


# -------------------------
# Recording helpers
# -------------------------
def value_of(x: Any) -> np.ndarray:
    """Numeric value of a tape variable, a dual number's value, or an array."""
    if isinstance(x, Var):
        return x.value
    if isinstance(x, DualSecond):
        return value_of(x.value)
    return np.asarray(x, dtype=float)


def _node(value: np.ndarray, *operands: tuple[Any, Vjp]) -> Any:
    """Record ``value`` with one vjp per operand; constants are skipped."""
    parents = tuple((x.index, vjp) for x, vjp in operands if isinstance(x, Var))
    if not parents:
        return value
    tape = next(x.tape for x, _ in operands if isinstance(x, Var))
    return tape._push(value, parents)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _is_basic_index(key: Any) -> bool:
    parts = key if isinstance(key, tuple) else (key,)
    return all(isinstance(k, (slice, int, np.integer)) or k is None or k is Ellipsis for k in parts)


# =====================================================
# Primitives
# =====================================================

def add(a: ArrayLike, b: ArrayLike) -> Any:
    av, bv = value_of(a), value_of(b)
    return _node(
        av + bv,
        (a, lambda g: _unbroadcast(g, av.shape)),
        (b, lambda g: _unbroadcast(g, bv.shape)),
    )


def subtract(a: ArrayLike, b: ArrayLike) -> Any:
    av, bv = value_of(a), value_of(b)
    return _node(
        av - bv,
        (a, lambda g: _unbroadcast(g, av.shape)),
        (b, lambda g: _unbroadcast(-g, bv.shape)),
    )


def multiply(a: ArrayLike, b: ArrayLike) -> Any:
    av, bv = value_of(a), value_of(b)
    return _node(
        av * bv,
        (a, lambda g: _unbroadcast(g * bv, av.shape)),
        (b, lambda g: _unbroadcast(g * av, bv.shape)),
    )


def divide(a: ArrayLike, b: ArrayLike) -> Any:
    av, bv = value_of(a), value_of(b)
    out = av / bv
    return _node(
        out,
        (a, lambda g: _unbroadcast(g / bv, av.shape)),
        (b, lambda g: _unbroadcast(-g * out / bv, bv.shape)),
    )


def negative(a: ArrayLike) -> Any:
    return _node(-value_of(a), (a, lambda g: -g))


def power(a: ArrayLike, exponent: float) -> Any:
    av = value_of(a)
    return _node(av**exponent, (a, lambda g: g * exponent * av ** (exponent - 1)))


def square(a: ArrayLike) -> Any:
    av = value_of(a)
    return _node(av * av, (a, lambda g: 2.0 * g * av))


def matmul(a: ArrayLike, b: ArrayLike) -> Any:
    av, bv = value_of(a), value_of(b)
    out = av @ bv
    if av.ndim == 1 and bv.ndim == 1:
        return _node(out, (a, lambda g: g * bv), (b, lambda g: g * av))
    if av.ndim == 1:
        return _node(out, (a, lambda g: bv @ g), (b, lambda g: np.outer(av, g)))
    if bv.ndim == 1:
        return _node(out, (a, lambda g: np.outer(g, bv)), (b, lambda g: av.T @ g))
    return _node(out, (a, lambda g: g @ bv.T), (b, lambda g: av.T @ g))


def exp(a: ArrayLike) -> Any:
    if isinstance(a, DualSecond):
        return a.exp()
    out = np.exp(value_of(a))
    return _node(out, (a, lambda g: g * out))


def log(a: ArrayLike) -> Any:
    av = value_of(a)
    return _node(np.log(av), (a, lambda g: g / av))


def sqrt(a: ArrayLike) -> Any:
    out = np.sqrt(value_of(a))
    return _node(out, (a, lambda g: 0.5 * g / out))


def tanh(a: ArrayLike) -> Any:
    if isinstance(a, DualSecond):
        return a.tanh()
    out = np.tanh(value_of(a))
    return _node(out, (a, lambda g: g * (1.0 - out * out)))


def sin(a: ArrayLike) -> Any:
    av = value_of(a)
    return _node(np.sin(av), (a, lambda g: g * np.cos(av)))


def sigmoid(a: ArrayLike) -> Any:
    out = 0.5 * (1.0 + np.tanh(0.5 * value_of(a)))
    return _node(out, (a, lambda g: g * out * (1.0 - out)))


def softplus(a: ArrayLike) -> Any:
    """log(1 + exp(a))."""
    av = value_of(a)
    return _node(np.logaddexp(0.0, av), (a, lambda g: g * 0.5 * (1.0 + np.tanh(0.5 * av))))


def sum_(a: ArrayLike, axis: int | None = None) -> Any:
    av = value_of(a)

    def vjp(g: np.ndarray) -> np.ndarray:
        if axis is not None:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, av.shape)

    return _node(np.sum(av, axis=axis), (a, vjp))


def getitem(a: ArrayLike, key: Any) -> Any:
    av = value_of(a)
    basic = _is_basic_index(key)

    def vjp(g: np.ndarray) -> np.ndarray:
        out = np.zeros_like(av)
        if basic:
            out[key] = g
        else:
            np.add.at(out, key, g)
        return out

    return _node(av[key], (a, vjp))


def reshape(a: ArrayLike, shape: Any) -> Any:
    av = value_of(a)
    return _node(av.reshape(shape), (a, lambda g: g.reshape(av.shape)))


def transpose(a: ArrayLike) -> Any:
    return _node(value_of(a).T, (a, lambda g: g.T))


def concatenate(parts: Sequence[ArrayLike], axis: int = 0) -> Any:
    values = [np.atleast_1d(value_of(p)) for p in parts]
    bounds = np.cumsum([0] + [v.shape[axis] for v in values])

    def slicer(i: int, shape: tuple[int, ...]) -> Vjp:
        def vjp(g: np.ndarray) -> np.ndarray:
            piece = np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis)
            return piece.reshape(shape)

        return vjp

    operands = [(p, slicer(i, value_of(p).shape)) for i, p in enumerate(parts)]
    return _node(np.concatenate(values, axis=axis), *operands)


def where(condition: np.ndarray, a: ArrayLike, b: ArrayLike) -> Any:
    """Elementwise selection; ``condition`` is a constant."""
    condition = np.asarray(condition, dtype=bool)
    av, bv = value_of(a), value_of(b)
    return _node(
        np.where(condition, av, bv),
        (a, lambda g: _unbroadcast(np.where(condition, g, 0.0), av.shape)),
        (b, lambda g: _unbroadcast(np.where(condition, 0.0, g), bv.shape)),
    )


def roll(a: ArrayLike, shift: int, axis: int = 0) -> Any:
    return _node(np.roll(value_of(a), shift, axis=axis), (a, lambda g: np.roll(g, -shift, axis=axis)))


def quad_form(x: ArrayLike, precision: np.ndarray) -> Any:
    """x^T P x for a constant symmetric P."""
    xv = value_of(x)
    px = precision @ xv
    return _node(np.asarray(xv @ px, dtype=float), (x, lambda g: 2.0 * g * px))


def gaussian_logpdf(residuals: ArrayLike, cov: ArrayLike, time_index: int | None = None) -> Any:
    """
    Sum over rows r_i of log N(r_i; 0, cov), rows of shape (m,).

    The covariance adjoint is 0.5 * (A A^T - k cov^{-1}) with A = cov^{-1} R^T.
    """
    rv = np.atleast_2d(value_of(residuals))
    cv = value_of(cov)
    k, m = rv.shape
    try:
        factor = linalg.cho_factor(cv, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise FactorizationError("marginal covariance is not positive definite", time_index) from exc

    alpha = linalg.cho_solve(factor, rv.T)
    log_det = 2.0 * np.sum(np.log(np.diag(factor[0])))
    value = -0.5 * np.sum(rv.T * alpha) - 0.5 * k * log_det - 0.5 * k * m * _LOG_2PI

    def vjp_cov(g: np.ndarray) -> np.ndarray:
        precision = linalg.cho_solve(factor, np.eye(m))
        return g * 0.5 * (alpha @ alpha.T - k * precision)

    shape_r = value_of(residuals).shape
    return _node(
        np.asarray(value),
        (residuals, lambda g: (-g * alpha.T).reshape(shape_r)),
        (cov, vjp_cov),
    )


# =====================================================
# Second-order forward mode
# =====================================================

def _add_optional(a: Any, b: Any) -> Any:
    if a is None:
        return b
    if b is None:
        return a
    return a + b


class DualSecond:
    """
    Truncated second-order Taylor number along one input direction.

    ``d2=None`` marks a first-order-only direction: second derivatives are not
    tracked, which halves the work for directions that only need d1.
    """

    __slots__ = ("value", "d1", "d2")
    __array_ufunc__ = None

    def __init__(self, value: Any, d1: Any = 0.0, d2: Any = 0.0):
        self.value = value
        self.d1 = d1
        self.d2 = d2

    @classmethod
    def seed(cls, x: Any, second_order: bool = True) -> DualSecond:
        """Independent variable: d1 = 1, d2 = 0."""
        v = value_of(x)
        return cls(x, np.ones_like(v), np.zeros_like(v) if second_order else None)

    def __repr__(self) -> str:
        return f"DualSecond(value={self.value!r}, d1={self.d1!r}, d2={self.d2!r})"

    # -------------------------
    # Arithmetic
    # -------------------------
    def __add__(self, other: Any) -> DualSecond:
        if isinstance(other, DualSecond):
            d2 = None if self.d2 is None or other.d2 is None else self.d2 + other.d2
            return DualSecond(self.value + other.value, self.d1 + other.d1, d2)
        return DualSecond(self.value + other, self.d1, self.d2)

    __radd__ = __add__

    def __neg__(self) -> DualSecond:
        return DualSecond(-self.value, -self.d1, None if self.d2 is None else -self.d2)

    def __sub__(self, other: Any) -> DualSecond:
        return self + (-other)

    def __rsub__(self, other: Any) -> DualSecond:
        return (-self) + other

    def __mul__(self, other: Any) -> DualSecond:
        if isinstance(other, DualSecond):
            value = self.value * other.value
            d1 = self.d1 * other.value + self.value * other.d1
            if self.d2 is None or other.d2 is None:
                return DualSecond(value, d1, None)
            d2 = self.d2 * other.value + 2.0 * self.d1 * other.d1 + self.value * other.d2
            return DualSecond(value, d1, d2)
        d2 = None if self.d2 is None else self.d2 * other
        return DualSecond(self.value * other, self.d1 * other, d2)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> DualSecond:
        if isinstance(other, DualSecond):
            raise InvalidArgumentError("division by a dual number is not supported")
        return self * (1.0 / other)

    def __matmul__(self, weights: Any) -> DualSecond:
        d2 = None if self.d2 is None else self.d2 @ weights
        return DualSecond(self.value @ weights, self.d1 @ weights, d2)

    def __getitem__(self, key: Any) -> DualSecond:
        d2 = None if self.d2 is None else self.d2[key]
        return DualSecond(self.value[key], self.d1[key], d2)

    # -------------------------
    # Smooth functions
    # -------------------------
    def tanh(self) -> DualSecond:
        """Fused rule: y = tanh v, y' = s d1, y'' = s d2 - 2 y s d1^2 with s = 1 - y^2."""
        v, d1, d2 = value_of(self.value), value_of(self.d1), self.d2
        y = np.tanh(v)
        s = 1.0 - y * y
        out0 = _node(y, (self.value, lambda g: g * s))
        out1 = _node(
            s * d1,
            (self.value, lambda g: g * (-2.0 * y * s * d1)),
            (self.d1, lambda g: g * s),
        )
        if d2 is None:
            return DualSecond(out0, out1, None)
        d2v = value_of(d2)
        out2 = _node(
            s * d2v - 2.0 * y * s * d1 * d1,
            (self.value, lambda g: g * (-2.0 * y * s * d2v - 2.0 * s * (s - 2.0 * y * y) * d1 * d1)),
            (self.d1, lambda g: g * (-4.0 * y * s * d1)),
            (d2, lambda g: g * s),
        )
        return DualSecond(out0, out1, out2)

    def exp(self) -> DualSecond:
        y = exp(self.value)
        d2 = None if self.d2 is None else y * (self.d2 + self.d1 * self.d1)
        return DualSecond(y, y * self.d1, d2)


def _component(x: Any, name: str) -> Any:
    if isinstance(x, DualSecond):
        out = getattr(x, name)
        return 0.0 if out is None else out
    return x if name == "value" else 0.0


# =====================================================
# Public operations
# =====================================================

def value_and_grad(
    objective: Callable[[Var], Any], at: Any
) -> tuple[float, np.ndarray]:
    """Objective value and its gradient at ``at`` on a fresh tape."""
    at = np.array(at, dtype=float)
    bad = np.flatnonzero(~np.isfinite(at))
    if bad.size:
        raise NonFiniteError("parameter vector is not finite", index=int(bad[0]))

    tape = Tape()
    x = tape.var(at)
    out = objective(x)
    value = value_of(out)
    if value.size != 1:
        raise InvalidArgumentError(f"objective must be scalar, got shape {value.shape}")
    value_f = float(value.reshape(()))
    if not np.isfinite(value_f):
        raise NonFiniteError("objective is not finite")
    if not isinstance(out, Var):
        return value_f, np.zeros_like(at)

    g = tape.gradient(out, x)
    bad = np.flatnonzero(~np.isfinite(g))
    if bad.size:
        raise NonFiniteError("gradient is not finite", index=int(bad[0]))
    return value_f, g


def grad(objective: Callable[[Var], Any], at: Any) -> np.ndarray:
    """Gradient of a scalar objective."""
    return value_and_grad(objective, at)[1]


def jacobian(f: Callable[[Var], Any], at: Any) -> np.ndarray:
    """Jacobian (m x n) of a vector map by one backward sweep per output."""
    at = np.array(at, dtype=float)
    tape = Tape()
    x = tape.var(at)
    out = f(x)
    out_value = value_of(out)
    jac = np.zeros((out_value.size, at.size))
    if not isinstance(out, Var):
        return jac
    for i in range(out_value.size):
        seed = np.zeros_like(out_value)
        seed.flat[i] = 1.0
        adj = tape.backward(out, seed)[x.index]
        if adj is not None:
            jac[i] = np.ravel(adj)
    return jac


def input_derivs(
    net_eval: Callable[[Any, Any, Any], Any], s: Any, t: Any, params: Any
) -> tuple[Any, Any, Any, Any]:
    """
    (u, du/dt, du/ds, d2u/ds2) of ``net_eval(s, t, params)``.

    ``s`` and ``t`` may be arrays; each returned quantity stays on the tape of
    ``params`` when ``params`` is a :class:`Var`.
    """
    along_s = net_eval(DualSecond.seed(s), t, params)
    along_t = net_eval(s, DualSecond.seed(t, second_order=False), params)

    u = _component(along_s, "value")
    du_ds = _component(along_s, "d1")
    d2u_ds2 = _component(along_s, "d2")
    du_dt = _component(along_t, "d1")
    return u, du_dt, du_ds, d2u_ds2


def finite_difference_gradient(
    f: Callable[[np.ndarray], float], x: Any, rel_step: float = 1e-5
) -> np.ndarray:
    """Central differences with step rel_step * (1 + |x_i|)."""
    x = np.array(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x.flat[i]))
        xp, xm = x.copy(), x.copy()
        xp.flat[i] += h
        xm.flat[i] -= h
        g.flat[i] = (float(f(xp)) - float(f(xm))) / (2.0 * h)
    return g
