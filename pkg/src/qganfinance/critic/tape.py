"""Minimal tape-based reverse-mode differentiation.

Values are wrapped in `Var`. While a `Tape` is active, every primitive whose
inputs live on that tape appends a node holding its forward function and its
vector-Jacobian product. Reverse mode walks the nodes in reverse creation
order, which is a reverse topological order because a node is always created
after its parents.

Every vjp is written with the same primitives, so with `create_graph=True` the
reverse pass is itself recorded and can be differentiated again. The critic's
gradient penalty needs exactly that.

Only the primitives a 1-D convolutional critic needs are provided.
"""

from __future__ import annotations

import hashlib
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from contextvars import ContextVar, Token
from typing import TYPE_CHECKING

import numpy as np

from qganfinance.errors import StaleTape, ValidationError

if TYPE_CHECKING:
    from numpy.typing import NDArray

Array = np.ndarray
VJP = Callable[["Var"], Sequence["Var | None"]]

# Recording stack of the current thread or async context.
_ACTIVE: ContextVar[tuple[Tape | None, ...]] = ContextVar("qganfinance_active_tape", default=())


def active_tape() -> Tape | None:
    """Return the innermost recording tape of the current context, if any."""
    stack = _ACTIVE.get()
    return stack[-1] if stack else None


def _push(tape: Tape | None) -> Token[tuple[Tape | None, ...]]:
    return _ACTIVE.set((*_ACTIVE.get(), tape))


@contextmanager
def no_recording() -> Iterator[None]:
    """Evaluate primitives without recording nodes."""
    token = _push(None)
    try:
        yield
    finally:
        _ACTIVE.reset(token)


class Var:
    """A value that may be a node of a tape."""

    __slots__ = ("fn", "index", "name", "parents", "tape", "value", "vjp")

    def __init__(self, value: Array | float, name: str = "") -> None:
        """Wrap a constant (not recorded)."""
        self.value: NDArray[np.float64] = np.asarray(value, dtype=np.float64)
        self.name = name
        self.tape: Tape | None = None
        self.index = -1
        self.parents: tuple[Var, ...] = ()
        self.fn: Callable[..., Array] | None = None
        self.vjp: VJP | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape of the wrapped array."""
        return self.value.shape

    def __add__(self, other: Var | float) -> Var:
        """a + b."""
        return add(self, as_var(other))

    def __radd__(self, other: float) -> Var:
        """b + a."""
        return add(as_var(other), self)

    def __sub__(self, other: Var | float) -> Var:
        """a - b."""
        return add(self, neg(as_var(other)))

    def __rsub__(self, other: float) -> Var:
        """b - a."""
        return add(as_var(other), neg(self))

    def __mul__(self, other: Var | float) -> Var:
        """a * b."""
        if isinstance(other, Var):
            return mul(self, other)
        return scale(self, float(other))

    def __rmul__(self, other: float) -> Var:
        """b * a."""
        return scale(self, float(other))

    def __neg__(self) -> Var:
        """-a."""
        return neg(self)

    def __repr__(self) -> str:
        """Debug representation."""
        where = f"#{self.index}" if self.tape is not None else "const"
        return f"Var({where}, shape={self.shape})"


def as_var(value: Var | Array | float) -> Var:
    """Wrap plain values as constants."""
    return value if isinstance(value, Var) else Var(value)


def _digest(value: Array) -> str:
    return hashlib.sha256(np.ascontiguousarray(value).tobytes()).hexdigest()


class Tape:
    """Record of one forward pass (and optionally its reverse pass)."""

    def __init__(self) -> None:
        """Create an empty tape."""
        self.nodes: list[Var] = []
        self.leaves: dict[str, Var] = {}
        self.output: Var | None = None
        self._checksums: dict[int, str] = {}
        self._tokens: list[Token[tuple[Tape | None, ...]]] = []

    def __enter__(self) -> Tape:
        """Start recording onto this tape."""
        self._tokens.append(_push(self))
        return self

    def __exit__(self, *exc: object) -> None:
        """Stop recording."""
        _ACTIVE.reset(self._tokens.pop())

    def __len__(self) -> int:
        """Number of recorded nodes."""
        return len(self.nodes)

    @contextmanager
    def recording(self) -> Iterator[Tape]:
        """Re-activate this tape, e.g. for a differentiable reverse pass."""
        token = _push(self)
        try:
            yield self
        finally:
            _ACTIVE.reset(token)

    def leaf(self, value: Array, name: str) -> Var:
        """Register a differentiable input and remember its checksum."""
        var = Var(value, name)
        self._append(var)
        self.leaves[name] = var
        self._checksums[var.index] = _digest(var.value)
        return var

    def _append(self, var: Var) -> None:
        var.tape = self
        var.index = len(self.nodes)
        self.nodes.append(var)

    def verify(self) -> None:
        """Raise StaleTape if a leaf changed since it was recorded."""
        for var in self.leaves.values():
            if _digest(var.value) != self._checksums[var.index]:
                msg = f"leaf {var.name!r} changed after it was recorded"
                raise StaleTape(msg)

    def replay(self, **values: Array) -> Var:
        """Recompute every node from (optionally replaced) leaf values.

        Returns:
            The recorded output node with refreshed values

        """
        for name, value in values.items():
            if name not in self.leaves:
                msg = f"unknown leaf {name!r}"
                raise ValidationError(msg)
            leaf = self.leaves[name]
            if np.shape(value) != leaf.shape:
                msg = f"leaf {name!r} has shape {leaf.shape}, got {np.shape(value)}"
                raise ValidationError(msg)
            leaf.value = np.array(value, dtype=np.float64)
            self._checksums[leaf.index] = _digest(leaf.value)
        for node in self.nodes:
            if node.fn is not None:
                node.value = node.fn(*(p.value for p in node.parents))
        if self.output is None:
            msg = "tape has no output"
            raise ValidationError(msg)
        return self.output


def _record(value: Array, parents: tuple[Var, ...], fn: Callable[..., Array], vjp: VJP) -> Var:
    out = Var(value)
    tape = active_tape()
    if tape is not None and any(p.tape is tape for p in parents):
        out.parents = parents
        out.fn = fn
        out.vjp = vjp
        tape._append(out)  # noqa: SLF001
    return out


# --- primitives --------------------------------------------------------


def add(a: Var, b: Var) -> Var:
    """Elementwise a + b with numpy broadcasting."""
    return _record(
        a.value + b.value,
        (a, b),
        np.add,
        lambda g: (sum_to(g, a.shape), sum_to(g, b.shape)),
    )


def neg(a: Var) -> Var:
    """Elementwise -a."""
    return _record(-a.value, (a,), np.negative, lambda g: (neg(g),))


def scale(a: Var, factor: float) -> Var:
    """Multiply by a fixed scalar."""
    return _record(a.value * factor, (a,), lambda x: x * factor, lambda g: (scale(g, factor),))


def mul(a: Var, b: Var) -> Var:
    """Elementwise a * b with numpy broadcasting."""
    return _record(
        a.value * b.value,
        (a, b),
        np.multiply,
        lambda g: (sum_to(mul(g, b), a.shape), sum_to(mul(g, a), b.shape)),
    )


def einsum(subscripts: str, a: Var, b: Var) -> Var:
    """Bilinear contraction `ab,bc->ac` style; every index of an input must reach the other input or the output."""
    inputs, out = subscripts.replace(" ", "").split("->")
    sub_a, sub_b = inputs.split(",")
    return _record(
        np.einsum(subscripts, a.value, b.value, optimize=True),
        (a, b),
        lambda x, y: np.einsum(subscripts, x, y, optimize=True),
        lambda g: (einsum(f"{out},{sub_b}->{sub_a}", g, b), einsum(f"{out},{sub_a}->{sub_b}", g, a)),
    )


def reshape(a: Var, shape: tuple[int, ...]) -> Var:
    """Reshape without copying semantics."""
    original = a.shape
    return _record(a.value.reshape(shape), (a,), lambda x: x.reshape(shape), lambda g: (reshape(g, original),))


def sum_to(a: Var, shape: tuple[int, ...]) -> Var:
    """Sum a broadcast result back to `shape`."""
    if a.shape == shape:
        return a

    def fn(x: Array) -> Array:
        lead = x.ndim - len(shape)
        axes = tuple(range(lead)) + tuple(lead + i for i, dim in enumerate(shape) if dim == 1 and x.shape[lead + i] != 1)
        return np.sum(x, axis=axes, keepdims=True).reshape(shape)

    source = a.shape
    return _record(fn(a.value), (a,), fn, lambda g: (broadcast_to(g, source),))


def broadcast_to(a: Var, shape: tuple[int, ...]) -> Var:
    """Broadcast to `shape`, materialized."""
    if a.shape == shape:
        return a
    source = a.shape
    return _record(
        np.broadcast_to(a.value, shape).copy(),
        (a,),
        lambda x: np.broadcast_to(x, shape).copy(),
        lambda g: (sum_to(g, source),),
    )


def sum_axis(a: Var, axis: int | None = None) -> Var:
    """Sum over one axis (or all)."""
    source = a.shape

    def fn(x: Array) -> Array:
        return np.sum(x, axis=axis)

    def vjp(g: Var) -> tuple[Var]:
        expanded = reshape(g, tuple(1 if axis is None or i == axis % len(source) else d for i, d in enumerate(source)))
        return (broadcast_to(expanded, source),)

    return _record(fn(a.value), (a,), fn, vjp)


def mean(a: Var) -> Var:
    """Mean over all entries."""
    return scale(sum_axis(a), 1.0 / max(1, a.value.size))


def relu(a: Var) -> Var:
    """max(a, 0); the kink gets subgradient 0."""
    return _record(
        np.maximum(a.value, 0.0),
        (a,),
        lambda x: np.maximum(x, 0.0),
        lambda g: (mul(g, Var((a.value > 0).astype(np.float64))),),
    )


def safe_reciprocal(a: Var) -> Var:
    """1/a where a > 0, else 0."""

    def fn(x: Array) -> Array:
        out = np.zeros_like(x)
        np.divide(1.0, x, out=out, where=x > 0)
        return out

    out_holder: list[Var] = []

    def vjp(g: Var) -> tuple[Var]:
        r = out_holder[0]
        return (neg(mul(g, mul(r, r))),)

    result = _record(fn(a.value), (a,), fn, vjp)
    out_holder.append(result)
    return result


def sqrt(a: Var) -> Var:
    """Square root of a non-negative input; derivative 0 at 0."""
    out_holder: list[Var] = []

    def vjp(g: Var) -> tuple[Var]:
        return (scale(mul(g, safe_reciprocal(out_holder[0])), 0.5),)

    result = _record(np.sqrt(a.value), (a,), np.sqrt, vjp)
    out_holder.append(result)
    return result


def l2_norm(a: Var, axis: int) -> Var:
    """Euclidean norm along one axis."""
    return sqrt(sum_axis(mul(a, a), axis))


def gather(a: Var, index: NDArray[np.intp]) -> Var:
    """Index the last axis with an integer array: out[..., *index.shape] = a[..., index]."""
    length = a.shape[-1]
    return _record(a.value[..., index], (a,), lambda x: x[..., index], lambda g: (scatter(g, index, length),))


def scatter(a: Var, index: NDArray[np.intp], length: int) -> Var:
    """Adjoint of `gather`: accumulate a[..., *index.shape] into a last axis of `length`."""

    def fn(x: Array) -> Array:
        lead = x.shape[: x.ndim - index.ndim]
        out = np.zeros((*lead, length))
        np.add.at(out, (*(slice(None),) * len(lead), index), x)
        return out

    return _record(fn(a.value), (a,), fn, lambda g: (gather(g, index),))


def pad_last(a: Var, left: int, right: int) -> Var:
    """Zero-pad the last axis."""
    if left == 0 and right == 0:
        return a
    length = a.shape[-1]
    widths = [(0, 0)] * (a.value.ndim - 1) + [(left, right)]
    return _record(
        np.pad(a.value, widths),
        (a,),
        lambda x: np.pad(x, widths),
        lambda g: (crop_last(g, left, length),),
    )


def crop_last(a: Var, start: int, length: int) -> Var:
    """Slice the last axis to [start, start + length)."""
    total = a.shape[-1]
    return _record(
        a.value[..., start : start + length].copy(),
        (a,),
        lambda x: x[..., start : start + length].copy(),
        lambda g: (pad_last(g, start, total - start - length),),
    )


# --- reverse mode --------------------------------------------------------


def grad(
    output: Var,
    wrt: Sequence[Var],
    upstream: Var | Array | None = None,
    *,
    create_graph: bool = False,
) -> list[Var]:
    """Return d(upstream . output)/d(wrt) by one reverse sweep.

    Args:
        output: Node whose cotangent is seeded
        wrt: Nodes of the same tape to differentiate with respect to
        upstream: Cotangent for `output`; ones if omitted
        create_graph: Record the reverse sweep so the result can be differentiated again

    Returns:
        One gradient per `wrt` entry (zeros when unreachable)

    Raises:
        StaleTape: If a leaf changed since recording.

    """
    tape = output.tape
    seed = Var(np.ones(output.shape)) if upstream is None else as_var(upstream)
    if tape is None:
        return [Var(np.zeros(v.shape)) for v in wrt]
    if seed.shape != output.shape:
        msg = f"upstream shape {seed.shape} does not match output shape {output.shape}"
        raise ValidationError(msg)
    tape.verify()

    cotangents: dict[int, Var] = {output.index: seed}
    context = tape.recording() if create_graph else no_recording()
    with context:
        for node in reversed(tape.nodes[: output.index + 1]):
            if node.vjp is None:
                continue
            ct = cotangents.get(node.index)
            if ct is None:
                continue
            for parent, parent_ct in zip(node.parents, node.vjp(ct), strict=True):
                if parent.tape is not tape or parent_ct is None:
                    continue
                previous = cotangents.get(parent.index)
                cotangents[parent.index] = parent_ct if previous is None else add(previous, parent_ct)
    return [cotangents.get(v.index, Var(np.zeros(v.shape))) if v.tape is tape else Var(np.zeros(v.shape)) for v in wrt]
