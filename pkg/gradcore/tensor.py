"""Dense tensors and the recording tape behind reverse-mode differentiation.

Every differentiable operation is a :class:`Function`. Applying one records a
:class:`TapeEntry` on its output. Backward rules are themselves written with
tensor operations, so running them with recording enabled puts the backward
pass on the tape too; that is what lets a gradient norm be differentiated
again (R1 and gradient penalties).
"""

from __future__ import annotations

import itertools
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Sequence, Union

import numpy as np

from exceptions import ContractError, DoubleBackwardError

ArrayLike = Union["Tensor", np.ndarray, float, int]

_default_dtype: type = np.float64
_grad_enabled = True
_sequence = itertools.count()


def set_default_dtype(dtype: Union[str, type]) -> None:
    """Select float64 (reference) or float32 for newly created tensors."""
    global _default_dtype
    resolved = np.dtype(dtype)
    if resolved not in (np.dtype(np.float64), np.dtype(np.float32)):
        raise ValueError(f"unsupported precision: {dtype}")
    _default_dtype = resolved.type


def get_default_dtype() -> type:
    return _default_dtype


def is_grad_enabled() -> bool:
    return _grad_enabled


@contextmanager
def set_grad_enabled(enabled: bool) -> Iterator[None]:
    """Enable or disable recording inside the block."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = enabled
    try:
        yield
    finally:
        _grad_enabled = previous


def no_grad() -> Any:
    return set_grad_enabled(False)


class Context:
    """Per-call storage shared between a forward and its backward rule."""

    def __init__(self) -> None:
        self.inputs: tuple[Tensor, ...] = ()
        self.output: Optional[Tensor] = None
        self.kwargs: dict[str, Any] = {}
        self.values: dict[str, Any] = {}


@dataclass(eq=False)
class TapeEntry:
    """One recorded operation: inputs, output identity, backward rule."""

    function: type["Function"]
    ctx: Context
    inputs: tuple["Tensor", ...]
    output_id: int
    sequence: int = field(default_factory=lambda: next(_sequence))


class ComputationTape:
    """Recorded operations reachable from one output, in recording order."""

    def __init__(self, entries: Sequence[TapeEntry]) -> None:
        self.entries = sorted(entries, key=lambda entry: entry.sequence)

    @classmethod
    def from_output(cls, output: "Tensor") -> "ComputationTape":
        seen: set[int] = set()
        entries: list[TapeEntry] = []
        stack = [output]
        while stack:
            tensor = stack.pop()
            entry = tensor._entry
            if entry is None or id(entry) in seen:
                continue
            seen.add(id(entry))
            entries.append(entry)
            stack.extend(entry.inputs)
        return cls(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[TapeEntry]:
        return iter(self.entries)

    def replay_order(self) -> Iterator[TapeEntry]:
        """Entries in reverse recording order (a valid topological order)."""
        return reversed(self.entries)


class Function:
    """Base class for differentiable operations.

    Subclasses implement ``forward(ctx, *arrays, **kwargs) -> ndarray`` on raw
    arrays and ``backward(ctx, grad_output) -> tuple`` on tensors.
    """

    supports_double_backward = True

    @staticmethod
    def forward(ctx: Context, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    @staticmethod
    def backward(ctx: Context, grad_output: "Tensor") -> tuple[Optional["Tensor"], ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs: ArrayLike, **kwargs: Any) -> "Tensor":
        tensors = tuple(as_tensor(value) for value in inputs)
        ctx = Context()
        ctx.inputs = tensors
        ctx.kwargs = kwargs
        data = cls.forward(ctx, *(t.data for t in tensors), **kwargs)
        requires_grad = _grad_enabled and any(t.requires_grad for t in tensors)
        out = Tensor(data, requires_grad=requires_grad)
        if requires_grad:
            ctx.output = out
            out._entry = TapeEntry(cls, ctx, tensors, id(out))
        return out


class Tensor:
    """Dense row-major array with optional gradient tracking."""

    __array_priority__ = 100

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        name: Optional[str] = None,
    ) -> None:
        array = np.asarray(data)
        if not np.issubdtype(array.dtype, np.floating):
            array = array.astype(_default_dtype)
        self.data: np.ndarray = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._entry: Optional[TapeEntry] = None

    # Introspection

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self._entry is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name}" if self.name else ""
        return f"<Tensor shape={self.shape} requires_grad={self.requires_grad}{label}>"

    # Arithmetic (implemented in gradcore.functional)

    def __add__(self, other: ArrayLike) -> "Tensor":
        from gradcore import functional as F

        return F.add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        from gradcore import functional as F

        return F.add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        from gradcore import functional as F

        return F.sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        from gradcore import functional as F

        return F.sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        from gradcore import functional as F

        return F.mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        from gradcore import functional as F

        return F.mul(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        from gradcore import functional as F

        return F.div(self, other)

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        from gradcore import functional as F

        return F.div(other, self)

    def __neg__(self) -> "Tensor":
        from gradcore import functional as F

        return F.neg(self)

    def __pow__(self, exponent: float) -> "Tensor":
        from gradcore import functional as F

        return F.power(self, exponent)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        from gradcore import functional as F

        return F.matmul(self, other)

    def sum(self, axis: Optional[Union[int, tuple[int, ...]]] = None, keepdims: bool = False) -> "Tensor":
        from gradcore import functional as F

        return F.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[Union[int, tuple[int, ...]]] = None, keepdims: bool = False) -> "Tensor":
        from gradcore import functional as F

        return F.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: Any) -> "Tensor":
        from gradcore import functional as F

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return F.reshape(self, tuple(shape))

    def transpose(self, *axes: int) -> "Tensor":
        from gradcore import functional as F

        return F.permute(self, tuple(axes) if axes else tuple(reversed(range(self.ndim))))


def as_tensor(value: ArrayLike) -> Tensor:
    """Wrap arrays and Python scalars as constant tensors."""
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=_default_dtype))


def _propagate(
    root: Tensor,
    root_grad: Tensor,
    create_graph: bool,
) -> tuple[dict[int, Tensor], dict[int, Tensor]]:
    """Replay the tape backwards.

    Returns gradients keyed by tensor identity and the leaf tensors reached.
    """
    grads: dict[int, Tensor] = {id(root): root_grad}
    leaves: dict[int, Tensor] = {}
    if root.is_leaf and root.requires_grad:
        leaves[id(root)] = root

    tape = ComputationTape.from_output(root)
    with set_grad_enabled(create_graph):
        for entry in tape.replay_order():
            grad_output = grads.get(entry.output_id)
            if grad_output is None:
                continue
            if create_graph and not entry.function.supports_double_backward:
                raise DoubleBackwardError(entry.function.__name__)
            input_grads = entry.function.backward(entry.ctx, grad_output)
            for tensor, grad in zip(entry.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                grads[key] = grad if key not in grads else grads[key] + grad
                if tensor.is_leaf:
                    leaves[key] = tensor
    return grads, leaves


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into the ``grad`` array of every reachable leaf.

    Gradients add up across calls; zero them explicitly between steps.
    """
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    seed = Tensor(np.ones_like(loss.data))
    grads, leaves = _propagate(loss, seed, create_graph=False)
    for key, leaf in leaves.items():
        value = grads[key].data
        if value.shape != leaf.shape:
            value = np.broadcast_to(value, leaf.shape)
        leaf.grad = value.copy() if leaf.grad is None else leaf.grad + value


def grad(
    output: Tensor,
    inputs: Sequence[Tensor],
    grad_output: Optional[Tensor] = None,
    create_graph: bool = False,
) -> list[Tensor]:
    """Gradients of ``output`` with respect to ``inputs`` without touching ``.grad``.

    With ``create_graph`` the returned tensors are recorded and can be
    differentiated again.
    """
    if grad_output is None:
        if output.size != 1:
            raise ContractError("grad_output is required for non-scalar outputs")
        grad_output = Tensor(np.ones_like(output.data))
    if not output.requires_grad:
        return [Tensor(np.zeros_like(t.data)) for t in inputs]
    grads, _ = _propagate(output, grad_output, create_graph=create_graph)
    results = []
    for tensor in inputs:
        value = grads.get(id(tensor))
        results.append(value if value is not None else Tensor(np.zeros_like(tensor.data)))
    return results
