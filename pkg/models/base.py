from __future__ import annotations

from contextlib import contextmanager
from typing import Any, Iterator, Optional, Sequence

import numpy as np

from exceptions import ConfigurationError
from gradcore.norm import RunningStats
from gradcore.optim import Parameter
from gradcore.tensor import Tensor, no_grad


class Module:
    """Base class for all network components.

    Parameters, running statistics and sub-modules are discovered from
    instance attributes in assignment order, which fixes the naming used by
    checkpoints. Lists of modules are walked with their index as name.
    """

    def __init__(self) -> None:
        self.training = True
        self.update_running_stats = True
        self.last_output_shape: Optional[tuple[int, ...]] = None

    def forward(self, *args: Any, **kwargs: Any) -> Tensor:
        raise NotImplementedError

    def __call__(self, *args: Any, **kwargs: Any) -> Tensor:
        out = self.forward(*args, **kwargs)
        self.last_output_shape = out.shape
        return out

    # Structure

    def named_children(self) -> Iterator[tuple[str, "Module"]]:
        for name, value in vars(self).items():
            if isinstance(value, Module):
                yield name, value
            elif isinstance(value, (list, tuple)):
                for index, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{name}.{index}", item

    def named_modules(self, prefix: str = "") -> Iterator[tuple[str, "Module"]]:
        yield prefix, self
        for name, child in self.named_children():
            yield from child.named_modules(f"{prefix}.{name}" if prefix else name)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for name, value in vars(self).items():
            if isinstance(value, Parameter):
                yield (f"{prefix}.{name}" if prefix else name), value
        for name, child in self.named_children():
            yield from child.named_parameters(f"{prefix}.{name}" if prefix else name)

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def named_running_stats(self, prefix: str = "") -> Iterator[tuple[str, RunningStats]]:
        for name, value in vars(self).items():
            if isinstance(value, RunningStats):
                yield (f"{prefix}.{name}" if prefix else name), value
        for name, child in self.named_children():
            yield from child.named_running_stats(f"{prefix}.{name}" if prefix else name)

    def assign_names(self, root: str) -> "Module":
        for name, param in self.named_parameters(root):
            param.name = name
        return self

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    # Modes

    def train(self, mode: bool = True) -> "Module":
        for _, module in self.named_modules():
            module.training = mode
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def requires_grad_(self, flag: bool) -> "Module":
        for param in self.parameters():
            param.requires_grad = flag
        return self

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.grad = None

    @contextmanager
    def frozen_stats(self) -> Iterator[None]:
        """Train-mode forwards inside the block leave running statistics untouched.

        Spectral power-iteration vectors are read but not refreshed either.
        """
        modules = [m for _, m in self.named_modules()]
        previous = [m.update_running_stats for m in modules]
        for m in modules:
            m.update_running_stats = False
        try:
            yield
        finally:
            for m, flag in zip(modules, previous):
                m.update_running_stats = flag

    # State

    def state_dict(self, prefix: str = "") -> dict[str, np.ndarray]:
        """Every array needed to restore the module and its optimizer moments.

        Step counters and update counts are stored as 0-d int64 arrays.
        """
        state: dict[str, np.ndarray] = {}
        for name, param in self.named_parameters(prefix):
            state[f"{name}.data"] = param.data
            state[f"{name}.adam_m"] = param.adam_m
            state[f"{name}.adam_v"] = param.adam_v
            state[f"{name}.step_count"] = np.array(param.step_count, dtype=np.int64)
            if param.spectral_u is not None:
                state[f"{name}.spectral_u"] = param.spectral_u
        for name, stats in self.named_running_stats(prefix):
            state[f"{name}.mean"] = stats.mean
            state[f"{name}.var"] = stats.var
            state[f"{name}.updates"] = np.array(stats.updates, dtype=np.int64)
        return state

    def load_state_dict(self, state: dict[str, np.ndarray], prefix: str = "") -> None:
        """Restore arrays written by :meth:`state_dict`.

        Raises:
            ConfigurationError: Missing entry or shape mismatch
        """

        def take(key: str, like: Optional[np.ndarray] = None) -> np.ndarray:
            if key not in state:
                raise ConfigurationError(f"checkpoint has no entry '{key}'")
            value = np.array(state[key], copy=True)
            if like is not None and value.shape != like.shape:
                raise ConfigurationError(
                    f"checkpoint entry '{key}' has shape {value.shape}, expected {like.shape}"
                )
            return value

        for name, param in self.named_parameters(prefix):
            param.data = take(f"{name}.data", param.data)
            param.adam_m = take(f"{name}.adam_m", param.data)
            param.adam_v = take(f"{name}.adam_v", param.data)
            param.step_count = int(take(f"{name}.step_count"))
            if param.spectral_u is not None:
                param.spectral_u = take(f"{name}.spectral_u", param.spectral_u)
            param.grad = None
        for name, stats in self.named_running_stats(prefix):
            stats.mean = take(f"{name}.mean", stats.mean)
            stats.var = take(f"{name}.var", stats.var)
            stats.updates = int(take(f"{name}.updates"))

    # Reporting

    def describe(self, input_shape: Sequence[int]) -> list[dict[str, Any]]:
        """Trace one eval-mode forward and list leaf layers with their output shapes.

        Args:
            input_shape: Full input shape including the batch axis

        Returns:
            One dict per leaf layer: name, type, output_shape, parameters
        """
        was_training = self.training
        self.eval()
        try:
            with no_grad():
                self(Tensor(np.zeros(tuple(input_shape))))
        finally:
            self.train(was_training)
        rows = []
        for name, module in self.named_modules():
            if any(True for _ in module.named_children()) or not name:
                continue
            rows.append(
                {
                    "name": name,
                    "type": type(module).__name__,
                    "output_shape": list(module.last_output_shape or ()),
                    "parameters": module.parameter_count(),
                }
            )
        return rows


class Sequential(Module):
    """Applies its layers in order."""

    def __init__(self, *layers: Module) -> None:
        super().__init__()
        self.layers = list(layers)

    def forward(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x

    def __len__(self) -> int:
        return len(self.layers)
