"""Feed-forward classifier with exact backpropagation and the Adam optimizer.

Weights are float64 ndarrays. A network maps an input vector to ``k``
pre-activation logits through affine layers joined by rectified-linear
activations; the last layer has no activation.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import NumericError, ShapeError, UsageError

logger = logging.getLogger(__name__)

DEFAULT_HIDDEN: Tuple[int, ...] = (128, 64)


@dataclass(frozen=True, eq=False)
class Layer:
    """One affine map ``z = W a + b``.

    Attributes:
        weight: Matrix of shape (out, in)
        bias: Vector of shape (out,)
    """

    weight: np.ndarray
    bias: np.ndarray

    @property
    def fan_in(self) -> int:
        return int(self.weight.shape[1])

    @property
    def fan_out(self) -> int:
        return int(self.weight.shape[0])


@dataclass(frozen=True, eq=False)
class NetworkParams:
    """Parameters of the classifier (also used to hold gradients).

    Attributes:
        layers: Affine layers, input side first
        activation: Hidden activation tag; only ``"relu"`` is supported
    """

    layers: Tuple[Layer, ...]
    activation: str = "relu"

    def __post_init__(self):
        layers = tuple(
            Layer(
                weight=np.asarray(layer.weight, dtype=np.float64),
                bias=np.asarray(layer.bias, dtype=np.float64),
            )
            for layer in self.layers
        )
        if not layers:
            raise ShapeError("a network needs at least one layer")
        if self.activation != "relu":
            raise UsageError(f"unsupported activation '{self.activation}'")

        for idx, layer in enumerate(layers):
            if layer.weight.ndim != 2 or layer.bias.shape != (layer.fan_out,):
                raise ShapeError(
                    f"layer {idx}: weight {layer.weight.shape} and bias "
                    f"{layer.bias.shape} do not form an affine map"
                )
            if idx > 0 and layers[idx - 1].fan_out != layer.fan_in:
                raise ShapeError(
                    f"layer {idx} expects {layer.fan_in} inputs but layer "
                    f"{idx - 1} produces {layers[idx - 1].fan_out}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_dim(self) -> int:
        """Number of logits, i.e. the number of clusters ``k``."""
        return self.layers[-1].fan_out

    @property
    def num_parameters(self) -> int:
        return sum(a.size for a in self.arrays())

    def arrays(self) -> Iterator[np.ndarray]:
        """Yield parameter arrays in a fixed order (W0, b0, W1, b1, ...)."""
        for layer in self.layers:
            yield layer.weight
            yield layer.bias

    def array_names(self) -> List[str]:
        names = []
        for idx in range(len(self.layers)):
            names.extend([f"layers[{idx}].weight", f"layers[{idx}].bias"])
        return names

    def rebuild(self, arrays: Sequence[np.ndarray]) -> "NetworkParams":
        """New params with the same structure from arrays in ``arrays()`` order."""
        arrays = list(arrays)
        if len(arrays) != 2 * len(self.layers):
            raise ShapeError(
                f"expected {2 * len(self.layers)} arrays, got {len(arrays)}"
            )
        layers = []
        for idx, layer in enumerate(self.layers):
            weight, bias = arrays[2 * idx], arrays[2 * idx + 1]
            if weight.shape != layer.weight.shape or bias.shape != layer.bias.shape:
                raise ShapeError(f"layer {idx}: replacement arrays change shape")
            layers.append(Layer(weight=weight, bias=bias))
        return NetworkParams(layers=tuple(layers), activation=self.activation)

    def to_flat(self) -> np.ndarray:
        """Concatenate all parameters into one vector."""
        return np.concatenate([a.ravel() for a in self.arrays()])

    def from_flat(self, flat: np.ndarray) -> "NetworkParams":
        """Inverse of ``to_flat`` using this instance's shapes."""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.num_parameters,):
            raise ShapeError(
                f"flat vector has shape {flat.shape}, expected ({self.num_parameters},)"
            )
        arrays, offset = [], 0
        for a in self.arrays():
            arrays.append(flat[offset:offset + a.size].reshape(a.shape).copy())
            offset += a.size
        return self.rebuild(arrays)

    def zeros_like(self) -> "NetworkParams":
        return self.rebuild([np.zeros_like(a) for a in self.arrays()])


def init_network(
    input_dim: int,
    num_clusters: int,
    hidden: Sequence[int] = DEFAULT_HIDDEN,
    rng: Optional[np.random.Generator] = None,
) -> NetworkParams:
    """Create a network with uniform Glorot weights and zero biases.

    Weights are drawn from U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).

    Args:
        input_dim: Feature dimension
        num_clusters: Output width ``k``
        hidden: Hidden layer widths; empty for a single affine layer
        rng: Random generator (seeded by the caller)

    Returns:
        Freshly initialized parameters
    """
    if input_dim < 1 or num_clusters < 1 or any(h < 1 for h in hidden):
        raise UsageError(
            f"layer widths must be positive (input {input_dim}, hidden "
            f"{tuple(hidden)}, output {num_clusters})"
        )
    if rng is None:
        rng = np.random.default_rng(0)

    sizes = [int(input_dim), *map(int, hidden), int(num_clusters)]
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weight = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        layers.append(Layer(weight=weight, bias=np.zeros(fan_out)))
    logger.debug(f"Initialized network with layer sizes {sizes}")
    return NetworkParams(layers=tuple(layers))


def _as_batch(params: NetworkParams, x: np.ndarray) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    batch = x.reshape(1, -1) if single else x
    if batch.ndim != 2 or batch.shape[1] != params.input_dim:
        raise ShapeError(
            f"input has shape {x.shape}, network expects dimension {params.input_dim}"
        )
    return batch, single


def _forward_cached(
    params: NetworkParams, batch: np.ndarray
) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
    """Run the network keeping each layer's input and pre-activation."""
    inputs, pre_activations = [], []
    a = batch
    last = len(params.layers) - 1
    for idx, layer in enumerate(params.layers):
        inputs.append(a)
        z = a @ layer.weight.T + layer.bias
        pre_activations.append(z)
        a = z if idx == last else np.maximum(z, 0.0)
    return a, inputs, pre_activations


def forward(params: NetworkParams, x: np.ndarray) -> np.ndarray:
    """Compute pre-activation logits.

    Args:
        params: Network parameters
        x: One feature vector (d,) or a batch (n, d)

    Returns:
        Logits of shape (k,) for a vector input, (n, k) for a batch

    Raises:
        ShapeError: If the feature dimension does not match the first layer
    """
    batch, single = _as_batch(params, x)
    logits, _, _ = _forward_cached(params, batch)
    return logits[0] if single else logits


def backward(
    params: NetworkParams, x: np.ndarray, upstream: np.ndarray
) -> NetworkParams:
    """Reverse-mode gradient of ``sum(upstream * forward(params, x))``.

    For a batch the per-observation gradients are summed; the sum is a
    matrix product over the batch axis, so its order is fixed.

    Args:
        params: Network parameters
        x: One feature vector (d,) or a batch (n, d)
        upstream: Gradient on the logits, shaped like ``forward(params, x)``

    Returns:
        Gradient with the same structure as ``params``
    """
    batch, single = _as_batch(params, x)
    upstream = np.asarray(upstream, dtype=np.float64)
    expected = (params.output_dim,) if single else (batch.shape[0], params.output_dim)
    if upstream.shape != expected:
        raise ShapeError(f"upstream gradient has shape {upstream.shape}, expected {expected}")
    delta = upstream.reshape(batch.shape[0], params.output_dim)

    _, inputs, pre_activations = _forward_cached(params, batch)
    grads: List[Layer] = [None] * len(params.layers)
    for idx in range(len(params.layers) - 1, -1, -1):
        layer = params.layers[idx]
        grads[idx] = Layer(weight=delta.T @ inputs[idx], bias=delta.sum(axis=0))
        if idx > 0:
            delta = (delta @ layer.weight) * (pre_activations[idx - 1] > 0.0)
    return NetworkParams(layers=tuple(grads), activation=params.activation)


@dataclass(frozen=True, eq=False)
class AdamState:
    """Moment accumulators and hyperparameters of Adam.

    Attributes:
        first_moment: Running mean of gradients, one array per parameter array
        second_moment: Running mean of squared gradients
        step: Number of updates applied so far
        lr: Step size
        beta1: Decay of the first moment
        beta2: Decay of the second moment
        eps: Denominator guard
    """

    first_moment: Tuple[np.ndarray, ...]
    second_moment: Tuple[np.ndarray, ...]
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.step < 0:
            raise UsageError(f"step counter must be >= 0, got {self.step}")
        if not (self.lr > 0 and 0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.eps > 0):
            raise UsageError(
                f"invalid Adam hyperparameters lr={self.lr}, beta1={self.beta1}, "
                f"beta2={self.beta2}, eps={self.eps}"
            )

    @classmethod
    def for_params(
        cls,
        params: NetworkParams,
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> "AdamState":
        """Fresh state with zero accumulators shaped like ``params``."""
        zeros = tuple(np.zeros_like(a) for a in params.arrays())
        return cls(
            first_moment=zeros,
            second_moment=tuple(z.copy() for z in zeros),
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def adam_step(
    params: NetworkParams, grads: NetworkParams, state: AdamState
) -> Tuple[NetworkParams, AdamState]:
    """Apply one bias-corrected Adam update.

    An all-zero gradient leaves the parameters untouched; the moments still
    decay and the step counter still advances.

    Args:
        params: Current parameters
        grads: Gradient, same structure as ``params``
        state: Optimizer state

    Returns:
        Tuple of (new parameters, new state); inputs are not modified

    Raises:
        ShapeError: If shapes disagree
        NumericError: If the gradient has a non-finite entry
    """
    param_arrays = list(params.arrays())
    grad_arrays = list(grads.arrays())
    names = params.array_names()
    if len(grad_arrays) != len(param_arrays) or len(state.first_moment) != len(param_arrays):
        raise ShapeError("parameters, gradients and optimizer state differ in structure")

    for name, p, g, m in zip(names, param_arrays, grad_arrays, state.first_moment):
        if g.shape != p.shape or m.shape != p.shape:
            raise ShapeError(f"{name}: parameter {p.shape}, gradient {g.shape}, moment {m.shape}")
        bad = np.argwhere(~np.isfinite(g))
        if bad.size:
            raise NumericError(f"non-finite gradient in {name}", index=(name, tuple(bad[0])))

    t = state.step + 1
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    moving = any(np.any(g != 0.0) for g in grad_arrays)

    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(param_arrays, grad_arrays, state.first_moment, state.second_moment):
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        if moving:
            p = p - state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        new_params.append(p)
        new_m.append(m)
        new_v.append(v)

    new_state = AdamState(
        first_moment=tuple(new_m),
        second_moment=tuple(new_v),
        step=t,
        lr=state.lr,
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
    )
    return params.rebuild(new_params), new_state
