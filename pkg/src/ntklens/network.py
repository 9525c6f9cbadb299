"""Dense feed-forward networks with exact parameter-space derivatives.

Everything here is a pure function of its arguments: parameters live in a
single flat float64 vector, optimizer state is passed in and returned, and
initialization is a deterministic map of (spec, seed).  Two weight
conventions are supported:

* ``lecun`` -- weights drawn with variance 1/fan_in and used as-is,
* ``ntk``   -- weights drawn standard normal, each layer's weight
  contribution multiplied by 1/sqrt(fan_in) in the forward pass.

Hidden layers use the spec's activation; the output layer is always linear,
with softmax folded into the cross-entropy loss.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

ACTIVATIONS = ("relu", "linear")
PARAMETRIZATIONS = ("lecun", "ntk")
LOSS_KINDS = ("mse", "softmax_cross_entropy")


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture description: layer widths, input first, output last."""

    layer_widths: tuple[int, ...]
    activation: str = "relu"
    parametrization: str = "lecun"
    bias: bool = True

    def __post_init__(self):
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))
        if len(self.layer_widths) < 2:
            raise ValueError("layer_widths needs at least an input and an output width")
        if any(w < 1 for w in self.layer_widths):
            raise ValueError(f"all widths must be >= 1, got {self.layer_widths}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if self.parametrization not in PARAMETRIZATIONS:
            raise ValueError(
                f"parametrization must be one of {PARAMETRIZATIONS}, got {self.parametrization!r}"
            )

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths) - 1

    @property
    def input_width(self) -> int:
        return self.layer_widths[0]

    @property
    def output_width(self) -> int:
        return self.layer_widths[-1]

    def layer_shapes(self) -> list[tuple[int, int]]:
        return list(zip(self.layer_widths[:-1], self.layer_widths[1:]))

    @property
    def param_count(self) -> int:
        count = 0
        for fan_in, fan_out in self.layer_shapes():
            count += fan_in * fan_out
            if self.bias:
                count += fan_out
        return count

    def layer_scale(self, layer: int) -> float:
        """Forward-pass multiplier on the weight contribution of a layer."""
        if self.parametrization == "ntk":
            return 1.0 / np.sqrt(self.layer_widths[layer])
        return 1.0


@dataclass
class NetworkState:
    """A spec together with its flat parameter vector.

    ``optimizer_steps`` counts ADAM updates applied since initialization so
    callers can assert that a measurement was taken before any training.
    """

    spec: NetworkSpec
    params: np.ndarray
    optimizer_steps: int = 0

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=np.float64)
        if self.params.ndim != 1 or self.params.size != self.spec.param_count:
            raise ValueError(
                f"params must be a flat vector of length {self.spec.param_count}, "
                f"got shape {self.params.shape}"
            )

    @property
    def param_count(self) -> int:
        return self.params.size


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0


def init_network(spec: NetworkSpec, seed: int) -> NetworkState:
    """Draw parameters for ``spec`` deterministically from ``seed``.

    lecun: W ~ N(0, 1/fan_in).  ntk: W ~ N(0, 1) with the 1/sqrt(fan_in)
    factor applied at forward time instead.  Biases start at zero in both.
    """
    rng = np.random.default_rng(seed)
    chunks = []
    for fan_in, fan_out in spec.layer_shapes():
        if spec.parametrization == "lecun":
            w = rng.normal(0.0, np.sqrt(1.0 / fan_in), size=(fan_in, fan_out))
        else:
            w = rng.normal(0.0, 1.0, size=(fan_in, fan_out))
        chunks.append(w.ravel())
        if spec.bias:
            chunks.append(np.zeros(fan_out))
    return NetworkState(spec=spec, params=np.concatenate(chunks))


def unpack_params(spec: NetworkSpec, params: np.ndarray) -> list[tuple[np.ndarray, np.ndarray | None]]:
    """Split a flat vector into per-layer (W, b) views, b None when bias-free."""
    layers = []
    offset = 0
    for fan_in, fan_out in spec.layer_shapes():
        w = params[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out)
        offset += fan_in * fan_out
        b = None
        if spec.bias:
            b = params[offset : offset + fan_out]
            offset += fan_out
        layers.append((w, b))
    return layers


def pack_grads(spec: NetworkSpec, grads: list[tuple[np.ndarray, np.ndarray | None]]) -> np.ndarray:
    chunks = []
    for gw, gb in grads:
        chunks.append(gw.ravel())
        if gb is not None:
            chunks.append(gb)
    return np.concatenate(chunks)


def _activation_fn(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    return z


def _activation_deriv(kind: str, z: np.ndarray) -> np.ndarray:
    # relu'(0) := 0 by convention
    if kind == "relu":
        return (z > 0.0).astype(np.float64)
    return np.ones_like(z)


def forward_trace(state: NetworkState, inputs: np.ndarray):
    """Forward pass keeping per-layer inputs and pre-activations.

    Returns (acts, preacts): acts[l] is the input to layer l (acts[0] is the
    data), preacts[l] is layer l's pre-activation output.  The network output
    is preacts[-1] (linear output layer).
    """
    spec = state.spec
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != spec.input_width:
        raise ValueError(f"expected inputs of width {spec.input_width}, got {x.shape[1]}")
    acts = [x]
    preacts = []
    for l, (w, b) in enumerate(unpack_params(spec, state.params)):
        z = acts[-1] @ w * spec.layer_scale(l)
        if b is not None:
            z = z + b
        preacts.append(z)
        if l < spec.n_layers - 1:
            acts.append(_activation_fn(spec.activation, z))
    return acts, preacts


def forward(state: NetworkState, inputs: np.ndarray) -> np.ndarray:
    """Network outputs, one row per sample."""
    _, preacts = forward_trace(state, inputs)
    return preacts[-1]


def output_jacobian_factors(state: NetworkState, inputs: np.ndarray):
    """Per-layer factors of the output/parameter Jacobian for a batch.

    For layer l the exact per-sample Jacobian of output o is

        d out_o / d W_l[i, j] = scale_l * acts[l][i] * delta_l[o, j]
        d out_o / d b_l[j]    = delta_l[o, j]

    where delta_l = d out / d preacts[l].  Returned as a list (input-to-output
    order) of (acts_l, delta_l, scale_l) with acts_l of shape (N, fan_in) and
    delta_l of shape (N, d_out, fan_out).
    """
    spec = state.spec
    acts, preacts = forward_trace(state, inputs)
    layers = unpack_params(spec, state.params)
    n = acts[0].shape[0]
    d_out = spec.output_width

    delta = np.broadcast_to(np.eye(d_out), (n, d_out, d_out)).copy()
    factors = [None] * spec.n_layers
    for l in range(spec.n_layers - 1, -1, -1):
        factors[l] = (acts[l], delta, spec.layer_scale(l))
        if l > 0:
            w, _ = layers[l]
            delta = np.einsum("noj,ij->noi", delta, w) * spec.layer_scale(l)
            delta = delta * _activation_deriv(spec.activation, preacts[l - 1])[:, None, :]
    return factors


def jacobian_block(state: NetworkState, inputs: np.ndarray) -> np.ndarray:
    """Exact Jacobian d out / d params for every sample, shape (N, d_out, P).

    Materializes the full block; meant for modest N*P.
    """
    spec = state.spec
    pieces = []
    for acts_l, delta_l, scale_l in output_jacobian_factors(state, inputs):
        n, d_out, fan_out = delta_l.shape
        jw = np.einsum("ni,noj->noij", acts_l, delta_l) * scale_l
        pieces.append(jw.reshape(n, d_out, -1))
        if spec.bias:
            pieces.append(delta_l)
    return np.concatenate(pieces, axis=2)


def param_jacobian(state: NetworkState, input_vector: np.ndarray) -> np.ndarray:
    """Exact (d_out, P) Jacobian of the outputs at a single input point."""
    x = np.asarray(input_vector, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("param_jacobian expects a single input vector")
    return jacobian_block(state, x[None, :])[0]


def _as_class_indices(targets: np.ndarray, n_classes: int) -> np.ndarray:
    t = np.asarray(targets)
    if t.ndim == 2:
        if t.shape[1] != n_classes:
            raise ValueError(f"one-hot targets must have {n_classes} columns")
        return np.argmax(t, axis=1)
    return t.astype(np.int64)


def loss_output_grad(outputs: np.ndarray, targets: np.ndarray, kind: str):
    """Loss (mean over samples) and its gradient w.r.t. the raw outputs."""
    if kind not in LOSS_KINDS:
        raise ValueError(f"loss kind must be one of {LOSS_KINDS}, got {kind!r}")
    f = np.asarray(outputs, dtype=np.float64)
    n, d_out = f.shape
    if kind == "mse":
        y = np.asarray(targets, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None]
        if y.shape != f.shape:
            raise ValueError(f"mse targets of shape {y.shape} do not match outputs {f.shape}")
        diff = f - y
        loss = float(np.mean(diff * diff))
        grad = 2.0 * diff / diff.size
        return loss, grad
    # softmax cross-entropy over class indices or one-hot rows
    idx = _as_class_indices(targets, d_out)
    if idx.shape[0] != n:
        raise ValueError("target count does not match output count")
    if idx.min() < 0 or idx.max() >= d_out:
        raise ValueError("class index out of range")
    shifted = f - f.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - logz
    loss = float(-np.mean(logp[np.arange(n), idx]))
    grad = np.exp(logp)
    grad[np.arange(n), idx] -= 1.0
    grad /= n
    return loss, grad


def loss_and_grad(state: NetworkState, inputs: np.ndarray, targets: np.ndarray, kind: str):
    """Mean loss over the batch and its exact gradient w.r.t. the flat params."""
    spec = state.spec
    acts, preacts = forward_trace(state, inputs)
    layers = unpack_params(spec, state.params)
    loss, delta = loss_output_grad(preacts[-1], targets, kind)

    grads: list[tuple[np.ndarray, np.ndarray | None]] = [None] * spec.n_layers
    for l in range(spec.n_layers - 1, -1, -1):
        w, b = layers[l]
        gw = spec.layer_scale(l) * (acts[l].T @ delta)
        gb = delta.sum(axis=0) if b is not None else None
        grads[l] = (gw, gb)
        if l > 0:
            delta = (delta @ w.T) * spec.layer_scale(l)
            delta = delta * _activation_deriv(spec.activation, preacts[l - 1])
    return loss, pack_grads(spec, grads)


def adam_step(
    state: NetworkState,
    grad: np.ndarray,
    opt_state: AdamState | None,
    cfg: AdamConfig,
) -> tuple[NetworkState, AdamState]:
    """One bias-corrected ADAM update; returns fresh state objects."""
    g = np.asarray(grad, dtype=np.float64)
    if g.shape != state.params.shape:
        raise ValueError(f"grad of shape {g.shape} does not match params {state.params.shape}")
    if opt_state is None:
        opt_state = AdamState(m=np.zeros_like(state.params), v=np.zeros_like(state.params))
    t = opt_state.step + 1
    m = cfg.beta1 * opt_state.m + (1.0 - cfg.beta1) * g
    v = cfg.beta2 * opt_state.v + (1.0 - cfg.beta2) * g * g
    m_hat = m / (1.0 - cfg.beta1**t)
    v_hat = v / (1.0 - cfg.beta2**t)
    params = state.params - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    new_state = NetworkState(
        spec=state.spec, params=params, optimizer_steps=state.optimizer_steps + 1
    )
    return new_state, AdamState(m=m, v=v, step=t)


def gradient_descent_step(state: NetworkState, grad: np.ndarray, rate: float) -> NetworkState:
    """Plain gradient-descent update, used by the linearized-dynamics check."""
    return replace(state, params=state.params - rate * np.asarray(grad, dtype=np.float64))
