"""Minimal MLP with manual backprop, Adam, and soft target updates.

All math is plain numpy. Networks are value-like: clone() gives an
independent copy, so target networks are just copies updated via
soft_update().
"""

import numpy as np


def _check_finite(arrays, what):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError(f"non-finite values in {what}")


class Network:
    """Feedforward net: ReLU hidden layers, configurable output activation.

    output_activation:
        "identity"            -- critic head
        ("tanh", bounds)      -- actor head; per-dim scale bounds (1d array),
                                 output = bounds * tanh(z)
    Weights init uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    """

    def __init__(self, input_dim, output_dim, hidden=(128, 128, 128),
                 output_activation="identity", rng=None):
        if rng is None:
            rng = np.random.default_rng()
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.hidden = tuple(hidden)
        if output_activation == "identity":
            self.out_kind = "identity"
            self.out_scale = None
        else:
            kind, bounds = output_activation
            if kind != "tanh":
                raise ValueError(f"unknown output activation {kind!r}")
            self.out_kind = "tanh"
            self.out_scale = np.asarray(bounds, dtype=np.float64)
            if self.out_scale.shape != (output_dim,):
                raise ValueError("tanh scale must have one entry per output dim")
        dims = [input_dim, *self.hidden, output_dim]
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            self.biases.append(rng.uniform(-bound, bound, size=fan_out))

    # -- structure ---------------------------------------------------------

    def parameters(self):
        return self.weights + self.biases

    def clone(self):
        net = Network.__new__(Network)
        net.input_dim = self.input_dim
        net.output_dim = self.output_dim
        net.hidden = self.hidden
        net.out_kind = self.out_kind
        net.out_scale = None if self.out_scale is None else self.out_scale.copy()
        net.weights = [w.copy() for w in self.weights]
        net.biases = [b.copy() for b in self.biases]
        return net

    def same_architecture(self, other):
        return (self.input_dim == other.input_dim
                and self.output_dim == other.output_dim
                and self.hidden == other.hidden
                and self.out_kind == other.out_kind)

    # -- forward / backward ------------------------------------------------

    def forward(self, x, return_cache=False):
        """Evaluate the net on x of shape (input_dim,) or (batch, input_dim)."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        h = x.reshape(1, -1) if single else x
        if h.shape[1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got {h.shape[1]}")
        pre = []
        post = [h]
        n_layers = len(self.weights)
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = post[-1] @ w.T + b
            pre.append(z)
            if i < n_layers - 1:
                post.append(np.maximum(z, 0.0))
            elif self.out_kind == "tanh":
                post.append(self.out_scale * np.tanh(z))
            else:
                post.append(z)
        out = post[-1]
        if single:
            out = out[0]
        if return_cache:
            return out, (pre, post)
        return out

    def backward(self, x, upstream, cache=None):
        """Gradients of sum(output * upstream) w.r.t. parameters and input.

        x: (input_dim,) or (batch, input_dim); upstream shaped like the
        corresponding output. Param grads are summed over the batch.
        Returns (weight_grads, bias_grads, input_grad).
        """
        x = np.asarray(x, dtype=np.float64)
        upstream = np.asarray(upstream, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x.reshape(1, -1)
            upstream = upstream.reshape(1, -1)
        if upstream.shape != (x.shape[0], self.output_dim):
            raise ValueError("upstream gradient shape mismatch")
        if cache is None:
            _, cache = self.forward(x, return_cache=True)
        pre, post = cache
        n_layers = len(self.weights)
        if self.out_kind == "tanh":
            delta = upstream * self.out_scale * (1.0 - np.tanh(pre[-1]) ** 2)
        else:
            delta = upstream
        w_grads = [None] * n_layers
        b_grads = [None] * n_layers
        for i in range(n_layers - 1, -1, -1):
            w_grads[i] = delta.T @ post[i]
            b_grads[i] = delta.sum(axis=0)
            delta = delta @ self.weights[i]
            if i > 0:
                # ReLU subgradient at exactly 0 is taken as 0
                delta = delta * (pre[i - 1] > 0.0)
        input_grad = delta[0] if single else delta
        return w_grads, b_grads, input_grad


class AdamState:
    """Adam moments for one Network (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, net, learning_rate):
        if learning_rate <= 0.0:
            raise ValueError("learning rate must be positive")
        self.learning_rate = learning_rate
        self.beta1 = 0.9
        self.beta2 = 0.999
        self.eps = 1e-8
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in net.parameters()]
        self.v = [np.zeros_like(p) for p in net.parameters()]


def adam_step(net, w_grads, b_grads, state):
    """One in-place Adam update on net. Non-finite grads reject the step."""
    grads = list(w_grads) + list(b_grads)
    _check_finite(grads, "gradients")
    state.step_count += 1
    t = state.step_count
    lr = state.learning_rate
    for p, g, m, v in zip(net.parameters(), grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1 ** t)
        v_hat = v / (1.0 - state.beta2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    _check_finite(net.parameters(), "parameters after update")


def soft_update(target, source, tau):
    """target <- tau*source + (1-tau)*target, elementwise, in place."""
    if not target.same_architecture(source):
        raise ValueError("architecture mismatch in soft_update")
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    for tp, sp in zip(target.parameters(), source.parameters()):
        tp *= 1.0 - tau
        tp += tau * sp
