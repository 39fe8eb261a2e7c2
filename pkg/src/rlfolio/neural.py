"""Minimal feed-forward substrate: MLPs with analytic gradients, an Adam
optimizer, a state-independent-variance Gaussian policy head, and a flat
checkpoint format."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GradInvalid, ShapeError

LOG_STD_MIN = math.log(1e-3)
LOG_STD_MAX = math.log(10.0)
LOG_2PI = math.log(2.0 * math.pi)


class Mlp:
    """Fully connected net: tanh on hidden layers, identity on the output.

    Parameters live in `params`, alternating weight (in x out) and bias
    arrays, layer by layer. Initialization is Glorot uniform.
    """

    def __init__(self, sizes: list[int], rng: np.random.Generator | None = None):
        if len(sizes) < 2:
            raise ShapeError("need at least input and output sizes")
        self.sizes = list(sizes)
        self.params: list[np.ndarray] = []
        rng = rng or np.random.default_rng(0)
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            bound = math.sqrt(6.0 / (n_in + n_out))
            self.params.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
            self.params.append(np.zeros(n_out))

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def clone(self) -> "Mlp":
        other = Mlp.__new__(Mlp)
        other.sizes = list(self.sizes)
        other.params = [p.copy() for p in self.params]
        return other

    def _check_input(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.sizes[0]:
            raise ShapeError(f"input shape {x.shape}, expected (*, {self.sizes[0]})")
        return x, single

    def forward(self, x) -> np.ndarray:
        y, _ = self.forward_cache(x)
        return y

    def forward_cache(self, x):
        """Forward pass keeping layer activations for `backward`."""
        x, single = self._check_input(x)
        acts = [x]
        h = x
        for layer in range(self.n_layers):
            w, b = self.params[2 * layer], self.params[2 * layer + 1]
            h = h @ w + b
            if layer < self.n_layers - 1:
                h = np.tanh(h)
            acts.append(h)
        out = h[0] if single else h
        return out, (acts, single)

    def backward(self, cache, upstream) -> tuple[list[np.ndarray], np.ndarray]:
        """Gradients of sum(output * upstream) w.r.t. params and input."""
        acts, single = cache
        g = np.asarray(upstream, dtype=float)
        if single:
            g = g[None, :]
        if g.shape[-1] != self.sizes[-1]:
            raise ShapeError(f"upstream shape {g.shape}")
        grads: list[np.ndarray] = [None] * len(self.params)
        for layer in reversed(range(self.n_layers)):
            a_in = acts[layer]
            if layer < self.n_layers - 1:
                # gradient through tanh of this layer's output
                g = g * (1.0 - acts[layer + 1] ** 2)
            w = self.params[2 * layer]
            grads[2 * layer] = a_in.T @ g
            grads[2 * layer + 1] = g.sum(axis=0)
            g = g @ w.T
        return grads, (g[0] if single else g)


@dataclass
class Adam:
    """Adam over a list of parameter arrays, updated in place."""

    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    _m: list[np.ndarray] = field(default_factory=list)
    _v: list[np.ndarray] = field(default_factory=list)

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if len(params) != len(grads):
            raise ShapeError("params/grads length mismatch")
        for p, g in zip(params, grads):
            if p.shape != np.shape(g):
                raise ShapeError(f"grad shape {np.shape(g)} vs param {p.shape}")
        if any(not np.all(np.isfinite(g)) for g in grads):
            raise GradInvalid("non-finite gradient; update skipped")
        if not self._m:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self.step_count += 1
        t = self.step_count
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            m_hat = m / (1 - self.beta1 ** t)
            v_hat = v / (1 - self.beta2 ** t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class GaussianPolicy:
    """Diagonal Gaussian over actions: MLP mean, learned global log-std."""

    def __init__(self, obs_dim: int, action_dim: int,
                 hidden: tuple[int, ...] = (64, 64),
                 rng: np.random.Generator | None = None,
                 log_std_init: float = math.log(0.5)):
        self.mean_net = Mlp([obs_dim, *hidden, action_dim], rng)
        self.log_std = np.full(action_dim, float(log_std_init))
        self.action_dim = action_dim

    @property
    def params(self) -> list[np.ndarray]:
        return self.mean_net.params + [self.log_std]

    def clone(self) -> "GaussianPolicy":
        other = GaussianPolicy.__new__(GaussianPolicy)
        other.mean_net = self.mean_net.clone()
        other.log_std = self.log_std.copy()
        other.action_dim = self.action_dim
        return other

    def std(self) -> np.ndarray:
        return np.exp(np.clip(self.log_std, LOG_STD_MIN, LOG_STD_MAX))

    def sample(self, obs, rng: np.random.Generator):
        """Draw an action; log-prob is of the unclipped draw."""
        mean = self.mean_net.forward(obs)
        std = self.std()
        noise = rng.standard_normal(mean.shape)
        action = mean + std * noise
        return action, self._log_prob(action, mean, std)

    def log_prob(self, obs, action) -> np.ndarray | float:
        mean = self.mean_net.forward(obs)
        return self._log_prob(np.asarray(action, dtype=float), mean, self.std())

    @staticmethod
    def _log_prob(action, mean, std):
        z = (action - mean) / std
        per_dim = -0.5 * z ** 2 - np.log(std) - 0.5 * LOG_2PI
        return per_dim.sum(axis=-1)

    def log_prob_grads(self, obs, action):
        """Per-sample log-probs plus machinery to backprop a weighting.

        Returns (log_probs, backward) where backward(coeff) yields gradients
        of sum_i coeff_i * log pi(a_i | s_i) in `params` order.
        """
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        action = np.atleast_2d(np.asarray(action, dtype=float))
        mean, cache = self.mean_net.forward_cache(obs)
        std = self.std()
        z = (action - mean) / std
        logp = (-0.5 * z ** 2 - np.log(std) - 0.5 * LOG_2PI).sum(axis=1)

        def backward(coeff):
            c = np.asarray(coeff, dtype=float)[:, None]
            # d logp / d mean = z / std ; d logp / d log_std = z^2 - 1
            mean_grads, _ = self.mean_net.backward(cache, c * z / std)
            clipped = (self.log_std < LOG_STD_MIN) | (self.log_std > LOG_STD_MAX)
            g_log_std = (c * (z ** 2 - 1.0)).sum(axis=0)
            g_log_std[clipped] = 0.0
            return mean_grads + [g_log_std]

        return logp, backward


# --- flat parameter views and checkpoints ------------------------------------

def flatten_params(params: list[np.ndarray]) -> np.ndarray:
    return np.concatenate([p.ravel() for p in params])


def unflatten_params(flat: np.ndarray, params: list[np.ndarray]) -> None:
    """Write `flat` back into the arrays of `params`, in place."""
    offset = 0
    for p in params:
        n = p.size
        p[...] = flat[offset:offset + n].reshape(p.shape)
        offset += n
    if offset != flat.size:
        raise ShapeError("flat vector size mismatch")


CHECKPOINT_MAGIC = "rlfolio-params v1"


def save_params(path, params: list[np.ndarray]) -> None:
    """Text checkpoint: magic line, one shape line per array, then all
    values row-major, one per line."""
    with open(path, "w") as fh:
        fh.write(CHECKPOINT_MAGIC + "\n")
        fh.write(f"{len(params)}\n")
        for p in params:
            fh.write(" ".join(str(s) for s in p.shape) + "\n")
        for p in params:
            for v in p.ravel():
                fh.write(f"{float(v)!r}\n")


def load_params(path) -> list[np.ndarray]:
    with open(path) as fh:
        if fh.readline().strip() != CHECKPOINT_MAGIC:
            raise ShapeError("not a parameter checkpoint")
        count = int(fh.readline())
        shapes = []
        for _ in range(count):
            line = fh.readline().split()
            shapes.append(tuple(int(s) for s in line))
        out = []
        for shape in shapes:
            n = int(np.prod(shape)) if shape else 1
            vals = np.array([float(fh.readline()) for _ in range(n)])
            out.append(vals.reshape(shape))
        return out
