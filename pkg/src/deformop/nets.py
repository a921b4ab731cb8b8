"""Dense feed-forward networks with hand-written backpropagation and an Adam
optimizer, in float64 numpy. tanh hidden activations, linear output layer; a
"linear" net is a single weight matrix with no bias and no activation (used
for branches that must preserve linearity in their input)."""

from __future__ import annotations

import numpy as np


class DenseNet:
    """MLP with sizes [in, h1, ..., out]; forward returns a cache consumed by
    backward."""

    def __init__(self, weights, biases, linear=False):
        self.weights = weights
        self.biases = biases
        self.linear = linear

    @classmethod
    def create(cls, sizes, rng, linear=False):
        if linear:
            if len(sizes) != 2:
                raise ValueError("a linear net is a single matrix: sizes [in, out]")
            scale = np.sqrt(6.0 / (sizes[0] + sizes[1]))
            w = rng.uniform(-scale, scale, size=(sizes[0], sizes[1]))
            return cls([w], [None], linear=True)
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            scale = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-scale, scale, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases, linear=False)

    @property
    def sizes(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            if b is not None:
                out.append(b)
        return out

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if self.linear:
            return x @ self.weights[0], (x,)
        acts = [x]
        h = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.tanh(h @ w + b)
            acts.append(h)
        out = h @ self.weights[-1] + self.biases[-1]
        return out, tuple(acts)

    def backward(self, cache, d_out):
        """Gradients for every parameter (same order as params()) plus the
        gradient with respect to the input."""
        if self.linear:
            (x,) = cache
            return [x.T @ d_out], d_out @ self.weights[0].T
        grads = []
        dz = d_out
        for l in range(len(self.weights) - 1, -1, -1):
            a_prev = cache[l]
            grads.append(np.sum(dz, axis=0))   # bias
            grads.append(a_prev.T @ dz)        # weight
            da = dz @ self.weights[l].T
            if l > 0:
                dz = da * (1.0 - cache[l] ** 2)
        grads.reverse()  # now [W0, b0, W1, b1, ...]
        return grads, da


class Adam:
    """Full-batch Adam over a flat list of parameter arrays, updated in
    place."""

    def __init__(self, params, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = learning_rate
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
