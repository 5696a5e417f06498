"""Layer primitives with hand-written forward/backward passes.

Everything operates on NCHW float arrays of a fixed dtype chosen at
construction (float32 for training speed, float64 for finite-difference
checks). Each layer caches what its backward pass needs; backward returns
the gradient w.r.t. its input and stores parameter gradients on the layer.

Convolution uses im2col + one GEMM per layer, which is where nearly all
training time goes; the column buffer is cached for the weight-gradient
GEMM in backward.
"""

import numpy as np


class Conv2d:
    """ksize x ksize convolution, zero padding, square stride.

    Convolutions that feed a normalization layer are built without a bias
    (the mean subtraction would cancel it exactly).
    """

    def __init__(self, in_ch, out_ch, ksize, stride, pad, rng, dtype, bias=True):
        fan_in = in_ch * ksize * ksize
        self.w = rng.normal(0.0, np.sqrt(2.0 / fan_in), (out_ch, in_ch, ksize, ksize)).astype(dtype)
        self.b = np.zeros(out_ch, dtype=dtype) if bias else None
        self.ksize, self.stride, self.pad = ksize, stride, pad
        self.dw = None
        self.db = None
        self._cols = None
        self._x_shape = None

    def params(self):
        return [("w", self.w)] + ([("b", self.b)] if self.b is not None else [])

    def grads(self):
        return [("w", self.dw)] + ([("b", self.db)] if self.b is not None else [])

    def decayed(self):
        return [self.w]

    def forward(self, x, train):
        n, c, h, w = x.shape
        k, s, p = self.ksize, self.stride, self.pad
        ho = (h + 2 * p - k) // s + 1
        wo = (w + 2 * p - k) // s + 1
        if p:
            xp = np.zeros((n, c, h + 2 * p, w + 2 * p), dtype=x.dtype)
            xp[:, :, p : p + h, p : p + w] = x
        else:
            xp = x
        # cols rows are ordered (c, ki, kj) to line up with w.reshape(out, -1)
        cols = np.empty((c * k * k, n * ho * wo), dtype=x.dtype)
        for ki in range(k):
            for kj in range(k):
                view = xp[:, :, ki : ki + s * ho : s, kj : kj + s * wo : s]
                cols[ki * k + kj :: k * k] = view.transpose(1, 0, 2, 3).reshape(c, -1)
        out = self.w.reshape(len(self.w), -1) @ cols
        out += self.b[:, None]
        self._cols = cols
        self._x_shape = x.shape
        return out.reshape(len(self.w), n, ho, wo).transpose(1, 0, 2, 3)

    def backward(self, dy):
        n, c, h, w = self._x_shape
        k, s, p = self.ksize, self.stride, self.pad
        ho, wo = dy.shape[2], dy.shape[3]
        dyf = dy.transpose(1, 0, 2, 3).reshape(len(self.w), -1)
        self.dw = (dyf @ self._cols.T).reshape(self.w.shape)
        self.db = dyf.sum(axis=1)
        dcols = self.w.reshape(len(self.w), -1).T @ dyf
        dxp = np.zeros((n, c, h + 2 * p, w + 2 * p), dtype=dy.dtype)
        for ki in range(k):
            for kj in range(k):
                patch = dcols[ki * k + kj :: k * k].reshape(c, n, ho, wo)
                dxp[:, :, ki : ki + s * ho : s, kj : kj + s * wo : s] += patch.transpose(1, 0, 2, 3)
        self._cols = None
        return dxp[:, :, p : p + h, p : p + w] if p else dxp


class BatchNorm2d:
    """Per-channel normalization; batch statistics in train mode, running
    averages in eval mode. Biased variance throughout, eps 1e-5, running
    stats blended with decay 0.9."""

    EPS = 1e-5
    DECAY = 0.9

    def __init__(self, ch, dtype):
        self.gamma = np.ones(ch, dtype=dtype)
        self.beta = np.zeros(ch, dtype=dtype)
        self.running_mean = np.zeros(ch, dtype=dtype)
        self.running_var = np.ones(ch, dtype=dtype)
        self.dgamma = None
        self.dbeta = None
        self._xhat = None
        self._ivar = None

    def params(self):
        return [("gamma", self.gamma), ("beta", self.beta)]

    def grads(self):
        return [("gamma", self.dgamma), ("beta", self.dbeta)]

    def decayed(self):
        return []

    def buffers(self):
        return [("running_mean", self.running_mean), ("running_var", self.running_var)]

    def forward(self, x, train, update_stats=True):
        if train:
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            if update_stats:
                self.running_mean *= self.DECAY
                self.running_mean += (1.0 - self.DECAY) * mean
                self.running_var *= self.DECAY
                self.running_var += (1.0 - self.DECAY) * var
        else:
            mean, var = self.running_mean, self.running_var
        ivar = 1.0 / np.sqrt(var + self.EPS)
        xhat = (x - mean[:, None, None]) * ivar[:, None, None]
        if train:
            self._xhat, self._ivar = xhat, ivar
        return self.gamma[:, None, None] * xhat + self.beta[:, None, None]

    def backward(self, dy):
        xhat, ivar = self._xhat, self._ivar
        m = dy.shape[0] * dy.shape[2] * dy.shape[3]
        self.dgamma = (dy * xhat).sum(axis=(0, 2, 3))
        self.dbeta = dy.sum(axis=(0, 2, 3))
        coef = (self.gamma * ivar / m)[:, None, None]
        dx = coef * (
            m * dy
            - self.dbeta[:, None, None]
            - xhat * self.dgamma[:, None, None]
        )
        self._xhat = self._ivar = None
        return dx


class ReLU:
    def __init__(self):
        self._mask = None

    def params(self):
        return []

    def grads(self):
        return []

    def decayed(self):
        return []

    def forward(self, x, train):
        mask = x > 0
        if train:
            self._mask = mask
        return np.where(mask, x, 0)

    def backward(self, dy):
        dx = np.where(self._mask, dy, 0)
        self._mask = None
        return dx


class GlobalAvgPool:
    def __init__(self):
        self._hw = None

    def params(self):
        return []

    def grads(self):
        return []

    def decayed(self):
        return []

    def forward(self, x, train):
        self._hw = x.shape[2:]
        return x.mean(axis=(2, 3))

    def backward(self, dy):
        h, w = self._hw
        return np.broadcast_to(dy[:, :, None, None], dy.shape + (h, w)) / (h * w)


class Linear:
    def __init__(self, in_features, out_features, rng, dtype):
        self.w = rng.normal(0.0, np.sqrt(2.0 / in_features), (in_features, out_features)).astype(dtype)
        self.b = np.zeros(out_features, dtype=dtype)
        self.dw = None
        self.db = None
        self._x = None

    def params(self):
        return [("w", self.w), ("b", self.b)]

    def grads(self):
        return [("w", self.dw), ("b", self.db)]

    def decayed(self):
        return [self.w]

    def forward(self, x, train):
        if train:
            self._x = x
        return x @ self.w + self.b

    def backward(self, dy):
        self.dw = self._x.T @ dy
        self.db = dy.sum(axis=0)
        dx = dy @ self.w.T
        self._x = None
        return dx
