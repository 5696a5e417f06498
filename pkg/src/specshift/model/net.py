"""Small pre-activation residual convnet with explicit backprop.

The default configuration is three stages of widths (16, 32, 64) with two
pre-activation blocks each, stride-2 downsampling entering stages 2 and 3,
a final norm/relu, global average pooling and a linear classifier. Weights
use HeNormal initialization (Normal(0, sqrt(2/fan_in))), biases zero,
drawn from a Philox stream keyed by the config seed (default 0).

`loss_and_grad` computes mean softmax cross-entropy plus (l2/2) * sum(w^2)
over convolution/linear weight tensors (not biases, not normalization
parameters) and returns gradients aligned with `net.param_arrays()`.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, NumericalError
from ..rng import STREAM_INIT, stream_rng
from .layers import BatchNorm2d, Conv2d, GlobalAvgPool, Linear, ReLU


@dataclass(frozen=True)
class ConvNetConfig:
    stage_widths: tuple = (16, 32, 64)
    blocks_per_stage: int = 2
    in_shape: tuple = (3, 32, 32)
    num_classes: int = 10
    residual: bool = True
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        if any(w <= 0 for w in self.stage_widths):
            raise ValueError(f"stage widths must be positive, got {self.stage_widths}")
        if self.blocks_per_stage < 1:
            raise ValueError("need at least one block per stage")
        # stride-2 between stages must leave a positive spatial extent
        if min(self.in_shape[1:]) // 2 ** (len(self.stage_widths) - 1) < 1:
            raise ValueError(f"input {self.in_shape} too small for {len(self.stage_widths)} stages")

    def to_dict(self) -> dict:
        return {
            "stage_widths": list(self.stage_widths),
            "blocks_per_stage": self.blocks_per_stage,
            "in_shape": list(self.in_shape),
            "num_classes": self.num_classes,
            "residual": self.residual,
            "seed": self.seed,
            "dtype": self.dtype,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConvNetConfig":
        d = dict(d)
        d["stage_widths"] = tuple(d.get("stage_widths", (16, 32, 64)))
        d["in_shape"] = tuple(d.get("in_shape", (3, 32, 32)))
        return cls(**d)


class PreactBlock:
    """norm -> relu -> conv -> norm -> relu -> conv (+ shortcut).

    The shortcut is the identity when shapes match; otherwise a 1x1
    strided convolution applied to the pre-activated input. With
    residual=False the shortcut is dropped entirely.
    """

    def __init__(self, in_ch, out_ch, stride, residual, rng, dtype):
        self.bn1 = BatchNorm2d(in_ch, dtype)
        self.relu1 = ReLU()
        self.conv1 = Conv2d(in_ch, out_ch, 3, stride, 1, rng, dtype)
        self.bn2 = BatchNorm2d(out_ch, dtype)
        self.relu2 = ReLU()
        self.conv2 = Conv2d(out_ch, out_ch, 3, 1, 1, rng, dtype)
        self.residual = residual
        self.proj = None
        if residual and (stride != 1 or in_ch != out_ch):
            self.proj = Conv2d(in_ch, out_ch, 1, stride, 0, rng, dtype)
        self._identity = residual and self.proj is None

    def sublayers(self):
        out = [("bn1", self.bn1), ("conv1", self.conv1), ("bn2", self.bn2), ("conv2", self.conv2)]
        if self.proj is not None:
            out.append(("proj", self.proj))
        return out

    def forward(self, x, train, update_stats=True):
        h = self.relu1.forward(self.bn1.forward(x, train, update_stats), train)
        y = self.conv1.forward(h, train)
        y = self.relu2.forward(self.bn2.forward(y, train, update_stats), train)
        y = self.conv2.forward(y, train)
        if self._identity:
            return y + x
        if self.proj is not None:
            return y + self.proj.forward(h, train)
        return y

    def backward(self, dy):
        dx_main = self.conv2.backward(dy)
        dx_main = self.bn2.backward(self.relu2.backward(dx_main))
        dh = self.conv1.backward(dx_main)
        if self.proj is not None:
            dh = dh + self.proj.backward(dy)
        dx = self.bn1.backward(self.relu1.backward(dh))
        if self._identity:
            dx = dx + dy
        return dx


class Network:
    """Topology, parameters, and normalization buffers in one object."""

    def __init__(self, config: ConvNetConfig):
        self.config = config
        dtype = np.dtype(config.dtype).type
        rng = stream_rng(config.seed, STREAM_INIT)
        in_ch = config.in_shape[0]
        widths = config.stage_widths

        self.stem = Conv2d(in_ch, widths[0], 3, 1, 1, rng, dtype)
        self.blocks = []
        prev = widths[0]
        for si, width in enumerate(widths):
            for bi in range(config.blocks_per_stage):
                stride = 2 if (si > 0 and bi == 0) else 1
                self.blocks.append(
                    (f"stage{si}.block{bi}", PreactBlock(prev, width, stride, config.residual, rng, dtype))
                )
                prev = width
        self.head_bn = BatchNorm2d(prev, dtype)
        self.head_relu = ReLU()
        self.pool = GlobalAvgPool()
        self.fc = Linear(prev, config.num_classes, rng, dtype)
        self.dtype = dtype

    def named_layers(self):
        out = [("stem", self.stem)]
        for name, block in self.blocks:
            out.extend((f"{name}.{sub}", layer) for sub, layer in block.sublayers())
        out.extend([("head_bn", self.head_bn), ("fc", self.fc)])
        return out

    def named_params(self):
        return [
            (f"{lname}.{pname}", arr)
            for lname, layer in self.named_layers()
            for pname, arr in layer.params()
        ]

    def param_arrays(self):
        return [arr for _, arr in self.named_params()]

    def grad_arrays(self):
        return [
            arr
            for _, layer in self.named_layers()
            for _, arr in layer.grads()
        ]

    def decayed_arrays(self):
        return [arr for _, layer in self.named_layers() for arr in layer.decayed()]

    def named_buffers(self):
        out = []
        for lname, layer in self.named_layers():
            if hasattr(layer, "buffers"):
                out.extend((f"{lname}.{bname}", arr) for bname, arr in layer.buffers())
        return out

    def param_count(self) -> int:
        return sum(arr.size for arr in self.param_arrays())

    def forward(self, x, train, update_stats=True):
        x = np.ascontiguousarray(x, dtype=self.dtype)
        if x.ndim != 4 or tuple(x.shape[1:]) != tuple(self.config.in_shape):
            raise DimensionError(
                f"batch shape {x.shape} does not match configured input {self.config.in_shape}"
            )
        h = self.stem.forward(x, train)
        for _, block in self.blocks:
            h = block.forward(h, train, update_stats)
        h = self.head_relu.forward(self.head_bn.forward(h, train, update_stats), train)
        h = self.pool.forward(h, train)
        return self.fc.forward(h, train)

    def backward(self, dlogits):
        dh = self.fc.backward(dlogits)
        dh = self.pool.backward(dh)
        dh = self.head_bn.backward(self.head_relu.backward(dh))
        for _, block in reversed(self.blocks):
            dh = block.backward(dh)
        self.stem.backward(dh)


def init_params(config: ConvNetConfig) -> Network:
    """Build and HeNormal-initialize a network; deterministic under seed."""
    return Network(config)


def forward(net: Network, batch: np.ndarray, train: bool = False) -> np.ndarray:
    """Logits for a batch, shape (N, num_classes)."""
    return net.forward(batch, train=train)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(net: Network, batch, labels, l2: float, update_stats: bool = True):
    """Mean softmax cross-entropy + L2 on weights; grads via backprop.

    Returns (loss, grads) with grads aligned with net.param_arrays().
    Raises NumericalError if the loss is non-finite (diverged activations).
    """
    labels = np.asarray(labels)
    logits = net.forward(batch, train=True, update_stats=update_stats)
    n = len(logits)
    z = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=1))
    data_loss = float((logsumexp - z[np.arange(n), labels]).mean())
    l2_loss = 0.0
    if l2:
        l2_loss = 0.5 * l2 * sum(float((w.astype(np.float64) ** 2).sum()) for w in net.decayed_arrays())
    loss = data_loss + l2_loss
    if not np.isfinite(loss):
        raise NumericalError(f"non-finite loss {loss} (data {data_loss}, l2 {l2_loss})")

    probs = np.exp(z)
    probs /= probs.sum(axis=1, keepdims=True)
    probs[np.arange(n), labels] -= 1.0
    net.backward((probs / n).astype(net.dtype))

    grads = net.grad_arrays()
    if l2:
        decayed = set(id(w) for w in net.decayed_arrays())
        for p, g in zip(net.param_arrays(), grads):
            if id(p) in decayed:
                g += l2 * p
    return loss, grads
