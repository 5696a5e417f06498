"""Nesterov-momentum SGD training loop with a piecewise learning rate.

The update, with momentum mu and rate lr (the stored parameters are the
lookahead iterates and the velocity carries the learning rate):

    v <- mu * v - lr * g
    p <- p + mu * v - lr * g

With mu = 0 this is plain SGD. The schedule starts at `lr`, optionally
boosts to `boost_lr` once more than `boost_after` updates have been taken,
and divides by 10 at each epoch listed in `decay_epochs`.

Shuffling draws one permutation per epoch from a single Philox stream
keyed by the config seed; augmentation seeds come from a second stream.
Two runs with identical (net, data, config) produce identical histories.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data import LabeledDataset, augment_batch
from ..errors import NumericalError, TrainingDiverged
from ..rng import STREAM_AUGMENT, STREAM_SHUFFLE, stream_rng
from .checkpoint import save_checkpoint
from .net import Network, loss_and_grad

EVAL_BATCH = 500


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 128
    lr: float = 0.01
    boost_lr: float | None = None
    boost_after: int = 0
    momentum: float = 0.9
    l2: float = 0.0005
    decay_epochs: tuple = ()
    seed: int = 0
    augment: bool = False

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if list(self.decay_epochs) != sorted(self.decay_epochs):
            raise ValueError(f"decay epochs must be sorted, got {self.decay_epochs}")
        if self.decay_epochs and self.decay_epochs[-1] >= self.epochs:
            raise ValueError("decay epochs must fall within the training run")

    def to_dict(self) -> dict:
        d = self.__dict__.copy()
        d["decay_epochs"] = list(self.decay_epochs)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        d["decay_epochs"] = tuple(d.get("decay_epochs", ()))
        return cls(**d)


def lr_at(config: TrainConfig, epoch: int, update_count: int) -> float:
    """Learning rate for the update taken at (epoch, update_count)."""
    base = config.lr
    if config.boost_lr is not None and update_count > config.boost_after:
        base = config.boost_lr
    decays = sum(1 for d in config.decay_epochs if epoch >= d)
    return base / (10.0 ** decays)


def nesterov_step(params, velocity, grads, lr, momentum):
    """In-place Nesterov update of aligned parameter/velocity/grad lists."""
    for p, v, g in zip(params, velocity, grads):
        v *= momentum
        v -= lr * g
        p += momentum * v
        p -= lr * g
    return params, velocity


def evaluate(net: Network, dataset: LabeledDataset) -> float:
    """Error rate in [0, 1]; argmax prediction, ties -> lowest class index."""
    wrong = 0
    for start in range(0, len(dataset), EVAL_BATCH):
        xb = dataset.images[start : start + EVAL_BATCH]
        logits = net.forward(xb, train=False)
        pred = np.argmax(logits, axis=1)
        wrong += int((pred != dataset.labels[start : start + EVAL_BATCH]).sum())
    return wrong / len(dataset) if len(dataset) else 0.0


def train(
    net: Network,
    dataset: LabeledDataset,
    eval_sets: dict[str, LabeledDataset],
    config: TrainConfig,
    dump_dir=None,
    log=None,
    checkpoint_path=None,
    resume: dict | None = None,
):
    """Run the full schedule; returns (net, history).

    history has one record per epoch: mean minibatch loss, the rate used
    by the epoch's last update, and the error on every eval set. If a loss
    goes non-finite, training aborts with TrainingDiverged after dumping a
    checkpoint to dump_dir (when given).

    When checkpoint_path is set, a resumable checkpoint (velocity and RNG
    states included) is rewritten after every epoch; pass the info dict
    from load_checkpoint as `resume` (with the matching net) to continue.
    """
    params = net.param_arrays()
    velocity = [np.zeros_like(p) for p in params]
    shuffle_rng = stream_rng(config.seed, STREAM_SHUFFLE)
    augseed_rng = stream_rng(config.seed, STREAM_AUGMENT)
    n = len(dataset)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")

    history = []
    update_count = 0
    start_epoch = 0
    if resume is not None:
        start_epoch = resume["epoch"]
        update_count = resume["update_count"]
        if resume.get("velocity"):
            velocity = [v.copy() for v in resume["velocity"]]
        if resume.get("rng_states"):
            shuffle_rng.bit_generator.state = resume["rng_states"]["shuffle"]
            augseed_rng.bit_generator.state = resume["rng_states"]["augment"]
    for epoch in range(start_epoch, config.epochs):
        perm = shuffle_rng.permutation(n)
        losses = []
        lr = lr_at(config, epoch, update_count)
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            xb = dataset.images[idx]
            yb = dataset.labels[idx]
            if config.augment:
                xb = augment_batch(xb, int(augseed_rng.integers(2**63)))
            lr = lr_at(config, epoch, update_count)
            try:
                loss, grads = loss_and_grad(net, xb, yb, config.l2)
            except NumericalError as e:
                dump = None
                if dump_dir is not None:
                    dump = str(Path(dump_dir) / "diverged.ckpt")
                    save_checkpoint(net, dump, epoch=epoch, update_count=update_count)
                raise TrainingDiverged(
                    f"epoch {epoch} update {update_count}: {e}", dump_path=dump
                ) from e
            nesterov_step(params, velocity, grads, lr, config.momentum)
            update_count += 1
            losses.append(loss)
        record = {
            "epoch": epoch,
            "loss": float(np.mean(losses)),
            "lr": lr,
            "errors": {name: evaluate(net, ds) for name, ds in eval_sets.items()},
        }
        history.append(record)
        if log is not None:
            errs = " ".join(f"{k}={v:.4f}" for k, v in record["errors"].items())
            log(f"epoch {epoch:3d} loss {record['loss']:.4f} lr {lr:g} {errs}")
        if checkpoint_path is not None:
            save_checkpoint(
                net,
                checkpoint_path,
                epoch=epoch + 1,
                update_count=update_count,
                velocity=velocity,
                rng_states={
                    "shuffle": shuffle_rng.bit_generator.state,
                    "augment": augseed_rng.bit_generator.state,
                },
            )
    return net, history


def save_history(history: list, path) -> None:
    Path(path).write_text(json.dumps(history, indent=2, sort_keys=True) + "\n")


def load_history(path) -> list:
    return json.loads(Path(path).read_text())
