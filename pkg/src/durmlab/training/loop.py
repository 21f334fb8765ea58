"""Mini-batch SGD training with per-epoch gradient instrumentation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..data import Dataset
from ..head import HeadConfig, count_dummy_predictions, gradient_fraction, pad_labels
from ..instrumentation import (
    FlatnessReport,
    GradientTrace,
    estimate_flatness,
    estimate_top_hessian_eigenvalue,
    model_distance,
    record_epoch_gradients,
)
from ..model import MlpParams, backward, forward, init_params
from ..numerics import cross_entropy, one_hot, softmax
from .optim import sgd_step
from .regularizers import EarlyStopper, SwaState, ema_update, mixup_batch, swa_update


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, step: int, what: str = "loss"):
        super().__init__(f"non-finite {what} at epoch {epoch}, step {step}")
        self.epoch = epoch
        self.step = step


@dataclass
class TrainConfig:
    head: HeadConfig
    learning_rate: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 5e-4
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    hidden: tuple[int, ...] = (32,)
    early_stop_patience: int | None = None
    ema_decay: float | None = None
    swa_start_epoch: int | None = None
    mixup_alpha: float | None = None

    def __post_init__(self) -> None:
        self.hidden = tuple(int(h) for h in self.hidden)
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if any(h < 1 for h in self.hidden):
            raise ValueError("hidden widths must be positive")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1")
        if self.ema_decay is not None and not 0.0 <= self.ema_decay <= 1.0:
            raise ValueError("ema_decay must be in [0, 1]")
        if self.swa_start_epoch is not None and self.swa_start_epoch < 1:
            raise ValueError("swa_start_epoch must be >= 1")
        if self.mixup_alpha is not None and not self.mixup_alpha > 0:
            raise ValueError("mixup_alpha must be positive")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TrainConfig:
        d = dict(d)
        head = d.pop("head")
        if isinstance(head, dict):
            head = HeadConfig(**head)
        return cls(head=head, **d)


@dataclass
class TrainResult:
    config: TrainConfig
    init_params: MlpParams
    final_params: MlpParams
    last_params: MlpParams
    best_params: MlpParams
    best_epoch: int
    train_loss: list[float]
    train_acc: list[float]
    val_loss: list[float]
    val_acc: list[float]
    trace: GradientTrace
    model_distance: list[float]
    cumulative_grad_norm: list[float]
    snapshots: list[MlpParams] = field(repr=False)
    stopped_early: bool = False

    @property
    def mode(self) -> str:
        return self.config.head.mode

    @property
    def epochs_completed(self) -> int:
        return len(self.train_loss)

    def series_as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "epochs_completed": self.epochs_completed,
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
            "train_loss": self.train_loss,
            "train_acc": self.train_acc,
            "val_loss": self.val_loss,
            "val_acc": self.val_acc,
            "model_distance": self.model_distance,
            "cumulative_grad_norm": self.cumulative_grad_norm,
        }


def evaluate(params: MlpParams, data: Dataset, head: HeadConfig) -> dict:
    """Mean loss, accuracy, predictions and dummy-prediction count on ``data``."""
    logits, _ = forward(params, data.features)
    probs = softmax(logits)
    loss = float(np.mean(cross_entropy(probs, pad_labels(data.labels, head))))
    pred = np.argmax(logits, axis=1)
    return {
        "loss": loss,
        "accuracy": float(np.mean(pred == data.labels)),
        "predictions": pred,
        "dummy_predictions": count_dummy_predictions(pred, head),
    }


def mean_loss(params: MlpParams, X: np.ndarray, targets: np.ndarray) -> float:
    logits, _ = forward(params, X)
    return float(np.mean(cross_entropy(softmax(logits), targets)))


def mean_loss_grad(params: MlpParams, X: np.ndarray, targets: np.ndarray) -> MlpParams:
    logits, tr = forward(params, X)
    return backward(params, tr, (softmax(logits) - targets) / X.shape[0])


def _streams(seed: int) -> dict[str, np.random.Generator]:
    init, shuffle, mix = np.random.SeedSequence(int(seed)).spawn(3)
    return {
        "init": np.random.default_rng(init),
        "shuffle": np.random.default_rng(shuffle),
        "mixup": np.random.default_rng(mix),
    }


def train(data: Dataset, config: TrainConfig, val: Dataset | None = None) -> TrainResult:
    """Train with the (C + C_d)-wide head; labels are zero-padded over the dummy block.

    With ``C_d = 0`` this is plain ERM. ``val`` drives best-model selection
    and early stopping; it defaults to the training set.
    """
    _check_data(data, config)
    return _run(data, config, val, pad_labels(data.labels, config.head))


def train_erm(data: Dataset, config: TrainConfig, val: Dataset | None = None) -> TrainResult:
    """Reference ERM path: ordinary one-hot targets, no padding code involved."""
    if config.head.num_dummy != 0:
        raise ValueError("train_erm requires num_dummy == 0")
    _check_data(data, config)
    return _run(data, config, val, one_hot(data.labels, data.num_classes))


def _check_data(data: Dataset, config: TrainConfig) -> None:
    if data.num_classes != config.head.num_classes:
        raise ValueError(f"dataset has {data.num_classes} classes, head expects {config.head.num_classes}")
    if config.batch_size > len(data):
        raise ValueError(f"batch_size {config.batch_size} exceeds dataset size {len(data)}")


def _run(data: Dataset, config: TrainConfig, val: Dataset | None, targets: np.ndarray) -> TrainResult:
    # overflow is detected explicitly below and reported as TrainingDiverged
    with np.errstate(over="ignore", invalid="ignore"):
        return _run_epochs(data, config, val, targets)


def _run_epochs(data: Dataset, config: TrainConfig, val: Dataset | None, targets: np.ndarray) -> TrainResult:
    head = config.head
    val = data if val is None else val
    rng = _streams(config.seed)
    params = init_params([data.dim, *config.hidden, head.width], rng["init"])
    init = params.copy()
    velocity = None
    ema = params.copy() if config.ema_decay is not None else None
    swa = SwaState(config.swa_start_epoch) if config.swa_start_epoch is not None else None
    stopper = EarlyStopper(config.early_stop_patience) if config.early_stop_patience else None

    X, labels = data.features, data.labels
    n = len(data)
    n_layers = len(params.weights)
    trace = GradientTrace(head.num_classes, head.num_dummy)
    train_loss, train_acc, val_loss, val_acc = [], [], [], []
    snapshots = [init]
    distances, cum_norm = [0.0], [0.0]
    best_loss, best_params, best_epoch = np.inf, params.copy(), 0
    stopped_early = False
    step = 0

    for epoch in range(1, config.epochs + 1):
        order = rng["shuffle"].permutation(n)
        sample_grads = np.empty((n, head.width))
        sample_targets = np.empty((n, head.width))
        frac_sum = np.zeros(head.num_dummy)
        underflows = 0
        layer_sum = [np.zeros_like(W) for W in params.weights]
        layer_sq = [np.zeros_like(W) for W in params.weights]
        n_steps = 0
        loss_sum = 0.0
        correct = 0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            xb, yb = X[idx], targets[idx]
            if config.mixup_alpha is not None:
                xb, yb, _ = mixup_batch(xb, yb, config.mixup_alpha, rng["mixup"])
            logits, tr = forward(params, xb)
            if not np.all(np.isfinite(logits)):
                raise TrainingDiverged(epoch, step, "logits")
            probs = softmax(logits)
            losses = cross_entropy(probs, yb)
            if not np.all(np.isfinite(losses)):
                raise TrainingDiverged(epoch, step)
            dlogits = probs - yb
            grads = backward(params, tr, dlogits / idx.size)

            sample_grads[start:start + idx.size] = dlogits
            sample_targets[start:start + idx.size] = yb
            if head.num_dummy:
                frac, under = gradient_fraction(probs[:, head.num_classes:])
                frac_sum += frac.sum(axis=0)
                underflows += int(under)
            for i, gW in enumerate(grads.weights):
                layer_sum[i] += gW
                layer_sq[i] += gW * gW
            norm = float(np.sqrt(sum(float(np.sum(a * a)) for a in grads.arrays())))
            if not np.isfinite(norm):
                raise TrainingDiverged(epoch, step, "gradient")
            trace.step_grad_norm.append(norm)
            loss_sum += float(losses.sum())
            correct += int(np.sum(np.argmax(logits, axis=1) == np.argmax(yb, axis=1)))
            n_steps += 1

            params, velocity = sgd_step(
                params, grads, velocity, config.learning_rate, config.momentum, config.weight_decay
            )
            if ema is not None:
                ema = ema_update(ema, params, config.ema_decay)
            step += 1

        if not params.all_finite():
            raise TrainingDiverged(epoch, step, "parameter")
        layer_var = [
            float(np.mean((sq - s * s / n_steps) / (n_steps - 1))) if n_steps > 1 else 0.0
            for s, sq in zip(layer_sum, layer_sq)
        ]
        record_epoch_gradients(
            trace,
            epoch,
            sample_grads,
            sample_targets,
            dummy_fraction=frac_sum / n if head.num_dummy else None,
            fraction_underflows=underflows,
            layer_grad_var=layer_var,
        )
        assert len(layer_var) == n_layers

        snapshots.append(params.copy())
        distances.append(model_distance(params, init))
        cum_norm.append(cum_norm[-1] + float(np.sum(trace.step_grad_norm[-n_steps:])))
        if swa is not None:
            swa = swa_update(swa, params, epoch)

        eval_params = ema if ema is not None else params
        try:
            ev = evaluate(eval_params, val, head)
        except ValueError:
            raise TrainingDiverged(epoch, step, "validation logits") from None
        train_loss.append(loss_sum / n)
        train_acc.append(correct / n)
        val_loss.append(ev["loss"])
        val_acc.append(ev["accuracy"])
        if not np.isfinite(ev["loss"]):
            raise TrainingDiverged(epoch, step, "validation loss")
        if ev["loss"] < best_loss:
            best_loss, best_params, best_epoch = ev["loss"], eval_params.copy(), epoch
        if stopper is not None and stopper.update(ev["loss"]):
            stopped_early = True
            break

    if swa is not None and swa.mean is not None:
        final = swa.mean
    elif ema is not None:
        final = ema
    else:
        final = params
    return TrainResult(
        config=config,
        init_params=init,
        final_params=final,
        last_params=params,
        best_params=best_params,
        best_epoch=best_epoch,
        train_loss=train_loss,
        train_acc=train_acc,
        val_loss=val_loss,
        val_acc=val_acc,
        trace=trace,
        model_distance=distances,
        cumulative_grad_norm=cum_norm,
        snapshots=snapshots,
        stopped_early=stopped_early,
    )


def flatness_report(
    result: TrainResult,
    data: Dataset,
    delta: float = 0.05,
    trials: int = 20,
    seed: int = 0,
    iterations: int = 50,
    fd_step: float = 1e-4,
    params: MlpParams | None = None,
) -> FlatnessReport:
    """Sharpness and flatness of the full-batch training loss at the final parameters."""
    params = result.final_params if params is None else params
    rho, converged, eps, tau = probe_params(params, data, result.config.head, delta, trials, seed, iterations, fd_step)
    norms = result.trace.step_grad_norm
    return FlatnessReport(
        model_distance=list(result.model_distance),
        cumulative_grad_norm=list(result.cumulative_grad_norm),
        rho=rho,
        rho_converged=converged,
        epsilon_hat=eps,
        tau=tau,
        delta=delta,
        min_step_grad_norm=float(min(norms)) if norms else float("nan"),
    )


def probe_params(params, data, head, delta, trials, seed=0, iterations=50, fd_step=1e-4):
    """Return ``(rho, rho_converged, epsilon_hat, tau)`` for ``params`` on ``data``."""
    targets = pad_labels(data.labels, head)
    X = data.features

    def loss_fn(w):
        return mean_loss(params.unflatten(w), X, targets)

    def grad_fn(w):
        return mean_loss_grad(params.unflatten(w), X, targets).flatten()

    w = params.flatten()
    eig = estimate_top_hessian_eigenvalue(grad_fn, w, iterations, fd_step, seed)
    eps, tau = estimate_flatness(loss_fn, w, delta, trials, seed)
    return eig.rho, eig.converged, eps, tau
