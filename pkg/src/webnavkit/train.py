"""Imitation-learning training loop and gradient checking utilities."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import autodiff as ad
from .errors import NonFiniteGradient
from .model import (
    ModelConfig,
    SiteAssets,
    Vocab,
    cast_params,
    episode_loss,
    save_checkpoint,
    zero_grads,
)
from .sitegraph import NavGraph
from .simulator import EpisodeRecord

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3   # desk-scale default; full-scale runs use 1e-5
    iterations: int = 1000
    batch_size: int = 4
    eta: float = 1.0
    lam: float = 1.0
    seed: int = 0
    weight_decay: float = 0.01
    lr_decay_factor: float = 0.5
    lr_decay_fraction: float = 0.25  # decay step every completed fraction of iterations
    checkpoint_every: int = 0
    optimizer: str = "adamw"  # "adamw" | "sgd"

    def __post_init__(self):
        if self.learning_rate <= 0 or self.iterations <= 0 or self.batch_size <= 0:
            raise ValueError("learning_rate, iterations and batch_size must be positive")
        if self.eta < 0 or self.lam < 0:
            raise ValueError("eta and lam must be nonnegative")

    def lr_at(self, iteration: int) -> float:
        decay_every = max(1, int(self.iterations * self.lr_decay_fraction))
        return self.learning_rate * self.lr_decay_factor ** (iteration // decay_every)


class AdamW:
    """First-order adaptive-moment optimizer with decoupled weight decay.

    Decay is skipped for 1-D tensors (biases, gains).
    """

    def __init__(self, weight_decay: float = 0.01, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict, grads: dict[str, np.ndarray], lr: float) -> None:
        self.t += 1
        for name in sorted(params):
            grad = grads.get(name)
            if grad is None:
                continue
            tensor = params[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(tensor.data)
                self.v[name] = np.zeros_like(tensor.data)
            m = self.m[name]
            v = self.v[name]
            m += (1.0 - self.beta1) * (grad - m)
            v += (1.0 - self.beta2) * (grad * grad - v)
            m_hat = m / (1.0 - self.beta1 ** self.t)
            v_hat = v / (1.0 - self.beta2 ** self.t)
            update = m_hat / (np.sqrt(v_hat) + self.eps)
            if self.weight_decay and tensor.data.ndim > 1:
                update = update + self.weight_decay * tensor.data
            tensor.data = (tensor.data - lr * update).astype(tensor.data.dtype)


class SGD:
    """Plain gradient descent; useful for gradient-check purity."""

    def __init__(self, weight_decay: float = 0.0):
        self.weight_decay = weight_decay

    def step(self, params: dict, grads: dict[str, np.ndarray], lr: float) -> None:
        for name in sorted(params):
            grad = grads.get(name)
            if grad is None:
                continue
            tensor = params[name]
            update = grad
            if self.weight_decay and tensor.data.ndim > 1:
                update = update + self.weight_decay * tensor.data
            tensor.data = (tensor.data - lr * update).astype(tensor.data.dtype)


def make_optimizer(config: TrainConfig):
    if config.optimizer == "adamw":
        return AdamW(weight_decay=config.weight_decay)
    if config.optimizer == "sgd":
        return SGD(weight_decay=config.weight_decay)
    raise ValueError(f"unknown optimizer {config.optimizer!r}")


@dataclass
class StepResult:
    iteration: int
    loss: float
    l_nav: float
    l_ans: float
    lr: float

    def to_json(self) -> dict:
        return {
            "iter": self.iteration,
            "loss": self.loss,
            "l_nav": self.l_nav,
            "l_ans": self.l_ans,
            "lr": self.lr,
        }


def batch_loss(
    batch: Sequence[EpisodeRecord],
    params: dict,
    graph: NavGraph,
    vocab: Vocab,
    model_config: ModelConfig,
    assets: SiteAssets,
    eta: float,
    lam: float,
    rng: Optional[np.random.Generator],
) -> tuple[ad.Tensor, float, float]:
    """Mean combined loss over the batch (one tape, one backward)."""
    total = None
    nav_value = ans_value = 0.0
    for record in batch:
        forward = episode_loss(
            record, graph, params, vocab, model_config, assets,
            eta=eta, lam=lam, rng=rng,
        )
        nav_value += float(forward.l_nav.data)
        ans_value += float(forward.l_ans.data)
        total = forward.loss if total is None else ad.add(total, forward.loss)
    n = len(batch)
    return ad.mul(total, 1.0 / n), nav_value / n, ans_value / n


def train_step(
    batch: Sequence[EpisodeRecord],
    params: dict,
    graph: NavGraph,
    config: TrainConfig,
    rng: np.random.Generator,
    *,
    vocab: Vocab,
    model_config: ModelConfig,
    assets: SiteAssets,
    optimizer,
    lr: Optional[float] = None,
) -> tuple[float, float, float]:
    """One teacher-forced batch update; returns (loss, l_nav, l_ans)."""
    if not batch:
        raise ValueError("batch must be nonempty")
    zero_grads(params)
    loss, nav_value, ans_value = batch_loss(
        batch, params, graph, vocab, model_config, assets, config.eta, config.lam, rng
    )
    ad.backward(loss)
    grads = {name: tensor.grad for name, tensor in params.items() if tensor.grad is not None}
    optimizer.step(params, grads, config.learning_rate if lr is None else lr)
    return float(loss.data), nav_value, ans_value


def train(
    records: Sequence[EpisodeRecord],
    graph: NavGraph,
    params: dict,
    *,
    vocab: Vocab,
    model_config: ModelConfig,
    config: TrainConfig,
    assets: Optional[SiteAssets] = None,
    log_path: Optional[Path | str] = None,
    checkpoint_path: Optional[Path | str] = None,
    callback: Optional[Callable[[StepResult], bool]] = None,
) -> list[StepResult]:
    """Run the training loop; returns the per-step history.

    ``callback`` runs after each step; returning True stops training early
    (used by overfitting runs that reach their accuracy target).
    """
    if not records:
        raise ValueError("no training records")
    assets = assets or SiteAssets(None, model_config)
    rng = np.random.default_rng(config.seed)
    optimizer = make_optimizer(config)
    order: list[int] = []
    history: list[StepResult] = []
    log_fh = Path(log_path).open("w") if log_path else None
    try:
        for iteration in range(config.iterations):
            batch = []
            for _ in range(config.batch_size):
                if not order:
                    order = list(rng.permutation(len(records)))
                batch.append(records[order.pop()])
            lr = config.lr_at(iteration)
            loss, nav_value, ans_value = train_step(
                batch, params, graph, config, rng,
                vocab=vocab, model_config=model_config, assets=assets,
                optimizer=optimizer, lr=lr,
            )
            result = StepResult(iteration=iteration, loss=loss, l_nav=nav_value,
                                l_ans=ans_value, lr=lr)
            history.append(result)
            if log_fh:
                log_fh.write(json.dumps(result.to_json()) + "\n")
            if checkpoint_path and config.checkpoint_every and \
                    (iteration + 1) % config.checkpoint_every == 0:
                save_checkpoint(checkpoint_path, params, model_config, vocab)
            if callback is not None and callback(result):
                break
    finally:
        if log_fh:
            log_fh.close()
    if checkpoint_path:
        save_checkpoint(checkpoint_path, params, model_config, vocab)
    return history


# --- gradient checking ------------------------------------------------------

def episode_gradients(
    record: EpisodeRecord,
    graph: NavGraph,
    params: dict,
    *,
    vocab: Vocab,
    model_config: ModelConfig,
    assets: SiteAssets,
    eta: float,
    lam: float,
    sampled_actions: Sequence[int],
) -> dict[str, np.ndarray]:
    """Analytic gradient of the combined loss for fixed sampled actions."""
    zero_grads(params)
    forward = episode_loss(
        record, graph, params, vocab, model_config, assets,
        eta=eta, lam=lam, sampled_actions=sampled_actions,
    )
    ad.backward(forward.loss)
    return {
        name: (tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data))
        for name, tensor in params.items()
    }


def grad_check(
    params: dict,
    record: EpisodeRecord,
    graph: NavGraph,
    eps: float = 1e-5,
    *,
    vocab: Vocab,
    model_config: ModelConfig,
    assets: Optional[SiteAssets] = None,
    eta: float = 1.0,
    lam: float = 1.0,
    n_coords: int = 500,
    seed: int = 0,
    denom_floor: float = 1e-6,
    grad_fn: Optional[Callable[[dict, list[int]], dict[str, np.ndarray]]] = None,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Runs in the widest available float (long double).  The per-step sampled
    actions are drawn once and held fixed so the loss stays a deterministic
    function of the parameters.  Coordinates are sampled per parameter
    tensor (so every tensor is covered), at least ``n_coords`` in total
    when the model is big enough.  ``denom_floor`` keeps coordinates whose
    gradient sits below the finite-difference noise floor from dominating
    the maximum.  ``grad_fn`` overrides the analytic gradient (negative
    controls).
    """
    assets = assets or SiteAssets(None, model_config)
    params64 = cast_params(params, np.longdouble)
    draw = episode_loss(
        record, graph, params64, vocab, model_config, assets,
        eta=eta, lam=lam, rng=np.random.default_rng(seed),
    )
    sampled = draw.sampled_actions

    def loss_value(p: dict):
        forward = episode_loss(
            record, graph, p, vocab, model_config, assets,
            eta=eta, lam=lam, sampled_actions=sampled,
        )
        return forward.loss.data.reshape(())  # long double scalar

    def analytic_grads(p: dict, fixed_actions) -> dict[str, np.ndarray]:
        return episode_gradients(
            record, graph, p, vocab=vocab, model_config=model_config,
            assets=assets, eta=eta, lam=lam, sampled_actions=fixed_actions,
        )

    analytic = (grad_fn or analytic_grads)(params64, sampled)

    rng = np.random.default_rng(seed)
    names = sorted(params64)
    per_tensor = max(1, math.ceil(n_coords / len(names)))
    max_err = 0.0
    for name in names:
        tensor = params64[name]
        flat = tensor.data.reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        size = flat.size
        indices = np.arange(size) if size <= per_tensor else rng.choice(size, per_tensor, replace=False)
        for index in indices:
            keep = flat[index]
            flat[index] = keep + eps
            up = loss_value(params64)
            flat[index] = keep - eps
            down = loss_value(params64)
            flat[index] = keep
            numeric = float((up - down) / np.longdouble(2.0 * eps))
            analytic_value = float(grad_flat[index])
            if not (np.isfinite(numeric) and np.isfinite(analytic_value)):
                raise NonFiniteGradient(f"{name}[{index}]")
            denom = max(abs(analytic_value), abs(numeric), denom_floor)
            max_err = max(max_err, abs(analytic_value - numeric) / denom)
    return max_err
