"""Planted-bias generator, logistic unit, analytic-gradient trainer, and a
Bayesian-employer comparator.

The generator plants a conditional-probability asymmetry: the label y is
drawn Bernoulli(p_pos_given_male) when the group attribute z = +1 and
Bernoulli(p_pos_given_female) when z = -1. Features x are drawn independent
of both y and z on purpose: with uninformative features the learned group
weight gamma alone has to absorb the asymmetry, and its optimum has the
closed form

    gamma* = (logit(p_pos_given_male) - logit(p_pos_given_female)) / 2
    b*     = (logit(p_pos_given_male) + logit(p_pos_given_female)) / 2

which the tests check against. An `informative_features` mode (x shifted by
y) exists for exploration but has no closed-form oracle.

The model is y_hat = sigmoid(W.x + gamma*z + b) trained on cross-entropy by
full-batch gradient descent from zero initialization (deterministic given
the data and hyperparameters). Gradients are analytic:

    dL/db     = y_hat - y
    dL/dgamma = (y_hat - y) * z
    dL/dW     = (y_hat - y) * x

The employer comparator estimates group productivity from history with
Laplace (add-alpha) smoothing and hires when the estimate clears a
threshold; features are ignored because the generator makes them
uninformative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DivergenceError

_CLAMP = 1e-12  # keeps log() finite without disturbing test tolerances


@dataclass(frozen=True)
class SimConfig:
    n_features: int
    p_pos_given_male: float
    p_pos_given_female: float
    male_fraction: float = 0.5
    n_samples: int = 1000
    feature_distribution: str = "standard-normal"
    seed: int = 0
    informative_features: bool = False

    def __post_init__(self):
        for name in ("p_pos_given_male", "p_pos_given_female", "male_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must be strictly inside (0, 1), got {v}")
        if self.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        if self.n_features < 1:
            raise ConfigError("n_features must be >= 1")
        if self.feature_distribution != "standard-normal":
            raise ConfigError(
                f"unsupported feature distribution {self.feature_distribution!r}")


@dataclass(frozen=True)
class Sample:
    x: np.ndarray
    z: int    # +1 male, -1 female
    y: int    # 1 competent, 0 not


@dataclass(frozen=True)
class LogisticParams:
    W: np.ndarray
    gamma: float
    b: float


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1.0
    epochs: int = 200
    batch: int | str = "full"
    seed: int = 0
    init: str = "zeros"

    def __post_init__(self):
        if self.init != "zeros":
            raise ConfigError(f"unsupported init {self.init!r}")
        if self.batch != "full" and (not isinstance(self.batch, int) or self.batch < 1):
            raise ConfigError("batch must be 'full' or a positive size")


@dataclass(frozen=True)
class TrainResult:
    params: LogisticParams
    loss_trace: tuple[float, ...] = field(repr=False)
    epochs: int = 0

    @property
    def final_loss(self) -> float:
        return self.loss_trace[-1]


def generate(config: SimConfig) -> list[Sample]:
    """Draw samples with the planted conditional bias; x independent of (y, z)."""
    rng = np.random.default_rng(config.seed)
    n = config.n_samples
    z = np.where(rng.random(n) < config.male_fraction, 1, -1)
    p = np.where(z == 1, config.p_pos_given_male, config.p_pos_given_female)
    y = (rng.random(n) < p).astype(np.int64)
    x = rng.standard_normal((n, config.n_features))
    if config.informative_features:
        x = x + y[:, None]  # no oracle for this mode; excluded from acceptance
    return [Sample(x=xi, z=zi, y=yi)
            for xi, zi, yi in zip(x, z.tolist(), y.tolist())]


def sigmoid(t):
    """Numerically stable logistic function, elementwise."""
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return float(out) if out.ndim == 0 else out


def logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def predict(params: LogisticParams, x: np.ndarray, z) -> float | np.ndarray:
    return sigmoid(x @ params.W + params.gamma * np.asarray(z) + params.b)


def loss(params: LogisticParams, sample: Sample) -> float:
    """Cross-entropy of one sample; prediction clamped away from {0, 1}."""
    yh = float(np.clip(predict(params, sample.x, sample.z), _CLAMP, 1.0 - _CLAMP))
    return -(sample.y * math.log(yh) + (1 - sample.y) * math.log(1.0 - yh))


def output_grad_gamma(params: LogisticParams, sample: Sample) -> float:
    """d y_hat / d gamma = y_hat (1 - y_hat) z (the chain-rule middle step)."""
    yh = float(predict(params, sample.x, sample.z))
    return yh * (1.0 - yh) * sample.z


def grad_gamma(params: LogisticParams, sample: Sample) -> float:
    """dL/dgamma = (y_hat - y) z, exactly."""
    yh = float(predict(params, sample.x, sample.z))
    return (yh - sample.y) * sample.z


def grad_b(params: LogisticParams, sample: Sample) -> float:
    yh = float(predict(params, sample.x, sample.z))
    return yh - sample.y


def grad_W(params: LogisticParams, sample: Sample) -> np.ndarray:
    yh = float(predict(params, sample.x, sample.z))
    return (yh - sample.y) * sample.x


def _stack(data: list[Sample]):
    x = np.stack([s.x for s in data])
    z = np.array([s.z for s in data], dtype=np.float64)
    y = np.array([s.y for s in data], dtype=np.float64)
    return x, z, y


def _mean_loss(x, z, y, W, gamma, b) -> float:
    yh = np.clip(sigmoid(x @ W + gamma * z + b), _CLAMP, 1.0 - _CLAMP)
    # y is 0/1 so the two cross-entropy terms collapse into one log
    return float(-np.mean(np.log(np.where(y == 1.0, yh, 1.0 - yh))))


def train(data: list[Sample], hyper: TrainConfig = TrainConfig()) -> TrainResult:
    """Gradient descent on mean cross-entropy; deterministic given inputs.

    Full-batch by default (zero init, fixed order). Mini-batch mode shuffles
    with the hyper seed each epoch. Raises DivergenceError if the mean loss
    stops being finite.
    """
    if not data:
        raise ConfigError("training data is empty")
    x, z, y = _stack(data)
    n, d = x.shape
    W = np.zeros(d)
    gamma = 0.0
    b = 0.0
    rng = np.random.default_rng(hyper.seed)

    trace = []
    for epoch in range(hyper.epochs):
        if hyper.batch == "full":
            batches = [slice(0, n)]
            xe, ze, ye = x, z, y
        else:
            order = rng.permutation(n)
            xe, ze, ye = x[order], z[order], y[order]
            batches = [slice(i, min(i + hyper.batch, n))
                       for i in range(0, n, hyper.batch)]
        for sl in batches:
            xb, zb, yb = xe[sl], ze[sl], ye[sl]
            resid = sigmoid(xb @ W + gamma * zb + b) - yb
            m = len(yb)
            W = W - hyper.lr * (xb.T @ resid) / m
            gamma = gamma - hyper.lr * float(resid @ zb) / m
            b = b - hyper.lr * float(np.sum(resid)) / m
        mean_loss = _mean_loss(x, z, y, W, gamma, b)
        if not math.isfinite(mean_loss):
            raise DivergenceError(f"mean loss non-finite at epoch {epoch + 1}")
        trace.append(mean_loss)

    return TrainResult(
        params=LogisticParams(W=W, gamma=float(gamma), b=float(b)),
        loss_trace=tuple(trace),
        epochs=hyper.epochs,
    )


def closed_form_optimum(p_pos_given_male: float, p_pos_given_female: float):
    """(gamma*, b*) for uninformative features; see module docstring."""
    lm = logit(p_pos_given_male)
    lf = logit(p_pos_given_female)
    return (lm - lf) / 2.0, (lm + lf) / 2.0


def predict_pair(params: LogisticParams, x: np.ndarray):
    """(y_hat at z=+1, y_hat at z=-1) for the same features."""
    base = float(np.dot(x, params.W)) + params.b
    return (float(sigmoid(base + params.gamma)), float(sigmoid(base - params.gamma)))


@dataclass(frozen=True)
class EmployerDecision:
    hire: bool
    expected_productivity: float


def employer_decide(history: list[Sample], candidate: tuple[np.ndarray, int],
                    threshold: float, smoothing: float = 1.0) -> EmployerDecision:
    """Hire when the smoothed group success rate clears the threshold.

    expected_productivity = (sum(y in group) + alpha) / (n_group + 2*alpha),
    the posterior mean under a Beta(alpha, alpha) prior. The candidate's
    features are ignored: the generator draws them independent of y, so
    group membership is the only informative signal in the history.
    """
    if not history:
        raise ConfigError("employer history is empty")
    _, z = candidate
    ys = [s.y for s in history if s.z == z]
    expected = (sum(ys) + smoothing) / (len(ys) + 2.0 * smoothing)
    return EmployerDecision(hire=expected >= threshold, expected_productivity=expected)


def decision_agreement(params: LogisticParams, history: list[Sample],
                       candidates: list[Sample], threshold: float,
                       smoothing: float = 1.0) -> float:
    """Fraction of candidates on which thresholded model output and the
    employer rule issue the same hire/reject decision."""
    if not candidates:
        raise ConfigError("no candidates to compare on")
    agree = 0
    for s in candidates:
        model_hire = float(predict(params, s.x, s.z)) >= threshold
        employer_hire = employer_decide(history, (s.x, s.z), threshold, smoothing).hire
        agree += model_hire == employer_hire
    return agree / len(candidates)
