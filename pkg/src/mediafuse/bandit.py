"""Per-outlet view weighting learned as a contextual bandit with PPO.

State: the five projected views concatenated.  Action: a weight in [0, 1]
per view.  Reward: the probability a frozen linear classifier assigns to
the true label of the weighted sum of views.  Discount is zero, so every
episode is one step and the critic is a pure baseline.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import VIEWS
from .errors import ClippedActionWarning, InvalidConfig, NoData, NumericError, ShapeError
from .fusion import LinearClassifier, ViewBundle, train_linear_classifier
from .numkit import MLP, Adam, check_finite, make_rng, sigmoid
from .numkit import checkpoint as ckpt

log = logging.getLogger(__name__)

N_VIEWS = len(VIEWS)
UNIFORM_WEIGHTS = np.full(N_VIEWS, 1.0 / N_VIEWS)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PpoConfig:
    gamma: float = 0.0
    clip_eps: float = 0.2
    learning_rate: float = 1e-4
    minibatch: int = 256
    rollout: int = 1024
    epochs_per_update: int = 4
    entropy_coef: float = 0.0
    value_coef: float = 0.5
    updates: int = 200
    hidden: int = 128
    init_log_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.gamma != 0.0:
            raise InvalidConfig("contextual bandit training requires gamma = 0")
        if self.rollout % self.minibatch:
            raise InvalidConfig("rollout must be divisible by minibatch")
        if self.updates < 0:
            raise InvalidConfig("updates must be >= 0")


# ---------------------------------------------------------------------------
# fusion + reward

def fused_embedding(bundle, w) -> np.ndarray:
    """Weighted sum of projected views; ``w`` is clipped into [0, 1]."""
    views = bundle.projected if isinstance(bundle, ViewBundle) else np.asarray(bundle, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if w.shape[-1] != N_VIEWS:
        raise ShapeError(f"weight vector must have {N_VIEWS} entries")
    if np.any(w < 0.0) or np.any(w > 1.0):
        warnings.warn("view weights outside [0, 1] were clipped", ClippedActionWarning, stacklevel=2)
        w = np.clip(w, 0.0, 1.0)
    return np.einsum("...k,...kd->...d", w, views)


class RewardModel:
    """A linear classifier frozen for the lifetime of RL training."""

    def __init__(self, clf: LinearClassifier):
        weight = np.array(clf.weight, dtype=np.float64)
        bias = np.array(clf.bias, dtype=np.float64)
        weight.setflags(write=False)
        bias.setflags(write=False)
        self.clf = LinearClassifier(weight, bias, clf.scale, clf.epochs_run)

    @classmethod
    def pretrain(cls, views, y, scale, seed=0, **kw):
        """Fit the reward classifier on uniform-weight fused embeddings."""
        x = fused_embedding(views, UNIFORM_WEIGHTS)
        return cls(train_linear_classifier(x, y, scale, seed=seed, **kw))

    def proba(self, fused):
        return self.clf.predict_proba(fused)


def step_reward(model: RewardModel, bundle, w, y_true) -> float:
    return float(model.proba(fused_embedding(bundle, w))[y_true])


# ---------------------------------------------------------------------------
# policy

class FusionPolicy:
    """Gaussian policy with a sigmoid mean head and a state-free log std."""

    def __init__(self, actor: MLP, log_std: np.ndarray, critic: MLP):
        self.actor = actor
        self.log_std = np.asarray(log_std, dtype=np.float64)
        self.critic = critic

    @classmethod
    def init(cls, state_dim, hidden=128, init_log_std=0.0, seed=0):
        rng = make_rng(seed, "policy-init")
        actor = MLP.init([state_dim, hidden, hidden, N_VIEWS], "tanh", "identity", rng)
        critic = MLP.init([state_dim, hidden, hidden, 1], "tanh", "identity", rng)
        # start near mu = 0.5 for every view
        actor.layers[-1].weight *= 0.01
        return cls(actor, np.full(N_VIEWS, float(init_log_std)), critic)

    @property
    def state_dim(self):
        return self.actor.layers[0].in_dim

    def params(self):
        return self.actor.params() + [self.log_std] + self.critic.params()

    def named_params(self):
        out = []
        for i, layer in enumerate(self.actor.layers):
            out += [(f"actor.{i}.weight", layer.weight), (f"actor.{i}.bias", layer.bias)]
        out.append(("log_std", self.log_std))
        for i, layer in enumerate(self.critic.layers):
            out += [(f"critic.{i}.weight", layer.weight), (f"critic.{i}.bias", layer.bias)]
        return out

    def mean(self, s):
        return sigmoid(self.actor.forward(np.asarray(s, dtype=np.float64)))

    def value(self, s):
        return self.critic.forward(np.asarray(s, dtype=np.float64))[..., 0]

    def log_prob(self, s, a):
        mu = self.mean(s)
        return gaussian_log_prob(a, mu, self.log_std)

    def entropy(self):
        return float(np.sum(self.log_std + 0.5 + _HALF_LOG_2PI))

    def sample(self, s, rng):
        """Returns (raw action, clipped weights, pre-clip log density)."""
        mu = self.mean(s)
        std = np.exp(self.log_std)
        noise = rng.standard_normal(mu.shape)
        if np.all(std == 0.0):
            raw = mu.copy()
            logp = np.full(mu.shape[:-1], np.inf) if mu.ndim > 1 else np.inf
        else:
            raw = mu + std * noise
            logp = gaussian_log_prob(raw, mu, self.log_std)
        return raw, np.clip(raw, 0.0, 1.0), logp

    def act(self, s):
        return np.clip(self.mean(s), 0.0, 1.0)

    def save(self, path, extra=None):
        header = {"model": "ppo-policy", "state_dim": self.state_dim, "hidden": self.actor.layers[0].out_dim}
        header.update(extra or {})
        ckpt.save(path, header, self.named_params())

    @classmethod
    def load(cls, path):
        header, params = ckpt.load(path)
        if header.get("model") != "ppo-policy":
            raise InvalidConfig(f"{path} is not a policy checkpoint")
        policy = cls.init(header["state_dim"], header["hidden"])
        for name, p in policy.named_params():
            p[...] = params[name]
        return policy, header


def gaussian_log_prob(a, mu, log_std):
    std = np.exp(log_std)
    z = (a - mu) / std
    return np.sum(-0.5 * z * z - log_std - _HALF_LOG_2PI, axis=-1)


def sample_action(policy: FusionPolicy, s, rng):
    _, w, logp = policy.sample(s, rng)
    return w, logp


# ---------------------------------------------------------------------------
# environment and rollouts

class BanditEnv:
    """Outlets with projected views (N, 5, d), labels and a frozen reward model."""

    def __init__(self, views, y, reward_model: RewardModel):
        self.views = np.asarray(views, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)
        if self.views.ndim != 3 or self.views.shape[1] != N_VIEWS:
            raise ShapeError(f"views must be (N, {N_VIEWS}, d), got {self.views.shape}")
        if len(self.views) != len(self.y):
            raise ShapeError("one label per outlet required")
        self.reward_model = reward_model

    def __len__(self):
        return len(self.y)

    def states(self, idx=None):
        v = self.views if idx is None else self.views[idx]
        return v.reshape(v.shape[0], v.shape[1] * v.shape[2])

    def rewards(self, idx, w):
        fused = fused_embedding(self.views[idx], w)
        proba = self.reward_model.proba(fused)
        return proba[np.arange(len(idx)), self.y[idx]]


@dataclass
class Rollout:
    idx: np.ndarray
    states: np.ndarray
    actions: np.ndarray
    weights: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.rewards)


def collect_rollout(env: BanditEnv, policy: FusionPolicy, n, rng) -> Rollout:
    """``n`` independent one-step episodes, outlets drawn with replacement."""
    if len(env) == 0:
        raise NoData("no training outlets")
    idx = rng.integers(0, len(env), size=n)
    s = env.states(idx)
    if n == 0:
        z = np.zeros((0, N_VIEWS))
        return Rollout(idx, s, z, z.copy(), np.zeros(0), np.zeros(0), np.zeros(0))
    raw, w, logp = policy.sample(s, rng)
    r = env.rewards(idx, w)
    v = policy.value(s)
    return Rollout(idx, s, raw, w, logp, r, v)


def discounted_returns(rewards, gamma, dones=None):
    """Backward discounted sum; with one-step episodes this is the rewards."""
    rewards = np.asarray(rewards, dtype=np.float64)
    if dones is None:
        dones = np.ones(len(rewards), dtype=bool)
    out = np.empty_like(rewards)
    running = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        if dones[t]:
            running = 0.0
        running = rewards[t] + gamma * running
        out[t] = running
    return out


# ---------------------------------------------------------------------------
# PPO

def ppo_loss_and_grads(policy: FusionPolicy, s, a, old_logp, adv, returns, cfg: PpoConfig):
    """Clipped surrogate + value loss on one minibatch; grads follow ``policy.params()``."""
    m = len(adv)
    o = policy.actor.forward(s)
    mu = sigmoid(o)
    log_std = policy.log_std
    std2 = np.exp(2.0 * log_std)
    diff = a - mu
    logp = np.sum(-0.5 * diff * diff / std2 - log_std - _HALF_LOG_2PI, axis=-1)
    ratio = np.exp(logp - old_logp)
    clipped = np.clip(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps)
    surr1 = ratio * adv
    surr2 = clipped * adv
    policy_loss = -np.mean(np.minimum(surr1, surr2))
    v = policy.critic.forward(s)[:, 0]
    value_loss = np.mean((v - returns) ** 2)
    entropy = float(np.sum(log_std + 0.5 + _HALF_LOG_2PI))
    loss = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * entropy
    if not np.isfinite(loss):
        raise NumericError("non-finite PPO loss")

    active = surr1 <= surr2
    g_logp = np.where(active, -adv * ratio / m, 0.0)
    g_mu = g_logp[:, None] * diff / std2
    g_o = g_mu * mu * (1.0 - mu)
    actor_grads, _ = policy.actor.backward(g_o)
    g_log_std = np.sum(g_logp[:, None] * (diff * diff / std2 - 1.0), axis=0) - cfg.entropy_coef
    g_v = cfg.value_coef * 2.0 * (v - returns) / m
    critic_grads, _ = policy.critic.backward(g_v[:, None])

    diag = {
        "policy_loss": float(policy_loss),
        "value_loss": float(value_loss),
        "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > cfg.clip_eps)),
    }
    return float(loss), actor_grads + [g_log_std] + critic_grads, diag


def ppo_update(policy: FusionPolicy, batch: Rollout, cfg: PpoConfig, opt: Adam, rng):
    returns = discounted_returns(batch.rewards, cfg.gamma)
    adv = returns - batch.values
    n = len(batch)
    clip_fracs, value_losses = [], []
    for _ in range(cfg.epochs_per_update):
        perm = rng.permutation(n)
        for start in range(0, n, cfg.minibatch):
            mb = perm[start:start + cfg.minibatch]
            _, grads, diag = ppo_loss_and_grads(
                policy, batch.states[mb], batch.actions[mb], batch.log_probs[mb], adv[mb], returns[mb], cfg
            )
            opt.step(grads)
            clip_fracs.append(diag["clip_fraction"])
            value_losses.append(diag["value_loss"])
    return {
        "mean_reward": float(np.mean(batch.rewards)) if n else 0.0,
        "clip_fraction": float(np.mean(clip_fracs)) if clip_fracs else 0.0,
        "value_loss": float(np.mean(value_losses)) if value_losses else 0.0,
    }


def train_ppo(env: BanditEnv, cfg: PpoConfig, policy: FusionPolicy | None = None, callback=None):
    """Run ``cfg.updates`` rollout/update cycles; returns (policy, per-update log)."""
    if len(env) == 0:
        raise NoData("no training outlets")
    if policy is None:
        policy = FusionPolicy.init(env.states([0]).shape[1], cfg.hidden, cfg.init_log_std, cfg.seed)
    opt = Adam(policy.params(), cfg.learning_rate)
    rng = make_rng(cfg.seed, "ppo")
    history = []
    all_states = env.states()
    for u in range(cfg.updates):
        batch = collect_rollout(env, policy, cfg.rollout, rng)
        diag = ppo_update(policy, batch, cfg, opt, rng)
        diag = {"update": u, **diag, "mean_weights": policy.act(all_states).mean(axis=0).tolist()}
        check_finite(np.asarray(policy.log_std), "log_std")
        history.append(diag)
        if callback is not None:
            callback(diag)
        log.debug("update %d reward %.4f", u, diag["mean_reward"])
    return policy, history


def fuse_with_policy(policy: FusionPolicy, reward_model: RewardModel, bundle):
    """Deterministic evaluation: mean action, fused embedding, predicted class."""
    views = bundle.projected if isinstance(bundle, ViewBundle) else np.asarray(bundle, dtype=np.float64)
    s = views.reshape(*views.shape[:-2], -1)
    w = policy.act(s)
    fused = fused_embedding(views, w)
    pred = np.argmax(reward_model.proba(fused), axis=-1)
    return w, fused, pred


def policy_config_dict(cfg: PpoConfig):
    return dataclasses.asdict(cfg)
