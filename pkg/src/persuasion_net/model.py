"""Domain types and Bayesian primitives of the persuasion game.

Two receiver types: believers (``h``, prior on state 1 above one half) and
sceptics (``l``, prior below one half).  A sender commits to a signal
structure; receivers update and choose action 1 iff their posterior on
state 1 reaches one half, with ties broken in the sender's favour.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

H, L = "h", "l"
TYPES = (H, L)
TYPE_INDEX = {H: 0, L: 1}

#: Absolute band around the 0.5 posterior threshold; ties inside the band
#: resolve to action 1 (sender-favoured) while guarding float noise.
TIE_EPS = 1e-12

_PROB_SUM_TOL = 1e-12


class SignalClass(Enum):
    """Who a non-empty signal persuades when observed."""

    GOOD = "good"    # both types act 1
    INT = "int"      # only believers act 1
    BAD = "bad"      # nobody acts 1
    EMPTY = "empty"  # the no-signal observation


@dataclass(frozen=True)
class FiniteDist:
    """Finite-support distribution over connectedness values."""

    lam: tuple[float, ...]
    prob: tuple[float, ...]

    def __post_init__(self):
        if len(self.lam) != len(self.prob) or not self.lam:
            raise ValueError("support and probabilities must be non-empty and aligned")
        if any(x < 0 for x in self.lam):
            raise ValueError("connectedness values must be nonnegative")
        if any(p < 0 for p in self.prob):
            raise ValueError("probabilities must be nonnegative")
        if abs(sum(self.prob) - 1.0) > _PROB_SUM_TOL:
            raise ValueError("probabilities must sum to 1 within 1e-12")
        if len(set(self.lam)) != len(self.lam):
            raise ValueError("support values must be distinct")

    @classmethod
    def from_pairs(cls, pairs) -> "FiniteDist":
        pairs = [(float(l), float(p)) for l, p in pairs]
        return cls(tuple(l for l, _ in pairs), tuple(p for _, p in pairs))

    @classmethod
    def point(cls, lam: float) -> "FiniteDist":
        return cls((float(lam),), (1.0,))

    def mean(self) -> float:
        return sum(l * p for l, p in zip(self.lam, self.prob))

    def moment2(self) -> float:
        return sum(l * l * p for l, p in zip(self.lam, self.prob))

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.lam, self.prob))

    def to_list(self) -> list[dict]:
        return [{"lambda": l, "prob": p} for l, p in zip(self.lam, self.prob)]

    @classmethod
    def from_list(cls, items) -> "FiniteDist":
        return cls.from_pairs((d["lambda"], d["prob"]) for d in items)


@dataclass(frozen=True)
class PayoffFn:
    """Sender payoff v over the fraction x of receivers choosing action 1.

    Variants: linear, power (convex, p >= 1), capped (min(x, x_bar)),
    crra ((x^b - 1)/b, b in (0, 1]), step (1 iff x >= x_bar).  The crra
    variant violates the v(0) = 0 normalisation (v(0) = -1/b) and the step
    variant is discontinuous; both are flagged.
    """

    kind: str
    p: float = 1.0
    x_bar: float = 0.5
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "power", "capped", "crra", "step"):
            raise ValueError(f"unknown payoff kind {self.kind!r}")
        if self.kind == "power" and self.p < 1.0:
            raise ValueError("power payoff needs exponent p >= 1")
        if self.kind in ("capped", "step") and not 0.0 < self.x_bar < 1.0:
            raise ValueError("threshold x_bar must lie in (0, 1)")
        if self.kind == "crra" and not 0.0 < self.b <= 1.0:
            raise ValueError("crra curvature b must lie in (0, 1]")

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def power(cls, p: float):
        return cls("power", p=float(p))

    @classmethod
    def capped(cls, x_bar: float):
        return cls("capped", x_bar=float(x_bar))

    @classmethod
    def crra(cls, b: float):
        return cls("crra", b=float(b))

    @classmethod
    def step(cls, x_bar: float):
        return cls("step", x_bar=float(x_bar))

    @property
    def convex(self) -> bool:
        return self.kind in ("linear", "power")

    @property
    def normalized_at_zero(self) -> bool:
        """Whether v(0) = 0 holds (false for the crra deviation)."""
        return self.kind != "crra"

    @property
    def discontinuous(self) -> bool:
        return self.kind == "step"

    def __call__(self, x):
        """Evaluate v on a scalar or array in [0, 1]."""
        arr = np.asarray(x, dtype=float)
        if np.any(arr < -1e-15) or np.any(arr > 1.0 + 1e-12):
            raise ValueError("payoff argument outside [0, 1]")
        arr = np.clip(arr, 0.0, 1.0)
        if self.kind == "linear":
            out = arr
        elif self.kind == "power":
            out = arr**self.p
        elif self.kind == "capped":
            out = np.minimum(arr, self.x_bar)
        elif self.kind == "crra":
            out = (arr**self.b - 1.0) / self.b
        else:  # step: exact >= comparison, no tolerance
            out = (arr >= self.x_bar).astype(float)
        return float(out) if np.isscalar(x) or arr.ndim == 0 else out

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "power":
            d["p"] = self.p
        elif self.kind in ("capped", "step"):
            d["x_bar"] = self.x_bar
        elif self.kind == "crra":
            d["b"] = self.b
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PayoffFn":
        kind = d["kind"]
        if kind == "power":
            return cls.power(d["p"])
        if kind in ("capped", "step"):
            return cls(kind, x_bar=float(d["x_bar"]))
        if kind == "crra":
            return cls.crra(d["b"])
        return cls(kind)


def payoff_eval(v: PayoffFn, x: float) -> float:
    """v(x) with domain checking; x must be a fraction in [0, 1]."""
    return v(x)


@dataclass(frozen=True)
class ModelParams:
    """Population, priors, homophily and connectedness of the model."""

    gamma_h: float
    mu_h1: float
    mu_l1: float
    mu_s1: float
    q: float
    f_h: FiniteDist
    f_l: FiniteDist
    payoff: PayoffFn = field(default_factory=PayoffFn.linear)

    def __post_init__(self):
        if not 0.0 <= self.gamma_h <= 1.0:
            raise ValueError("gamma_h must lie in [0, 1]")
        if not self.mu_h1 > 0.5 > self.mu_l1:
            raise ValueError("priors must satisfy mu_h1 > 0.5 > mu_l1")
        if not 0.0 < self.mu_h1 < 1.0 or not 0.0 < self.mu_l1 < 1.0:
            raise ValueError("priors must be interior probabilities")
        if not 0.0 < self.mu_s1 < 1.0:
            raise ValueError("sender prior must be an interior probability")
        if not 0.0 < self.q <= 1.0:
            raise ValueError("homophily factor q must lie in (0, 1]")

    @property
    def gamma_l(self) -> float:
        return 1.0 - self.gamma_h

    @property
    def mu_h0(self) -> float:
        return 1.0 - self.mu_h1

    @property
    def mu_l0(self) -> float:
        return 1.0 - self.mu_l1

    @property
    def mu_s0(self) -> float:
        return 1.0 - self.mu_s1

    def prior1(self, t: str) -> float:
        return self.mu_h1 if t == H else self.mu_l1

    def gamma(self, t: str) -> float:
        return self.gamma_h if t == H else self.gamma_l

    def f(self, t: str) -> FiniteDist:
        return self.f_h if t == H else self.f_l

    def to_dict(self) -> dict:
        return {
            "gamma_h": self.gamma_h,
            "mu_h1": self.mu_h1,
            "mu_l1": self.mu_l1,
            "mu_s1": self.mu_s1,
            "q": self.q,
            "f_h": self.f_h.to_list(),
            "f_l": self.f_l.to_list(),
            "payoff": self.payoff.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(
            gamma_h=float(d["gamma_h"]),
            mu_h1=float(d["mu_h1"]),
            mu_l1=float(d["mu_l1"]),
            mu_s1=float(d["mu_s1"]),
            q=float(d["q"]),
            f_h=FiniteDist.from_list(d["f_h"]),
            f_l=FiniteDist.from_list(d["f_l"]),
            payoff=PayoffFn.from_dict(d["payoff"]) if "payoff" in d else PayoffFn.linear(),
        )


def posterior_nonempty(prior1: float, pi1: float, pi0: float) -> float:
    """Posterior on state 1 after observing a non-empty signal.

    Equals pi1*prior1 / (pi1*prior1 + pi0*(1-prior1)); invariant to scaling
    (pi1, pi0) by any positive constant.
    """
    if not 0.0 < prior1 < 1.0:
        raise ValueError("prior must be an interior probability")
    if pi1 < 0.0 or pi0 < 0.0:
        raise ValueError("signal probabilities must be nonnegative")
    if pi1 + pi0 <= 0.0:
        raise ValueError("signal never sent")
    # rescale by the larger weight first: exact by ratio invariance, and it
    # keeps subnormal inputs from underflowing the denominator to 0/0
    scale = max(pi1, pi0)
    num = (pi1 / scale) * prior1
    return num / (num + (pi0 / scale) * (1.0 - prior1))


def action(posterior1: float) -> int:
    """Receiver best response: 1 iff the posterior reaches one half."""
    if not -1e-12 <= posterior1 <= 1.0 + 1e-12:
        raise ValueError("posterior outside [0, 1]")
    return 1 if posterior1 >= 0.5 - TIE_EPS else 0


def classify_signal(params: ModelParams, pi1: float, pi0: float) -> SignalClass:
    """GOOD if sceptics are persuaded, INT if only believers, BAD otherwise."""
    a_l = action(posterior_nonempty(params.mu_l1, pi1, pi0))
    if a_l == 1:
        return SignalClass.GOOD
    a_h = action(posterior_nonempty(params.mu_h1, pi1, pi0))
    return SignalClass.INT if a_h == 1 else SignalClass.BAD
