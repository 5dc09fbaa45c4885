"""Analytic copulas, marginal distributions and Sklar-based simulation.

A bivariate sample with copula ``C`` and marginals ``F``, ``G`` is produced by
drawing ``(u, v)`` from ``C`` and mapping through the quantile functions:
``(F^-1(u), G^-1(v))``.

Model description strings (used by the CLI)::

    copula   := "product" | "m" | "w" | "frank:" THETA
              | "convex:" THETA ":" copula ":" copula
              | "glue:" THETA ":" copula ":" copula
    marginal := "uniform:" A "," B | "kumaraswamy:" A "," B
              | "t:" LOC "," SCALE "," DF | "normal:" MU "," SIGMA
              | "pareto:" SHAPE "," SCALE
              | "mixture:" W "*" marginal ( "|" W "*" marginal )*
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import special

from rankdep.errors import ModelSpecError
from rankdep.ingest import BivariateSample
from rankdep.ranks import PseudoObservations, TiePolicy
from rankdep.rng import Rng, make_rng

# keeps quantile functions finite at the ends of the unit interval
_P_EPS = 2.0 ** -53


def _check_unit(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if np.any((u < 0) | (u > 1) | (v < 0) | (v > 1)) or np.any(np.isnan(u) | np.isnan(v)):
        raise ValueError("copula arguments must lie in the unit square")
    return u, v


# --------------------------------------------------------------------------
# copulas


class Copula:
    """Base class: subclasses implement ``_cdf`` and ``_sample``."""

    def cdf(self, u, v):
        u, v = _check_unit(u, v)
        out = np.clip(self._cdf(u, v), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def sample(self, n: int, rng: Rng):
        u, v = self._sample(int(n), rng)
        return np.clip(u, 0.0, 1.0), np.clip(v, 0.0, 1.0)


@dataclass(frozen=True)
class Product(Copula):
    def _cdf(self, u, v):
        return u * v

    def _sample(self, n, rng):
        return rng.random(n), rng.random(n)

    def __str__(self):
        return "product"


@dataclass(frozen=True)
class UpperBound(Copula):
    """Comonotone copula ``M(u, v) = min(u, v)``."""

    def _cdf(self, u, v):
        return np.minimum(u, v)

    def _sample(self, n, rng):
        u = rng.random(n)
        return u, u.copy()

    def __str__(self):
        return "m"


@dataclass(frozen=True)
class LowerBound(Copula):
    """Countermonotone copula ``W(u, v) = max(u + v - 1, 0)``."""

    def _cdf(self, u, v):
        return np.maximum(u + v - 1.0, 0.0)

    def _sample(self, n, rng):
        u = rng.random(n)
        return u, 1.0 - u

    def __str__(self):
        return "w"


def _frank_cdf_pos(theta, u, v):
    # theta > 0. The log argument 1 + (e^-tu - 1)(e^-tv - 1)/(e^-t - 1) equals
    # [e^-tu (1 - e^-t(1-u)) + e^-tv (1 - e^-tu)] / (1 - e^-t), a sum of two
    # nonnegative terms, so it keeps full relative precision for large theta.
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore"):
        a = -theta * u + np.log(-np.expm1(-theta * (1.0 - u)))
        b = -theta * v + np.log(-np.expm1(-theta * u))
    return -(np.logaddexp(a, b) - np.log1p(-np.exp(-theta))) / theta


@dataclass(frozen=True)
class Frank(Copula):
    """Frank family, ``theta != 0``; positive theta gives PQD, negative NQD.

    Negative parameters use the reflection ``C_{-t}(u, v) = u - C_t(u, 1 - v)``
    so every evaluation runs with a positive parameter and never overflows.
    """

    theta: float

    def __post_init__(self):
        if self.theta == 0 or not np.isfinite(self.theta):
            raise ValueError("Frank copula needs a finite, nonzero theta")

    def _cdf(self, u, v):
        t = self.theta
        if t > 0:
            return _frank_cdf_pos(t, u, v)
        return u - _frank_cdf_pos(-t, u, 1.0 - v)

    def _sample(self, n, rng):
        # conditional inversion: solve dC/du (u, v) = w for v, in log space
        t = abs(self.theta)
        u = rng.random(n)
        w = rng.random(n)
        with np.errstate(divide="ignore"):
            log_w = np.log(w)
            log_1mw = np.log1p(-w)
        num = np.logaddexp(-t * u + log_1mw, -t + log_w)
        den = np.logaddexp(-t * u + log_1mw, log_w)
        v = -(num - den) / t
        if self.theta < 0:
            v = 1.0 - v
        return u, v

    def __str__(self):
        return f"frank:{self.theta:g}"


@dataclass(frozen=True)
class ConvexCombo(Copula):
    """``(1 - theta) C1 + theta C2``."""

    c1: Copula
    c2: Copula
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("convex combination weight must lie in [0, 1]")

    def _cdf(self, u, v):
        return (1.0 - self.theta) * self.c1._cdf(u, v) + self.theta * self.c2._cdf(u, v)

    def _sample(self, n, rng):
        from_second = rng.random(n) < self.theta
        k = int(from_second.sum())
        u = np.empty(n)
        v = np.empty(n)
        u[~from_second], v[~from_second] = self.c1.sample(n - k, rng)
        u[from_second], v[from_second] = self.c2.sample(k, rng)
        return u, v

    def __str__(self):
        return f"convex:{self.theta:g}:{self.c1}:{self.c2}"


@dataclass(frozen=True)
class Glued(Copula):
    """``C1`` scaled into ``[0, theta] x [0, 1]`` and ``C2`` into the rest."""

    c1: Copula
    c2: Copula
    theta: float

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("gluing point must lie in (0, 1)")

    def _cdf(self, u, v):
        t = self.theta
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        left = u <= t
        out = np.empty(u.shape)
        out[left] = t * self.c1._cdf(u[left] / t, v[left])
        ur = np.clip((u[~left] - t) / (1.0 - t), 0.0, 1.0)
        out[~left] = (1.0 - t) * self.c2._cdf(ur, v[~left]) + t * v[~left]
        return out

    def sample_with_origin(self, n: int, rng: Rng):
        """Sample plus a boolean array marking points drawn from ``c1``."""
        t = self.theta
        first = rng.random(n) < t
        k = int(first.sum())
        u = np.empty(n)
        v = np.empty(n)
        u1, v1 = self.c1.sample(k, rng)
        u2, v2 = self.c2.sample(n - k, rng)
        u[first], v[first] = t * u1, v1
        u[~first], v[~first] = t + (1.0 - t) * u2, v2
        return u, v, first

    def _sample(self, n, rng):
        u, v, _ = self.sample_with_origin(n, rng)
        return u, v

    def __str__(self):
        return f"glue:{self.theta:g}:{self.c1}:{self.c2}"


CopulaModel = Copula


def copula_cdf(c: Copula, u, v):
    return c.cdf(u, v)


def sample_copula(c: Copula, n: int, rng: Union[Rng, int]) -> PseudoObservations:
    """Draw ``n`` i.i.d. pairs from ``c`` (continuous uniforms, not ranks)."""
    if n < 1:
        raise ValueError("n must be positive")
    u, v = c.sample(n, make_rng(rng))
    return PseudoObservations(u, v, policy=TiePolicy("random"))


# --------------------------------------------------------------------------
# marginals


def _require(ok: bool, message: str) -> None:
    if not ok:
        raise ValueError(message)


class Marginal:
    def quantile(self, p):
        p = np.asarray(p, dtype=np.float64)
        if np.any((p <= 0) | (p >= 1)) or np.any(np.isnan(p)):
            raise ValueError("quantile argument must lie in (0, 1)")
        out = self._quantile(p)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        out = np.asarray(self._cdf(np.asarray(x, dtype=np.float64)))
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Uniform(Marginal):
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        _require(self.a < self.b, "uniform needs a < b")

    def _quantile(self, p):
        return self.a + (self.b - self.a) * p

    def _cdf(self, x):
        return np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)


@dataclass(frozen=True)
class Kumaraswamy(Marginal):
    """Density ``a b x^(a-1) (1 - x^a)^(b-1)`` on (0, 1)."""

    a: float
    b: float

    def __post_init__(self):
        _require(self.a > 0 and self.b > 0, "kumaraswamy parameters must be positive")

    def _quantile(self, p):
        return (-np.expm1(np.log1p(-p) / self.b)) ** (1.0 / self.a)

    def _cdf(self, x):
        x = np.clip(x, 0.0, 1.0)
        return -np.expm1(self.b * np.log1p(-(x ** self.a)))


@dataclass(frozen=True)
class StudentT(Marginal):
    location: float
    scale: float
    df: float

    def __post_init__(self):
        _require(self.scale > 0 and self.df > 0, "student t needs scale > 0 and df > 0")

    def _quantile(self, p):
        return self.location + self.scale * special.stdtrit(self.df, p)

    def _cdf(self, x):
        return special.stdtr(self.df, (x - self.location) / self.scale)


@dataclass(frozen=True)
class Normal(Marginal):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        _require(self.sigma > 0, "normal needs sigma > 0")

    def _quantile(self, p):
        return self.mu + self.sigma * special.ndtri(p)

    def _cdf(self, x):
        return special.ndtr((x - self.mu) / self.sigma)


@dataclass(frozen=True)
class Pareto(Marginal):
    """Lomax form: ``F(x) = 1 - (1 + x/scale)^(-shape)`` on ``x > 0``."""

    shape: float
    scale: float

    def __post_init__(self):
        _require(self.shape > 0 and self.scale > 0, "pareto parameters must be positive")

    def _quantile(self, p):
        return self.scale * np.expm1(-np.log1p(-p) / self.shape)

    def _cdf(self, x):
        x = np.maximum(x, 0.0)
        return -np.expm1(-self.shape * np.log1p(x / self.scale))


@dataclass(frozen=True)
class Mixture(Marginal):
    """Finite mixture ``sum_k w_k F_k``; quantile by bisection on the CDF."""

    components: tuple
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.components) != len(w) or len(w) == 0:
            raise ValueError("need one weight per component")
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
            raise ValueError("mixture weights must be non-negative and sum to 1")
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    def _cdf(self, x):
        return sum(w * np.asarray(c.cdf(x)) for c, w in zip(self.components, self.weights))

    def _quantile(self, p):
        qs = np.stack([np.asarray(c.quantile(p), dtype=float) for c in self.components])
        lo = qs.min(axis=0)
        hi = qs.max(axis=0)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self._cdf(mid) < p
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-13 * np.maximum(1.0, np.abs(hi))):
                break
        return hi


MarginalModel = Marginal

#: Five shapes for the independence gallery: uniform, monotone, unimodal,
#: bimodal and skewed bimodal.
GALLERY_MARGINALS = (
    ("uniform", Uniform(0.0, 1.0)),
    ("monotone", Kumaraswamy(1.0, 4.0)),
    ("unimodal", Normal(0.0, 1.0)),
    ("bimodal", Mixture((Normal(-2.0, 0.7), Normal(2.0, 0.7)), (0.5, 0.5))),
    ("skewed bimodal", Mixture((Normal(-2.0, 0.5), Normal(1.5, 1.2)), (0.3, 0.7))),
)


def marginal_quantile(m: Marginal, p):
    return m.quantile(p)


def _open_unit(p):
    return np.clip(p, _P_EPS, 1.0 - _P_EPS)


def simulate_bivariate(c: Copula, mx: Marginal, my: Marginal, n: int,
                       rng: Union[Rng, int]) -> BivariateSample:
    """``(x_k, y_k) = (mx^-1(u_k), my^-1(v_k))`` with ``(u_k, v_k) ~ c``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    u, v = c.sample(n, make_rng(rng))
    return BivariateSample(mx.quantile(_open_unit(u)), my.quantile(_open_unit(v)))


@dataclass(frozen=True)
class NoisyLineMixture:
    """``Y = (1 - B)(X + eps) + B Z`` with ``B ~ Bernoulli(p_independent)``."""

    x: Marginal
    z: Marginal
    noise: Marginal
    p_independent: float

    def __post_init__(self):
        if not 0.0 <= self.p_independent <= 1.0:
            raise ValueError("p_independent must lie in [0, 1]")


def mixture_simulator(model: NoisyLineMixture, n: int, rng: Union[Rng, int]) -> BivariateSample:
    rng = make_rng(rng)
    x = model.x.quantile(_open_unit(rng.random(n)))
    z = model.z.quantile(_open_unit(rng.random(n)))
    eps = model.noise.quantile(_open_unit(rng.random(n)))
    b = rng.random(n) < model.p_independent
    y = np.where(b, z, x + eps)
    return BivariateSample(x, y)


# --------------------------------------------------------------------------
# description strings


def _number(tok: str, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ModelSpecError(f"expected a number for {what}, got {tok!r}") from None


def _parse_copula_tokens(tokens: list[str]) -> Copula:
    if not tokens:
        raise ModelSpecError("unexpected end of copula description")
    head = tokens.pop(0).strip().lower()
    if head in ("product", "pi", "independence"):
        return Product()
    if head in ("m", "upper", "comonotone"):
        return UpperBound()
    if head in ("w", "lower", "countermonotone"):
        return LowerBound()
    if head == "frank":
        if not tokens:
            raise ModelSpecError("frank needs a parameter")
        try:
            return Frank(_number(tokens.pop(0), "frank theta"))
        except ValueError as exc:
            raise ModelSpecError(str(exc)) from None
    if head in ("convex", "glue"):
        if not tokens:
            raise ModelSpecError(f"{head} needs a weight")
        theta = _number(tokens.pop(0), f"{head} weight")
        c1 = _parse_copula_tokens(tokens)
        c2 = _parse_copula_tokens(tokens)
        cls = ConvexCombo if head == "convex" else Glued
        try:
            return cls(c1, c2, theta)
        except ValueError as exc:
            raise ModelSpecError(str(exc)) from None
    raise ModelSpecError(f"unknown copula {head!r}")


def parse_copula(text: str) -> Copula:
    """Parse e.g. ``glue:0.5:frank:-30:frank:30``."""
    tokens = text.split(":")
    model = _parse_copula_tokens(tokens)
    if tokens:
        raise ModelSpecError(f"trailing tokens in copula description: {':'.join(tokens)}")
    return model


_MARGINALS = {
    "uniform": (Uniform, 2),
    "kumaraswamy": (Kumaraswamy, 2),
    "t": (StudentT, 3),
    "studentt": (StudentT, 3),
    "normal": (Normal, 2),
    "pareto": (Pareto, 2),
}


def parse_marginal(text: str) -> Marginal:
    """Parse e.g. ``kumaraswamy:0.25,0.15`` or ``mixture:0.5*normal:-2,1|0.5*normal:2,1``."""
    name, _, args = text.strip().partition(":")
    name = name.lower()
    if name == "mixture":
        comps, weights = [], []
        for part in args.split("|"):
            w, star, spec = part.partition("*")
            if not star:
                raise ModelSpecError(f"mixture component {part!r} lacks 'weight*'")
            weights.append(_number(w, "mixture weight"))
            comps.append(parse_marginal(spec))
        try:
            return Mixture(tuple(comps), tuple(weights))
        except ValueError as exc:
            raise ModelSpecError(str(exc)) from None
    if name not in _MARGINALS:
        raise ModelSpecError(f"unknown marginal {name!r}")
    cls, arity = _MARGINALS[name]
    values = [_number(a, name) for a in args.split(",")] if args else []
    if len(values) != arity:
        raise ModelSpecError(f"{name} takes {arity} parameters, got {len(values)}")
    try:
        return cls(*values)
    except ValueError as exc:
        raise ModelSpecError(str(exc)) from None
