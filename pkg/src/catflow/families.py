"""Time-dependent families of semiconcave functions.

A family carries an evaluator f_t(x), a concavity bound and a Lipschitz
constant, and optionally a gradient oracle.  Concavity convention: f is
lam-concave when f(geo(s)) - (lam/2) s^2 is concave along unit-speed
geodesics (equivalently f'' <= lam in the support sense), so lam = -1
describes the strongly concave -|x|^2/2 and lam = 0 plain concavity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CapabilityError
from .spaces import EuclideanSpace, Point, Space, SphereSpace, TangentVector


@dataclass
class TimeDependentFamily:
    """The data of {f_t} used by the flow engine and the checkers."""

    space: Space
    evaluate: Callable[[float, Point], float]
    lam: float
    lipschitz_L: float
    gradient_oracle: Optional[Callable[[float, Point], TangentVector]] = None
    contains: Callable[[float, Point], bool] = field(default=lambda t, p: True)
    label: str = "family"

    def gradient(self, t: float, p: Point) -> TangentVector:
        if self.gradient_oracle is None:
            raise CapabilityError(f"family {self.label!r} has no gradient oracle")
        return self.gradient_oracle(t, p)


def ball_distance_family(space: Space, gamma_eval: Callable[[float], Point], r: float,
                         collar: float = 1e-2, lam: Optional[float] = None,
                         label: str = "ball-distance") -> TimeDependentFamily:
    """The family f_t = -max(r, dist to gamma(t)) driving the tractrix flow.

    The gradient is the zero vector wherever dist <= r (including the kink,
    where the defining inequalities force it to vanish) and the unit vector
    toward gamma(t) outside.  On spheres the family is only lam-concave on
    a collar around the ball, so the domain is restricted to
    B(gamma(t), r + collar) there; lam defaults to the backend's concavity
    bound at that collar width and may be overridden.
    """
    if lam is None:
        lam = space.builtin_family_concavity(r, collar)

    def evaluate(t: float, p: Point) -> float:
        return -max(r, space.distance(p, gamma_eval(t)))

    def grad(t: float, p: Point) -> TangentVector:
        g = gamma_eval(t)
        d = space.distance(p, g)
        if d <= r:
            return TangentVector(p, _zero_direction(space, p), 0.0)
        v = space.log_map(p, g)
        return TangentVector(p, v.direction, 1.0)

    if isinstance(space, SphereSpace):
        def contains(t: float, p: Point) -> bool:
            return space.distance(p, gamma_eval(t)) < r + collar
    else:
        def contains(t: float, p: Point) -> bool:
            return True

    return TimeDependentFamily(
        space=space,
        evaluate=evaluate,
        lam=lam,
        lipschitz_L=1.0,
        gradient_oracle=grad,
        contains=contains,
        label=label,
    )


def quadratic_family(space: EuclideanSpace, center: Point,
                     region_radius: float = math.inf,
                     label: str = "quadratic") -> TimeDependentFamily:
    """The stationary family f(x) = -|x - center|^2 / 2 (lam = -1)."""

    def evaluate(t: float, p: Point) -> float:
        return -0.5 * space.distance(p, center) ** 2

    def grad(t: float, p: Point) -> TangentVector:
        v = space.log_map(p, center)
        return TangentVector(p, v.direction, v.magnitude)

    L = region_radius if math.isfinite(region_radius) else float("inf")
    return TimeDependentFamily(
        space=space,
        evaluate=evaluate,
        lam=-1.0,
        lipschitz_L=L,
        gradient_oracle=grad,
        label=label,
    )


def shifted_family(family: TimeDependentFamily, shift: Callable[[float, Point], float],
                   bound: float, label: Optional[str] = None) -> TimeDependentFamily:
    """A family h_t = f_t + shift with sup |shift| <= bound.

    The shift must not change gradients materially for the oracle to stay
    valid; use gradient-compatible shifts (e.g. recentred quadratics are
    built directly instead).
    """
    return TimeDependentFamily(
        space=family.space,
        evaluate=lambda t, p: family.evaluate(t, p) + shift(t, p),
        lam=family.lam,
        lipschitz_L=family.lipschitz_L,
        gradient_oracle=family.gradient_oracle,
        contains=family.contains,
        label=label or f"{family.label}+shift",
    )


def _zero_direction(space: Space, p: Point):
    if isinstance(space, (EuclideanSpace,)):
        return np.zeros(space.dim)
    if isinstance(space, SphereSpace):
        return np.zeros(space.dim + 1)
    return 0.0
