"""
Problem registry: build problem instances from config-level specs
"""

from typing import Any, Callable, Dict, Mapping

from ..errors import ConfigurationError
from ..utils.logging_utils import get_logger
from .base import Problem, ProblemKind, ProblemSpec
from .hard_instances import HardOnePoint
from .nonsmooth import NonsmoothL1
from .quadratics import DiagQuadratic, HardTwoPoint, QuadraticMarkov

logger = get_logger(__name__)


def _quadratic_markov(spec: ProblemSpec) -> Problem:
    return QuadraticMarkov(dim=spec.dim, mu=spec.mu)


def _diag_quadratic(spec: ProblemSpec) -> Problem:
    L = spec.lips_grad if spec.lips_grad is not None else spec.params.get('L', 1.0)
    return DiagQuadratic(dim=spec.dim, mu=spec.mu, L=float(L))


def _nonsmooth_l1(spec: ProblemSpec) -> Problem:
    return NonsmoothL1(
        dim=spec.dim,
        mu=spec.mu,
        l1_weight=float(spec.params.get('l1_weight', 0.1)),
        radius=float(spec.params.get('radius', 1.0)),
    )


def _hard_one_point(spec: ProblemSpec) -> Problem:
    p = spec.params
    omega = tuple(p.get('omega') or ())
    mu = float(p.get('scale_mu', spec.mu))
    if 'sigma1_sq' in p:
        return HardOnePoint.from_budget(spec.dim, mu, float(p['sigma1_sq']), int(p.get('tau', 1)),
                                        int(p.get('n_iterations', 1000)), omega=omega or None)
    return HardOnePoint(dim=spec.dim, mu=mu, delta=float(p.get('delta', 0.3)), omega=omega)


def _hard_two_point(spec: ProblemSpec) -> Problem:
    p = spec.params
    v = tuple(p.get('v') or ())
    if 'sigma2_sq' in p:
        return HardTwoPoint.from_budget(spec.dim, spec.mu, float(p['sigma2_sq']),
                                        int(p.get('n_iterations', 1000)), v=v or None)
    return HardTwoPoint(dim=spec.dim, mu=spec.mu, delta=float(p.get('delta', 0.1)), v=v)


_BUILDERS: Dict[ProblemKind, Callable[[ProblemSpec], Problem]] = {
    ProblemKind.QUADRATIC_MARKOV: _quadratic_markov,
    ProblemKind.DIAG_QUADRATIC: _diag_quadratic,
    ProblemKind.NONSMOOTH_L1: _nonsmooth_l1,
    ProblemKind.HARD_ONE_POINT: _hard_one_point,
    ProblemKind.HARD_TWO_POINT: _hard_two_point,
}


def build_problem(spec: ProblemSpec) -> Problem:
    """
    Instantiate the problem described by `spec`

    Raises:
        ConfigurationError: On unknown kinds or invalid numeric fields
    """
    try:
        kind = ProblemKind(spec.kind)
    except ValueError:
        raise ConfigurationError(
            f"Unknown problem kind: {spec.kind} (available: {[k.value for k in ProblemKind]})"
        )
    if spec.dim < 1:
        raise ConfigurationError(f"Problem dim must be >= 1, got {spec.dim}")
    if spec.lips_grad is not None and spec.mu > spec.lips_grad:
        raise ConfigurationError(f"mu={spec.mu} exceeds lips_grad={spec.lips_grad}")

    problem = _BUILDERS[kind](spec)
    logger.debug(f"Built {kind.value} problem (d={spec.dim})")
    return problem


def spec_from_config(section: Mapping[str, Any], dim: int) -> ProblemSpec:
    """ProblemSpec from a config `problem` block; unknown keys go to params"""
    known = {'kind', 'mu', 'lips_grad', 'lips_f', 'dim', 'dim_grid'}
    try:
        return ProblemSpec(
            kind=ProblemKind(section.get('kind', ProblemKind.QUADRATIC_MARKOV.value)),
            dim=int(dim),
            mu=float(section.get('mu', 1.0)),
            lips_grad=None if section.get('lips_grad') is None else float(section['lips_grad']),
            lips_f=None if section.get('lips_f') is None else float(section['lips_f']),
            params={k: v for k, v in section.items() if k not in known},
        )
    except ValueError as e:
        raise ConfigurationError(f"Invalid problem block: {e}")
