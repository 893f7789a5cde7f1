"""
Experiment configuration

An experiment file has five sections (nested or as dotted keys):

    problem.kind / mu / lips_grad / dim_grid (or dim) / kind-specific fields
    chain.kind / tau_grid (or tau) / sigma2_grid (or sigma2)
    estimator.t / B / feedback / smooth
    optimizer.gamma / p / N / seed_base / replications / full_replications /
              initial_error / epsilon / restarts
    output.results_dir / csv / heatmaps / heatmap_prefix / trajectory

`optimizer.gamma: auto` asks the tuning rules for (gamma, t, p) at
`optimizer.epsilon`.
"""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from ..chains.lazy_chain import ChainKind
from ..errors import ConfigurationError
from ..estimators.finite_difference import Feedback
from ..problems.base import ProblemKind
from ..utils.config_loader import get_project_root, load_config, parse_grid
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)

AUTO = "auto"


def _finite(value: Any, key: str, positive: bool = False, allow_zero: bool = True) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigurationError(f"{key} must be finite, got {value}")
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        raise ConfigurationError(f"{key} must be {'>= 0' if allow_zero else '> 0'}, got {value}")
    return value


def _integer(value: Any, key: str, minimum: int) -> int:
    number = _finite(value, key)
    if int(number) != number or number < minimum:
        raise ConfigurationError(f"{key} must be an integer >= {minimum}, got {value!r}")
    return int(number)


def _grid(section: Mapping[str, Any], grid_key: str, single_key: str, cast, prefix: str) -> List:
    if grid_key in section:
        return parse_grid(section[grid_key], cast=cast, key=f"{prefix}.{grid_key}")
    if single_key in section:
        return parse_grid(section[single_key], cast=cast, key=f"{prefix}.{single_key}")
    raise ConfigurationError(f"Missing {prefix}.{grid_key} (or {prefix}.{single_key})")


@dataclass(frozen=True)
class ProblemBlock:
    kind: ProblemKind = ProblemKind.QUADRATIC_MARKOV
    dim_grid: Tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)
    mu: float = 1.0
    lips_grad: Optional[float] = None
    lips_f: Optional[float] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def section(self) -> Dict[str, Any]:
        """The block as a registry `problem` section"""
        return {'kind': self.kind.value, 'mu': self.mu, 'lips_grad': self.lips_grad,
                'lips_f': self.lips_f, **self.extra}


@dataclass(frozen=True)
class ChainBlock:
    kind: ChainKind = ChainKind.LAZY_GAUSSIAN
    tau_grid: Tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)
    sigma2_grid: Tuple[float, ...] = (1e-3, 1e-5)


@dataclass(frozen=True)
class EstimatorBlock:
    t: Optional[float] = 1e-5
    B: int = 1
    feedback: Feedback = Feedback.TWO_POINT
    smooth: bool = True


@dataclass(frozen=True)
class OptimizerBlock:
    gamma: Optional[float] = 1e-3         # None means theorem tuning at `epsilon`
    p: Optional[float] = None             # None means B/(B+d) (smooth) or 1
    N: int = 1000
    seed_base: int = 0
    replications: int = 200
    full_replications: int = 10000
    initial_error: float = 1e-2
    epsilon: Optional[float] = None
    restarts: bool = False


@dataclass(frozen=True)
class OutputBlock:
    results_dir: Path = Path("results")
    csv: str = "grid.csv"
    heatmaps: bool = True
    heatmap_prefix: str = "heatmap"
    trajectory: str = "trajectory.csv"

    @property
    def csv_path(self) -> Path:
        return self.results_dir / self.csv

    @property
    def trajectory_path(self) -> Path:
        return self.results_dir / self.trajectory

    def heatmap_path(self, sigma2: float) -> Path:
        return self.results_dir / f"{self.heatmap_prefix}_sigma2_{sigma2:g}.svg"


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description: problem, chain, estimator, optimizer and output blocks"""
    problem: ProblemBlock = field(default_factory=ProblemBlock)
    chain: ChainBlock = field(default_factory=ChainBlock)
    estimator: EstimatorBlock = field(default_factory=EstimatorBlock)
    optimizer: OptimizerBlock = field(default_factory=OptimizerBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    source: Optional[Path] = None

    @property
    def n_cells(self) -> int:
        return len(self.problem.dim_grid) * len(self.chain.tau_grid) * len(self.chain.sigma2_grid)

    def single_cell(self) -> Tuple[int, int, float]:
        """(d, tau, sigma2) of a single-run config; the first grid entries otherwise"""
        if self.n_cells > 1:
            logger.warning(f"Config describes {self.n_cells} cells; the single run uses the first one")
        return self.problem.dim_grid[0], self.chain.tau_grid[0], self.chain.sigma2_grid[0]

    def with_full_replications(self) -> "ExperimentConfig":
        optimizer = replace(self.optimizer, replications=self.optimizer.full_replications)
        return replace(self, optimizer=optimizer)


# ============================================================================
# Parsing
# ============================================================================

def _problem_block(section: Mapping[str, Any]) -> ProblemBlock:
    known = {'kind', 'mu', 'lips_grad', 'lips_f', 'dim', 'dim_grid'}
    try:
        kind = ProblemKind(section.get('kind', ProblemKind.QUADRATIC_MARKOV.value))
    except ValueError:
        raise ConfigurationError(
            f"problem.kind: unknown kind {section.get('kind')!r} (available: {[k.value for k in ProblemKind]})"
        )
    dims = _grid(section, 'dim_grid', 'dim', int, 'problem')
    if any(d < 1 for d in dims):
        raise ConfigurationError(f"problem.dim_grid entries must be >= 1, got {dims}")
    mu = _finite(section.get('mu', 1.0), 'problem.mu', positive=True, allow_zero=False)
    lips_grad = section.get('lips_grad')
    lips_f = section.get('lips_f')
    return ProblemBlock(
        kind=kind,
        dim_grid=tuple(dims),
        mu=mu,
        lips_grad=None if lips_grad is None else _finite(lips_grad, 'problem.lips_grad', positive=True),
        lips_f=None if lips_f is None else _finite(lips_f, 'problem.lips_f', positive=True),
        extra={k: v for k, v in section.items() if k not in known},
    )


def _chain_block(section: Mapping[str, Any]) -> ChainBlock:
    try:
        kind = ChainKind(section.get('kind', ChainKind.LAZY_GAUSSIAN.value))
    except ValueError:
        raise ConfigurationError(f"chain.kind: unknown kind {section.get('kind')!r}")
    taus = _grid(section, 'tau_grid', 'tau', int, 'chain')
    if any(tau < 1 for tau in taus):
        raise ConfigurationError(f"chain.tau_grid entries must be >= 1, got {taus}")
    sigmas = _grid(section, 'sigma2_grid', 'sigma2', float, 'chain')
    for sigma2 in sigmas:
        _finite(sigma2, 'chain.sigma2_grid', positive=True)
    return ChainBlock(kind=kind, tau_grid=tuple(taus), sigma2_grid=tuple(sigmas))


def _estimator_block(section: Mapping[str, Any]) -> EstimatorBlock:
    t = section.get('t', 1e-5)
    try:
        feedback = Feedback(section.get('feedback', Feedback.TWO_POINT.value))
    except ValueError:
        raise ConfigurationError(f"estimator.feedback must be one_point or two_point, got {section.get('feedback')!r}")
    return EstimatorBlock(
        t=None if t in (None, AUTO) else _finite(t, 'estimator.t', positive=True, allow_zero=False),
        B=_integer(section.get('B', 1), 'estimator.B', 1),
        feedback=feedback,
        smooth=bool(section.get('smooth', True)),
    )


def _optimizer_block(section: Mapping[str, Any]) -> OptimizerBlock:
    gamma = section.get('gamma', 1e-3)
    p = section.get('p')
    epsilon = section.get('epsilon')
    block = OptimizerBlock(
        gamma=None if gamma == AUTO else _finite(gamma, 'optimizer.gamma', positive=True, allow_zero=False),
        p=None if p in (None, AUTO) else _finite(p, 'optimizer.p', positive=True, allow_zero=False),
        N=_integer(section.get('N', 1000), 'optimizer.N', 0),
        seed_base=_integer(section.get('seed_base', 0), 'optimizer.seed_base', 0),
        replications=_integer(section.get('replications', 200), 'optimizer.replications', 1),
        full_replications=_integer(section.get('full_replications', 10000), 'optimizer.full_replications', 1),
        initial_error=_finite(section.get('initial_error', 1e-2), 'optimizer.initial_error', positive=True),
        epsilon=None if epsilon is None else _finite(epsilon, 'optimizer.epsilon', positive=True, allow_zero=False),
        restarts=bool(section.get('restarts', False)),
    )
    if block.p is not None and block.p > 1:
        raise ConfigurationError(f"optimizer.p must lie in (0, 1], got {block.p}")
    if (block.gamma is None or block.restarts) and block.epsilon is None:
        raise ConfigurationError("optimizer.epsilon is required with gamma: auto or restarts: true")
    return block


def _output_block(section: Mapping[str, Any], root: Path) -> OutputBlock:
    results_dir = Path(str(section.get('results_dir', 'results')))
    if not results_dir.is_absolute():
        results_dir = root / results_dir
    return OutputBlock(
        results_dir=results_dir,
        csv=str(section.get('csv', 'grid.csv')),
        heatmaps=bool(section.get('heatmaps', True)),
        heatmap_prefix=str(section.get('heatmap_prefix', 'heatmap')),
        trajectory=str(section.get('trajectory', 'trajectory.csv')),
    )


def experiment_from_dict(config: Mapping[str, Any], root: Optional[Path] = None,
                         source: Optional[Path] = None) -> ExperimentConfig:
    """
    Validate a nested config mapping

    Raises:
        ConfigurationError: Naming the offending key
    """
    unknown = set(config) - {'problem', 'chain', 'estimator', 'optimizer', 'output'}
    if unknown:
        logger.warning(f"Ignoring unknown config sections: {sorted(unknown)}")
    for name in ('problem', 'chain', 'estimator', 'optimizer', 'output'):
        if not isinstance(config.get(name, {}), Mapping):
            raise ConfigurationError(f"Section '{name}' must be a mapping")

    estimator = _estimator_block(config.get('estimator', {}))
    optimizer = _optimizer_block(config.get('optimizer', {}))
    if estimator.t is None and optimizer.gamma is not None:
        raise ConfigurationError("estimator.t: auto requires optimizer.gamma: auto")

    return ExperimentConfig(
        problem=_problem_block(config.get('problem', {})),
        chain=_chain_block(config.get('chain', {})),
        estimator=estimator,
        optimizer=optimizer,
        output=_output_block(config.get('output', {}), root or get_project_root()),
        source=source,
    )


def load_experiment_config(
    path: str | Path,
    overrides: Optional[Dict[str, Any]] = None,
    full: bool = False,
) -> ExperimentConfig:
    """
    Load and validate an experiment config file

    Args:
        path: YAML config path
        overrides: Dotted-key overrides applied after loading
        full: Use `optimizer.full_replications`

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigurationError: On invalid values
    """
    path = Path(path)
    config = load_config(path, overrides=overrides)
    experiment = experiment_from_dict(config, source=path)
    if full:
        experiment = experiment.with_full_replications()

    logger.info(f"Loaded experiment config from {path}: {experiment.n_cells} cells, "
                f"{experiment.optimizer.replications} replications")
    return experiment
