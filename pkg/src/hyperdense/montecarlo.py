"""Monte Carlo propagation of apparatus imperfections to channel capacity.

Each iteration draws the nine imperfection knobs from independent
normal distributions, builds the conditional-detection matrix and
records its capacity and average success probability.  Draws come from
a counter-based generator (Philox) keyed by (seed, iteration index), so
iteration i produces the same values no matter how many workers run or
in which order results arrive; aggregation reads a by-index array and
is therefore order-insensitive.

Angle parameters are specified in degrees (their customary lab unit)
and converted to radians when states are built.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .capacity import average_success, channel_capacity
from .optics import (
    DEFAULT_ACCIDENTAL_FRACTION,
    AccidentalModel,
    GateParams,
    apply_accidentals,
    transfer_matrix,
)
from .states import SourceParams

IDEAL_CAPACITY_BITS = 2.0

_MASK64 = (1 << 64) - 1

IMPERFECTION_GROUPS = ("source-spin", "source-orbit", "pbs-crosstalk",
                       "accidentals")

# Canonical parameter order; it fixes the random-stream layout, so new
# parameters must only ever be appended.
PARAM_NAMES = (
    "source.eps_theta_spin_deg",
    "source.eps_phi_spin_deg",
    "source.lambda_spin",
    "source.eps_theta_orbit_deg",
    "source.eps_phi_orbit_deg",
    "source.lambda_orbit",
    "gate.eps_H",
    "gate.eps_V",
    "accidentals.fraction",
)

_PARAM_GROUP = {
    "source.eps_theta_spin_deg": "source-spin",
    "source.eps_phi_spin_deg": "source-spin",
    "source.lambda_spin": "source-spin",
    "source.eps_theta_orbit_deg": "source-orbit",
    "source.eps_phi_orbit_deg": "source-orbit",
    "source.lambda_orbit": "source-orbit",
    "gate.eps_H": "pbs-crosstalk",
    "gate.eps_V": "pbs-crosstalk",
    "accidentals.fraction": "accidentals",
}

# Physical sampling ranges: unitless weights stay in [0, 1], angles are
# kept finite and well inside a single branch of the model.
_PARAM_CLAMPS = {
    "source.eps_theta_spin_deg": (-90.0, 90.0),
    "source.eps_phi_spin_deg": (-180.0, 180.0),
    "source.lambda_spin": (0.0, 1.0),
    "source.eps_theta_orbit_deg": (-90.0, 90.0),
    "source.eps_phi_orbit_deg": (-180.0, 180.0),
    "source.lambda_orbit": (0.0, 1.0),
    "gate.eps_H": (0.0, 1.0),
    "gate.eps_V": (0.0, 1.0),
    "accidentals.fraction": (0.0, 0.99),
}

DEFAULT_ITERATIONS = 100
DEFAULT_SEED = 6


@dataclass(frozen=True)
class ParamDistribution:
    """Clamped normal distribution for one imperfection knob."""

    mean: float
    sigma: float = 0.0
    lower_clamp: float = -math.inf
    upper_clamp: float = math.inf

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if self.lower_clamp > self.upper_clamp:
            raise ValueError("lower_clamp must not exceed upper_clamp")


@dataclass(frozen=True)
class ImperfectionParams:
    """One sampled setting of all nine knobs.  Angles in radians."""

    eps_theta_spin: float
    eps_phi_spin: float
    lambda_spin: float
    eps_theta_orbit: float
    eps_phi_orbit: float
    lambda_orbit: float
    eps_H: float
    eps_V: float
    accidental_fraction: float

    def source_params(self) -> SourceParams:
        return SourceParams(
            eps_theta_spin=self.eps_theta_spin,
            eps_phi_spin=self.eps_phi_spin,
            lambda_spin=self.lambda_spin,
            eps_theta_orbit=self.eps_theta_orbit,
            eps_phi_orbit=self.eps_phi_orbit,
            lambda_orbit=self.lambda_orbit,
        )

    def gate_params(self) -> GateParams:
        return GateParams(eps_H=self.eps_H, eps_V=self.eps_V)

    def accidental_model(self) -> AccidentalModel:
        return AccidentalModel(fraction=self.accidental_fraction)


@dataclass(frozen=True)
class McScenario:
    """A named set of active imperfection groups and their distributions.

    Parameters without an explicit distribution sit at their ideal value
    (zero, except the accidental fraction which defaults to the
    characterized value when its group is active).  Inactive groups are
    forced to ideal regardless of the provided distributions.
    """

    name: str
    active: frozenset = frozenset()
    distributions: dict = field(default_factory=dict)
    iterations: int = DEFAULT_ITERATIONS
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "active", frozenset(self.active))
        unknown_groups = self.active - set(IMPERFECTION_GROUPS)
        if unknown_groups:
            raise ValueError(
                f"unknown imperfection groups {sorted(unknown_groups)}; "
                f"valid groups: {list(IMPERFECTION_GROUPS)}")
        unknown_params = set(self.distributions) - set(PARAM_NAMES)
        if unknown_params:
            raise ValueError(
                f"unknown parameters {sorted(unknown_params)}; "
                f"valid parameters: {list(PARAM_NAMES)}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be positive, got {self.iterations}")


def _default_distribution(name: str, active: frozenset) -> ParamDistribution:
    lo, hi = _PARAM_CLAMPS[name]
    if name == "accidentals.fraction" and "accidentals" in active:
        return ParamDistribution(DEFAULT_ACCIDENTAL_FRACTION, 0.0, lo, hi)
    return ParamDistribution(0.0, 0.0, lo, hi)


def _resolved_distributions(scenario: McScenario) -> list:
    """Distribution for every knob in canonical order, ideal when inactive."""
    dists = []
    for name in PARAM_NAMES:
        if _PARAM_GROUP[name] not in scenario.active:
            dists.append(_default_distribution(name, scenario.active))
            continue
        d = scenario.distributions.get(name)
        if d is None:
            d = _default_distribution(name, scenario.active)
        else:
            lo, hi = _PARAM_CLAMPS[name]
            d = ParamDistribution(d.mean, d.sigma,
                                  max(d.lower_clamp, lo),
                                  min(d.upper_clamp, hi))
        dists.append(d)
    return dists


def default_scenarios() -> list:
    """The five builtin scenarios of the characterized imperfection budget."""
    spin = {
        "source.eps_theta_spin_deg": ParamDistribution(1.0, 0.7),
        "source.eps_phi_spin_deg": ParamDistribution(0.0, 4.0),
        "source.lambda_spin": ParamDistribution(0.010, 0.002),
    }
    orbit = {
        "source.eps_theta_orbit_deg": ParamDistribution(1.7, 0.6),
        "source.eps_phi_orbit_deg": ParamDistribution(0.0, 5.0),
        "source.lambda_orbit": ParamDistribution(0.03, 0.01),
    }
    crosstalk = {
        "gate.eps_H": ParamDistribution(0.005, 0.001),
        "gate.eps_V": ParamDistribution(0.010, 0.002),
    }
    accidentals = {
        "accidentals.fraction": ParamDistribution(DEFAULT_ACCIDENTAL_FRACTION, 0.0),
    }
    joint = {**spin, **orbit, **crosstalk, **accidentals}
    return [
        McScenario("spin", frozenset({"source-spin"}), spin),
        McScenario("orbit", frozenset({"source-orbit"}), orbit),
        McScenario("crosstalk", frozenset({"pbs-crosstalk"}), crosstalk),
        McScenario("accidentals", frozenset({"accidentals"}), accidentals),
        McScenario("all", frozenset(IMPERFECTION_GROUPS), joint),
    ]


def builtin_scenario(name: str) -> McScenario:
    for s in default_scenarios():
        if s.name == name:
            return s
    raise ValueError(f"unknown builtin scenario {name!r}; valid names: "
                     f"{[s.name for s in default_scenarios()]}")


def _standard_normals(seed: int, iteration_index: int, count: int) -> np.ndarray:
    """Deterministic normals via Box-Muller on a per-iteration Philox stream."""
    key = np.array([seed & _MASK64, iteration_index & _MASK64],
                   dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    u = gen.random(2 * count)
    u1 = 1.0 - u[0::2]  # in (0, 1], keeps the log finite
    u2 = u[1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)


def sample_params(scenario: McScenario, iteration_index: int) -> ImperfectionParams:
    """Draw all nine knobs for one iteration, deterministically.

    The stream position depends only on (scenario.seed, iteration_index)
    and every knob consumes a fixed slot, so serial and parallel runs
    agree bit-exactly.
    """
    dists = _resolved_distributions(scenario)
    z = _standard_normals(scenario.seed, iteration_index, len(dists))
    values = []
    for d, zi in zip(dists, z):
        v = d.mean + d.sigma * zi
        values.append(min(max(v, d.lower_clamp), d.upper_clamp))
    deg = math.pi / 180.0
    return ImperfectionParams(
        eps_theta_spin=values[0] * deg,
        eps_phi_spin=values[1] * deg,
        lambda_spin=values[2],
        eps_theta_orbit=values[3] * deg,
        eps_phi_orbit=values[4] * deg,
        lambda_orbit=values[5],
        eps_H=values[6],
        eps_V=values[7],
        accidental_fraction=values[8],
    )


@dataclass(frozen=True)
class McResult:
    scenario: McScenario
    capacity_bits: np.ndarray
    success_probability: np.ndarray

    @property
    def iterations(self) -> int:
        return len(self.capacity_bits)

    @property
    def capacity_mean(self) -> float:
        return float(np.mean(self.capacity_bits))

    @property
    def capacity_std(self) -> float:
        if self.iterations < 2:
            return 0.0
        return float(np.std(self.capacity_bits, ddof=1))

    @property
    def success_mean(self) -> float:
        return float(np.mean(self.success_probability))

    @property
    def success_std(self) -> float:
        if self.iterations < 2:
            return 0.0
        return float(np.std(self.success_probability, ddof=1))

    @property
    def capacity_reduction(self) -> float:
        return IDEAL_CAPACITY_BITS - self.capacity_mean


def _evaluate_iteration(scenario: McScenario, index: int) -> tuple:
    params = sample_params(scenario, index)
    t = transfer_matrix(params.source_params(), params.gate_params())
    if "accidentals" in scenario.active:
        t = apply_accidentals(t, params.accidental_model())
    cap = channel_capacity(t).capacity_bits
    return cap, average_success(t)

def run(scenario: McScenario, jobs: int = 1) -> McResult:
    """Evaluate all iterations of a scenario.

    jobs > 1 spreads iterations over a thread pool; results are stored
    by iteration index, so the outcome is identical for any jobs value.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be positive, got {jobs}")
    n = scenario.iterations
    caps = np.empty(n)
    succ = np.empty(n)
    if jobs == 1:
        for i in range(n):
            caps[i], succ[i] = _evaluate_iteration(scenario, i)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for i, (c, s) in enumerate(
                    pool.map(lambda i: _evaluate_iteration(scenario, i),
                             range(n))):
                caps[i], succ[i] = c, s
    return McResult(scenario=scenario, capacity_bits=caps,
                    success_probability=succ)


@dataclass(frozen=True)
class BudgetReport:
    """Naive additivity check of the individual capacity reductions."""

    individual_reductions: dict
    naive_capacity_bits: float
    joint_capacity_bits: float

    @property
    def discrepancy_bits(self) -> float:
        return self.joint_capacity_bits - self.naive_capacity_bits


def naive_budget_check(singles, combined: McResult) -> BudgetReport:
    """Compare 2 - sum(individual reductions) against the joint capacity.

    The naive budget subtracts each single-imperfection reduction from
    the ideal 2 bits; interplay between imperfections makes the joint
    simulation land elsewhere, and the report carries the gap.
    """
    reductions = {}
    for r in singles:
        reductions[r.scenario.name] = r.capacity_reduction
    naive = IDEAL_CAPACITY_BITS - sum(reductions.values())
    return BudgetReport(individual_reductions=reductions,
                        naive_capacity_bits=naive,
                        joint_capacity_bits=combined.capacity_mean)


# --- scenario files ---------------------------------------------------------

_SCENARIO_SCALAR_KEYS = ("name", "active", "iterations", "seed")


def parse_scenario_text(text: str) -> McScenario:
    """Parse the flat key=value scenario format.

    Recognized keys: name=, active= (comma-separated groups),
    iterations=, seed=, and per-parameter <param>.mean= / <param>.sigma=
    with <param> one of PARAM_NAMES.  Blank lines and #-comments are
    ignored.
    """
    name = "custom"
    active = set()
    iterations = DEFAULT_ITERATIONS
    seed = DEFAULT_SEED
    means = {}
    sigmas = {}
    valid_param_keys = {f"{p}.{s}" for p in PARAM_NAMES
                        for s in ("mean", "sigma")}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "name":
            name = value
        elif key == "active":
            active = {g.strip() for g in value.split(",") if g.strip()}
        elif key == "iterations":
            iterations = int(value)
        elif key == "seed":
            seed = int(value)
        elif key in valid_param_keys:
            param, kind = key.rsplit(".", 1)
            (means if kind == "mean" else sigmas)[param] = float(value)
        else:
            valid = list(_SCENARIO_SCALAR_KEYS) + sorted(valid_param_keys)
            raise ValueError(
                f"line {lineno}: unknown key {key!r}; valid keys: {valid}")
    dists = {}
    for param in set(means) | set(sigmas):
        lo, hi = _PARAM_CLAMPS[param]
        dists[param] = ParamDistribution(means.get(param, 0.0),
                                         sigmas.get(param, 0.0), lo, hi)
    return McScenario(name=name, active=frozenset(active),
                      distributions=dists, iterations=iterations, seed=seed)


def load_scenario(path) -> McScenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario_text(fh.read())


# --- reporting --------------------------------------------------------------

def result_to_json_dict(result: McResult) -> dict:
    s = result.scenario
    return {
        "scenario": {
            "name": s.name,
            "active": sorted(s.active),
            "iterations": s.iterations,
            "seed": s.seed,
            "distributions": {
                p: {"mean": d.mean, "sigma": d.sigma}
                for p, d in sorted(s.distributions.items())
            },
        },
        "capacity_mean_bits": result.capacity_mean,
        "capacity_std_bits": result.capacity_std,
        "capacity_reduction_bits": result.capacity_reduction,
        "success_mean": result.success_mean,
        "success_std": result.success_std,
        "iterations_detail": {
            "capacity_bits": [float(c) for c in result.capacity_bits],
            "success_probability": [float(v) for v in result.success_probability],
        },
    }


def render_table(results, budget: BudgetReport | None = None) -> str:
    """Text table with one row per scenario."""
    header = (f"{'imperfection':<14} {'success_probability':>24} "
              f"{'capacity_bits':>24} {'reduction_bits':>15}")
    lines = [header, "-" * len(header)]
    for r in results:
        succ = f"{r.success_mean:.6g} +/- {r.success_std:.2g}"
        cap = f"{r.capacity_mean:.6g} +/- {r.capacity_std:.2g}"
        lines.append(f"{r.scenario.name:<14} {succ:>24} {cap:>24} "
                     f"{r.capacity_reduction:>15.6g}")
    if budget is not None:
        lines.append("")
        lines.append(f"naive budget: 2 - sum(reductions) = "
                     f"{budget.naive_capacity_bits:.6g} bits")
        lines.append(f"joint simulation: {budget.joint_capacity_bits:.6g} bits "
                     f"(difference {budget.discrepancy_bits:+.6g})")
    return "\n".join(lines) + "\n"
