"""Registered experiment scenarios: thin compositions of the core modules.

Each scenario executes a fixed, versioned set of named checks and emits CSV
data files plus a machine-readable ``report.json``. Check thresholds are
pinned here as constants, not configurable, so a passing report means the
same thing in every run. All floats are written with 17 significant digits;
the only nondeterministic output line is the optional timestamp header,
which can be suppressed for byte-identical regression runs.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy.stats import chisquare

from . import gas as gas_mod
from . import master as master_mod
from .config import ConfigError, ScenarioConfig
from .evolution import evolve_unitary
from .measurement import decohere, sample_outcome_counts
from .states import density_from_pure, shannon_entropy, vn_entropy

SCHEMA_VERSION = 1

# Pinned check thresholds.
CLOSED_FORM_TOL = 1e-8
EQUILIBRIUM_TOL = 1e-10
UNITARY_DRIFT_TOL = 1e-8
COLLAPSE_ENTROPY_FRACTION = 0.95
CHI_SQUARE_SIGNIFICANCE = 0.001
MEAN_K_TOL = 1.0
MACRO_ENTROPY_REL_TOL = 0.05
CROSS_PREDICTION_TV_TOL = 0.1

SCENARIO_CHECKS: dict[str, tuple[str, ...]] = {
    "two-state-relaxation": ("solver_matches_closed_form", "equilibrium_matches_rates"),
    "unitary-vs-collapse": ("unitary_entropy_drift", "collapse_entropy_reaches_threshold"),
    "born-statistics": ("chi_square_significance",),
    "gas-equilibrium": (
        "mean_left_count_in_band",
        "macro_entropy_near_max",
        "ledger_audits_clean",
        "master_equation_cross_prediction",
    ),
    "ledger-audit": ("ledger_invariants",),
}


@dataclass(frozen=True)
class CheckResult:
    """One named pass/fail verdict with the measured value and requirement."""

    name: str
    passed: bool
    measured: float | str
    requirement: str


@dataclass
class RunReport:
    """Machine-readable outcome of one scenario run."""

    scenario: str
    schema_version: int
    seed: int
    parameters: dict
    checks: list[CheckResult]
    outputs: list[str]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_json(self) -> str:
        payload = {
            "scenario": self.scenario,
            "schema_version": self.schema_version,
            "seed": self.seed,
            "passed": self.passed,
            "parameters": {k: _jsonable(v) for k, v in self.parameters.items()},
            "checks": [asdict(check) for check in self.checks],
            "outputs": self.outputs,
        }
        return json.dumps(payload, indent=2)


def _jsonable(value):
    if isinstance(value, (tuple, list)):
        return list(value)
    if isinstance(value, Path):
        return str(value)
    return value


def _f(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, columns, rows, timestamp: bool) -> None:
    with open(path, "w", newline="") as handle:
        if timestamp:
            handle.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
        writer = csv.writer(handle)
        writer.writerow(columns)
        writer.writerows(rows)


def run_scenario(config: ScenarioConfig) -> RunReport:
    """Execute one registered scenario and write its outputs and report."""
    if config.scenario not in _SCENARIOS:
        raise ConfigError(f"run.scenario: unknown scenario {config.scenario!r}")
    config.out_dir.mkdir(parents=True, exist_ok=True)
    checks, outputs = _SCENARIOS[config.scenario](config)

    expected = SCENARIO_CHECKS[config.scenario]
    produced = tuple(check.name for check in checks)
    if produced != expected:
        raise RuntimeError(
            f"scenario {config.scenario} produced checks {produced}, registered {expected}"
        )

    report = RunReport(
        scenario=config.scenario,
        schema_version=SCHEMA_VERSION,
        seed=config.seed,
        parameters=dict(config.params),
        checks=list(checks),
        outputs=list(outputs),
    )
    report_path = config.out_dir / "report.json"
    report_path.write_text(report.to_json() + "\n")
    return report


# --- scenario 1: two-state relaxation ---------------------------------------

def _two_state_relaxation(config: ScenarioConfig):
    p = config.params
    rates = np.array([[0.0, p["rate_to_1"]], [p["rate_to_2"], 0.0]])
    m = master_mod.build_master_operator(rates)
    p0 = np.array([p["p1_initial"], 1.0 - p["p1_initial"]])
    grid = np.linspace(0.0, p["t_max"], p["n_points"])

    p_eq = master_mod.equilibrium(m)
    rows = []
    worst = 0.0
    for t in grid:
        p_solver = master_mod.evolve_probabilities(m, p0, float(t))
        p_closed = master_mod.two_state_closed_form(p["rate_to_1"], p["rate_to_2"], p0, float(t))
        worst = max(worst, float(np.max(np.abs(p_solver - p_closed))))
        rows.append(
            [
                _f(t),
                _f(p_solver[0]),
                _f(p_solver[1]),
                _f(shannon_entropy(p_solver)),
                _f(master_mod.relative_entropy(p_solver, p_eq)),
            ]
        )

    total = p["rate_to_1"] + p["rate_to_2"]
    expected_eq = np.array([p["rate_to_1"] / total, p["rate_to_2"] / total])
    eq_gap = float(np.max(np.abs(p_eq - expected_eq)))

    out_file = config.out_dir / "two_state_relaxation.csv"
    _write_csv(
        out_file,
        ["t", "p1", "p2", "shannon_entropy", "relative_entropy_to_equilibrium"],
        rows,
        config.write_timestamp,
    )
    checks = [
        CheckResult(
            "solver_matches_closed_form",
            worst <= CLOSED_FORM_TOL,
            worst,
            f"max |p_solver - p_closed| <= {CLOSED_FORM_TOL:g} on the grid",
        ),
        CheckResult(
            "equilibrium_matches_rates",
            eq_gap <= EQUILIBRIUM_TOL,
            eq_gap,
            f"max |p_eq - rates ratio| <= {EQUILIBRIUM_TOL:g}",
        ),
    ]
    return checks, [out_file.name]


# --- scenario 2: unitary vs collapse -----------------------------------------

def _unitary_vs_collapse(config: ScenarioConfig):
    p = config.params
    gap = p["gap"]
    rate = p["collapse_rate"]
    t_max = p["t_max"]
    if rate <= 0.0 or gap == 0.0 or t_max <= 0.0:
        raise ConfigError("unitary-vs-collapse: gap, collapse_rate and t_max must be nonzero")

    hamiltonian = np.array([[gap / 2.0, 0.0], [0.0, -gap / 2.0]], dtype=complex)
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    rho0 = density_from_pure(plus)
    # Collapse basis deliberately non-commuting with the Hamiltonian.
    basis = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)

    # Branch A: pure Liouville evolution, entropy must stay put.
    entropy_0 = vn_entropy(rho0)
    rho = rho0
    drift = 0.0
    dt = t_max / p["n_unitary_steps"]
    for _ in range(p["n_unitary_steps"]):
        rho = evolve_unitary(rho, hamiltonian, dt)
        drift = max(drift, abs(vn_entropy(rho) - entropy_0))

    # Branch B: same Hamiltonian, interrupted by Poisson-clocked collapses.
    grid = np.linspace(0.0, t_max, p["n_samples"])
    mean_entropy = np.zeros(grid.size)
    children = np.random.SeedSequence(config.seed).spawn(p["n_seeds"])
    for child in children:
        rng = np.random.default_rng(child)
        times = [0.0]
        entropies = [entropy_0]
        rho = rho0
        t = 0.0
        while True:
            t += -math.log1p(-rng.random()) / rate
            if t > t_max:
                break
            rho = decohere(evolve_unitary(rho, hamiltonian, t - times[-1]), basis)
            times.append(t)
            entropies.append(vn_entropy(rho))
        idx = np.searchsorted(times, grid, side="right") - 1
        mean_entropy += np.asarray(entropies)[idx]
    mean_entropy /= p["n_seeds"]

    unitary_entropy = [vn_entropy(evolve_unitary(rho0, hamiltonian, float(t))) for t in grid]
    out_file = config.out_dir / "unitary_vs_collapse.csv"
    _write_csv(
        out_file,
        ["t", "entropy_unitary", "mean_entropy_collapse"],
        [[_f(t), _f(su), _f(sc)] for t, su, sc in zip(grid, unitary_entropy, mean_entropy)],
        config.write_timestamp,
    )

    target = COLLAPSE_ENTROPY_FRACTION * math.log(2.0)
    final_mean = float(mean_entropy[-1])
    checks = [
        CheckResult(
            "unitary_entropy_drift",
            drift < UNITARY_DRIFT_TOL,
            drift,
            f"max |S(t) - S(0)| < {UNITARY_DRIFT_TOL:g} over {p['n_unitary_steps']} steps",
        ),
        CheckResult(
            "collapse_entropy_reaches_threshold",
            final_mean >= target,
            final_mean,
            f"ensemble-mean S at t = {t_max:g} >= {COLLAPSE_ENTROPY_FRACTION} * ln 2",
        ),
    ]
    return checks, [out_file.name]


# --- scenario 3: born statistics ---------------------------------------------

def _born_statistics(config: ScenarioConfig):
    p = config.params
    weights = np.asarray(p["weights"], dtype=float)
    n_draws = p["n_draws"]
    if n_draws < 1:
        raise ConfigError("born-statistics.n_draws: must be >= 1")
    rng = np.random.default_rng(config.seed)
    counts = sample_outcome_counts(weights, n_draws, rng)
    expected = weights * n_draws
    statistic, p_value = chisquare(counts, expected)

    out_file = config.out_dir / "born_statistics.csv"
    _write_csv(
        out_file,
        ["outcome", "weight", "observed", "expected", "frequency"],
        [
            [k, _f(weights[k]), int(counts[k]), _f(expected[k]), _f(counts[k] / n_draws)]
            for k in range(weights.size)
        ],
        config.write_timestamp,
    )
    checks = [
        CheckResult(
            "chi_square_significance",
            bool(p_value >= CHI_SQUARE_SIGNIFICANCE),
            float(p_value),
            f"chi-square p-value >= {CHI_SQUARE_SIGNIFICANCE} "
            f"(statistic {statistic:.6g}, {n_draws} draws)",
        ),
    ]
    return checks, [out_file.name]


# --- scenario 4: gas equilibrium ---------------------------------------------

def _gas_equilibrium(config: ScenarioConfig):
    p = config.params
    if p["n_molecules"] % 2 != 0:
        raise ConfigError("gas-equilibrium.n_molecules: must be even for the k macrostate")
    coupling = None
    if p["coupling_table"]:
        _labels, coupling = master_mod.rate_matrix_from_csv(p["coupling_table"])
    gas_config = gas_mod.GasConfig(
        n_molecules=p["n_molecules"],
        n_excited=p["n_excited"],
        decay_rate=p["decay_rate"],
        t_max=p["t_max"],
        seed=config.seed,
        delay=p["delay"],
        coupling=coupling,
    )
    n_seeds = p["n_seeds"]
    if n_seeds < 100:
        raise ConfigError("gas-equilibrium.n_seeds: ensemble statistics need >= 100")
    check_times = np.asarray(p["check_times"], dtype=float)
    if np.any(check_times > gas_config.t_max) or np.any(check_times < 0.0):
        raise ConfigError("gas-equilibrium.check_times: must lie in [0, t_max]")

    grid = np.linspace(0.0, gas_config.t_max, p["n_samples"])
    counts_grid = np.empty((n_seeds, grid.size), dtype=int)
    counts_check = np.empty((n_seeds, check_times.size), dtype=int)
    rate_parts = []
    violation_count = 0
    first_member = None

    for i, (trajectory, events) in enumerate(gas_mod.iter_ensemble(gas_config, n_seeds)):
        counts_grid[i] = trajectory.left_counts_at(grid)
        counts_check[i] = trajectory.left_counts_at(check_times)
        audit = gas_mod.audit_ledger(
            events,
            n_molecules=gas_config.n_molecules,
            initial_excited=range(gas_config.n_excited),
        )
        violation_count += len(audit.violations)
        if events:
            rate_parts.append(gas_mod.empirical_rates(gas_config, events))
        if i == 0:
            first_member = (trajectory, events)

    series = gas_mod.summarize_ensemble(gas_config, grid, counts_grid)

    # Equilibrium band checks on the late-time samples.
    late = grid >= p["equilibration_time"]
    if not np.any(late):
        raise ConfigError("gas-equilibrium.equilibration_time: beyond every sample time")
    target_k = gas_config.n_excited * (gas_config.n_molecules // 2) / gas_config.n_molecules
    mean_k_gap = float(np.max(np.abs(series.mean_left_count[late] - target_k)))

    half = gas_config.n_molecules // 2
    k_lo = max(0, gas_config.n_excited - half)
    k_hi = min(gas_config.n_excited, half)
    entropy_max = max(
        gas_mod.macrostate_entropy(k, gas_config) for k in range(k_lo, k_hi + 1)
    )
    entropy_gap = float(
        np.max(np.abs(series.mean_macro_entropy[late] - entropy_max)) / entropy_max
    )

    # Master-equation cross-prediction from the pooled empirical rates.
    pooled = gas_mod.combine_empirical_rates(rate_parts)
    m_hat = master_mod.build_master_operator(pooled.rates)
    n_labels = pooled.n_labels
    p0 = np.zeros(n_labels)
    p0[gas_mod.left_half_count(gas_mod.init_gas(gas_config))] = 1.0
    tv_worst = 0.0
    for j, t in enumerate(check_times):
        predicted = master_mod.evolve_probabilities(m_hat, p0, float(t))
        empirical = np.bincount(counts_check[:, j], minlength=n_labels) / n_seeds
        tv_worst = max(tv_worst, 0.5 * float(np.abs(predicted - empirical).sum()))

    trajectory0, events0 = first_member
    ledger_file = config.out_dir / "gas_ledger_member0.csv"
    trajectory_file = config.out_dir / "gas_trajectory_member0.csv"
    series_file = config.out_dir / "gas_ensemble_series.csv"
    rates_file = config.out_dir / "gas_empirical_rates.csv"
    gas_mod.write_ledger_csv(ledger_file, events0, header_comment=_stamp_comment(config))
    gas_mod.write_trajectory_csv(trajectory_file, trajectory0, header_comment=_stamp_comment(config))
    _write_csv(
        series_file,
        ["t", "k_distribution_entropy", "mean_macrostate_entropy", "mean_k"],
        [
            [_f(t), _f(s), _f(sm), _f(mk)]
            for t, s, sm, mk in zip(
                series.times, series.k_entropy, series.mean_macro_entropy, series.mean_left_count
            )
        ],
        config.write_timestamp,
    )
    _write_rate_matrix_csv(rates_file, pooled.rates, config.write_timestamp)

    checks = [
        CheckResult(
            "mean_left_count_in_band",
            mean_k_gap <= MEAN_K_TOL,
            mean_k_gap,
            f"|mean k - {target_k:g}| <= {MEAN_K_TOL:g} at t >= {p['equilibration_time']:g}",
        ),
        CheckResult(
            "macro_entropy_near_max",
            entropy_gap <= MACRO_ENTROPY_REL_TOL,
            entropy_gap,
            f"mean macrostate entropy within {MACRO_ENTROPY_REL_TOL:.0%} of the scan maximum",
        ),
        CheckResult(
            "ledger_audits_clean",
            violation_count == 0,
            float(violation_count),
            "zero invariant violations across every member ledger",
        ),
        CheckResult(
            "master_equation_cross_prediction",
            tv_worst <= CROSS_PREDICTION_TV_TOL,
            tv_worst,
            f"total variation <= {CROSS_PREDICTION_TV_TOL:g} at t in "
            f"{{{', '.join(f'{t:g}' for t in check_times)}}}",
        ),
    ]
    outputs = [ledger_file.name, trajectory_file.name, series_file.name, rates_file.name]
    return checks, outputs


def _stamp_comment(config: ScenarioConfig) -> str | None:
    if not config.write_timestamp:
        return None
    return f"generated {datetime.now(timezone.utc).isoformat()}"


def _write_rate_matrix_csv(path: Path, rates: np.ndarray, timestamp: bool) -> None:
    labels = [f"k{j}" for j in range(rates.shape[0])]
    _write_csv(path, labels, [[_f(x) for x in row] for row in rates], timestamp)


# --- scenario 5: ledger audit --------------------------------------------------

def _ledger_audit(config: ScenarioConfig):
    p = config.params
    try:
        rows = gas_mod.read_ledger_raw(p["ledger"])
    except OSError as exc:
        raise ConfigError(f"ledger-audit.ledger: cannot read ({exc})") from exc
    except ValueError as exc:
        raise ConfigError(f"ledger-audit.ledger: {exc}") from exc
    audit = gas_mod.audit_ledger(rows, n_molecules=p["n_molecules"])
    detail = "; ".join(audit.violations[:5])
    checks = [
        CheckResult(
            "ledger_invariants",
            audit.passed,
            f"{len(audit.violations)} violations in {audit.n_events} events"
            + (f": {detail}" if detail else ""),
            "conservation chain, t_e < t_a, ordered emissions, valid weights",
        ),
    ]
    return checks, []


_SCENARIOS = {
    "two-state-relaxation": _two_state_relaxation,
    "unitary-vs-collapse": _unitary_vs_collapse,
    "born-statistics": _born_statistics,
    "gas-equilibrium": _gas_equilibrium,
    "ledger-audit": _ledger_audit,
}


def list_scenarios() -> list[str]:
    return sorted(_SCENARIOS)
