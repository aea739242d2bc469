"""Born-rule registration simulation and the CHSH distinguishability demo.

Sampling a gemenge draws a leaf first (with the recorded branch
probabilities) and only then an outcome from that leaf's Born distribution,
never from the resolved state.  Ensembles are reproducible: outcomes are
generated from numpy PCG64 streams keyed by ``(seed, block_index)`` over a
fixed block partition of the sample range, so the merged report is identical
for any worker count.

The centerpiece, :func:`distinguishability_demo`, compares a singlet-reduced
(improper) qubit state with a z-basis gemenge that resolves to the same
operator: all local Pauli averages agree, but the exact CHSH value of the
composite separates the entangled preparation from the mixture.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    CODE_BAD_SEED,
    CODE_NOT_UNIT_VECTOR,
    CODE_PROBABILITY_DEFECT,
    DimensionMismatchError,
    ValidationError,
)
from .preparation import Leaf, PreparationNode, _flatten, is_decomposable, mix, reduce_subsystem, resolve_state
from .states import StateOperator, pure_state

PAULI_X = linalg.as_matrix([[0, 1], [1, 0]])
PAULI_Y = linalg.as_matrix([[0, -1j], [1j, 0]])
PAULI_Z = linalg.as_matrix([[1, 0], [0, -1]])

#: eigenvalues closer than this merge into one outcome projector
DEGENERACY_TOL = 1e-9
#: samples per RNG stream block in run_ensemble
ENSEMBLE_BLOCK = 4096


def unit_vector3(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64).reshape(-1)
    if arr.shape != (3,) or not np.isfinite(arr).all():
        raise ValidationError(CODE_NOT_UNIT_VECTOR, f"expected a finite 3-vector, got {v!r}")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > 1e-9:
        raise ValidationError(
            CODE_NOT_UNIT_VECTOR,
            f"direction must be unit length within 1e-9, norm is {norm!r}",
            amount=abs(norm - 1.0),
        )
    out = arr.copy()
    out.setflags(write=False)
    return out


def spin_observable(direction) -> np.ndarray:
    """Spin component along a unit 3-vector: x*sigma_x + y*sigma_y + z*sigma_z."""
    d = unit_vector3(direction)
    return linalg.require_hermitian(d[0] * PAULI_X + d[1] * PAULI_Y + d[2] * PAULI_Z)


def singlet_state(tol: float = 1e-9) -> StateOperator:
    """The two-qubit singlet projector, (|01> - |10>)/sqrt(2) as a state."""
    return pure_state(np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0), tol)


def z_basis_gemenge(tol: float = 1e-9) -> PreparationNode:
    """Proper mixture of |01><01| and |10><10| with equal weights.

    Resolves to diag(0, 1/2, 1/2, 0), the same composite operator profile a
    singlet leaves on its subsystems, but carried by an actual statistical
    decomposition.
    """
    up_down = pure_state([0.0, 1.0, 0.0, 0.0], tol)
    down_up = pure_state([0.0, 0.0, 1.0, 0.0], tol)
    return mix([(0.5, Leaf(up_down, "up-down")), (0.5, Leaf(down_up, "down-up"))])


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian observable with its spectral data.

    ``projectors`` pairs each merged eigenvalue with the projection onto
    its eigenspace; eigenvalues closer than 1e-9 share one projector.
    """

    matrix: np.ndarray
    spectral: linalg.HermitianEigensystem
    projectors: tuple[tuple[float, np.ndarray], ...]

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def outcomes(self) -> tuple[float, ...]:
        return tuple(value for value, _ in self.projectors)


def observable(m) -> Observable:
    """Build an Observable, merging degenerate eigenvalues into joint projectors."""
    eig = linalg.hermitian_eig(m)
    vals, vecs = eig.eigenvalues, eig.eigenvectors
    d = vals.shape[0]
    groups: list[tuple[int, int]] = []
    start = 0
    for i in range(1, d):
        if vals[i] - vals[i - 1] > DEGENERACY_TOL:
            groups.append((start, i))
            start = i
    groups.append((start, d))
    projectors = []
    for lo, hi in groups:
        cols = vecs[:, lo:hi]
        proj = cols @ cols.conj().T
        proj.setflags(write=False)
        projectors.append((float(vals[lo:hi].mean()), proj))
    total = sum(p for _, p in projectors)
    if linalg.max_entry_distance(total, np.eye(d)) > 1e-9:
        raise ValidationError(CODE_PROBABILITY_DEFECT, "spectral projectors do not sum to identity")
    for i in range(len(projectors)):
        for j in range(i + 1, len(projectors)):
            cross = float(np.max(np.abs(projectors[i][1] @ projectors[j][1])))
            if cross > 1e-9:
                raise ValidationError(CODE_PROBABILITY_DEFECT, "spectral projectors are not orthogonal")
    return Observable(eig.reconstruct(), eig, tuple(projectors))


def born_distribution(obs: Observable, t: StateOperator) -> list[tuple[float, float]]:
    """Outcome probabilities tr[P_i T] per merged eigenvalue, ascending.

    Tiny negative probabilities (>= -1e-12) are clipped to zero and the
    distribution is renormalized when the total is within 1e-9 of one;
    anything worse is a probability defect and rejected.
    """
    if obs.dim != t.dim:
        raise DimensionMismatchError(f"observable dim {obs.dim} vs state dim {t.dim}")
    probs = []
    for value, proj in obs.projectors:
        p = float(np.real(np.trace(proj @ t.matrix)))
        if p < -1e-12:
            raise ValidationError(
                CODE_PROBABILITY_DEFECT,
                f"outcome probability {p!r} below -1e-12",
                amount=p,
            )
        probs.append(max(p, 0.0))
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(
            CODE_PROBABILITY_DEFECT,
            f"probabilities sum to {total!r}, off by {abs(total - 1.0):.3e}",
            amount=abs(total - 1.0),
        )
    probs = [p / total for p in probs]
    return [(value, p) for (value, _), p in zip(obs.projectors, probs)]


def expectation(obs, t: StateOperator) -> float:
    """Average tr[A T] of an observable in a state, as a real number."""
    a = obs.matrix if isinstance(obs, Observable) else linalg.require_hermitian(obs)
    if a.shape[0] != t.dim:
        raise DimensionMismatchError(f"observable dim {a.shape[0]} vs state dim {t.dim}")
    val = complex(np.trace(a @ t.matrix))
    if abs(val.imag) > 1e-10:
        raise ValidationError(
            CODE_PROBABILITY_DEFECT,
            f"average has imaginary residue {val.imag!r}",
            amount=abs(val.imag),
        )
    return float(val.real)


def _check_seed(seed) -> int:
    try:
        value = int(seed)
    except (TypeError, ValueError):
        raise ValidationError(CODE_BAD_SEED, f"seed must be an integer, got {seed!r}") from None
    if not (0 <= value < 2**64):
        raise ValidationError(CODE_BAD_SEED, f"seed must fit in unsigned 64 bits, got {value}")
    return value


@dataclass(frozen=True, eq=False)
class EnsembleReport:
    """Empirical registration statistics next to the exact prediction."""

    n_samples: int
    outcome_counts: tuple[tuple[float, int], ...]
    empirical_mean: float
    exact_mean: float
    std_error: float
    seed: int

    def to_json(self) -> dict:
        counts: dict[str, int] = {}
        for value, count in self.outcome_counts:
            key = f"{value:.12g}"
            counts[key] = counts.get(key, 0) + count
        return {
            "n_samples": self.n_samples,
            "outcome_counts": counts,
            "empirical_mean": self.empirical_mean,
            "exact_mean": self.exact_mean,
            "std_error": self.std_error,
            "seed": self.seed,
        }


def _block_counts(block_index, size, seed, leaf_probs, outcome_probs, n_outcomes):
    stream = np.random.default_rng([seed, block_index])
    counts = np.zeros(n_outcomes, dtype=np.int64)
    leaf_idx = stream.choice(len(leaf_probs), size=size, p=leaf_probs)
    for ell in range(len(leaf_probs)):
        m = int(np.count_nonzero(leaf_idx == ell))
        if m:
            outs = stream.choice(n_outcomes, size=m, p=outcome_probs[ell])
            counts += np.bincount(outs, minlength=n_outcomes)
    return counts


def run_ensemble(
    prep: PreparationNode,
    obs: Observable,
    n: int,
    seed: int,
    workers: int = 1,
) -> EnsembleReport:
    """Register ``n`` samples: leaf drawn per the gemenge, outcome per Born rule.

    Sample indices are split into fixed blocks of :data:`ENSEMBLE_BLOCK`;
    block ``b`` consumes the PCG64 stream seeded by ``(seed, b)``, so the
    report is byte-for-byte reproducible and independent of ``workers``.
    """
    n = int(n)
    if n < 1:
        raise ValidationError(CODE_BAD_SEED, f"need at least one sample, got {n}")
    seed = _check_seed(seed)
    if prep.dim != obs.dim:
        raise DimensionMismatchError(f"preparation dim {prep.dim} vs observable dim {obs.dim}")

    leaves = list(_flatten(prep))
    weights = np.array([w for w, _, _ in leaves], dtype=np.float64)
    leaf_probs = weights / weights.sum()
    values = np.array(obs.outcomes(), dtype=np.float64)
    outcome_probs = []
    for _, state, _ in leaves:
        dist = born_distribution(obs, state)
        outcome_probs.append(np.array([p for _, p in dist], dtype=np.float64))

    n_blocks = (n + ENSEMBLE_BLOCK - 1) // ENSEMBLE_BLOCK
    sizes = [min(ENSEMBLE_BLOCK, n - b * ENSEMBLE_BLOCK) for b in range(n_blocks)]

    def job(b):
        return _block_counts(b, sizes[b], seed, leaf_probs, outcome_probs, len(values))

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            block_results = list(pool.map(job, range(n_blocks)))
    else:
        block_results = [job(b) for b in range(n_blocks)]
    counts = np.sum(block_results, axis=0)

    empirical_mean = float(np.dot(counts, values) / n)
    if n > 1:
        second = float(np.dot(counts, values * values))
        variance = max((second - n * empirical_mean**2) / (n - 1), 0.0)
        std_error = math.sqrt(variance / n)
    else:
        std_error = 0.0
    exact_mean = expectation(obs, resolve_state(prep))
    return EnsembleReport(
        n_samples=n,
        outcome_counts=tuple((float(v), int(c)) for v, c in zip(values, counts)),
        empirical_mean=empirical_mean,
        exact_mean=exact_mean,
        std_error=std_error,
        seed=seed,
    )


@dataclass(frozen=True, eq=False)
class CHSHConfig:
    """Four analyzer directions plus the sampling budget and seed."""

    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray
    n_samples: int
    seed: int

    def directions(self) -> dict[str, np.ndarray]:
        return {"a": self.a, "a_prime": self.a_prime, "b": self.b, "b_prime": self.b_prime}

    def to_json(self) -> dict:
        out = {name: [float(x) for x in vec] for name, vec in self.directions().items()}
        out["n_samples"] = self.n_samples
        out["seed"] = self.seed
        return out


def chsh_config(a, a_prime, b, b_prime, n_samples: int = 0, seed: int = 0) -> CHSHConfig:
    n_samples = int(n_samples)
    if n_samples < 0:
        raise ValidationError(CODE_BAD_SEED, f"n_samples must be nonnegative, got {n_samples}")
    return CHSHConfig(
        a=unit_vector3(a),
        a_prime=unit_vector3(a_prime),
        b=unit_vector3(b),
        b_prime=unit_vector3(b_prime),
        n_samples=n_samples,
        seed=_check_seed(seed),
    )


def tsirelson_config(n_samples: int = 0, seed: int = 0) -> CHSHConfig:
    """Angles that maximize the singlet's CHSH value, as a convention.

    a = z, a' = x, b = -(z + x)/sqrt(2), b' = (z - x)/sqrt(2); the exact
    value for the singlet is then 2*sqrt(2).
    """
    s = 1.0 / math.sqrt(2.0)
    return chsh_config(
        a=(0.0, 0.0, 1.0),
        a_prime=(1.0, 0.0, 0.0),
        b=(-s, 0.0, -s),
        b_prime=(-s, 0.0, s),
        n_samples=n_samples,
        seed=seed,
    )


_CORRELATOR_KEYS = ("E_a_b", "E_a_bp", "E_ap_b", "E_ap_bp")


def _correlator_pairs(cfg: CHSHConfig):
    return (
        ("E_a_b", cfg.a, cfg.b),
        ("E_a_bp", cfg.a, cfg.b_prime),
        ("E_ap_b", cfg.a_prime, cfg.b),
        ("E_ap_bp", cfg.a_prime, cfg.b_prime),
    )


def _pair_observable(x, y) -> Observable:
    return observable(linalg.tensor_product(spin_observable(x), spin_observable(y)))


def chsh_correlators(t: StateOperator, cfg: CHSHConfig) -> dict[str, float]:
    """Exact correlators E(x, y) = tr[(x.sigma (x) y.sigma) T] for the four settings."""
    if t.dim != 4:
        raise DimensionMismatchError(f"CHSH needs a two-qubit state, got dim {t.dim}")
    return {key: expectation(_pair_observable(x, y), t) for key, x, y in _correlator_pairs(cfg)}


def chsh_value(t: StateOperator, cfg: CHSHConfig) -> float:
    """Exact S = E(a,b) - E(a,b') + E(a',b) + E(a',b'), no sampling."""
    e = chsh_correlators(t, cfg)
    return e["E_a_b"] - e["E_a_bp"] + e["E_ap_b"] + e["E_ap_bp"]


@dataclass(frozen=True, eq=False)
class SampledCHSH:
    """CHSH estimate from finite ensembles, one per correlator."""

    correlators: tuple[tuple[str, EnsembleReport], ...]
    value: float
    exact_value: float
    std_error: float

    def to_json(self) -> dict:
        return {
            "correlators": {key: report.to_json() for key, report in self.correlators},
            "value": self.value,
            "exact_value": self.exact_value,
            "std_error": self.std_error,
        }


def sampled_chsh(prep: PreparationNode, cfg: CHSHConfig, workers: int = 1) -> SampledCHSH:
    """Estimate S by running an ensemble per correlator.

    Correlator k draws its own 64-bit seed from ``SeedSequence([seed, k])``,
    so the whole estimate is reproducible from the config seed alone.
    """
    if cfg.n_samples < 1:
        raise ValidationError(CODE_BAD_SEED, "sampled CHSH needs n_samples >= 1")
    signs = {"E_a_b": 1.0, "E_a_bp": -1.0, "E_ap_b": 1.0, "E_ap_bp": 1.0}
    reports = []
    total = 0.0
    var = 0.0
    exact = 0.0
    for k, (key, x, y) in enumerate(_correlator_pairs(cfg)):
        child_seed = int(np.random.SeedSequence([cfg.seed, k]).generate_state(1, dtype=np.uint64)[0])
        report = run_ensemble(prep, _pair_observable(x, y), cfg.n_samples, child_seed, workers)
        reports.append((key, report))
        total += signs[key] * report.empirical_mean
        exact += signs[key] * report.exact_mean
        var += report.std_error**2
    return SampledCHSH(
        correlators=tuple(reports),
        value=total,
        exact_value=exact,
        std_error=math.sqrt(var),
    )


@dataclass(frozen=True, eq=False)
class DistinguishReport:
    """Side-by-side comparison of an improper and a proper mixture.

    ``marginals`` lists every Pauli average on subsystem 1 for both
    preparations; ``exact`` holds the noiseless CHSH values of the two
    composite states; ``sampled`` the finite-ensemble estimates (absent when
    the config requests no samples).
    """

    config: CHSHConfig
    marginals: tuple[tuple[str, float, float, float], ...]
    max_marginal_diff: float
    decomposable: tuple[tuple[str, bool], ...]
    exact: tuple[tuple[str, dict[str, float], float], ...]
    sampled: tuple[tuple[str, SampledCHSH], ...] | None
    conclusion: str

    def exact_values(self) -> dict[str, float]:
        return {name: value for name, _, value in self.exact}

    def to_json(self) -> dict:
        out: dict = {
            "config": self.config.to_json(),
            "local_marginals": [
                {"pauli": name, "singlet_reduced": s, "gemenge": g, "abs_diff": d}
                for name, s, g, d in self.marginals
            ],
            "max_marginal_diff": self.max_marginal_diff,
            "decomposable": {name: flag for name, flag in self.decomposable},
            "exact_chsh": {
                name: {"correlators": correlators, "value": value}
                for name, correlators, value in self.exact
            },
            "conclusion": self.conclusion,
        }
        if self.sampled is not None:
            out["sampled_chsh"] = {name: sample.to_json() for name, sample in self.sampled}
        return out


CONCLUSION = (
    "subsystem registrations cannot decide decomposability; "
    "composite registrations can"
)


def distinguishability_demo(cfg: CHSHConfig | None = None, workers: int = 1) -> DistinguishReport:
    """Run the full proper-vs-improper comparison.

    The singlet preparation and the z-basis gemenge have identical
    subsystem-1 state operators (both 1/2 I), so every local average
    coincides; their composite states differ, and the exact CHSH values
    expose it whenever the entangled value passes the separable bound 2.
    """
    if cfg is None:
        cfg = tsirelson_config()
    singlet_prep = Leaf(singlet_state(), "singlet")
    gemenge = z_basis_gemenge()

    reduced_singlet = reduce_subsystem(singlet_prep, (2, 2), "B")
    reduced_gemenge = reduce_subsystem(gemenge, (2, 2), "B")
    singlet_marginal = resolve_state(reduced_singlet)
    gemenge_marginal = resolve_state(reduced_gemenge)

    marginals = []
    worst = 0.0
    for name, pauli in (("x", PAULI_X), ("y", PAULI_Y), ("z", PAULI_Z)):
        e_singlet = expectation(pauli, singlet_marginal)
        e_gemenge = expectation(pauli, gemenge_marginal)
        diff = abs(e_singlet - e_gemenge)
        worst = max(worst, diff)
        marginals.append((name, e_singlet, e_gemenge, diff))

    exact = []
    for name, state in (("singlet", singlet_state()), ("gemenge", resolve_state(gemenge))):
        correlators = chsh_correlators(state, cfg)
        value = correlators["E_a_b"] - correlators["E_a_bp"] + correlators["E_ap_b"] + correlators["E_ap_bp"]
        exact.append((name, correlators, value))

    sampled = None
    if cfg.n_samples > 0:
        sampled = (
            ("singlet", sampled_chsh(singlet_prep, cfg, workers)),
            ("gemenge", sampled_chsh(gemenge, cfg, workers)),
        )

    return DistinguishReport(
        config=cfg,
        marginals=tuple(marginals),
        max_marginal_diff=worst,
        decomposable=(
            ("singlet_reduced", is_decomposable(reduced_singlet)),
            ("gemenge_reduced", is_decomposable(reduced_gemenge)),
        ),
        exact=tuple(exact),
        sampled=sampled,
        conclusion=CONCLUSION,
    )
