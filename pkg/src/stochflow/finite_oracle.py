"""Exact discrete-time, finite-state, finite-noise testbed.

Every quantity here is a ``fractions.Fraction`` and every check is an exact
equality, never a tolerance.  Noise symbols are i.i.d. across time steps, so
past- and future-generated information are independent by construction, and
the one-step kernels compose exactly as matrix products.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic import DyadicTime
from .errors import (
    ConfigError,
    EnumerationLimitError,
    MeasurabilityError,
    UnsupportedCaseError,
)
from .flow_core import FlowModelBase
from .keyed import chain, uniform_from_key

ENUMERATION_LIMIT = 1 << 16

_TAG_SYMBOL = 0x53594D42

ONE = Fraction(1)
ZERO = Fraction(0)


@dataclass(frozen=True)
class FiniteFlow:
    """Finite random dynamical system with time-periodic step maps.

    ``step_maps[k][sigma]`` is the state map applied at times congruent to k
    modulo ``period`` when symbol ``sigma`` is drawn.
    """

    n_states: int
    probs: tuple
    step_maps: tuple
    period: int = 1

    def __post_init__(self):
        if self.n_states < 1:
            raise ConfigError("need at least one state")
        probs = tuple(Fraction(p) for p in self.probs)
        if sum(probs, ZERO) != ONE or any(p < 0 for p in probs):
            raise ConfigError("symbol probabilities must be nonnegative and sum to 1 exactly")
        object.__setattr__(self, "probs", probs)
        if len(self.step_maps) != self.period:
            raise ConfigError("one bank of step maps per time index mod period")
        for bank in self.step_maps:
            if len(bank) != len(probs):
                raise ConfigError("one step map per symbol")
            for m in bank:
                if len(m) != self.n_states or any(not (0 <= y < self.n_states) for y in m):
                    raise ConfigError("step maps must be total on the state set")

    @property
    def n_symbols(self) -> int:
        return len(self.probs)

    def step_map(self, time_index: int, symbol: int) -> tuple:
        return self.step_maps[time_index % self.period][symbol]


@dataclass(frozen=True)
class ExactMeasure:
    masses: tuple

    def __post_init__(self):
        masses = tuple(Fraction(m) for m in self.masses)
        if any(m < 0 for m in masses):
            raise ConfigError("masses must be nonnegative")
        if sum(masses, ZERO) != ONE:
            raise ConfigError("masses must sum to 1 exactly")
        object.__setattr__(self, "masses", masses)

    @classmethod
    def point(cls, n_states: int, x: int) -> "ExactMeasure":
        return cls(tuple(ONE if i == x else ZERO for i in range(n_states)))

    @classmethod
    def uniform(cls, n_states: int) -> "ExactMeasure":
        return cls((Fraction(1, n_states),) * n_states)

    def pushforward(self, state_map: tuple) -> "ExactMeasure":
        out = [ZERO] * len(self.masses)
        for x, m in enumerate(self.masses):
            out[state_map[x]] += m
        return ExactMeasure(tuple(out))

    def expect(self, f_values) -> Fraction:
        return sum((m * Fraction(f) for m, f in zip(self.masses, f_values)), ZERO)

    def tv_distance(self, other: "ExactMeasure") -> Fraction:
        return sum((abs(a - b) for a, b in zip(self.masses, other.masses)), ZERO) / 2


def compose_word_map(flow: FiniteFlow, word, s: int) -> tuple:
    """State map of the symbol word applied over times s, s+1, ..."""
    current = tuple(range(flow.n_states))
    for offset, sigma in enumerate(word):
        step = flow.step_map(s + offset, sigma)
        current = tuple(step[x] for x in current)
    return current


def ff_evolve(flow: FiniteFlow, word, s: int, t: int, state: int) -> int:
    """Left-to-right composition of the step maps named by the word."""
    if t < s:
        raise ConfigError("ff_evolve requires s <= t")
    if len(word) < t - s:
        raise ConfigError(f"word of length {len(word)} does not cover [{s}, {t})")
    x = state
    for offset in range(t - s):
        x = flow.step_map(s + offset, word[offset])[x]
    return x


def one_step_kernel(flow: FiniteFlow, time_index: int) -> tuple:
    """Row-stochastic transition matrix of the step at ``time_index``."""
    n = flow.n_states
    rows = []
    for x in range(n):
        row = [ZERO] * n
        for sigma, p in enumerate(flow.probs):
            row[flow.step_map(time_index, sigma)[x]] += p
        rows.append(tuple(row))
    return tuple(rows)


def kernel_product(a: tuple, b: tuple) -> tuple:
    """(a b)[x][y] = sum_z a[x][z] b[z][y]: transport by a, then by b."""
    n = len(a)
    return tuple(
        tuple(sum((a[x][z] * b[z][y] for z in range(n)), ZERO) for y in range(n))
        for x in range(n)
    )


def kernel_between(flow: FiniteFlow, s: int, t: int) -> tuple:
    n = flow.n_states
    out = tuple(tuple(ONE if x == y else ZERO for y in range(n)) for x in range(n))
    for tau in range(s, t):
        out = kernel_product(out, one_step_kernel(flow, tau))
    return out


def apply_kernel(mu: ExactMeasure, kernel: tuple) -> ExactMeasure:
    n = len(kernel)
    return ExactMeasure(
        tuple(sum((mu.masses[x] * kernel[x][y] for x in range(n)), ZERO) for y in range(n))
    )


def chapman_check(flow: FiniteFlow, s: int, t: int, u: int) -> bool:
    """Exact kernel factorization over an intermediate time."""
    return kernel_between(flow, s, u) == kernel_product(
        kernel_between(flow, s, t), kernel_between(flow, t, u)
    )


@dataclass
class PushforwardResult:
    word_measures: dict
    kernel: tuple
    mean_measure: ExactMeasure


def ff_pushforward(flow: FiniteFlow, mu: ExactMeasure, s: int, t: int,
                   limit: int = ENUMERATION_LIMIT) -> PushforwardResult:
    """Exact image measure per symbol word plus the averaged kernel."""
    depth = t - s
    if depth < 0:
        raise ConfigError("ff_pushforward requires s <= t")
    if flow.n_symbols**depth > limit:
        raise EnumerationLimitError(
            f"{flow.n_symbols}**{depth} words exceed the enumeration limit {limit}"
        )
    word_measures = {}
    for word in itertools.product(range(flow.n_symbols), repeat=depth):
        word_measures[word] = mu.pushforward(compose_word_map(flow, word, s))
    kernel = kernel_between(flow, s, t)
    return PushforwardResult(word_measures, kernel, apply_kernel(mu, kernel))


# -- evolution families of the averaged kernels --------------------------------

@dataclass
class EsmSolution:
    unique: bool
    family: tuple | None
    extremes: tuple
    note: str

    def at(self, time_index: int) -> ExactMeasure:
        if not self.unique:
            raise UnsupportedCaseError("family is not unique: " + self.note)
        return self.family[time_index % len(self.family)]


def _closed_classes(kernel: tuple) -> list:
    n = len(kernel)
    reach = [[kernel[x][y] > 0 or x == y for y in range(n)] for x in range(n)]
    for z in range(n):
        for x in range(n):
            if reach[x][z]:
                row_z = reach[z]
                row_x = reach[x]
                for y in range(n):
                    if row_z[y]:
                        row_x[y] = True
    classes = []
    seen = [False] * n
    for x in range(n):
        if seen[x]:
            continue
        cls = [y for y in range(n) if reach[x][y] and reach[y][x]]
        for y in cls:
            seen[y] = True
        closed = all(not kernel[y][z] > 0 or z in cls for y in cls for z in range(n))
        if closed:
            classes.append(tuple(cls))
    return classes


def _solve_stationary(kernel: tuple, support: tuple) -> ExactMeasure:
    """Unique stationary row vector of an irreducible kernel restricted to
    ``support`` (exact Gaussian elimination)."""
    m = len(support)
    idx = {x: i for i, x in enumerate(support)}
    # Equations: sum_x pi_x (K[x][y] - delta_xy) = 0 for y, replaced last by sum = 1.
    a = [[kernel[x][y] - (ONE if x == y else ZERO) for x in support] for y in support]
    a[m - 1] = [ONE] * m
    b = [ZERO] * (m - 1) + [ONE]
    for col in range(m):
        piv = next((r for r in range(col, m) if a[r][col] != 0), None)
        if piv is None:
            raise ConfigError("kernel restriction is not irreducible")
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        b[col] = b[col] * inv
        for r in range(m):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
                b[r] = b[r] - factor * b[col]
    masses = [ZERO] * len(kernel)
    for x in support:
        masses[x] = b[idx[x]]
    return ExactMeasure(tuple(masses))


def ff_esm_solve(flow: FiniteFlow) -> EsmSolution:
    """Exact time-indexed stationary family of the averaged kernels.

    Solves the period map for its stationary vector and propagates it through
    the one-step kernels; when the stationary vector is not unique, reports
    the extreme stationary measures instead (their convex hull is the full
    solution set)."""
    period_map = kernel_between(flow, 0, flow.period)
    classes = _closed_classes(period_map)
    extremes = tuple(_solve_stationary(period_map, cls) for cls in classes)
    if len(classes) != 1:
        note = (
            f"{len(classes)} closed classes; every convex combination of the "
            f"extreme stationary measures is stationary"
        )
        if all(len(c) == 1 for c in classes) and len(classes) == flow.n_states:
            note = "identity-like period map: the full simplex is stationary; " + note
        return EsmSolution(False, None, extremes, note)
    rho0 = extremes[0]
    family = [rho0]
    for k in range(flow.period - 1):
        family.append(apply_kernel(family[-1], one_step_kernel(flow, k)))
    if apply_kernel(family[-1], one_step_kernel(flow, flow.period - 1)) != rho0:
        raise AssertionError("period map stationarity failed to propagate")
    return EsmSolution(True, tuple(family), extremes, "unique stationary vector")


# -- conditional expectation identity ------------------------------------------

@dataclass
class ConditionalExpectationReport:
    max_residual: Fraction
    block_residuals: tuple
    independence_ok: bool
    failing_block: int | None = None


def conditional_expectation_check(
    outcome_probs,
    partition,
    measures,
    f_table,
) -> ConditionalExpectationReport:
    """Exact two-sided check of averaging a random measure against a
    block-measurable integrand.

    ``outcome_probs[w]`` weights outcome w; ``partition`` is a tuple of
    disjoint exhaustive blocks of outcome indices; ``measures[w]`` is the
    random measure at outcome w; ``f_table[w][x]`` must be constant in w on
    each block.  When the random measure is mean-independent of the partition
    the conditional average block by block equals the integral against the
    averaged measure, exactly.
    """
    probs = tuple(Fraction(p) for p in outcome_probs)
    if sum(probs, ZERO) != ONE:
        raise ConfigError("outcome probabilities must sum to 1 exactly")
    n_out = len(probs)
    covered = sorted(w for block in partition for w in block)
    if covered != list(range(n_out)):
        raise ConfigError("partition must be disjoint and exhaustive")
    n_pts = len(measures[0].masses)
    rho = [sum((probs[w] * measures[w].masses[x] for w in range(n_out)), ZERO)
           for x in range(n_pts)]
    # Mean-independence precondition, block by block.
    for b_idx, block in enumerate(partition):
        p_block = sum((probs[w] for w in block), ZERO)
        if p_block == 0:
            continue
        for x in range(n_pts):
            cond = sum((probs[w] * measures[w].masses[x] for w in block), ZERO) / p_block
            if cond != rho[x]:
                return ConditionalExpectationReport(
                    Fraction(0), (), independence_ok=False, failing_block=b_idx
                )
    residuals = []
    for b_idx, block in enumerate(partition):
        p_block = sum((probs[w] for w in block), ZERO)
        if p_block == 0:
            residuals.append(ZERO)
            continue
        ref = block[0]
        for w in block:
            if f_table[w] != f_table[ref]:
                raise MeasurabilityError(
                    f"integrand is not constant on block {b_idx}", block=b_idx
                )
        lhs = sum(
            (probs[w] * sum((Fraction(f_table[w][x]) * measures[w].masses[x]
                             for x in range(n_pts)), ZERO) for w in block),
            ZERO,
        ) / p_block
        rhs = sum((Fraction(f_table[ref][x]) * rho[x] for x in range(n_pts)), ZERO)
        residuals.append(abs(lhs - rhs))
    return ConditionalExpectationReport(
        max(residuals) if residuals else ZERO, tuple(residuals), True
    )


def independence_scenario_from_flow(flow: FiniteFlow, depth: int, split: int, f_seed: int = 5):
    """Build a check instance whose random measure is keyed on the symbols
    after position ``split`` and whose integrand depends only on the symbols
    before it, so mean-independence holds by construction."""
    if not (0 < split < depth):
        raise ConfigError("split must cut the word interior")
    n_sym = flow.n_symbols
    words = list(itertools.product(range(n_sym), repeat=depth))
    probs = [math.prod((flow.probs[s] for s in w), start=ONE) for w in words]
    prefixes = {}
    for i, w in enumerate(words):
        prefixes.setdefault(w[:split], []).append(i)
    partition = tuple(tuple(block) for block in prefixes.values())
    base = ExactMeasure.uniform(flow.n_states)
    measures = []
    for w in words:
        suffix_map = compose_word_map(flow, w[split:], split)
        measures.append(base.pushforward(suffix_map))
    f_table = []
    for w in words:
        row = tuple(
            Fraction(1 + (chain(f_seed, *w[:split], x) % 7), 8)
            for x in range(flow.n_states)
        )
        f_table.append(row)
    return probs, partition, tuple(measures), tuple(f_table)


# -- martingale and pullback enumeration ---------------------------------------

@dataclass
class MartingaleVerdict:
    ok: bool
    max_residual: Fraction
    cylinders_checked: int


def ff_martingale_check(flow: FiniteFlow, t: int, f_values, depth: int,
                        family: EsmSolution | None = None,
                        limit: int = ENUMERATION_LIMIT) -> MartingaleVerdict:
    """Verify, for every suffix cylinder, that averaging over one more symbol
    of history leaves the integral of f against the pushed family unchanged."""
    if flow.n_symbols**depth > limit:
        raise EnumerationLimitError("depth exceeds the enumeration limit")
    family = family or ff_esm_solve(flow)
    if not family.unique:
        raise UnsupportedCaseError("martingale check needs a unique family")
    f_values = tuple(Fraction(f) for f in f_values)

    def m_value(comp_map: tuple, s: int) -> Fraction:
        rho = family.at(t - s)
        return sum((rho.masses[x] * f_values[comp_map[x]]
                    for x in range(flow.n_states)), ZERO)

    worst = ZERO
    count = 0
    identity = tuple(range(flow.n_states))
    stack = [(identity, 0)]
    while stack:
        comp_map, s = stack.pop()
        m_here = m_value(comp_map, s)
        expectation = ZERO
        for sigma, p in enumerate(flow.probs):
            step = flow.step_map(t - s - 1, sigma)
            child = tuple(comp_map[step[x]] for x in range(flow.n_states))
            expectation += p * m_value(child, s + 1)
            if s + 1 < depth:
                stack.append((child, s + 1))
        worst = max(worst, abs(expectation - m_here))
        count += 1
    return MartingaleVerdict(worst == 0, worst, count)


@dataclass
class PullbackExactReport:
    all_synchronized: bool
    tv_gap: Fraction
    stabilized: bool
    mean_matches_family: bool
    word_measures: dict


def ff_pullback(flow: FiniteFlow, t: int, depth: int,
                family: EsmSolution | None = None,
                limit: int = ENUMERATION_LIMIT) -> PullbackExactReport:
    """Exact pullback of the averaged family through every symbol word.

    Stabilization is certified either by synchronization (the composed map is
    constant, so deeper history cannot matter) or by a zero total-variation
    gap between consecutive depths.  The probability-weighted mean of the
    per-word measures must reproduce the averaged family exactly.
    """
    if flow.n_symbols**depth > limit:
        raise EnumerationLimitError("depth exceeds the enumeration limit")
    family = family or ff_esm_solve(flow)
    if not family.unique:
        raise UnsupportedCaseError("exact pullback needs a unique family")
    rho_deep = family.at(t - depth)
    rho_shallow = family.at(t - depth + 1)
    word_measures = {}
    gap = ZERO
    all_sync = True
    mean = [ZERO] * flow.n_states
    for word in itertools.product(range(flow.n_symbols), repeat=depth):
        comp = compose_word_map(flow, word, t - depth)
        mu = rho_deep.pushforward(comp)
        word_measures[word] = mu
        all_sync = all_sync and len(set(comp)) == 1
        suffix = word[1:]
        mu_shallow = rho_shallow.pushforward(
            compose_word_map(flow, suffix, t - depth + 1)
        )
        gap = max(gap, mu.tv_distance(mu_shallow))
        p_word = math.prod((flow.probs[s] for s in word), start=ONE)
        for x in range(flow.n_states):
            mean[x] += p_word * mu.masses[x]
    mean_ok = ExactMeasure(tuple(mean)) == family.at(t)
    return PullbackExactReport(all_sync, gap, all_sync or gap == 0, mean_ok, word_measures)


def ff_attractor_sets(flow: FiniteFlow, word, start: int, times) -> dict:
    """Image of the whole state set at each requested time, from one shared
    history start; exactly flow-invariant across the requested times."""
    out = {}
    for t in times:
        if t < start:
            raise ConfigError("attractor times must not precede the history start")
        comp = compose_word_map(flow, word[: t - start], start)
        out[t] = frozenset(comp)
    return out


def ff_select_trajectory(flow: FiniteFlow, word, start: int, times) -> list:
    """Exact selected trajectory on a synchronizing history window."""
    times = sorted(times)
    comp = compose_word_map(flow, word[: times[0] - start], start)
    image = set(comp)
    if len(image) != 1:
        raise UnsupportedCaseError(
            "history window does not synchronize; selection is not determined"
        )
    states = [image.pop()]
    for a, b in zip(times, times[1:]):
        offset_word = word[a - start : b - start]
        states.append(ff_evolve(flow, offset_word, a, b, states[-1]))
    return states


# -- canned flows ----------------------------------------------------------------

def two_state_noisy() -> FiniteFlow:
    """Hold or swap two states with equal probability."""
    return FiniteFlow(2, (Fraction(1, 2), Fraction(1, 2)), (((0, 1), (1, 0)),))


def synchronizing_pair(p=Fraction(1, 3)) -> FiniteFlow:
    """Two constant maps: every single-symbol word synchronizes."""
    return FiniteFlow(2, (p, 1 - p), (((0, 0), (1, 1)),))


def identity_finite_flow(n: int = 2) -> FiniteFlow:
    return FiniteFlow(n, (ONE,), ((tuple(range(n)),),))


def cyclic_doubly_stochastic(n: int = 3) -> FiniteFlow:
    """Rotate or hold with equal probability: doubly stochastic kernel."""
    rotate = tuple((x + 1) % n for x in range(n))
    hold = tuple(range(n))
    return FiniteFlow(n, (Fraction(1, 2), Fraction(1, 2)), ((rotate, hold),))


def period_two_alternating() -> FiniteFlow:
    """Different map banks on even and odd times."""
    bank0 = ((0, 0, 1), (1, 2, 2))
    bank1 = ((2, 0, 1), (0, 1, 1))
    return FiniteFlow(3, (Fraction(1, 4), Fraction(3, 4)), (bank0, bank1), period=2)


# -- counterexample catalog -------------------------------------------------------

@dataclass
class ScenarioReport:
    name: str
    claim: str
    ok: bool
    details: dict


def _scenario_attractor() -> ScenarioReport:
    """Deterministic halving map on the rationals: the pullback attractor of
    every bounded set is {0}, yet the point family 2**-t is a flow family
    supported off the attractor at every time."""
    lam = Fraction(1, 2)
    window = range(-8, 9)
    family = {t: lam**t for t in window}
    flow_ok = all(
        family[s] * lam ** (t - s) == family[t]
        for s in window for t in window if s <= t
    )
    bound = Fraction(100)
    images = [bound * lam**d for d in range(0, 55, 5)]
    contracts = all(b < a for a, b in zip(images, images[1:])) and images[-1] < Fraction(1, 10**9)
    off_attractor = all(family[t] != 0 for t in window)
    ok = flow_ok and contracts and off_attractor
    return ScenarioReport(
        "remark-attractor",
        "the attractor {0} does not support the halving point family",
        ok,
        {
            "contraction_factor": str(lam),
            "family_is_flow_invariant": flow_ok,
            "bounded_images_contract_to_zero": contracts,
            "family_off_attractor_everywhere": off_attractor,
        },
    )


def _scenario_shift() -> ScenarioReport:
    """Unit drift on the nonnegative integers: any measure carried on a
    window of n states is pushed completely off the window after n steps, so
    no fixed family exists inside any window."""
    n = 8
    window = frozenset(range(n))
    shifted = {k: frozenset(x + k for x in window) for k in (1, n - 1, n, n + 1, 2 * n)}
    disjoint = all(shifted[k].isdisjoint(window) for k in (n, n + 1, 2 * n))
    still_overlaps = all(not shifted[k].isdisjoint(window) for k in (1, n - 1))
    mean_shift_exact = all(
        sum(Fraction(x) for x in shifted[k]) - sum(Fraction(x) for x in window)
        == n * k
        for k in shifted
    )
    ok = disjoint and still_overlaps and mean_shift_exact
    return ScenarioReport(
        "remark-shift",
        "unit drift escapes every finite window: no evolution family exists there",
        ok,
        {
            "window": n,
            "support_disjoint_after_window_steps": disjoint,
            "support_still_overlaps_before_window_steps": still_overlaps,
            "mean_increases_by_exactly_one_per_step": mean_shift_exact,
        },
    )


def _scenario_identity() -> ScenarioReport:
    """Identity flow on two points over a two-outcome space: two distinct
    realization-indexed families average to the same semigroup family."""
    alpha1, alpha2 = Fraction(1, 3), Fraction(2, 3)
    half = Fraction(1, 2)

    def family(alpha):
        return {
            "in": ExactMeasure((alpha, 1 - alpha)),
            "out": ExactMeasure((1 - alpha, alpha)),
        }

    fam1, fam2 = family(alpha1), family(alpha2)
    # Identity flow: invariance of each family is the trivial identity.
    invariant = all(
        fam[side].pushforward((0, 1)) == fam[side]
        for fam in (fam1, fam2) for side in ("in", "out")
    )
    distinct = fam1["in"] != fam2["in"]
    mean1 = ExactMeasure(
        tuple(half * a + half * b for a, b in zip(fam1["in"].masses, fam1["out"].masses))
    )
    mean2 = ExactMeasure(
        tuple(half * a + half * b for a, b in zip(fam2["in"].masses, fam2["out"].masses))
    )
    shared = mean1 == mean2 == ExactMeasure((half, half))
    semigroup_invariant = apply_kernel(mean1, ((ONE, ZERO), (ZERO, ONE))) == mean1
    ok = invariant and distinct and shared and semigroup_invariant
    return ScenarioReport(
        "remark-identity",
        "distinct flow families with one shared semigroup family",
        ok,
        {
            "mixing_weights": (str(alpha1), str(alpha2)),
            "families_flow_invariant": invariant,
            "families_distinct": distinct,
            "shared_semigroup_family": shared,
            "semigroup_invariance": semigroup_invariant,
        },
    )


def counterexamples() -> dict:
    """The three prebuilt boundary scenarios, each with an exact verdict."""
    reports = [_scenario_attractor(), _scenario_shift(), _scenario_identity()]
    return {r.name: r for r in reports}


# -- lifting to a continuous-time flow model --------------------------------------

class FiniteFlowLift(FlowModelBase):
    """Embed a finite flow as a flow model on integer times.

    States ride as real scalars equal to their index.  The symbol at each
    integer time is drawn from the realization handle by keyed inversion of
    the exact cumulative probabilities.
    """

    def __init__(self, flow: FiniteFlow):
        self.flow = flow
        self.state_dim = 1
        self.grid_level = 0
        self._cum = []
        acc = ZERO
        for p in flow.probs:
            acc += p
            self._cum.append(float(acc))

    def symbol_at(self, omega, time_index: int) -> int:
        u = uniform_from_key(
            chain(omega.master_seed, omega.realization_index, _TAG_SYMBOL, time_index)
        )
        for sigma, threshold in enumerate(self._cum):
            if u <= threshold:
                return sigma
        return len(self._cum) - 1

    def word_for(self, omega, s: int, t: int) -> tuple:
        return tuple(self.symbol_at(omega, tau) for tau in range(s, t))

    def evolve_batch(self, omega, s: DyadicTime, t: DyadicTime, states):
        s_i, t_i = s.at_level(0), t.at_level(0)
        word = self.word_for(omega, s_i, t_i)
        out = np.empty_like(np.atleast_2d(states), dtype=float)
        for r, row in enumerate(np.atleast_2d(states)):
            x = int(round(row[0]))
            if not (0 <= x < self.flow.n_states):
                raise ConfigError(f"state {row[0]} is not a valid state index")
            out[r, 0] = float(ff_evolve(self.flow, word, s_i, t_i, x))
        return out

    def exact_chapman_residual(self, s: DyadicTime, t: DyadicTime, u: DyadicTime) -> float:
        return 0.0 if chapman_check(self.flow, s.at_level(0), t.at_level(0), u.at_level(0)) else 1.0

    def exact_select_states(self, omega, times, schedule) -> np.ndarray:
        t_ints = [t.at_level(0) for t in times]
        start = min(schedule.starts).at_level(0)
        word = self.word_for(omega, start, max(t_ints))
        states = ff_select_trajectory(self.flow, word, start, t_ints)
        return np.array([[float(x)] for x in states])
