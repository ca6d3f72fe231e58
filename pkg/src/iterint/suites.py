"""Named check suites driven by scenario files.

A scenario is a small INI file naming a suite plus the fixtures,
letters, words, tolerances, grid, and seed it runs with.  Each suite
returns a deterministic report dictionary: an echo of the scenario, a
list of check rows (name, residual, tolerance, passed), and an overall
verdict.  Resolution errors (unknown fixtures, malformed files) raise
ScenarioError before any numerics run, so callers can distinguish bad
input from failed checks.
"""

from __future__ import annotations

import configparser
import itertools
from dataclasses import dataclass, field

import numpy as np

from .cover import (
    Cocycle,
    base_loop,
    check_eta_vanishing,
    eta,
    load_cover_registry,
    solve_coboundary,
)
from .evaluator import (
    check_composition,
    check_reversal,
    check_shuffle,
    iterint,
)
from .fixtures import get_cover, get_domain, get_form, get_path, list_fixtures
from .geometry import exterior_derivative, load_form_registry, wedge
from .homotopy import (
    build_defining_system,
    check_s2_condition,
    empirical_invariance,
    poincare_primitive,
)
from .invariants import HigherInvariant, chen_pairing, order_check
from .paths import PathFamily, load_path_specs, segment_path
from .word_algebra import AlgebraElement, Word

__all__ = ["Scenario", "ScenarioError", "SUITES", "parse_scenario", "run_suite"]


class ScenarioError(ValueError):
    """Scenario file cannot be parsed or its references do not resolve."""


@dataclass(frozen=True)
class Scenario:
    name: str
    suite: str
    domain: str | None = None
    cover: str | None = None
    cover_registry: str | None = None
    form_registry: str | None = None
    path_registry: str | None = None
    grid: int = 1024
    seed: int = 0
    tol_abs: float = 1e-8
    tol_rel: float = 1e-6
    forms: dict = field(default_factory=dict)
    paths: dict = field(default_factory=dict)
    words: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def echo(self) -> dict:
        return {
            "name": self.name,
            "suite": self.suite,
            "domain": self.domain,
            "cover": self.cover,
            "cover_registry": self.cover_registry,
            "form_registry": self.form_registry,
            "path_registry": self.path_registry,
            "grid": self.grid,
            "seed": self.seed,
            "tol_abs": self.tol_abs,
            "tol_rel": self.tol_rel,
            "forms": dict(self.forms),
            "paths": dict(self.paths),
            "words": {k: list(v) for k, v in self.words.items()},
            "options": dict(self.options),
        }


_KNOWN_SECTIONS = {"scenario", "forms", "paths", "words", "options"}
_SCENARIO_KEYS = {
    "name",
    "suite",
    "domain",
    "cover",
    "cover_registry",
    "form_registry",
    "path_registry",
    "grid",
    "seed",
    "tol_abs",
    "tol_rel",
}


def parse_scenario(source) -> Scenario:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    read = parser.read(source)
    where = str(source)
    if not read:
        raise ScenarioError(f"cannot read scenario file {where!r}")
    if "scenario" not in parser:
        raise ScenarioError(f"{where}: missing [scenario] section")
    unknown = set(parser.sections()) - _KNOWN_SECTIONS
    if unknown:
        raise ScenarioError(f"{where}: unknown sections {sorted(unknown)}")
    head = parser["scenario"]
    stray = set(head) - _SCENARIO_KEYS
    if stray:
        raise ScenarioError(f"{where}: unknown [scenario] keys {sorted(stray)}")
    for required in ("name", "suite"):
        if required not in head:
            raise ScenarioError(f"{where}: [scenario] needs a {required!r} key")
    suite = head["suite"]
    if suite not in SUITES:
        raise ScenarioError(
            f"{where}: unknown suite {suite!r}; expected one of {sorted(SUITES)}"
        )
    try:
        grid = head.getint("grid", 1024)
        seed = head.getint("seed", 0)
        tol_abs = head.getfloat("tol_abs", 1e-8)
        tol_rel = head.getfloat("tol_rel", 1e-6)
    except ValueError as exc:
        raise ScenarioError(f"{where}: bad numeric value in [scenario]: {exc}")
    if grid < 8:
        raise ScenarioError(f"{where}: grid must be at least 8")
    if tol_abs <= 0 or tol_rel <= 0:
        raise ScenarioError(f"{where}: tolerances must be positive")
    words = {}
    if "words" in parser:
        for key, value in parser["words"].items():
            letters = tuple(value.split())
            if not letters:
                raise ScenarioError(f"{where}: [words] {key} is empty")
            words[key] = letters
    return Scenario(
        name=head["name"],
        suite=suite,
        domain=head.get("domain") or None,
        cover=head.get("cover") or None,
        cover_registry=head.get("cover_registry") or None,
        form_registry=head.get("form_registry") or None,
        path_registry=head.get("path_registry") or None,
        grid=grid,
        seed=seed,
        tol_abs=tol_abs,
        tol_rel=tol_rel,
        forms=dict(parser["forms"]) if "forms" in parser else {},
        paths=dict(parser["paths"]) if "paths" in parser else {},
        words=words,
        options=dict(parser["options"]) if "options" in parser else {},
    )


# --- resolution helpers -----------------------------------------------------


def _resolve_domain(scenario: Scenario):
    if not scenario.domain:
        raise ScenarioError(f"scenario {scenario.name!r}: missing domain")
    try:
        return get_domain(scenario.domain)
    except KeyError:
        raise ScenarioError(
            f"scenario {scenario.name!r}: unknown domain {scenario.domain!r}"
        )


def _resolve_cover(scenario: Scenario):
    if not scenario.cover:
        raise ScenarioError(f"scenario {scenario.name!r}: missing cover")
    if scenario.cover_registry:
        try:
            registry = load_cover_registry(scenario.cover_registry)
        except ValueError as exc:
            raise ScenarioError(f"scenario {scenario.name!r}: {exc}")
        if scenario.cover in registry:
            return registry[scenario.cover]
        raise ScenarioError(
            f"scenario {scenario.name!r}: cover {scenario.cover!r} is not in "
            f"registry {scenario.cover_registry!r}"
        )
    try:
        return get_cover(scenario.cover)
    except KeyError:
        raise ScenarioError(
            f"scenario {scenario.name!r}: unknown cover {scenario.cover!r}"
        )


def _resolve_binding(scenario: Scenario, domain):
    registry = {}
    if scenario.form_registry:
        try:
            registry = load_form_registry(scenario.form_registry, domain)
        except ValueError as exc:
            raise ScenarioError(f"scenario {scenario.name!r}: {exc}")
    binding = {}
    for letter, name in scenario.forms.items():
        if name in registry:
            binding[letter] = registry[name]
            continue
        try:
            binding[letter] = get_form(name, domain)
        except KeyError:
            raise ScenarioError(
                f"scenario {scenario.name!r}: [forms] {letter} = {name!r} "
                "names no registered or bundled form"
            )
    if not binding:
        raise ScenarioError(f"scenario {scenario.name!r}: no [forms] bound")
    return binding


def _resolve_path(scenario: Scenario, domain, role: str, default: str | None = None):
    name = scenario.paths.get(role, default)
    if name is None:
        raise ScenarioError(f"scenario {scenario.name!r}: missing [paths] {role}")
    if scenario.path_registry:
        try:
            specs = load_path_specs(scenario.path_registry, domain)
        except ValueError as exc:
            raise ScenarioError(f"scenario {scenario.name!r}: {exc}")
        if name in specs:
            return specs[name]
    try:
        return get_path(name)
    except KeyError:
        raise ScenarioError(
            f"scenario {scenario.name!r}: [paths] {role} = {name!r} names no "
            "registered or bundled path"
        )


def _scenario_words(scenario: Scenario, binding) -> dict:
    words = {}
    for key, letters in scenario.words.items():
        for letter in letters:
            if letter not in binding:
                raise ScenarioError(
                    f"scenario {scenario.name!r}: [words] {key} uses unbound "
                    f"letter {letter!r}"
                )
        words[key] = Word(letters)
    if not words:
        raise ScenarioError(f"scenario {scenario.name!r}: no [words] given")
    return words


def _option_float(scenario: Scenario, key: str, default: float) -> float:
    raw = scenario.options.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ScenarioError(f"scenario {scenario.name!r}: option {key} = {raw!r}")


def _option_int(scenario: Scenario, key: str, default: int) -> int:
    raw = scenario.options.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"scenario {scenario.name!r}: option {key} = {raw!r}")


def _row(name: str, residual: float, tolerance: float, **extra) -> dict:
    out = {
        "name": name,
        "residual": float(residual),
        "tolerance": float(tolerance),
        "passed": bool(residual <= tolerance),
    }
    out.update(extra)
    return out


def _report(scenario: Scenario, checks: list) -> dict:
    return {
        "schema": "iterint-report/1",
        "scenario": scenario.echo(),
        "suite": scenario.suite,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }


# --- suites -------------------------------------------------------------------


def run_lemma11(scenario: Scenario) -> dict:
    """Unit value, junction composition, shuffle, and signed reversal."""
    domain = _resolve_domain(scenario)
    binding = _resolve_binding(scenario, domain)
    first = _resolve_path(scenario, domain, "first")
    second = _resolve_path(scenario, domain, "second")
    words = _scenario_words(scenario, binding)
    tol = max(scenario.tol_abs, scenario.tol_rel)
    checks = []
    empty = iterint(first, Word(()), binding, n=scenario.grid).value
    checks.append(_row("empty-word", abs(empty - 1.0), scenario.tol_abs))
    for key in sorted(words):
        word = words[key]
        residual = check_composition(first, second, word, binding, n=scenario.grid)
        checks.append(_row(f"composition:{key}", residual, tol))
        residual = check_reversal(first, word, binding, n=scenario.grid)
        checks.append(_row(f"reversal:{key}", residual, tol))
    for left, right in itertools.combinations_with_replacement(sorted(words), 2):
        residual = check_shuffle(
            first, words[left], words[right], binding, n=scenario.grid
        )
        checks.append(_row(f"shuffle:{left}|{right}", residual, tol))
    return _report(scenario, checks)


def _bump_family(base) -> PathFamily:
    chord = base.point(1.0) - base.point(0.0)
    norm = np.hypot(chord[0], chord[1])
    if norm == 0:
        normal = np.array([0.0, 1.0])
    else:
        normal = np.array([-chord[1], chord[0]]) / norm

    def bump(ts):
        return np.sin(np.pi * ts)[..., None] * normal

    def bump_velocity(ts):
        return (np.pi * np.cos(np.pi * ts))[..., None] * normal

    return PathFamily(base, bump, bump_velocity)


def run_homotopy(scenario: Scenario) -> dict:
    """Certified elements stay flat under endpoint-fixed perturbation."""
    domain = _resolve_domain(scenario)
    binding = _resolve_binding(scenario, domain)
    pair_key = scenario.options.get("pair", "")
    letters = tuple(pair_key.split())
    if len(letters) != 2 or any(l not in binding for l in letters):
        raise ScenarioError(
            f"scenario {scenario.name!r}: option pair must name two bound letters"
        )
    start = [float(v) for v in scenario.options.get("start", "-0.5 0").split()]
    end = [float(v) for v in scenario.options.get("end", "0.5 0").split()]
    base = segment_path(domain, start, end)
    family = _bump_family(base)
    count = _option_int(scenario, "amplitudes", 20)
    amp_max = _option_float(scenario, "amplitude_max", 0.1)
    amplitudes = np.linspace(amp_max / count, amp_max, count)
    checks = []

    alpha, beta = binding[letters[0]], binding[letters[1]]
    gamma = -1 * poincare_primitive(wedge(alpha, beta))
    element = AlgebraElement({Word(letters): 1, Word(("_gamma",)): 1})
    bound = dict(binding)
    bound["_gamma"] = gamma
    residual = check_s2_condition(
        element,
        bound,
        samples=512,
        tol=max(scenario.tol_abs, scenario.tol_rel),
        seed=scenario.seed,
    )
    checks.append(_row("certification", residual, scenario.tol_abs))
    deviation = empirical_invariance(
        element, bound, base, family, amplitudes, n=scenario.grid
    )
    checks.append(
        _row("invariance", deviation, max(scenario.tol_abs, scenario.tol_rel))
    )

    counter_name = scenario.options.get("counterexample")
    if counter_name:
        try:
            counter_form = get_form(counter_name, domain)
        except KeyError:
            raise ScenarioError(
                f"scenario {scenario.name!r}: unknown counterexample form "
                f"{counter_name!r}"
            )
        drift_floor = _option_float(scenario, "drift_floor", 1e-3)
        counter = AlgebraElement.from_word(Word(("_counter",)))
        drift = empirical_invariance(
            counter, {"_counter": counter_form}, base, family, amplitudes, n=scenario.grid
        )
        checks.append(
            {
                "name": f"counterexample-drift:{counter_name}",
                "passed": bool(drift > drift_floor),
                "drift": float(drift),
                "minimum": float(drift_floor),
            }
        )
    return _report(scenario, checks)


def run_defining_system(scenario: Scenario) -> dict:
    """Nested primitives solve the wedge equations; the primitive inverts d."""
    domain = _resolve_domain(scenario)
    binding = _resolve_binding(scenario, domain)
    letters = tuple(scenario.options.get("letters", "").split())
    if len(letters) < 2 or any(l not in binding for l in letters):
        raise ScenarioError(
            f"scenario {scenario.name!r}: option letters must name at least two "
            "bound letters"
        )
    samples = _option_int(scenario, "samples", 512)
    tol = max(scenario.tol_abs, scenario.tol_rel)
    forms = tuple(binding[l] for l in letters)
    system = build_defining_system(forms, tol=tol, samples=samples, seed=scenario.seed)
    checks = []
    for (i, j), residual in sorted(system.residuals.items()):
        checks.append(_row(f"equation:{i}..{j}", residual, tol))
    pts = domain.sample(samples, seed=scenario.seed)
    for i in range(len(forms) - 1):
        beta = wedge(forms[i], forms[i + 1])
        primitive = poincare_primitive(beta)
        gap = exterior_derivative(primitive) + (-1) * beta
        residual = float(np.max(gap.norm_at(pts)))
        checks.append(_row(f"round-trip:{i},{i + 1}", residual, tol))
    return _report(scenario, checks)


def run_order(scenario: Scenario) -> dict:
    """Difference products of one order above the degree annihilate."""
    cover = _resolve_cover(scenario)
    binding = _resolve_binding(scenario, cover.domain)
    if len(binding) != 1:
        raise ScenarioError(
            f"scenario {scenario.name!r}: order suite wants exactly one bound letter"
        )
    (letter, form), = binding.items()
    powers = [int(v) for v in scenario.options.get("powers", "1 2 3").split()]
    samples = _option_int(scenario, "samples", 16)
    checks = []
    for s in powers:
        element = AlgebraElement.from_word(Word((letter,) * s))
        if s <= 2:
            invariant = HigherInvariant(element, binding, cover, seed=scenario.seed)
        else:
            system = build_defining_system(
                (form,) * s, samples=256, seed=scenario.seed
            )
            certificate = max(system.residuals.values())
            invariant = HigherInvariant(
                element, binding, cover, certificate=certificate
            )
        report = order_check(
            invariant,
            n=scenario.grid,
            samples=samples,
            seed=scenario.seed,
            tol=scenario.tol_rel,
        )
        checks.append(
            _row(
                f"vanishing:{letter}^{s}",
                report["vanish_residual"],
                report["vanish_tolerance"],
                witness=float(report["witness_value"]),
            )
        )
        checks.append(
            {
                "name": f"witness:{letter}^{s}",
                "passed": bool(report["order_exact"]),
                "witness": float(report["witness_value"]),
                "tuple": [list(t) for t in (report["witness_tuple"] or ())],
            }
        )
    return _report(scenario, checks)


def run_pairing(scenario: Scenario) -> dict:
    """Graded loop integrals: vanishing below grade, products at grade,
    and the triangular pairing matrix of the two filtrations."""
    cover = _resolve_cover(scenario)
    if not scenario.domain:
        raise ScenarioError(f"scenario {scenario.name!r}: missing domain")
    base_domain = _resolve_domain(scenario)
    binding = _resolve_binding(scenario, base_domain)
    letter = scenario.options.get("letter", "")
    if letter not in binding:
        raise ScenarioError(
            f"scenario {scenario.name!r}: option letter must name a bound letter"
        )
    depth = _option_int(scenario, "depth", 3)
    grades = _option_int(scenario, "grades", depth)
    generator = tuple([1] + [0] * (cover.rank - 1))
    checks = []

    loop = base_loop(cover, generator)
    winding = iterint(loop, Word((letter,)), binding, n=scenario.grid).value
    scale = max(1.0, abs(winding))
    for s in range(1, grades + 1):
        for r in range(1, s + 1):
            out = check_eta_vanishing(
                cover,
                [generator] * s,
                Word((letter,) * r),
                binding,
                n=scenario.grid,
            )
            tolerance = max(
                scenario.tol_abs,
                scenario.tol_rel * max(scale**s, abs(out.expected)),
            )
            checks.append(
                _row(
                    f"grade:s={s},r={r}",
                    out.residual,
                    tolerance,
                    expected=[out.expected.real, out.expected.imag],
                )
            )

    etas = [eta([generator] * k, rank=cover.rank) for k in range(depth)]
    elements = [AlgebraElement.from_word(Word((letter,) * k)) for k in range(depth)]
    result = chen_pairing(etas, elements, binding, cover, n=scenario.grid)
    matrix = result.matrix
    for k in range(depth):
        expected = winding**k
        tolerance = max(scenario.tol_abs, scenario.tol_rel * abs(expected))
        checks.append(
            _row(
                f"diagonal:{k}",
                abs(matrix[k, k] - expected),
                tolerance,
                expected=[expected.real, expected.imag],
            )
        )
    below = np.abs(np.tril(matrix, -1))
    triangular_tol = max(scenario.tol_abs, scenario.tol_rel * scale ** (depth - 1))
    checks.append(
        _row("triangular", float(below.max()) if below.size else 0.0, triangular_tol)
    )
    checks.append(
        {
            "name": "rank",
            "passed": bool(result.rank == depth),
            "rank": int(result.rank),
            "expected": depth,
            "matrix": result.as_dict()["matrix"],
        }
    )
    return _report(scenario, checks)


def run_coboundary(scenario: Scenario) -> dict:
    """Partition of unity and the orbit-sum solution of the coboundary
    equation, tested on generators and random deck words."""
    cover = _resolve_cover(scenario)
    partition_tol = _option_float(scenario, "partition_tol", 1e-10)
    identity_tol = scenario.tol_abs
    samples = _option_int(scenario, "samples", 512)
    checks = []
    partition = cover.partition_report(samples=samples, seed=scenario.seed)
    checks.append(
        _row(
            "partition-of-unity",
            partition["max_deviation"],
            partition_tol,
            max_active_terms=int(partition["max_active_terms"]),
        )
    )

    pts = cover.domain.sample(samples, seed=scenario.seed)
    rng = np.random.default_rng(scenario.seed)
    words = [tuple(int(k) for k in rng.integers(-2, 3, size=cover.rank)) for _ in range(3)]
    generators = [
        tuple(1 if j == i else 0 for j in range(cover.rank)) for i in range(cover.rank)
    ]

    def identity_rows(tag: str, alpha: Cocycle, solution):
        labelled = [(f"generator-{i}", g) for i, g in enumerate(generators)]
        labelled += [(f"word-{i}", w) for i, w in enumerate(words)]
        for label, word in labelled:
            lhs = solution(pts - cover.offset(word)) - solution(pts)
            gap = float(np.max(np.abs(lhs - alpha.value(word)(pts))))
            exps = ",".join(str(k) for k in word)
            checks.append(_row(f"{tag}:{label}:[{exps}]", gap, identity_tol))

    lengths = [float(np.hypot(*row)) for row in cover.lattice]
    alpha = Cocycle(
        cover,
        [lambda q, L=L: np.full(len(np.atleast_2d(q)), L) for L in lengths],
    )
    identity_rows("lengths", alpha, solve_coboundary(alpha, seed=scenario.seed))

    if cover.rank == 1:
        def gauge(q):
            q = np.atleast_2d(q)
            return np.sin(q[:, 1]) * q[:, 0]
    else:
        def gauge(q):
            q = np.atleast_2d(q)
            return np.sin(2 * np.pi * q[:, 0]) + q[:, 0] + 0.5 * q[:, 1]

    def make(off):
        return lambda q: gauge(np.atleast_2d(q) - off) - gauge(np.atleast_2d(q))

    beta = Cocycle(cover, [make(cover.offset(g)) for g in generators])
    solution = solve_coboundary(beta, seed=scenario.seed)
    identity_rows("gauge", beta, solution)
    # for a coboundary input, solution minus gauge is deck-invariant
    deviation = 0.0
    for g in generators:
        diff = solution(pts) - gauge(pts)
        moved = solution(pts - cover.offset(g)) - gauge(pts - cover.offset(g))
        deviation = max(deviation, float(np.max(np.abs(diff - moved))))
    checks.append(_row("gauge:invariance", deviation, identity_tol))
    return _report(scenario, checks)


SUITES = {
    "lemma11": run_lemma11,
    "homotopy": run_homotopy,
    "defining-system": run_defining_system,
    "order": run_order,
    "pairing": run_pairing,
    "coboundary": run_coboundary,
}


def run_suite(scenario: Scenario) -> dict:
    return SUITES[scenario.suite](scenario)


def fixture_catalog() -> dict:
    catalog = dict(list_fixtures())
    catalog["suites"] = sorted(SUITES)
    return catalog
