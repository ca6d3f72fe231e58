"""Command line front end.

Three subcommands: `run` executes a scenario file (or a bundled
scenario by name) and writes a JSON report, `fixtures` prints the
catalog of bundled objects, and `eval` integrates one word along one
bundled path.  Reports are deterministic: same scenario, same bits.
Exit codes: 0 all checks passed, 1 at least one check failed, 2 the
input could not be parsed or resolved.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources
from pathlib import Path

from .evaluator import iterint
from .fixtures import get_form, get_path
from .suites import Scenario, ScenarioError, fixture_catalog, parse_scenario, run_suite
from .word_algebra import Word

__all__ = ["main", "bundled_scenarios", "render_report"]


def bundled_scenarios() -> dict[str, Path]:
    """Scenario names shipped inside the package, mapped to their files."""
    root = resources.files("iterint") / "data" / "scenarios"
    out = {}
    for entry in root.iterdir():
        if entry.name.endswith(".ini"):
            out[entry.name[: -len(".ini")]] = Path(str(entry))
    return dict(sorted(out.items()))


def _locate_scenario(ref: str) -> Path:
    path = Path(ref)
    if path.exists():
        return path
    bundled = bundled_scenarios()
    if ref in bundled:
        return bundled[ref]
    raise ScenarioError(
        f"no scenario file {ref!r}; bundled names: {', '.join(bundled) or 'none'}"
    )


def render_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def render_checks_csv(report: dict) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["name", "residual", "tolerance", "passed"])
    for check in report.get("checks", []):
        writer.writerow(
            [
                check["name"],
                repr(check["residual"]) if "residual" in check else "",
                repr(check["tolerance"]) if "tolerance" in check else "",
                check["passed"],
            ]
        )
    return buffer.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    updates = {}
    if args.grid is not None:
        updates["grid"] = args.grid
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.tol_abs is not None:
        updates["tol_abs"] = args.tol_abs
    if args.tol_rel is not None:
        updates["tol_rel"] = args.tol_rel
    if not updates:
        return scenario
    merged = scenario.echo()
    merged.update(updates)
    merged["words"] = {k: tuple(v) for k, v in merged["words"].items()}
    return Scenario(**merged)


def _cmd_run(args) -> int:
    scenario = parse_scenario(_locate_scenario(args.scenario))
    scenario = _apply_overrides(scenario, args)
    if scenario.grid < 8:
        raise ScenarioError("grid must be at least 8")
    if scenario.tol_abs <= 0 or scenario.tol_rel <= 0:
        raise ScenarioError("tolerances must be positive")
    report = run_suite(scenario)
    if args.out and args.out.endswith(".csv"):
        _emit(render_checks_csv(report), args.out)
    else:
        _emit(render_report(report), args.out)
    return 0 if report["passed"] else 1


def _cmd_fixtures(args) -> int:
    catalog = fixture_catalog()
    catalog["scenarios"] = sorted(bundled_scenarios())
    _emit(render_report(catalog), args.out)
    return 0


def _cmd_eval(args) -> int:
    try:
        path = get_path(args.path)
    except KeyError as exc:
        raise ScenarioError(exc.args[0])
    binding = {}
    for spec_pair in args.form:
        letter, _, form_name = spec_pair.partition("=")
        if not letter or not form_name:
            raise ScenarioError(f"--form wants LETTER=FORM, got {spec_pair!r}")
        try:
            binding[letter] = get_form(form_name, path.domain)
        except KeyError as exc:
            raise ScenarioError(exc.args[0])
    word = Word(tuple(args.word))
    missing = [l for l in word if l not in binding]
    if missing:
        raise ScenarioError(f"letters {missing} have no --form binding")
    result = iterint(path, word, binding, n=args.grid if args.grid else 1024)
    payload = {
        "schema": "iterint-report/1",
        "path": args.path,
        "word": list(word),
        "forms": {k: v.name for k, v in binding.items()},
        "grid": int(result.grid),
        "value": [result.value.real, result.value.imag],
        "richardson_error": float(result.richardson_error),
    }
    _emit(render_report(payload), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iterint",
        description="check suites and one-off integrals over the bundled fixtures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file or bundled scenario")
    run.add_argument("scenario", help="path to a scenario file, or a bundled name")

    fixtures = sub.add_parser("fixtures", help="list bundled fixtures and suites")

    ev = sub.add_parser("eval", help="integrate one word along a bundled path")
    ev.add_argument("--path", required=True, help="bundled path name")
    ev.add_argument(
        "--word", required=True, nargs="+", help="letters, innermost first"
    )
    ev.add_argument(
        "--form",
        action="append",
        default=[],
        metavar="LETTER=FORM",
        help="bind a letter to a bundled form (repeatable)",
    )

    for cmd in (run, fixtures, ev):
        cmd.add_argument("--grid", type=int, default=None, help="quadrature points")
        cmd.add_argument("--seed", type=int, default=None, help="sampling seed")
        cmd.add_argument("--tol-abs", type=float, default=None, dest="tol_abs")
        cmd.add_argument("--tol-rel", type=float, default=None, dest="tol_rel")
        cmd.add_argument("--out", default=None, help="write the report here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "fixtures": _cmd_fixtures, "eval": _cmd_eval}
    try:
        return handlers[args.command](args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError) as exc:
        text = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {text}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
