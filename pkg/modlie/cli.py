# modlie/cli.py
"""
Command-line interface

    verify <target>        L3 | eq-new | k31-jacobi | semilinearity |
                           fixture:<name>:<cocycle>[:flip] | file:<path>
    pmap <file> <element>  p-th (or 2p-th) power of one element
    fingerprint <target>   sp4 | L | <algebra file>
    check-file <file>      super identities and grading of an algebra file

Exit codes: 0 pass, 1 mathematical mismatch, 2 bad input.
"""
import argparse
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from modlie import __version__
from modlie.divpow import DPDescriptor, contact_jacobi_failures, k31_descriptor, svect_deformed, verify_eq_new
from modlie.errors import ModLieError, NoSolution, ParseError, UnknownTarget
from modlie.families import (
    build_L,
    build_sp4,
    flip_bundle,
    generating_table,
    invariant_fingerprint,
    load_fixture,
    verify_lemma_fixture,
    verify_lemma_L3,
)
from modlie.matrices import Vector
from modlie.pstruct import solve_p_power, semilinearity_check, two_p_power, verify_restricted
from modlie.reports import CheckRecord, Report, build_report, render_text
from modlie.scalars import ParameterRing, Scalar, default_ring, parse_scalar
from modlie.superalg import (
    SuperAlgebra,
    center,
    check_grading,
    check_super_identities,
    read_algebra_json,
)
from utils.config_loader import fixtures_dir, load_config

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS = {
    "field": {"p": 3, "k": 1},
    "verification": {
        "seed": 0,
        "semilinearity_trials": 100,
        "sweep": {"eps": [1, 2], "delta": [0, 1, 2], "rho": [0, 1, 2]},
        "semilinearity_point": {"eps": 1, "delta": 1, "rho": 1},
    },
    "fixtures": {"dir": "./data/fixtures"},
    "logging": {"level": "INFO", "format": "%(levelname)s %(name)s: %(message)s"},
    "cli": {"color": True},
}


# ==================== OUTPUT ====================

class Colors:
    """ANSI color codes for terminal output"""
    HEADER = '\033[95m'
    BLUE = '\033[94m'
    CYAN = '\033[96m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    RED = '\033[91m'
    ENDC = '\033[0m'
    BOLD = '\033[1m'

    @classmethod
    def disable(cls):
        for name in ("HEADER", "BLUE", "CYAN", "GREEN", "YELLOW", "RED", "ENDC", "BOLD"):
            setattr(cls, name, "")


def print_success(text: str):
    """Print success message"""
    print(f"{Colors.GREEN}✅ {text}{Colors.ENDC}")


def print_error(text: str):
    """Print error message"""
    print(f"{Colors.RED}❌ {text}{Colors.ENDC}")


def print_info(text: str):
    """Print info message"""
    print(f"{Colors.BLUE}ℹ️  {text}{Colors.ENDC}")


def print_warning(text: str):
    """Print warning message"""
    print(f"{Colors.YELLOW}⚠️  {text}{Colors.ENDC}")


def emit(report: Report, as_json: bool) -> int:
    """Print a report and return its exit code"""
    if as_json:
        print(report.model_dump_json(indent=2))
    else:
        body = render_text(report)
        head, _, rest = body.partition("\n")
        if report.status == "pass":
            print_success(head)
        elif report.status == "conditional-pass":
            print_warning(head)
        else:
            print_error(head)
        if rest:
            print(rest)
    return 0 if report.passed else 1


# ==================== SETTINGS ====================

def load_settings(path: Optional[str] = None) -> dict:
    try:
        cfg = load_config(path) if path else load_config()
    except FileNotFoundError as e:
        logger.warning(f"{e}; using built-in defaults")
        cfg = {}
    merged = {key: dict(value) for key, value in DEFAULT_SETTINGS.items()}
    for key, value in cfg.items():
        if isinstance(value, dict) and key in merged:
            merged[key].update(value)
        else:
            merged[key] = value
    return merged


def setup_logging(settings: dict, level: Optional[str] = None):
    log_cfg = settings.get("logging", {})
    logging.basicConfig(
        level=getattr(logging, (level or log_cfg.get("level", "INFO")).upper(), logging.INFO),
        format=log_cfg.get("format", DEFAULT_SETTINGS["logging"]["format"]),
        stream=sys.stderr,
    )


def field_ring(args: argparse.Namespace, settings: dict) -> ParameterRing:
    """Default parameter ring over GF(p^k), p and k from --p/--k or the field section"""
    p = getattr(args, "p", None) or settings["field"].get("p", 3)
    k = getattr(args, "k", None) or settings["field"].get("k", 1)
    return default_ring(p, k)


def family_ring(args: argparse.Namespace, settings: dict) -> ParameterRing:
    ring = field_ring(args, settings)
    if ring.p != 3:
        raise ParseError(f"L(eps, delta, rho) lives in characteristic 3, got p = {ring.p}")
    return ring


def parameter_assignment(args: argparse.Namespace, ring: ParameterRing) -> Dict[str, Scalar]:
    """--eps/--delta/--rho as field constants of the given ring"""
    out = {}
    for name in ("eps", "delta", "rho"):
        text = getattr(args, name, None)
        if text is None:
            continue
        value = parse_scalar(ring, text)
        if not value.is_constant():
            raise ParseError(f"--{name} must be a field value, got '{text}'")
        out[name] = value
    return out


def sweep_points(settings: dict) -> List[Dict[str, int]]:
    sweep = settings["verification"].get("sweep", {})
    return [
        {"eps": e, "delta": d, "rho": r}
        for e in sweep.get("eps", [1, 2])
        for d in sweep.get("delta", [0, 1, 2])
        for r in sweep.get("rho", [0, 1, 2])
    ]


# ==================== VERIFY ====================

def verify_eq_new_target(p: int, m: int, s: int) -> Report:
    started = time.perf_counter()
    d = DPDescriptor(m=m, N=(1,) * m, n=2 * s, p=p)
    realization = svect_deformed(d)
    checks = []
    for i in range(d.m):
        r = verify_eq_new(d, i, realization)
        checks.append(
            CheckRecord(
                check=f"((1-u)d_{d.names[i]})^[p] = -(d_{d.names[i]}^(p-1) u) d_{d.names[i]}",
                index=i,
                expected=r.y,
                computed=r.x,
                matched=r.ok,
                note=None if r.ok else (
                    f"outside svect (x: {r.x_in_algebra}, y: {r.y_in_algebra})"
                    if not (r.x_in_algebra and r.y_in_algebra)
                    else f"ad mismatch at {r.witness}"
                ),
            )
        )
    return build_report(f"eq-new({d.header}, dim {realization.dim})", checks, started)


def verify_k31_target() -> Report:
    started = time.perf_counter()
    d = k31_descriptor()
    monomial_failures = contact_jacobi_failures(d)
    checks = [
        CheckRecord(
            check=f"contact Jacobi on the {d.dim} monomials",
            matched=not monomial_failures,
            computed=", ".join(str(t) for t in monomial_failures[:5]) or None,
        )
    ]
    ring = default_ring(3)
    table = generating_table(ring.gen("eps"), k31_descriptor(ring))
    table_failures = contact_jacobi_failures(k31_descriptor(ring), [e.function for e in table])
    checks.append(
        CheckRecord(
            check="contact Jacobi on the generating functions",
            matched=not table_failures,
            computed=", ".join(str(t) for t in table_failures[:5]) or None,
        )
    )
    g = build_L(delta=0, rho=0, check=False)
    identities = check_super_identities(g)
    checks.append(CheckRecord(check="generating functions close into L(eps, 0, 0)", matched=identities.ok))
    return build_report("k31-jacobi", checks, started)


def verify_file_target(path: str) -> Report:
    started = time.perf_counter()
    g = read_algebra_json(path)
    identities = check_super_identities(g)
    checks = [
        CheckRecord(check="parity of structure constants", matched=not identities.parity),
        CheckRecord(check="super skew-symmetry", matched=not identities.skew),
        CheckRecord(check="super Jacobi", matched=not identities.jacobi),
    ]
    if identities.ok:
        restricted = verify_restricted(g)
        for f in restricted.failures:
            checks.append(
                CheckRecord(check=f"{f.name}^[{f.kind}]", element=f.name, index=f.index, matched=False, note=f.detail)
            )
        if restricted.restricted:
            checks.append(CheckRecord(check="p|2p-map on every basis element", matched=True))
    return build_report(f"file:{path}", checks, started)


def verify_semilinearity_target(settings: dict) -> Report:
    started = time.perf_counter()
    verification = settings["verification"]
    point = verification.get("semilinearity_point", {"eps": 1, "delta": 1, "rho": 1})
    g = build_L().specialize(point)
    restricted = verify_restricted(g)
    checks = [CheckRecord(check="restricted", matched=restricted.restricted)]
    if restricted.restricted:
        result = semilinearity_check(
            g, restricted.pmap, trials=verification.get("semilinearity_trials", 100), seed=verification.get("seed")
        )
        checks.append(
            CheckRecord(
                check=f"semilinearity over {result.trials} random trials",
                matched=result.ok,
                computed="; ".join(result.discrepancies[:3]) or None,
            )
        )
    return build_report(f"semilinearity({g.name})", checks, started)


def cmd_verify(target: str, args: argparse.Namespace, settings: dict) -> Report:
    """
    Run one verification target

    Args:
        target: Target id
        args: Parsed command-line options
        settings: Merged configuration

    Returns:
        Report of the driver
    """
    if target == "L3":
        ring = family_ring(args, settings)
        assignment = parameter_assignment(args, ring)
        return verify_lemma_L3(
            assignment=assignment or None,
            ring=ring,
            sweep=not args.symbolic,
            points=sweep_points(settings),
        )
    if target == "eq-new":
        return verify_eq_new_target(args.p, args.m, args.s)
    if target == "k31-jacobi":
        return verify_k31_target()
    if target == "semilinearity":
        return verify_semilinearity_target(settings)
    if target.startswith("fixture:"):
        parts = target.split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "flip"):
            raise UnknownTarget(f"expected fixture:<name>:<cocycle>[:flip], got '{target}'")
        bundle = load_fixture(fixtures_dir(settings, args.fixtures) / parts[1])
        if len(parts) == 4:
            bundle = flip_bundle(bundle)
        return verify_lemma_fixture(bundle, parts[2])
    if target.startswith("file:"):
        return verify_file_target(target[len("file:"):])
    raise UnknownTarget(f"unknown verification target '{target}'")


# ==================== PMAP / FINGERPRINT / CHECK ====================

def resolve_element(g: SuperAlgebra, text: str) -> Vector:
    """A basis name, comma-separated coordinates, or a sum of terms like 2*h1 + y2"""
    text = text.strip()
    if text in g.names:
        return g.element(text)
    if "," in text:
        coords = [parse_scalar(g.ring, c) for c in text.split(",")]
        if len(coords) != g.dim:
            raise ParseError(f"expected {g.dim} coordinates, got {len(coords)}")
        return tuple(coords)
    terms: List[Tuple[Scalar, str]] = []
    for part in text.split("+"):
        coef, _, name = part.strip().rpartition("*")
        if not name:
            raise ParseError(f"cannot read element '{text}'")
        terms.append((parse_scalar(g.ring, coef) if coef else g.ring.one, name.strip()))
    return g.vector(terms)


def cmd_pmap(path: str, element: str, args: argparse.Namespace) -> Report:
    started = time.perf_counter()
    g = read_algebra_json(path)
    assignment = parameter_assignment(args, g.ring)
    if assignment:
        g = g.specialize(assignment)
    x = resolve_element(g, element)
    odd = g.parity_of(x)
    label = f"({g.format(x)})^[{'2p' if odd else 'p'}]"
    try:
        result = two_p_power(g, x) if odd else solve_p_power(g, x)
    except NoSolution as e:
        note = f"{e.detail}; the algebra is not restricted"
        return build_report(label, [CheckRecord(check=label, matched=False, note=note)], started)
    coset = result.center is not None and result.center.dim > 0
    note = None
    if coset:
        note = "defined modulo the center spanned by " + ", ".join(g.format(r) for r in result.center.rows)
    elif result.free:
        note = "free coordinates set to 0: " + ", ".join(g.names[k] for k in result.free)
    return build_report(
        label,
        [CheckRecord(check=label, computed=g.format(result.value), matched=True, coset=coset, note=note)],
        started,
    )


def fingerprint_algebra(target: str, args: argparse.Namespace, settings: dict) -> SuperAlgebra:
    if target == "sp4":
        return build_sp4(ring=field_ring(args, settings))
    if target == "L":
        ring = family_ring(args, settings)
        assignment = parameter_assignment(args, ring)
        missing = {"eps", "delta", "rho"} - set(assignment)
        if missing:
            raise ParseError(f"fingerprint L needs values for {', '.join(sorted(missing))}")
        return build_L(ring=ring, **assignment)
    g = read_algebra_json(target)
    assignment = parameter_assignment(args, g.ring)
    return g.specialize(assignment) if assignment else g


def cmd_fingerprint(target: str, args: argparse.Namespace, settings: dict) -> int:
    g = fingerprint_algebra(target, args, settings)
    fp = invariant_fingerprint(g)
    if args.json:
        print(json.dumps({"algebra": g.name, **asdict(fp)}, indent=2))
    else:
        print_info(g.name)
        print(f"  {fp}")
    return 0


def cmd_check_file(path: str) -> Report:
    started = time.perf_counter()
    g = read_algebra_json(path)
    identities = check_super_identities(g)
    grading = check_grading(g)
    checks = [
        CheckRecord(check="parity of structure constants", matched=not identities.parity),
        CheckRecord(check="super skew-symmetry", matched=not identities.skew),
        CheckRecord(
            check="super Jacobi",
            matched=not identities.jacobi,
            computed=", ".join(
                f"({g.names[i]}, {g.names[j]}, {g.names[k]})" for (i, j, k), _ in identities.jacobi[:5]
            ) or None,
        ),
        CheckRecord(
            check="weights and degrees",
            matched=not grading,
            computed=", ".join(f"[{g.names[i]}, {g.names[j]}]" for i, j in grading[:5]) or None,
        ),
    ]
    if g.is_specialized() and identities.ok:
        checks.append(CheckRecord(check="center", matched=True, computed=f"dim {center(g).dim}"))
    return build_report(f"check-file:{Path(path).name}", checks, started)


# ==================== ENTRY ====================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Print the report as JSON")
    common.add_argument("--eps", help="Value of eps (integer mod p or GF(p^k) literal)")
    common.add_argument("--delta", help="Value of delta")
    common.add_argument("--rho", help="Value of rho")
    common.add_argument("--p", type=int, default=None, help="Characteristic")
    common.add_argument("--k", type=int, default=None, help="Extension degree of GF(p^k) for --eps/--delta/--rho")
    common.add_argument("--log-level", default=None, help="Override logging.level from config.yaml")
    common.add_argument("--config", default=None, help="Path to config.yaml")

    parser = argparse.ArgumentParser(
        prog="modlie",
        description="modlie - restricted modular Lie (super)algebras",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument("--version", action="version", version=f"modlie {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", parents=[common], help="Run a verification target")
    verify.add_argument("target")
    verify.add_argument("--m", type=int, default=1, help="Even indeterminates (eq-new)")
    verify.add_argument("--s", type=int, default=1, help="Pairs of odd indeterminates (eq-new)")
    verify.add_argument("--symbolic", action="store_true", help="Symbolic check only, skip the sweep")
    verify.add_argument("--fixtures", default=None, help="Fixture directory")

    pmap = sub.add_parser("pmap", parents=[common], help="p|2p-power of one element")
    pmap.add_argument("file")
    pmap.add_argument("element")

    fingerprint = sub.add_parser("fingerprint", parents=[common], help="Invariant fingerprint")
    fingerprint.add_argument("target", help="sp4, L or an algebra file")

    check = sub.add_parser("check-file", parents=[common], help="Validate an algebra file")
    check.add_argument("file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = load_settings(args.config)
    setup_logging(settings, args.log_level)
    if not settings["cli"].get("color", True) or args.json:
        Colors.disable()

    try:
        if args.command == "verify":
            if args.p is None:
                args.p = settings["field"].get("p", 3)
            return emit(cmd_verify(args.target, args, settings), args.json)
        if args.command == "pmap":
            return emit(cmd_pmap(args.file, args.element, args), args.json)
        if args.command == "fingerprint":
            return cmd_fingerprint(args.target, args, settings)
        if args.command == "check-file":
            return emit(cmd_check_file(args.file), args.json)
    except ModLieError as e:
        print_error(f"{type(e).__name__}: {e.detail}")
        return e.exit_code
    return 2


if __name__ == "__main__":
    sys.exit(main())
