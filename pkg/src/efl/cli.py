"""Command-line front end.

Exit codes: 0 success, 1 usage or data error, 2 failed verification.
All numbers are printed with 12 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .characters_data import (
    CharacterError,
    CharacterSpec,
    DirichletCharacter,
    build_character,
    character_from_label,
    load_character,
    multiplicative_order,
)
from .kernel import QuadratureConfig
from .padic import ArchCharacter, BruhatFunction, LocalCharacter, Place, localize_dirichlet

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2
DIGITS = 12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# data and argument helpers


def data_dir() -> Path:
    env = os.environ.get("EFL_DATA_DIR")
    if env:
        return Path(env)
    return Path(str(resources.files("efl") / "data"))


def resolve_data_path(text: str) -> Path:
    """A path as given if it exists, else relative to the data directory
    (a leading ``data/`` is dropped)."""
    path = Path(text)
    if path.exists():
        return path
    rel = Path(*path.parts[1:]) if path.parts and path.parts[0] == "data" else path
    candidate = data_dir() / rel
    if candidate.exists():
        return candidate
    raise FileNotFoundError(f"no such file: {text} (also looked in {data_dir()})")


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


def parse_dirichlet(text: str) -> DirichletCharacter:
    """``trivial``, ``mod:M:gen:G:exp:E...`` or a character JSON file."""
    if text == "trivial" or text.startswith("mod:"):
        return character_from_label(text)
    return load_character(resolve_data_path(text))


def primitive_of(chi: DirichletCharacter) -> DirichletCharacter:
    """The primitive character inducing chi."""
    if chi.primitive:
        return chi
    c = chi.conductor
    turns = []
    for a in range(c):
        if math.gcd(a, c) != 1:
            turns.append(None)
            continue
        b = a
        while math.gcd(b, chi.modulus) != 1:
            b += c
        turns.append(chi.turn(b))
    return DirichletCharacter(c, tuple(turns))


def parse_local_character(place: Place, text: str | None):
    """Finite place: ``trivial``, ``unram:T`` (chi(p) = e^(2 pi i T)), a
    Dirichlet label/file (localized after passing to the primitive
    character).  Real: ``trivial`` or ``sign``.  Complex: ``twist:N``."""
    text = (text or "trivial").strip()
    if not place.is_finite:
        if text == "trivial":
            return ArchCharacter(place, 0)
        if text == "sign" and place.kind == "real":
            return ArchCharacter(place, 1)
        if text.startswith("twist:") and place.kind == "complex":
            return ArchCharacter(place, int(text.split(":", 1)[1]))
        if place.kind == "real":
            return localize_dirichlet(primitive_of(parse_dirichlet(text)), place)
        raise UsageError(f"cannot parse character {text!r} for the complex place")
    if text == "trivial":
        return LocalCharacter.unramified(place)
    if text.startswith("unram:"):
        turn = Fraction(text.split(":", 1)[1])
        return LocalCharacter.unramified(place, 2 * math.pi * float(turn))
    chi = primitive_of(parse_dirichlet(text))
    local = localize_dirichlet(chi, Place.finite(place.p))
    if place.delta:
        local = LocalCharacter(place, local.theta, local.conductor, local.table)
    return local


def parse_bruhat(text: str, place: Place) -> BruhatFunction:
    """``builtin:unitball``, ``builtin:omega1``, ``builtin:ball:N``,
    ``builtin:annulus:V``, ``builtin:eigen:<character>[:v:V]`` or a JSON file."""
    from .log_fourier import omega1
    from .weil_local import eigenfunction

    if text.startswith("builtin:"):
        name, *rest = text[len("builtin:"):].split(":", 1)
        if name == "unitball":
            return BruhatFunction.unit_ball(place)
        if name == "omega1":
            return omega1(place)
        if name == "ball":
            return BruhatFunction.ball(place, int(rest[0]))
        if name == "annulus":
            return BruhatFunction.annulus(place, int(rest[0]))
        if name == "eigen":
            spec, v = rest[0], 0
            if ":v:" in spec:
                spec, v = spec.rsplit(":v:", 1)
            return eigenfunction(parse_local_character(place, spec), int(v))
        raise UsageError(f"unknown builtin {text!r}")
    phi = BruhatFunction.load(resolve_data_path(text))
    if phi.place.p != place.p or phi.place.delta != place.delta:
        raise UsageError(f"{text} lives on {phi.place.label()}, not {place.label()}")
    return phi


def parse_arch_function(text: str, place: Place):
    from .log_fourier import ArchFunction, complex_gaussian, real_gaussian
    from .test_functions import parse_test_function

    if text in ("builtin:gaussian", "gaussian"):
        return real_gaussian() if place.kind == "real" else complex_gaussian()
    if place.kind != "real":
        raise UsageError("the complex place accepts builtin:gaussian only")
    f = parse_test_function(text)
    return ArchFunction(lambda x, f=f: f(abs(x)), f.support[1], tuple(f.breakpoints))


def finite_place(p: int, delta: int) -> Place:
    try:
        return Place.finite(p, delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# output


def _round(x):
    if isinstance(x, bool) or x is None or isinstance(x, (str, int)):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{DIGITS}g}")
    if isinstance(x, complex):
        return {"re": _round(x.real), "im": _round(x.imag)}
    if isinstance(x, dict):
        return {str(k): _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if hasattr(x, "item"):
        return _round(x.item())
    return str(x)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    elif isinstance(obj, list):
        yield prefix, ";".join(_scalar(v) for v in obj)
    else:
        yield prefix, _scalar(obj)


def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v) if not isinstance(v, float) else repr(v)


def render(payload: dict, fmt: str) -> str:
    data = _round(payload)
    if fmt == "json":
        return json.dumps(data, sort_keys=True, indent=2)
    rows = list(_flatten(json.loads(json.dumps(data, sort_keys=True))))
    if fmt == "table":
        width = max((len(k) for k, _ in rows), default=0)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("handler",)}


def _quad(args) -> QuadratureConfig:
    return QuadratureConfig(abs_tol=args.quad_tol, rel_tol=args.quad_tol)


# ---------------------------------------------------------------------------
# subcommands; each returns (payload, exit code)


def cmd_gamma(args):
    from .gamma_factors import branch_of, gamma_factor, gamma_numeric_oracle, lambda_log_derivative

    place = Place.parse(args.place)
    char = parse_local_character(place, args.char)
    s = parse_complex(args.s)
    g = gamma_factor(place, char, s)
    out = {"re": g.real, "im": g.imag, "branch": branch_of(place, char),
           "lambda": lambda_log_derivative(place, char, s), "character": char.label()}
    code = EXIT_OK
    if args.oracle:
        o = gamma_numeric_oracle(place, char, s, cfg=QuadratureConfig(1e-15, 1e-13))
        rel = abs(g - o) / max(abs(o), 1e-300)
        out["oracle"] = o
        out["relativeDifference"] = rel
        if rel > args.oracle_tol:
            code = EXIT_FAILED
    return out, code


def cmd_logft(args):
    from .log_fourier import constants_for, g_eval

    place = Place.parse(args.place)
    phi = parse_bruhat(args.phi, place) if place.is_finite else parse_arch_function(args.phi, place)
    value = g_eval(place, phi, args.regularization, _quad(args))
    consts = constants_for(place, args.regularization)
    return {"value": value, "constants": consts.to_json()}, EXIT_OK


def cmd_weil(args):
    from .test_functions import parse_test_function
    from .weil_local import IdeleLocalComponent, weil_term_arch, weil_term_finite

    place = Place.parse(args.place)
    f = parse_test_function(args.test_fn)
    char = parse_local_character(place, args.char)
    comp = IdeleLocalComponent(place, f, char)
    code = EXIT_OK
    out = {"place": place.label(), "character": char.label()}
    if place.is_finite:
        if args.path == "both":
            a = weil_term_finite(comp, "annulus")
            b = weil_term_finite(comp, "convolution")
            out.update(value=a, convolution=b, difference=abs(a - b))
            if abs(a - b) > 1e-9 * max(1.0, abs(a)):
                code = EXIT_FAILED
        else:
            out["value"] = weil_term_finite(comp, args.path)
    else:
        out["value"] = weil_term_arch(comp, args.regularization, _quad(args))
    return out, code


def cmd_conductor(args):
    from .weil_local import conductor_integral

    place = finite_place(args.p, args.delta)
    m = args.char_modulus
    gens, exps = args.char_gen or [], args.char_exp or []
    if len(gens) != len(exps):
        raise UsageError("--char-gen and --char-exp must be given the same number of times")
    spec = CharacterSpec(m, tuple((g, e, multiplicative_order(g, m)) for g, e in zip(gens, exps)))
    chi = primitive_of(build_character(spec))
    if chi.modulus % args.p and chi.modulus > 1:
        raise UsageError(f"the character is unramified at p = {args.p}")
    local = parse_local_character(place, None) if chi.modulus == 1 else localize_dirichlet(chi, Place.finite(args.p))
    if place.delta:
        local = LocalCharacter(place, local.theta, local.conductor, local.table)
    value = conductor_integral(local)
    target = local.conductor * math.log(args.p)
    code = EXIT_OK if abs(value - target) <= 1e-12 * max(1.0, target) else EXIT_FAILED
    return {"value": value, "expected": "f*log q", "f": local.conductor,
            "expectedValue": target}, code


def cmd_hop(args):
    from .weil_local import conductor_operator_apply

    place = finite_place(args.p, args.delta)
    phi = parse_bruhat(args.phi, place)
    h = conductor_operator_apply(place, phi)
    norm = phi.inner(phi)
    lam = h.inner(phi) / norm
    eigen = h.isclose(phi.scale(lam), atol=1e-12 * max(1.0, phi.max_abs()))
    return {"result": h.to_json(), "rayleighQuotient": lam.real,
            "isEigenfunction": eigen}, EXIT_OK


def cmd_ef(args):
    from .explicit_formula import chi4_zeros, load_zeros, verify_explicit_formula
    from .test_functions import parse_test_function

    chi = primitive_of(parse_dirichlet(args.character))
    f = parse_test_function(args.test_fn)
    if args.zeros.startswith("builtin:chi4"):
        parts = args.zeros.split(":")
        zeros = chi4_zeros(float(parts[2]) if len(parts) > 2 else 100.0)
    else:
        zeros = load_zeros(resolve_data_path(args.zeros))
    cfg = QuadratureConfig(abs_tol=args.quad_tol, rel_tol=args.quad_tol)
    report = verify_explicit_formula(f, chi, zeros, args.max_zeros, cfg)
    return report.to_json(), (EXIT_OK if report.passed else EXIT_FAILED)


def cmd_zabrodin(args):
    from .zabrodin_action import action_equality_check, random_bruhat

    place = finite_place(args.p, args.delta)
    if args.phi == "random":
        rng = random.Random(args.seed)
        phis = [random_bruhat(place, rng) for _ in range(args.count)]
    else:
        phis = [parse_bruhat(args.phi, place)]
    results, worst = [], 0.0
    for phi in phis:
        v = action_equality_check(place, phi)
        rel = v.difference / max(abs(v.momentum_form), 1e-300) if v.difference else 0.0
        worst = max(worst, rel)
        results.append({"momentumForm": v.momentum_form, "positionForm": v.position_form,
                        "relativeDifference": rel})
    out = {"results": results, "worstRelativeDifference": worst}
    if len(results) == 1:
        out.update(results[0])
    return out, (EXIT_OK if worst <= args.tol else EXIT_FAILED)


def cmd_mellin(args):
    from .test_functions import mellin, mellin_derivative, parse_test_function

    f = parse_test_function(args.test_fn)
    s = parse_complex(args.s)
    cfg = _quad(args)
    out = {"value": mellin(f, s, cfg)}
    if args.derivative:
        out["derivative"] = mellin_derivative(f, s, cfg)
    return out, EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "table", "csv"), default="json")
    common.add_argument("--quad-tol", type=float, default=None,
                        help="quadrature tolerance (default 1e-10; 1e-13 for ef verify)")
    common.add_argument("--seed", type=int, default=0)

    parser = _Parser(prog="efl", description="Explicit formulas and local Weil terms")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("gamma", parents=[common], help="local Gamma factor")
    p.add_argument("--place", required=True)
    p.add_argument("--char", default="trivial")
    p.add_argument("--s", required=True)
    p.add_argument("--oracle", action="store_true", help="compare with the numeric oracle")
    p.add_argument("--oracle-tol", type=float, default=1e-8)
    p.set_defaults(handler=cmd_gamma)

    p = sub.add_parser("logft", parents=[common], help="G = FT(-log|x|) paired with phi")
    p.add_argument("--place", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--regularization", default=None)
    p.set_defaults(handler=cmd_logft)

    p = sub.add_parser("weil", parents=[common], help="local Weil term W_v")
    p.add_argument("--place", required=True)
    p.add_argument("--test-fn", required=True)
    p.add_argument("--char", default="trivial")
    p.add_argument("--path", choices=("annulus", "convolution", "both"), default="annulus")
    p.add_argument("--regularization", default=None)
    p.set_defaults(handler=cmd_weil)

    p = sub.add_parser("conductor", parents=[common], help="conductor integral")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--char-modulus", type=int, required=True)
    p.add_argument("--char-gen", type=int, action="append")
    p.add_argument("--char-exp", type=int, action="append")
    p.set_defaults(handler=cmd_conductor)

    p = sub.add_parser("hop", parents=[common], help="apply the conductor operator H")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--phi", required=True)
    p.set_defaults(handler=cmd_hop)

    p = sub.add_parser("ef", help="explicit formula")
    efsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    v = efsub.add_parser("verify", parents=[common])
    v.add_argument("--character", default="trivial")
    v.add_argument("--test-fn", required=True)
    v.add_argument("--zeros", default="data/zeta_zeros.txt")
    v.add_argument("--max-zeros", type=int, default=100)
    v.set_defaults(handler=cmd_ef)

    p = sub.add_parser("zabrodin", parents=[common], help="momentum vs position action")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--phi", default="random")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(handler=cmd_zabrodin)

    p = sub.add_parser("mellin", parents=[common], help="Mellin transform of a test function")
    p.add_argument("--test-fn", required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--derivative", action="store_true")
    p.set_defaults(handler=cmd_mellin)
    return parser


def run(argv=None) -> tuple[int, str]:
    """Execute a command line; returns (exit code, rendered output)."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return EXIT_ERROR, f"usage error: {exc}"
    if args.quad_tol is None:
        args.quad_tol = 1e-13 if args.subcommand == "ef" else 1e-10
    try:
        payload, code = args.handler(args)
    except UsageError as exc:
        return EXIT_ERROR, f"usage error: {exc}"
    except (ValueError, ArithmeticError, RuntimeError, OSError, KeyError, CharacterError) as exc:
        return EXIT_ERROR, f"error: {type(exc).__name__}: {exc}"
    payload["config"] = {**_config(args), **payload.get("config", {})}
    return code, render(payload, args.format)


def main(argv=None) -> int:
    try:
        code, text = run(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    stream = sys.stdout if code != EXIT_ERROR else sys.stderr
    print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
