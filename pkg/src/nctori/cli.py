"""``nctori`` command-line front end.

Every subcommand prints exactly one JSON document ``{"status", "payload"}``
on stdout; timing and diagnostics go to stderr so that identical inputs give
byte-identical stdout.  Exit codes: 0 ok, 1 violation (an identity that
should hold failed), 2 domain-error (e.g. ``C theta + D`` singular),
3 input-error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import __version__, kernels
from .errors import (
    AmbiguousIntertwiner,
    DomainError,
    IdentityViolation,
    InputError,
    NoIntertwiner,
)
from .exactmat import RatMatrix, SkewMatrix, det, format_rational, pfaffian
from .group_onn import (
    GeneratorWord,
    GroupElement,
    act,
    act_stepwise,
    evaluate,
    random_integer_skew,
    random_rational_skew,
    sample_domain_report,
    token_from_json,
)

EXIT_CODES = {"ok": 0, "violation": 1, "domain-error": 2, "input-error": 3}


@dataclass
class CommandResult:
    status: str
    payload: dict
    elapsed_ms: float = 0.0

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> dict:
        return {"status": self.status, "payload": self.payload}


# -- input -------------------------------------------------------------------


def _read_json(path: str):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc


def load_theta(path: str) -> SkewMatrix:
    doc = _read_json(path)
    if isinstance(doc, dict) and "theta" in doc:
        doc = doc["theta"]
    return SkewMatrix.of(RatMatrix.from_json(doc))


def group_from_json(doc, n: int | None = None, check: bool = True) -> tuple[GroupElement, GeneratorWord | None]:
    """Accepts a block document, a word, a single token or a raw 2n x 2n matrix."""
    if isinstance(doc, dict) and "tokens" in doc:
        word = GeneratorWord.from_json(doc, n)
        return evaluate(word), word
    if isinstance(doc, dict) and "kind" in doc:
        token = token_from_json(doc)
        word = GeneratorWord.from_json({"tokens": [doc]}, n)
        return evaluate(word), GeneratorWord(word.n, (token,))
    if isinstance(doc, dict) and "A" in doc:
        return GroupElement.from_json(doc, check=check, integral=check), None
    return GroupElement(RatMatrix.from_json(doc), check=check, integral=check), None


def load_group(path: str, n: int | None = None, check: bool = True):
    doc = _read_json(path)
    try:
        return group_from_json(doc, n, check)
    except (KeyError, TypeError) as exc:
        raise InputError(f"{path}: malformed group element ({exc})") from exc


def _skew_json(m: RatMatrix) -> dict:
    return SkewMatrix.of(m).to_json()


# -- subcommands -------------------------------------------------------------------


def cmd_act(args) -> dict:
    theta = load_theta(args.theta)
    g, word = load_group(args.g, theta.n)
    out = act(g, theta)
    payload = {"n": theta.n, "theta": out.to_json()}
    if word is not None and args.stepwise:
        step = act_stepwise(word, theta)
        if step != out:
            raise IdentityViolation("stepwise action disagrees with the product action")
        payload["stepwise_agrees"] = True
    return payload


def cmd_check_group(args) -> dict:
    g, _ = load_group(args.g, args.n, check=False)
    failures = g.block_equation_failures()
    d = det(g.matrix)
    integral = g.matrix.is_integral()
    return {
        "n": g.n,
        "integral": integral,
        "block_equation_failures": failures,
        "preserves_form": g.preserves_form(),
        "det": format_rational(d),
        "in_O_nn_Z": integral and not failures,
        "in_SO_nn_Z": integral and not failures and d == 1,
    }


def cmd_sigma_dual(args) -> dict:
    from .heisenberg import check_cocycle_restriction, dual_lattice_span_check, sigma_dual

    theta = load_theta(args.theta)
    E = sigma_dual(theta, args.p, args.t32_mode)
    rng = random.Random(args.seed)
    for _ in range(20):
        x = [rng.randint(-3, 3) for _ in range(E.n)]
        y = [rng.randint(-3, 3) for _ in range(E.n)]
        if not check_cocycle_restriction(E, x, y):
            raise IdentityViolation(f"cocycle restriction fails at x={x}, y={y}")
    if not dual_lattice_span_check(E):
        raise IdentityViolation("dual lattice basis does not span the annihilator")
    return {"embedding": E.to_json(), "sigma_theta": E.sigma_theta.to_json(), "checks": "passed"}


def cmd_grassmann_act(args) -> dict:
    from .grassmann import projective_act, solve_intertwiner, verify_eq8

    theta = load_theta(args.theta)
    g, _ = load_group(args.g, theta.n)
    sol = solve_intertwiner(g)
    res = projective_act(g, theta, sol.U)
    report = verify_eq8(g, theta, sol.U)
    if not report.ok:
        raise IdentityViolation(f"transported equations fail: {report.failures}")
    return {
        "theta": res.theta.to_json(),
        "scalar": format_rational(res.scalar),
        "kernel_dim": sol.kernel_dim,
        "certified_by": sol.certified_by,
        "eq8": report.to_json(),
    }


def cmd_intertwiner(args) -> dict:
    from .grassmann import solve_intertwiner

    g, _ = load_group(args.g, args.n, check=False)
    sol = solve_intertwiner(g, method=args.method)
    return {"U": sol.U.to_json(), "kernel_dim": sol.kernel_dim, "certified_by": sol.certified_by}


def cmd_trace_range(args) -> dict:
    from .ktheory import trace_range

    theta = load_theta(args.theta)
    return {"n": theta.n, "trace_range": trace_range(theta).to_json()}


def cmd_morita_trace(args) -> dict:
    from .ktheory import morita_trace_check, trace_range

    theta = load_theta(args.theta)
    g, _ = load_group(args.g, theta.n)
    c = morita_trace_check(theta, g)
    return {
        "c": format_rational(c),
        "before": trace_range(theta).to_json(),
        "after": trace_range(act(g, theta)).to_json(),
    }


def cmd_pfaffian(args) -> dict:
    theta = load_theta(args.theta)
    return {"n": theta.n, "pfaffian": format_rational(pfaffian(theta))}


def cmd_rep_check(args) -> dict:
    from .group_onn import random_unimodular
    from .torus_rep import (
        RationalTheta,
        build_rep,
        verify_cocycle,
        verify_nu_shift,
        verify_relations,
        verify_rho_iso,
    )

    doc = _read_json(args.rep)
    rt = RationalTheta.from_json(doc) if isinstance(doc, dict) and "q" in doc else RationalTheta.from_theta(
        SkewMatrix.of(RatMatrix.from_json(doc))
    )
    rng = random.Random(args.seed)
    R = RatMatrix.from_json(_read_json(args.R)) if args.R else random_unimodular(rt.n, rng)
    N = RatMatrix.from_json(_read_json(args.N)) if args.N else random_integer_skew(rt.n, rng)
    rep = build_rep(rt)
    reports = [
        verify_relations(rep),
        verify_cocycle(rep, args.radius),
        verify_rho_iso(rep, R, args.radius),
        verify_nu_shift(rt, N),
    ]
    payload = {
        "rational_theta": rt.to_json(),
        "dim": rep.dim,
        "m": rep.m,
        "R": R.to_json(),
        "N": N.to_json(),
        "reports": [r.to_json() for r in reports],
    }
    if not all(reports):
        raise IdentityViolation(payload)
    return payload


def cmd_wedge_counterexample(args) -> dict:
    from .ktheory import COUNTEREXAMPLE_TARGET, counterexample_search, wedge_square

    target = [[1, 0, 0], [0, 1, 0], [0, 0, 1]] if args.control else COUNTEREXAMPLE_TARGET
    report = counterexample_search(args.bound, target, workers=args.workers)
    rng = random.Random(args.seed)
    mismatches = []
    for _ in range(args.samples):
        A = RatMatrix([[rng.randint(-5, 5) for _ in range(3)] for _ in range(3)])
        if det(wedge_square(A)) != det(A) ** 2:
            mismatches.append(A.to_json())
    payload = report.to_json()
    payload["det_identity"] = {"samples": args.samples, "seed": args.seed, "mismatches": mismatches}
    if mismatches or (report.hits and not args.control):
        raise IdentityViolation(payload)
    return payload


def _perturb(theta: SkewMatrix, rng: random.Random) -> SkewMatrix:
    n = theta.n
    upper = {
        (i, j): theta[i, j] + Fraction(rng.randint(-9, 9), rng.randint(11, 97))
        for i in range(n)
        for j in range(i + 1, n)
    }
    return SkewMatrix.from_upper(n, upper)


def cmd_orbit_sample(args) -> dict:
    rng = random.Random(args.seed)
    if args.theta:
        base = load_theta(args.theta)
    else:
        if args.n is None or args.n < 1:
            raise InputError("orbit-sample needs --theta or --n")
        base = random_rational_skew(args.n, rng)
    samples = []
    for k in range(args.thetas):
        theta = base if args.thetas == 1 else _perturb(base, rng)
        samples.append(sample_domain_report(theta, args.max_word_len, args.count, seed=args.seed + k))
    total = sum(s["count"] for s in samples)
    defined = sum(s["defined"] for s in samples)
    return {
        "n": base.n,
        "base_theta": base.to_json(),
        "thetas": args.thetas,
        "words_per_theta": args.count,
        "max_word_len": args.max_word_len,
        "seed": args.seed,
        "total_words": total,
        "total_defined": defined,
        "fraction_defined": format_rational(Fraction(defined, total)) if total else "0",
        "samples": samples,
    }


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nctori", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
        return p

    p = add("act", cmd_act, "apply a group element or word to theta")
    p.add_argument("--g", required=True, help="group element / word JSON file or -")
    p.add_argument("--theta", required=True)
    p.add_argument("--stepwise", action="store_true", help="also apply a word token by token")

    p = add("check-group", cmd_check_group, "block equations and determinant")
    p.add_argument("--g", required=True)
    p.add_argument("--n", type=int)

    p = add("sigma-dual", cmd_sigma_dual, "embedding, dual embedding and sigma_2p(theta)")
    p.add_argument("--theta", required=True)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--t32-mode", choices=("half", "upper"), default="half")

    p = add("grassmann-act", cmd_grassmann_act, "action through the Grassmann algebra")
    p.add_argument("--g", required=True)
    p.add_argument("--theta", required=True)

    p = add("intertwiner", cmd_intertwiner, "dump the normalized intertwiner U_g")
    p.add_argument("--g", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--method", choices=("vacuum", "dense"), default="vacuum")

    p = add("trace-range", cmd_trace_range, "generator of the trace range")
    p.add_argument("--theta", required=True)

    p = add("morita-trace", cmd_morita_trace, "trace range ratio under g")
    p.add_argument("--theta", required=True)
    p.add_argument("--g", required=True)

    p = add("pfaffian", cmd_pfaffian, "Pfaffian of an antisymmetric matrix")
    p.add_argument("--theta", required=True)

    p = add("rep-check", cmd_rep_check, "exact representation relations for rational theta")
    p.add_argument("--rep", required=True, help='{"q": q, "P": matrix} or a rational theta')
    p.add_argument("--R", help="unimodular matrix JSON (default: seeded random)")
    p.add_argument("--N", help="integer antisymmetric shift JSON (default: seeded random)")
    p.add_argument("--radius", type=int, default=2)

    p = add("wedge-counterexample", cmd_wedge_counterexample, "search A with A^A = diag(-1,1,1)")
    p.add_argument("--bound", type=int, default=2)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--samples", type=int, default=10_000, help="random det(A^A) = det(A)^2 checks")
    p.add_argument("--control", action="store_true", help="search for A^A = I instead")

    p = add("orbit-sample", cmd_orbit_sample, "domain statistics along random words")
    p.add_argument("--theta")
    p.add_argument("--n", type=int)
    p.add_argument("--thetas", type=int, default=1, help="number of perturbed copies of theta")
    p.add_argument("--count", type=int, default=100, help="words per theta")
    p.add_argument("--max-word-len", type=int, default=6)
    return parser


def run(argv: Sequence[str] | None = None) -> CommandResult:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        return CommandResult("input-error", {"error": "UsageError", "message": "invalid arguments"})
    start = time.perf_counter()
    try:
        payload = args.func(args)
        status = "ok"
    except (IdentityViolation, AmbiguousIntertwiner) as exc:
        status = "violation"
        detail = exc.args[0] if exc.args else ""
        payload = {"error": type(exc).__name__, "message": detail if isinstance(detail, dict) else str(detail)}
    except DomainError as exc:
        status, payload = "domain-error", {"error": type(exc).__name__, "message": str(exc)}
    except (InputError, NoIntertwiner) as exc:
        status, payload = "input-error", {"error": type(exc).__name__, "message": str(exc)}
    payload = {"command": args.command, **payload}
    return CommandResult(status, payload, (time.perf_counter() - start) * 1000)


def main(argv: Sequence[str] | None = None) -> int:
    result = run(argv)
    sys.stdout.write(json.dumps(result.to_json(), indent=2) + "\n")
    sys.stderr.write(f"elapsed_ms={result.elapsed_ms:.1f} backend={kernels.BACKEND}\n")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
