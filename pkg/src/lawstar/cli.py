"""Command-line front end: ``lawstar [flags] COMMAND [ARGS]``.

Every command reads a system document (``--config``), runs one verifier and
prints a report; ``gen-random`` instead prints a random system document.
Exit status is 0 when every record passes, 1 when a check fails and 2 for
usage, configuration or precondition errors.
"""

from __future__ import annotations

import argparse
import sys as _sys

import numpy as np

from . import sampling
from .annihil import certify_baer, left_annihilator, right_annihilator
from .config import SystemConfig, config_from_system, emit_config, load_config, parse_config
from .errors import LawstarError, PreconditionError
from .lawstruct import (
    bounded_part,
    center,
    certify_subsystem,
    check_limit_annihilator,
    commutant,
    corner,
    ideal_annihilator_central,
    kaplansky_approx,
    masa_containing,
    orthogonal_sup_laws,
    verify_equivalence,
)
from .limits import Thread, sup_norm, validate_system
from .matstar import is_selfadjoint, projection_ranks
from .projlat import verify_lattice
from .report import EXIT_USAGE, Report, digest
from .spectral import MU_RULES, reconstruct

REF = {
    "validate": "projective-system-axioms",
    "baer": "annihilator-generated-by-projection",
    "lattice": "projection-lattice",
    "kaplansky-sup": "orthogonal-family-has-supremum",
    "kaplansky-masa": "masa-generated-by-projections",
    "coordinatewise-aw": "coordinates-are-aw-star",
    "equivalence": "locally-aw-star-characterisations-agree",
    "annihilator": "right-left-annihilator-projection",
    "center": "center-is-locally-aw-star-subalgebra",
    "masa": "masa-is-locally-aw-star-subalgebra",
    "corner": "corner-is-locally-aw-star-subalgebra",
    "commutant": "commutant-is-baer-subalgebra",
    "bounded": "bounded-element",
    "bounded-part": "bounded-part-is-aw-star",
    "ideal": "right-ideal-annihilator-is-central",
    "spectral": "spectral-family-reconstruction",
    "lemma1": "projection-multiple-approximation",
    "lemma2": "orthogonal-sup-preserves-annihilation-and-commutation",
}

COMMANDS = ("validate", "verify", "annihilate", "center", "corner", "masa", "commutant", "bounded",
            "bounded-part", "ideal-annihilator", "spectral", "lemma1", "lemma2", "gen-random")
VERIFY = ("baer", "kaplansky", "theorem1", "lattice")


class UsageError(LawstarError):
    """Bad command line: unknown command, missing argument or element."""


class Context:
    def __init__(self, cfg: SystemConfig, flags):
        self.cfg = cfg
        self.flags = flags
        self.system = cfg.system
        self.finite = cfg.system.finite() if cfg.system.is_lazy else cfg.system
        self.seed = cfg.seed if flags.seed is None else flags.seed

    def thread(self, name: str, finite: bool = True) -> Thread:
        try:
            x = self.cfg.threads[name]
        except KeyError:
            known = ", ".join(sorted(self.cfg.threads)) or "none"
            raise UsageError(f"unknown element {name!r} (defined: {known})") from None
        if finite and x.system is not self.finite:
            x = Thread(self.finite, {n: x(n) for n in self.finite.nodes}, declared_bound=x.declared_bound,
                       monotone=x.monotone, label=x.label)
        return x

    def threads(self, names: str) -> list[Thread]:
        return [self.thread(n) for n in names.split(",") if n]


def _args(command, count, usage):
    if len(command) - 1 != count:
        raise UsageError(f"usage: {usage}")
    return command[1:]


def _verdict(report, v, ref):
    report.add(v.name, ref, v.ok, {"max": v.residual}, v.witness, checks=v.checks)


def _subsystem(report, sub, ref, seed, prefix=""):
    rep = certify_subsystem(sub, seed=seed)
    for name, v in rep.verdicts.items():
        report.add(prefix + name, ref, v.ok, {"max": v.residual}, v.witness, checks=v.checks)
    return rep


# commands -------------------------------------------------------------------------

def cmd_validate(ctx, report, command):
    _args(command, 0, "validate")
    sys = ctx.system
    rep = validate_system(sys, tol=ctx.flags.tol, max_nodes=sys.horizon if sys.is_lazy else 10)
    for r in rep.records:
        report.add(r["check"], REF["validate"], r["ok"], {"residual": r["residual"]}, r["witness"])


def _limit_baer(ctx, report, rng):
    worst, bad = 0.0, None
    for k in range(ctx.flags.samples):
        S = [sampling.random_thread(rng, ctx.finite) for _ in range(int(rng.integers(1, 4)))]
        ok, residual, info = check_limit_annihilator(ctx.finite, S)
        worst = max(worst, residual)
        if not ok and bad is None:
            bad = {"sample": k, "oracle_dim": info["oracle_dim"], "generator_dim": info["generator_dim"]}
    report.add("limit-baer", REF["baer"], bad is None, {"max": worst}, bad, samples=ctx.flags.samples)


def cmd_verify(ctx, report, command):
    if len(command) != 2:
        raise UsageError(f"usage: verify {{{','.join(VERIFY)}}}")
    what = command[1]
    if what == "w-star":
        raise UsageError("verify w-star is out of scope: no predual or von Neumann structure is modelled")
    rng = np.random.default_rng(ctx.seed)
    fin = ctx.finite
    if what == "baer":
        for n in fin.nodes:
            rep = certify_baer(fin.algebra(n), ctx.flags.samples, int(rng.integers(2**31)))
            report.add("coordinate-baer", REF["baer"], rep.ok, {"max": rep.max_residual},
                       rep.counterexamples[:1] or None, node=n, subsets=rep.samples)
        _limit_baer(ctx, report, rng)
    elif what in ("kaplansky", "theorem1"):
        eq = verify_equivalence(fin, ctx.flags.samples, ctx.seed)
        refs = {"baer": REF["baer"], "kaplansky-orthogonal-sup": REF["kaplansky-sup"],
                "kaplansky-masa": REF["kaplansky-masa"], "coordinatewise-aw": REF["coordinatewise-aw"]}
        shown = eq.verdicts if what == "theorem1" else [eq.kaplansky_sup, eq.kaplansky_masa]
        for v in shown:
            _verdict(report, v, refs[v.name])
        if what == "theorem1":
            report.add("agreement", REF["equivalence"], eq.agreement, {},
                       None if eq.agreement else {v.name: v.ok for v in eq.verdicts})
    elif what == "lattice":
        for n in fin.nodes:
            rep = verify_lattice(fin.algebra(n), ctx.flags.samples, int(rng.integers(2**31)), tol=ctx.flags.tol)
            report.add("lattice-laws", REF["lattice"], rep.ok, {"orthogonal_sup_minus_sum": rep.max_orthogonal_sum_residual},
                       rep.violations[:1] or None, node=n, checks=rep.checks)
    else:
        raise UsageError(f"unknown verifier {what!r} (known: {', '.join(VERIFY)}; w-star is out of scope)")


def cmd_annihilate(ctx, report, command):
    (names,) = _args(command, 1, "annihilate NAME[,NAME...]")
    S = ctx.threads(names)
    if not S:
        raise PreconditionError("annihilators are taken of nonempty sets")
    for n in ctx.finite.nodes:
        right = right_annihilator([s(n) for s in S])
        left = left_annihilator([s(n) for s in S])
        for side, res in (("right", right), ("left", left)):
            report.add(f"{side}-annihilator", REF["annihilator"], res.consistent,
                       {"membership": res.membership_residual}, None, node=n,
                       dim=res.subspace_dim, oracle_dim=res.oracle_dim, generator_ranks=list(res.generator.ranks))
    ok, residual, info = check_limit_annihilator(ctx.finite, S)
    report.add("limit-right-annihilator", REF["baer"], ok, {"max": residual}, None,
               oracle_dim=info["oracle_dim"], generator_dim=info["generator_dim"])


def cmd_center(ctx, report, command):
    _args(command, 0, "center")
    _subsystem(report, center(ctx.finite), REF["center"], ctx.seed)


def cmd_corner(ctx, report, command):
    (name,) = _args(command, 1, "corner PROJECTION")
    sub = corner(ctx.finite, ctx.thread(name))
    _subsystem(report, sub, REF["corner"], ctx.seed)
    report.add("corner-shape", REF["corner"], True, {}, None, degenerate=sub.degenerate,
               blocks={n: list(sub.intrinsic.algebra(n).block_sizes) for n in ctx.finite.nodes})


def cmd_masa(ctx, report, command):
    (name,) = _args(command, 1, "masa ELEMENT")
    x = ctx.thread(name)
    for n in ctx.finite.nodes:
        if not is_selfadjoint(x(n)):
            raise PreconditionError(f"masa needs a self-adjoint element; {name!r} is not at {n!r}")
    _subsystem(report, masa_containing(x), REF["masa"], ctx.seed)


def cmd_commutant(ctx, report, command):
    (names,) = _args(command, 1, "commutant NAME[,NAME...]")
    S = ctx.threads(names)
    for n in ctx.finite.nodes:
        sub = commutant([s(n) for s in S], node=n)
        rep = _subsystem(report, sub, REF["commutant"], ctx.seed, prefix=f"{n}:")
        report.add("commutant-dim", REF["commutant"], rep.ok, {}, None, node=n, dim=sub.dim(n))


def cmd_bounded(ctx, report, command):
    (name,) = _args(command, 1, "bounded ELEMENT")
    x = ctx.thread(name, finite=False)
    v = sup_norm(x, ctx.flags.horizon)
    report.add("bounded", REF["bounded"], v.bounded, {"sup_over_horizon": v.sup_over_horizon}, v.witness,
               status=v.status, horizon=v.horizon, declared_bound=x.declared_bound)


def cmd_bounded_part(ctx, report, command):
    _args(command, 0, "bounded-part")
    elements = [ctx.cfg.threads[k] for k in sorted(ctx.cfg.threads)] if ctx.system.is_lazy else []
    rep = bounded_part(ctx.system, ctx.flags.horizon, ctx.flags.samples, ctx.seed, elements)
    for v in rep.verdicts.values():
        report.add(v.name, REF["bounded-part"], v.ok, {"max": v.residual}, v.witness, checks=v.checks)
    for label, v in sorted(getattr(rep, "elements", {}).items()):
        report.add("element-boundedness", REF["bounded"], True, {"sup_over_horizon": v.sup_over_horizon},
                   v.witness, element=label, status=v.status, horizon=v.horizon)


def cmd_ideal(ctx, report, command):
    (names,) = _args(command, 1, "ideal-annihilator NAME[,NAME...]")
    T = ctx.threads(names)
    if not T:
        raise PreconditionError("the generating set must be nonempty")
    g, cert = ideal_annihilator_central(ctx.finite, T)
    report.add("central-annihilator", REF["ideal"], cert["ok"],
               {"coherence": cert["coherence"], "centrality": cert["centrality"]}, None,
               oracle_dims=cert["oracle_dims"],
               generator_ranks={n: list(projection_ranks(g(n))) for n in ctx.finite.nodes})


def cmd_spectral(ctx, report, command):
    (name,) = _args(command, 1, "spectral ELEMENT")
    x = ctx.thread(name, finite=False)
    cert = reconstruct(x, ctx.flags.mesh, ctx.flags.eps, ctx.flags.mu, ctx.flags.per_coordinate)
    ref = REF["spectral"]
    for e in cert.errors:
        report.add("coordinate-error", ref, e.ok, {"error": e.error, "delta": e.delta}, None, node=e.node)
    for axiom, v in cert.family.certificate.items():
        report.add(f"axiom-{axiom.replace('_', '-')}", ref, v.ok, {"max": v.residual}, v.witness)
    report.add("commutes-with-element", ref, cert.family.commutation_residual <= 1e-8,
               {"max": cert.family.commutation_residual})
    report.add("support-route-agreement", ref, cert.family.support_residual <= 1e-8,
               {"max": cert.family.support_residual})
    report.add("in-masa", ref, cert.masa_residual <= 1e-8, {"max": cert.masa_residual})
    report.add("family-coherence", ref, cert.coherence_residual <= 1e-8, {"max": cert.coherence_residual})
    report.add("max-error", ref, cert.bound_ok, {"max_error": cert.max_error}, None,
               mesh=cert.partition.mesh, cells=len(cert.partition.nodes) - 1, mu_rule=cert.mu_rule,
               per_coordinate=cert.per_coordinate)


def cmd_lemma1(ctx, report, command):
    name, eps = _args(command, 2, "lemma1 ELEMENT EPS")
    try:
        eps = float(eps)
    except ValueError:
        raise UsageError(f"EPS must be a number, got {eps!r}") from None
    x = ctx.thread(name)
    for n in ctx.finite.nodes:
        if not is_selfadjoint(x(n)):
            raise PreconditionError(f"lemma1 needs a self-adjoint element to fix its commutative subalgebra; "
                                    f"{name!r} is not at {n!r}")
    res = kaplansky_approx(None, x, eps)
    top = ctx.finite.top()
    report.add("residual-below-eps", REF["lemma1"], res.residual < eps, {"residual": res.residual, "eps": eps})
    report.add("multiple-certificate", REF["lemma1"], res.certificate_residual <= 1e-8,
               {"residual": res.certificate_residual}, None,
               projection_ranks_at_top=list(projection_ranks(res.projection(top))))


def cmd_lemma2(ctx, report, command):
    names, name = _args(command, 2, "lemma2 FAMILY ELEMENT")
    family = ctx.threads(names)
    if not family:
        raise PreconditionError("the family must be nonempty")
    laws = orthogonal_sup_laws(family, ctx.thread(name), tol=ctx.flags.tol)
    for law, r in laws.items():
        report.add(law, REF["lemma2"], r["ok"], {"sup_residual": r["residual"]}, None,
                   premise=r["premise"], conclusion=r["conclusion"])


HANDLERS = {
    "validate": cmd_validate, "verify": cmd_verify, "annihilate": cmd_annihilate, "center": cmd_center,
    "corner": cmd_corner, "masa": cmd_masa, "commutant": cmd_commutant, "bounded": cmd_bounded,
    "bounded-part": cmd_bounded_part, "ideal-annihilator": cmd_ideal, "spectral": cmd_spectral,
    "lemma1": cmd_lemma1, "lemma2": cmd_lemma2,
}


def gen_random(seed: int) -> str:
    """A random valid system document with a few named elements."""
    rng = np.random.default_rng(seed)
    system = sampling.random_system(rng)
    elements = {
        "x": sampling.random_thread(rng, system, "full"),
        "h": sampling.random_selfadjoint_thread(rng, system),
        "p": sampling.random_projection_thread(rng, system),
    }
    text = emit_config(config_from_system(system, elements, name=f"random-{seed}", seed=seed))
    parse_config(text)  # the emitted document must load and validate
    return text


def run(command: list[str], cfg: SystemConfig, flags) -> Report:
    """Dispatch one command against a parsed config and collect its report."""
    if not command:
        raise UsageError("no command given")
    head = command[0]
    if head not in HANDLERS:
        raise UsageError(f"unknown command {head!r} (known: {', '.join(COMMANDS)})")
    report = Report(" ".join(command), digest(emit_config(cfg)))
    HANDLERS[head](Context(cfg, flags), report, command)
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lawstar", description=__doc__.splitlines()[0])
    p.add_argument("--config", metavar="PATH", help="system document (YAML)")
    p.add_argument("--seed", type=int, default=None, help="sampling seed (default: the document's seed)")
    p.add_argument("--horizon", type=int, default=None, help="chain horizon override")
    p.add_argument("--mesh", type=float, default=0.25, help="partition mesh target for spectral")
    p.add_argument("--eps", type=float, default=0.1, help="upper-end margin for spectral")
    p.add_argument("--mu", choices=MU_RULES, default="midpoint", help="integral-sum tag rule")
    p.add_argument("--per-coordinate", action="store_true",
                   help="spectral: reconstruct unbounded threads coordinate by coordinate")
    p.add_argument("--tol", type=float, default=1e-8, help="tolerance for validation and lattice checks")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--samples", type=int, default=10, help="random samples per verifier")
    p.add_argument("command", nargs="+", help="command and its arguments")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    flags = parser.parse_args(argv)
    try:
        if flags.samples < 1:
            raise UsageError("--samples must be >= 1")
        if flags.command[0] == "gen-random":
            _sys.stdout.write(gen_random(0 if flags.seed is None else flags.seed))
            return 0
        if flags.command[0] not in HANDLERS:
            raise UsageError(f"unknown command {flags.command[0]!r} (known: {', '.join(COMMANDS)})")
        if flags.command[0] == "verify" and flags.command[1:2] == ["w-star"]:
            raise UsageError("verify w-star is out of scope: no predual or von Neumann structure is modelled")
        if not flags.config:
            raise UsageError("--config PATH is required")
        cfg = load_config(flags.config, flags.horizon)
        report = run(flags.command, cfg, flags)
    except LawstarError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    _sys.stdout.write(report.to_json() if flags.format == "json" else report.to_text())
    return report.exit_status


if __name__ == "__main__":
    raise SystemExit(main())
