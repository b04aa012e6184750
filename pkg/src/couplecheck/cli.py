"""Command line: a thin client over the service handlers.

Commands run in-process unless ``--server URL`` points at a running API, in
which case the same request bodies are posted there. Exit codes: 0 pass,
1 a verdict failed, 2 usage or budget error.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import service as S

COMMON = ("fuel", "tol", "json_out", "jobs", "seed_enum")


def _common(f):
    """Flags accepted both before and after the command name."""
    f = click.option("--seed-enum", "seed_enum", is_flag=True, default=None,
                     help="Use every type-correct initial state as a seed.")(f)
    f = click.option("--jobs", type=click.IntRange(min=1), default=None, help="Parallel workers.")(f)
    f = click.option("--json", "json_out", is_flag=True, default=None, help="Emit JSON.")(f)
    f = click.option("--tol", default=None, help="Residual tolerance as a rational (default 1/2^30).")(f)
    f = click.option("--fuel", type=click.IntRange(min=1), default=None,
                     help="Loop iteration bound (default 64).")(f)
    return f


def _opts(ctx, kw) -> dict:
    """Merge per-command flags over the group's flags."""
    out = dict(ctx.obj)
    for k in COMMON:
        if kw.get(k) is not None:
            out[k] = kw[k]
    return out


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise click.UsageError(f"cannot read {path}: {exc.strerror}") from None


def _binds(pairs) -> dict:
    out = {}
    for p in pairs:
        if "=" not in p:
            raise click.BadParameter(f"expected k=v, got {p!r}", param_hint="--bind")
        k, v = p.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _call(o: dict, name: str, payload: dict) -> S.Response:
    if o.get("server"):
        import httpx
        try:
            r = httpx.post(o["server"].rstrip("/") + "/" + name, json=payload, timeout=None)
        except httpx.HTTPError as exc:
            raise click.UsageError(f"cannot reach {o['server']}: {exc}") from None
        if r.status_code != 200:
            click.echo(f"error: server answered {r.status_code}: {r.text}", err=True)
            sys.exit(S.EXIT_USAGE)
        return S.Response(**r.json())
    try:
        return S.dispatch(name, payload)
    except ValueError as exc:    # request validation
        click.echo(f"error: {exc}", err=True)
        sys.exit(S.EXIT_USAGE)


def _finish(o: dict, resp: S.Response, out: str | None = None):
    if out is not None and resp.exit_code != S.EXIT_USAGE:
        Path(out).write_text(resp.text)
    elif o.get("json_out"):
        click.echo(json.dumps(resp.data, indent=2))
    else:
        stream = sys.stderr if resp.exit_code == S.EXIT_USAGE else sys.stdout
        stream.write(resp.text)
    sys.exit(resp.exit_code)


def _program_payload(o, file, bind) -> dict:
    return {"program": _read(file), "bindings": _binds(bind), "fuel": o["fuel"], "tol": o["tol"],
            "seed_enum": o["seed_enum"], "jobs": o["jobs"]}


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--server", default=None, metavar="URL", help="Send requests to a running API.")
@_common
@click.pass_context
def cli(ctx, server, **kw):
    """Check coupling proofs of uniformity and independence for probabilistic programs."""
    ctx.obj = {"server": server, "fuel": 64, "tol": f"1/{2 ** 30}", "json_out": False, "jobs": 1,
               "seed_enum": False, "fuel_given": kw.get("fuel") is not None}
    for k in COMMON:
        if kw.get(k) is not None:
            ctx.obj[k] = kw[k]


bind_opt = click.option("--bind", multiple=True, metavar="K=V",
                        help="Bind a program parameter or pin a proof meta-parameter.")


@cli.command()
@click.argument("file")
@bind_opt
@_common
@click.pass_context
def run(ctx, file, bind, **kw):
    """Print the exact output distribution of FILE."""
    o = _opts(ctx, kw)
    _finish(o, _call(o, "run", _program_payload(o, file, bind)))


@cli.command()
@click.argument("file")
@bind_opt
@_common
@click.pass_context
def lossless(ctx, file, bind, **kw):
    """Check that FILE terminates with mass 1 up to the tolerance."""
    o = _opts(ctx, kw)
    _finish(o, _call(o, "lossless", _program_payload(o, file, bind)))


def _property_command(kind: str, doc: str):
    @click.argument("file")
    @click.option("--vars", "vars_", required=True, help="Comma-separated variables or expressions.")
    @click.option("--route", type=click.Choice(["proof", "semantic", "oracle"]), default="oracle",
                  show_default=True)
    @click.option("--proof", "proof", default=None, metavar="P.prf", help="Proof file for the proof route.")
    @click.option("--event", default=None, metavar="FORMULA", help="Conditioning event.")
    @click.option("--where", default=None, metavar="FORMULA",
                  help="Restrict the carrier to values satisfying FORMULA.")
    @click.option("--sample", type=click.IntRange(min=1), default=None,
                  help="Spot-check this many tuples instead of all.")
    @bind_opt
    @_common
    @click.pass_context
    def cmd(ctx, file, vars_, route, proof, event, where, sample, bind, via_uniform=False, **kw):
        o = _opts(ctx, kw)
        k = "indep-uniform" if via_uniform else kind
        if kind != "cond-indep" and event:
            raise click.UsageError("--event applies to cond-indep only")
        payload = _program_payload(o, file, bind)
        payload.update(kind=k, vars=[v.strip() for v in _split_vars(vars_)], route=route,
                       proof=_read(proof) if proof else None, event=event, where=where, sample=sample)
        _finish(o, _call(o, "property", payload))
    cmd.__doc__ = doc
    return cmd


def _split_vars(text: str) -> list:
    """Split on commas outside brackets, so ``x[0], f(a, b)`` gives two items."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur)
    return out


cli.command("uniform")(_property_command("uniform", "Check that the tracked variables are jointly uniform."))
_indep = _property_command("indep", "Check that the tracked variables are independent.")
_indep = click.option("--via-uniform", "via_uniform", is_flag=True,
                      help="Prove independence through joint uniformity.")(_indep)
cli.command("indep")(_indep)
cli.command("cond-indep")(_property_command(
    "cond-indep", "Check independence of the tracked variables given --event."))


@cli.command()
@click.argument("program")
@click.argument("proof")
@bind_opt
@_common
@click.pass_context
def prove(ctx, program, proof, bind, **kw):
    """Check the proof script PROOF against PROGRAM on every instance."""
    o = _opts(ctx, kw)
    payload = _program_payload(o, program, bind)
    payload["proof"] = _read(proof)
    _finish(o, _call(o, "prove", payload))


@cli.command()
@click.argument("file")
@click.option("-n", "n", type=click.IntRange(min=1), default=2, show_default=True, help="Number of copies.")
@click.option("-o", "out", default=None, metavar="OUT.pw", help="Write the program here.")
@_common
@click.pass_context
def selfcompose(ctx, file, n, out, **kw):
    """Emit the N-fold self-composition of FILE."""
    o = _opts(ctx, kw)
    _finish(o, _call(o, "selfcompose", {"program": _read(file), "n": n}), out)


@cli.command()
@click.option("--left", required=True, metavar="DIST", help="JSON output of the run command.")
@click.option("--right", required=True, metavar="DIST", help="JSON output of the run command.")
@click.option("--psi", required=True, metavar="FORMULA", help="Relation over x{1} and x{2}.")
@click.option("--slack", default="0", show_default=True, help="Mass allowed to stay unmatched.")
@click.option("--program", default=None, metavar="FILE", help="Take variable types from this program.")
@bind_opt
@_common
@click.pass_context
def coupling(ctx, left, right, psi, slack, program, bind, **kw):
    """Search for a coupling of two distributions inside PSI."""
    o = _opts(ctx, kw)
    try:
        l, r = json.loads(_read(left)), json.loads(_read(right))
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"bad distribution file: {exc}") from None
    payload = {"left": l, "right": r, "psi": psi, "slack": slack,
               "program": _read(program) if program else None, "bindings": _binds(bind)}
    _finish(o, _call(o, "coupling", payload))


@cli.command()
@click.argument("filter", required=False)
@click.option("--routes", default="proof,semantic,oracle", show_default=True,
              help="Comma-separated routes to run.")
@_common
@click.pass_context
def corpus(ctx, filter, routes, **kw):
    """Run the bundled examples (optionally those matching FILTER) against their expected values."""
    o = _opts(ctx, kw)
    fuel = kw.get("fuel") if kw.get("fuel") is not None else (o["fuel"] if o["fuel_given"] else None)
    payload = {"filter": filter, "fuel": fuel, "tol": o["tol"], "jobs": o["jobs"],
               "routes": [r.strip() for r in routes.split(",") if r.strip()]}
    _finish(o, _call(o, "corpus", payload))


def main(argv=None):
    cli.main(args=argv, prog_name="couplecheck")


if __name__ == "__main__":
    main()
