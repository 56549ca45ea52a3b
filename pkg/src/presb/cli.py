"""Command-line front end: a thin client over the HTTP service.

By default requests are served by an in-process application (no network); with
--server URL they go to a running instance instead.  JSON goes to stdout,
human-readable notes to stderr.  Exit codes: 0 success, 1 semantic failure,
2 syntax or usage error.
"""

from __future__ import annotations

import asyncio
import json
import sys

import click
import httpx

SYNTAX_EXIT = 2
SEMANTIC_EXIT = 1


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as c:
            return c.post(path, json=payload)

    from .service.app import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport, base_url="http://presb.local", timeout=600.0) as c:
            return await c.post(path, json=payload)

    return asyncio.run(go())


def _read_formula(arg: str | None) -> str:
    if arg is None or arg == "-":
        return sys.stdin.read()
    return arg


def _emit(response: httpx.Response) -> None:
    try:
        body = response.json()
    except ValueError:
        click.echo(response.text)
        sys.exit(SEMANTIC_EXIT if response.status_code >= 400 else 0)
    click.echo(json.dumps(body, sort_keys=True))
    if response.status_code == 200:
        return
    kind = body.get("kind") if isinstance(body, dict) else None
    if response.status_code == 422 or kind == "syntax":
        sys.exit(SYNTAX_EXIT)
    sys.exit(SEMANTIC_EXIT)


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; default is in-process.")
@click.pass_context
def main(ctx, server):
    """Exact calculus for Presburger-definable subsets of Z^m."""
    ctx.obj = server


@main.command()
@click.argument("formula", required=False)
@click.pass_obj
def parse(server, formula):
    """Parse a formula; print its rendering and free variables."""
    _emit(_post(server, "/parse", {"formula": _read_formula(formula)}))


@main.command()
@click.argument("formula", required=False)
@click.pass_obj
def qe(server, formula):
    """Eliminate quantifiers."""
    _emit(_post(server, "/qe", {"formula": _read_formula(formula)}))


@main.command()
@click.argument("formula", required=False)
@click.pass_obj
def sat(server, formula):
    """Decide a sentence, or satisfiability when free variables remain."""
    _emit(_post(server, "/sat", {"formula": _read_formula(formula)}))


@main.command()
@click.option("--vars", "vars_", required=True, help="Ordered variables, comma-separated.")
@click.option("--function-of", default=None, help="Treat the formula as the graph of this output variable.")
@click.argument("formula", required=False)
@click.pass_obj
def decompose(server, vars_, function_of, formula):
    """Partition a definable set into cells."""
    payload = {"formula": _read_formula(formula), "vars": vars_}
    if function_of:
        payload["function_of"] = function_of
    _emit(_post(server, "/decompose", payload))


@main.command()
@click.option("--vars", "vars_", required=True)
@click.argument("formula", required=False)
@click.pass_obj
def dim(server, vars_, formula):
    """Dimension of a definable set."""
    _emit(_post(server, "/dim", {"formula": _read_formula(formula), "vars": vars_}))


@main.command()
@click.option("--vars", "vars_", required=True)
@click.argument("formula", required=False)
@click.pass_obj
def recti(server, vars_, formula):
    """Rectilinearise: pieces with certified bijections onto orthants."""
    _emit(_post(server, "/recti", {"formula": _read_formula(formula), "vars": vars_}))


@main.command()
@click.option("--vars", "vars_", required=True)
@click.argument("formula", required=False)
@click.pass_obj
def classify(server, vars_, formula):
    """Certified bijection onto Z^dim for an infinite set."""
    _emit(_post(server, "/classify", {"formula": _read_formula(formula), "vars": vars_}))


@main.command("elim-im")
@click.option("--vars", "vars_", required=True, help="Parameter variables, comma-separated.")
@click.option("--out", required=True, help="Fiber variable.")
@click.option("--points", required=True, help="Semicolon-separated points, e.g. '0;1;2' or '0,1;2,3'.")
@click.argument("formula", required=False)
@click.pass_obj
def elim_im(server, vars_, out, points, formula):
    """Fiber codes for a definable family; codes agree iff fibers agree."""
    pts = []
    for chunk in points.split(";"):
        chunk = chunk.strip()
        if chunk:
            pts.append([int(v) for v in chunk.split(",")])
    payload = {"formula": _read_formula(formula), "vars": vars_, "out": out, "points": pts}
    _emit(_post(server, "/elim-im", payload))


@main.command()
@click.option("--kind", type=click.Choice(["partition", "decompose", "bijection"]), default="decompose")
@click.option("--vars", "vars_", default=None)
@click.option("--radius", type=int, default=15)
@click.option("--map-json", "map_json_file", type=click.Path(exists=True), default=None)
@click.option("--source", default=None)
@click.option("--target", default=None)
@click.argument("formula", required=False)
@click.argument("pieces", nargs=-1)
@click.pass_obj
def check(server, kind, vars_, radius, map_json_file, source, target, formula, pieces):
    """Brute-force box checks: partitions and bijections."""
    payload: dict = {"kind": kind, "radius": radius}
    if kind in ("partition", "decompose"):
        payload["formula"] = _read_formula(formula)
        payload["vars"] = vars_ or ""
        if kind == "partition":
            payload["pieces"] = list(pieces)
    else:
        if not map_json_file:
            click.echo("--map-json is required for bijection checks", err=True)
            sys.exit(SYNTAX_EXIT)
        with open(map_json_file) as fh:
            payload["map"] = json.load(fh)
        payload["source"] = source or "true"
        payload["target"] = target or "true"
    _emit(_post(server, "/check", payload))


if __name__ == "__main__":
    main()
