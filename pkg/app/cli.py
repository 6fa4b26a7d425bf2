"""
The `rhgt` command line.

Every subcommand shares one flag set, builds a CommandSpec and hands it to
the command service; the report goes to standard output and diagnostics go
to standard error.
"""
import sys
from typing import Optional, Sequence

import click
from loguru import logger
from pydantic import ValidationError

from app.core.exceptions import RhgtError
from app.core.logger import setup_logging
from app.schemas.command import COMMANDS, CommandSpec
from app.services.command_service import dump_report, run_command

HELP = {
    "length": "Relative length |g| over X and the subgroups, with its exactness flag.",
    "geodesic": "Deterministic relative geodesic word for an element.",
    "components": "Components of the path read from 1, their connectivity and isolation.",
    "reduce": "Free-product reduction and oracle normal form of a word.",
    "omega": "The Ω sets, reducedness violations and an Ω-generation check.",
    "area": "Relative area by filling search (or --verify a certificate file).",
    "dehn-scan": "Relative Dehn function estimates for n = 0..N.",
    "delta": "Thin-triangle δ, ξ and ν estimates over the X-ball.",
    "nu": "X-thinness ν of geodesic triangles (and quadrilaterals with --quads).",
    "bcp": "Coset penetration check for paths --f and --g, or a sampled scan without them.",
    "qconvex": "Quasi-convexity σ of the subgroup generated by comma-separated --word elements.",
    "wp": "Word problem: filling certificate, oracle refutation or unknown within caps.",
    "member": "Subgroup membership (oracle or --mode omega).",
    "parabolic": "Search for a conjugator into a subgroup within --radius.",
    "conjugate": "Search for t with t^-1 f t = g within --radius.",
    "sympair": "Minimal symmetric geodesic pair for conjugate elements --f and --g.",
    "translation": "Relative translation number estimates up to --N.",
    "order": "Order of an element, or a finite-order scan of the X-ball without --word.",
    "root": "Search for f and n ≥ 2 with f^n conjugate to g.",
    "powerconj": "Search for powers f^k and g^l that are conjugate.",
    "atomic": "Atomic cycles up to --max-len, tagged F-trivial or essential.",
}

_SPEC_OPTIONS = [
    click.option("--group", required=True, type=click.Path(dir_okay=False), help="Group definition file (JSON)."),
    click.option("--word", "-w", default=None, help="A word in the core grammar."),
    click.option("--f", "f", default=None, help="First element or path word."),
    click.option("--g", "g", default=None, help="Second element or path word."),
    click.option("--radius", type=int, default=None, help="Ball or search radius."),
    click.option("--max-area", type=int, default=None),
    click.option("--max-len", type=int, default=None),
    click.option("--N", "n", type=int, default=None, help="Length, power or exponent bound."),
    click.option("--sample", type=int, default=None),
    click.option("--seed", type=int, default=None),
    click.option("--k", "k", type=int, default=None),
    click.option("--l", "l", type=int, default=None),
    click.option("--subgroup", default=None, help="Subgroup name (defaults to the first)."),
    click.option("--mode", default=None, help="tbcp|farb for bcp, oracle|omega for member."),
    click.option("--threshold", type=int, default=None),
    click.option("--quads", type=int, default=0, help="Quadrilaterals sampled by nu."),
    click.option("--verify", default=None, help="Witness or certificate file to check instead of searching."),
    click.option("--csv", default=None, help="DehnTable CSV to write (dehn-scan) or read (member --mode omega)."),
    click.option("--baseline", default=None, help="Baseline name for the sampled bcp scan."),
    click.option("--out", type=click.Choice(["json", "text"]), default="json"),
]


def _spec_options(func):
    for option in reversed(_SPEC_OPTIONS):
        func = option(func)
    return func


@click.group()
@click.option("--verbose", is_flag=True, help="Debug logging on standard error.")
def cli(verbose: bool):
    """Relatively hyperbolic groups toolkit."""
    setup_logging("dev" if verbose else None)


def _run(name: str, options: dict) -> int:
    spec = CommandSpec(command=name, **options)
    report = run_command(spec)
    click.echo(dump_report(report, spec.out))
    return report.exit_code


def _register(name: str) -> None:
    @cli.command(name=name, help=HELP[name])
    @_spec_options
    def command(**options):
        return _run(name, options)


for _name in COMMANDS:
    _register(_name)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Runs the CLI and returns the exit status: 0 definite, 2 unknown within caps, 1 usage or input error."""
    try:
        code = cli.main(args=list(argv) if argv is not None else None, prog_name="rhgt", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return 1
    except ValidationError as e:
        click.echo(f"Error: invalid arguments: {e}", err=True)
        return 1
    except RhgtError as e:
        logger.debug(f"{type(e).__name__}: {e}")
        click.echo(f"Error: {type(e).__name__}: {e}", err=True)
        return 1
    # --help and bare group invocations return None
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    sys.exit(main())
