#!/usr/bin/env python
"""Command line interface.

Exit codes are 0 on success, 1 if an audit check fails, 2 for usage errors and
malformed input and 3 for a state file that is not a valid density matrix.
"""

import json
import logging
import math

import click

from caput import mpiutil
from caput.profile import Profiler

from entbound.util import errors


EXIT_AUDIT = 1
EXIT_USAGE = 2
EXIT_STATE = 3

_handler = None


def _setup_logging(level):
    global _handler

    # Add a useful filter for the logging
    filt = mpiutil.MPILogFilter(level_all=logging.WARNING, level_rank0=level)

    # Set a useful logging format
    size = mpiutil.size
    rank_length = int(math.log10(size)) + 1
    mpi_fmt = f"[MPI %(mpi_rank){rank_length}d/%(mpi_size){rank_length}d]"
    formatter = logging.Formatter(
        "%(elapsedTime)8.1fs " + mpi_fmt + " - %(levelname)-8s %(name)s: %(message)s"
    )

    # Connect the logging together, replacing any handler from an earlier call
    root_logger = logging.getLogger()
    root_logger.setLevel(level=logging.DEBUG)
    if _handler is not None:
        root_logger.removeHandler(_handler)

    _handler = logging.StreamHandler()
    _handler.addFilter(filt)
    _handler.setFormatter(formatter)
    root_logger.addHandler(_handler)


def _parse_dims(ctx, param, value):
    try:
        dims = tuple(int(d) for d in value.split(","))
    except ValueError:
        raise click.BadParameter(f"Expected comma separated integers, got '{value}'.")

    if len(dims) < 2 or any(d < 2 for d in dims):
        raise click.BadParameter(f"Need at least two dimensions >= 2, got '{value}'.")

    return dims


def _emit(data, out):
    if not mpiutil.rank0:
        return

    text = json.dumps(data, indent=2)
    if out is None:
        click.echo(text)
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


@click.group()
@click.option("--verbose", "verbosity", flag_value="verbose", help="Log debug messages.")
@click.option("--quiet", "verbosity", flag_value="quiet", help="Only log warnings.")
@click.option(
    "--profile",
    is_flag=True,
    default=False,
    help=(
        "Run the job in a profiler. This will output a `profile_<rank>.prof` file per "
        "MPI rank if using cProfile or `profile_<rank>.txt` file for pyinstrument."
    ),
)
@click.option(
    "--profiler",
    type=click.Choice(["cProfile", "pyinstrument"], case_sensitive=False),
    default="cProfile",
    help="Set the profiler to use. Default is cProfile.",
)
@click.pass_context
def cli(ctx, verbosity, profile, profiler):
    """Evaluate measurable bounds on concurrence.

    Bounds and separability checks for a state read from a JSON file, a scan
    over the rotationally invariant two spin-3/2 family and a randomised audit
    of the invariants that tie the bounds together.
    """
    level = {"verbose": logging.DEBUG, "quiet": logging.WARNING}.get(verbosity, logging.INFO)
    _setup_logging(level)

    ctx.obj = {"profile": profile, "profiler": profiler.lower()}


@cli.command("eval")
@click.argument(
    "statefile",
    type=click.Path(exists=True, dir_okay=False, readable=True, resolve_path=True),
)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write JSON here, not stdout.")
@click.option("--optimise", is_flag=True, default=False, help="Optimise the transposition bound over unitaries.")
@click.pass_obj
def eval_(obj, statefile, out, optimise):
    """Evaluate every applicable bound on the state in STATEFILE.

    The file holds ``{"dims": [...], "re": [[...]], "im": [[...]]}``.
    """
    from entbound.core import evaluate, states

    try:
        rho = states.load_state(statefile)
    except errors.InvalidState as e:
        click.echo(f"Invalid state ({e.invariant}): {e}", err=True)
        raise SystemExit(EXIT_STATE)
    except (ValueError, KeyError, TypeError, errors.EntboundError) as e:
        click.echo(f"Malformed state file: {e}", err=True)
        raise SystemExit(EXIT_USAGE)

    with Profiler(obj["profile"], profiler=obj["profiler"]):
        try:
            bundle = evaluate.evaluate(rho, optimise=optimise)
        except errors.EntboundError as e:
            click.echo(f"Cannot evaluate state: {e}", err=True)
            raise SystemExit(EXIT_USAGE)

    _emit(bundle, out)


@cli.command("scan-rot4")
@click.option(
    "--step",
    type=click.FloatRange(0.0, 0.1, min_open=True),
    default=0.02,
    show_default=True,
    help="Lattice spacing of the simplex.",
)
@click.option(
    "--out",
    type=click.Path(file_okay=False),
    default=".",
    show_default=True,
    help="Directory for the output tables.",
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["csv", "json", "hdf5"]),
    default="csv",
    show_default=True,
)
@click.pass_obj
def scan_rot4(obj, step, out, fmt):
    """Scan the rot4 simplex, writing the full grid and the p=0 and q=0 slices."""
    from entbound.core import scan

    scanner = scan.Rot4Scan.from_config({"step": step, "output_directory": out, "format": fmt})

    with Profiler(obj["profile"], profiler=obj["profiler"]):
        scanner.run()


@cli.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", type=click.IntRange(min=1), default=1000, show_default=True, help="Samples per check.")
@click.option("--dims", type=str, default="2,2", show_default=True, callback=_parse_dims)
@click.option(
    "--state",
    "statefile",
    type=click.Path(exists=True, dir_okay=False, readable=True, resolve_path=True),
    default=None,
    help="Also audit the state in this JSON file.",
)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write JSON here, not stdout.")
@click.pass_obj
def audit(obj, seed, n, dims, statefile, out):
    """Run the randomised invariant audit and print a JSON summary."""
    from entbound.core import audit as eaudit

    conf = {"seed": seed, "n": n, "dims": list(dims)}
    if statefile is not None:
        conf["state"] = statefile

    runner = eaudit.Audit.from_config(conf)

    with Profiler(obj["profile"], profiler=obj["profiler"]):
        try:
            summary = runner.run()
        except errors.InvalidState as e:
            click.echo(f"Invalid state ({e.invariant}): {e}", err=True)
            raise SystemExit(EXIT_STATE)
        except (ValueError, KeyError, TypeError) as e:
            click.echo(f"Malformed state file: {e}", err=True)
            raise SystemExit(EXIT_USAGE)

    _emit(summary, out)

    if not summary["ok"]:
        raise SystemExit(EXIT_AUDIT)


@cli.command()
@click.argument(
    "configfile",
    type=click.Path(exists=True, dir_okay=False, readable=True, resolve_path=True),
)
@click.pass_obj
def run(obj, configfile):
    """Run the tasks in the yaml formatted CONFIGFILE."""
    from entbound.core import manager

    with Profiler(obj["profile"], profiler=obj["profiler"]):
        m = manager.AnalysisManager.from_config(configfile)
        m.generate()


if __name__ == "__main__":
    cli()
