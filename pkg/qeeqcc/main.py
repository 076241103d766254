"""Module for the command-line interface."""

import logging
import os
from typing import Annotated, Any, Callable, Optional

import typer
from click.core import ParameterSource
from rich.console import Console
from rich.logging import RichHandler

from qeeqcc.config import ExperimentConfig
from qeeqcc.errors import (
    ConfigError,
    EmptyResultError,
    NumericalError,
    ResourceLimitError,
)
from qeeqcc.experiment import Experiment
from qeeqcc.results import (
    PLOT_SECTIONS,
    ResultsDocument,
    emit_plot_data,
    write_atomic,
)


logger = logging.getLogger(__name__)

typer_app = typer.Typer(no_args_is_help=True)

_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)

_SUMMARIES = {
    "fci": "Exact sector spectrum by dense diagonalization.",
    "encode": "Energy-sorted encoding and its qubit Hamiltonian.",
    "screen": "Rank entanglers by energy gradient.",
    "vqe": "Optimize the entangler ansatz.",
    "qse": "Excited states by subspace expansion of the VQE state.",
    "zne": "Zero-noise extrapolation of the energy and subspace matrices.",
}


def configure_logging(verbosity: int, /) -> None:
    """Sends log records to stderr through rich; each `-v` lowers the
    level from WARNING to INFO to DEBUG."""
    level = _LEVELS[min(verbosity, len(_LEVELS) - 1)]
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True))],
        force=True,
    )


def _error_exit(kind: str, error: Exception, code: int) -> typer.Exit:
    typer.echo(f"{kind} ERROR: {error}", err=True)
    return typer.Exit(code)


def _int_list(text: Optional[str], name: str) -> Optional[tuple[int, ...]]:
    if text is None:
        return None
    try:
        return tuple(int(item) for item in text.split(",") if item.strip())
    except ValueError:
        raise ConfigError(f"{name} must be comma-separated integers.")


def _build_config(
    ctx: typer.Context, options: dict[str, Any]
) -> ExperimentConfig:
    config_path = options.pop("config")
    base = ExperimentConfig()
    if config_path is not None:
        base = ExperimentConfig.load(config_path)
    # flags only override a loaded config when given explicitly
    for flag in ("mitigate_readout", "post_select"):
        if ctx.get_parameter_source(flag) is not ParameterSource.COMMANDLINE:
            options[flag] = None
    options["frozen"] = _int_list(options["frozen"], "--frozen")
    options["replicas"] = _int_list(options["replicas"], "--replicas")
    options["p2"] = options.pop("noise_p2")
    options["p1"] = options.pop("noise_p1")
    options["e01"] = options.pop("readout_e01")
    options["e10"] = options.pop("readout_e10")
    return base.with_overrides(**options)


def _print_summary(name: str, doc: ResultsDocument) -> None:
    sections = doc.sections
    if name == "fci":
        for i, energy in enumerate(sections["fci"]["energies_hartree"]):
            typer.echo(f"{i:>4}  {energy:.10f}")
    elif name == "encode":
        encoding = sections["encoding"]
        typer.echo(
            f"Q={encoding['q_physical']} N_q={encoding['n_qubits']} "
            f"padding={encoding['n_padding']} "
            f"terms={encoding['n_pauli_terms']}"
        )
        typer.echo("\n".join(encoding["table"]))
    elif name == "screen":
        for entry in sections["screening"]["entanglers"]:
            typer.echo(
                f"{entry['rank']:>3}  {entry['string']}  "
                f"{abs(entry['gradient']):.8f}"
            )
    elif name == "vqe":
        vqe = sections["vqe"]
        typer.echo(
            f"E = {vqe['final_energy']:.10f} +- {vqe['final_stderr']:.2e} "
            f"Eh ({len(vqe['trace'])} evaluations)"
        )
    else:
        if name == "zne":
            zne = sections["zne"]
            typer.echo(
                f"E(0) = {zne['extrapolated']:.10f} +- {zne['stderr']:.2e} "
                f"Eh (degree {zne['degree']}, residual {zne['residual']:.2e})"
            )
        qse = sections["qse"]
        typer.echo(f"E_0 = {qse['ground_energy_hartree']:.10f} Eh")
        rows = zip(qse["excitations_ev"], qse["fci_excitations_ev"])
        for i, (energy, exact) in enumerate(rows, start=1):
            typer.echo(f"0->{i}  {energy:.6f} eV  (FCI {exact:.6f} eV)")


def _run(name: str, ctx: typer.Context, options: dict[str, Any]) -> None:
    configure_logging(options.pop("verbose"))
    from_results = options.pop("from_results")
    try:
        config = _build_config(ctx, options)
        upstream = None
        if from_results is not None:
            upstream = ResultsDocument.load(from_results)
        doc = Experiment(config, upstream=upstream).run(name)
        if config.output is not None:
            write_atomic(config.output, doc.to_json())
    except (NumericalError, EmptyResultError) as error:
        raise _error_exit("NUMERICAL", error, 4)
    except ResourceLimitError as error:
        raise _error_exit("RESOURCE", error, 3)
    except (ValueError, OSError) as error:
        raise _error_exit("CONFIGURATION", error, 2)
    _print_summary(name, doc)


def _experiment_command(name: str) -> Callable[..., None]:
    def command(
        ctx: typer.Context,
        hamiltonian: Annotated[
            Optional[str],
            typer.Option(
                help="Hamiltonian file, or bundled:NAME.", show_default=False
            ),
        ] = None,
        format: Annotated[
            Optional[str],
            typer.Option(help="fcidump or tensor.", show_default=False),
        ] = None,
        sector: Annotated[
            Optional[tuple[int, int]],
            typer.Option(metavar="M_UP M_DOWN", show_default=False),
        ] = None,
        frozen: Annotated[
            Optional[str],
            typer.Option(
                help="Frozen spatial orbitals, e.g. 0,1.", show_default=False
            ),
        ] = None,
        top_k: Annotated[Optional[int], typer.Option()] = None,
        cutoff: Annotated[Optional[float], typer.Option()] = None,
        evaluator: Annotated[
            Optional[str],
            typer.Option(help="exact, density or sampled."),
        ] = None,
        shots: Annotated[Optional[int], typer.Option()] = None,
        seed: Annotated[Optional[int], typer.Option()] = None,
        noise_p2: Annotated[Optional[float], typer.Option()] = None,
        noise_p1: Annotated[Optional[float], typer.Option()] = None,
        readout_e01: Annotated[Optional[float], typer.Option()] = None,
        readout_e10: Annotated[Optional[float], typer.Option()] = None,
        mitigate_readout: Annotated[
            bool, typer.Option("--mitigate-readout/--no-mitigate-readout")
        ] = True,
        post_select: Annotated[
            bool, typer.Option("--post-select/--no-post-select")
        ] = False,
        replicas: Annotated[
            Optional[str],
            typer.Option(help="Replica counts, e.g. 1,2,3,4,5."),
        ] = None,
        zne_degree_diag: Annotated[Optional[int], typer.Option()] = None,
        zne_degree_offdiag: Annotated[Optional[int], typer.Option()] = None,
        zne_abscissa: Annotated[
            Optional[str], typer.Option(help="replicas or cnots.")
        ] = None,
        qse_ops: Annotated[
            Optional[str],
            typer.Option(help="singles-doubles or full-sector."),
        ] = None,
        qse_ground: Annotated[
            Optional[str], typer.Option(help="qse or exact.")
        ] = None,
        states: Annotated[Optional[int], typer.Option()] = None,
        optimizer: Annotated[
            Optional[str], typer.Option(help="cobyla or parameter-shift.")
        ] = None,
        max_iterations: Annotated[Optional[int], typer.Option()] = None,
        from_results: Annotated[
            Optional[str],
            typer.Option(help="Results document whose VQE angles to reuse."),
        ] = None,
        config: Annotated[
            Optional[str],
            typer.Option(help="Config echo or results document to rerun."),
        ] = None,
        output: Annotated[
            Optional[str], typer.Option(help="Results document path.")
        ] = None,
        verbose: Annotated[
            int, typer.Option("--verbose", "-v", count=True)
        ] = 0,
    ) -> None:
        options = dict(locals())
        options.pop("ctx")
        options.pop("name", None)
        _run(name, ctx, options)

    command.__doc__ = _SUMMARIES[name]
    return command


for _name in _SUMMARIES:
    typer_app.command(_name)(_experiment_command(_name))


@typer_app.command()
def plot(
    results: Annotated[
        str,
        typer.Argument(metavar="RESULTS", help="Results document."),
    ],
    section: Annotated[
        str, typer.Option(help="vqe, zne, qse or all.")
    ] = "all",
    out_dir: Annotated[
        Optional[str],
        typer.Option(help="Write SECTION.csv files here instead."),
    ] = None,
    verbose: Annotated[
        int, typer.Option("--verbose", "-v", count=True)
    ] = 0,
) -> None:
    """Plot-ready tables from a results document."""

    configure_logging(verbose)
    try:
        doc = ResultsDocument.load(results)
        sections = PLOT_SECTIONS if section == "all" else (section,)
        tables = emit_plot_data(doc, sections)
        for name, table in tables.items():
            if out_dir is None:
                typer.echo(f"# {name}")
                typer.echo(table, nl=False)
            else:
                write_atomic(os.path.join(out_dir, f"{name}.csv"), table)
    except (ValueError, OSError) as error:
        raise _error_exit("CONFIGURATION", error, 2)
