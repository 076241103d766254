"""Debug script for testing purposes."""


from typing import Optional

import lark
import typer

from qeeqcc.config import ExperimentConfig
from qeeqcc.experiment import Experiment
from qeeqcc.parsing import read_hamiltonian_source
from qeeqcc.pauli import PauliString
from qeeqcc.qcc import EntanglerBlock, build_circuit


app = typer.Typer(no_args_is_help=True)


@app.command(no_args_is_help=True)
def parse(source: str):
    """Parses an FCIDUMP file (or `bundled:` name) and prints the parse
    tree."""
    parser = lark.Lark.open("qeeqcc/fcidump.lark", parser="lalr")
    tree = parser.parse(read_hamiltonian_source(source))

    print(tree.pretty())


@app.command()
def encode(source: str = "bundled:h2_sto3g"):
    """Prints the encoding table and the qubit Hamiltonian."""
    experiment = Experiment(ExperimentConfig(hamiltonian=source))
    enc, hq = experiment.encoding()
    print(enc.to_text(), end="")
    print(hq.to_text(), end="")


@app.command(no_args_is_help=True)
def circuit(label: str, theta: float = 0.5, replicas: Optional[int] = None):
    """Prints the gates of one entangler block."""
    block = EntanglerBlock(PauliString.from_label(label), theta, replicas or 1)
    compiled = build_circuit([block], len(label))
    print(compiled.display_str())
    print(f"# cnots: {compiled.cnot_count()}")


if __name__ == "__main__":
    app()
