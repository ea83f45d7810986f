import click

from src import __version__

from .bench import bench
from .curve import curve
from .importance import importance
from .synth import synth
from .train import train


@click.group(help="Correlation-aided neural network experiments")
@click.version_option(__version__, prog_name="cann")
def cli():
    pass


for _command in (importance, train, bench, curve, synth):
    cli.add_command(_command)
