from enum import Enum
from pathlib import Path
from typing import Optional

import click

from src.middlewares import run_command
from src.services import synthetic_service
from src.services.utils import manifest_path_for, output_set, write_manifest


class SyntheticKind(str, Enum):
    XOR = "xor"
    INFORMATIVE = "informative"


@click.command("synth", help="Write a generated dataset and its schema")
@click.option(
    "--kind",
    type=click.Choice([kind.value for kind in SyntheticKind]),
    default=SyntheticKind.INFORMATIVE.value,
    show_default=True,
)
@click.option("--n-instances", type=click.IntRange(min=4), default=200, show_default=True)
@click.option("--n-noise", type=click.IntRange(min=0), default=9, show_default=True)
@click.option("--noise-std", type=click.FloatRange(min=0.0), default=0.5, show_default=True)
@click.option("--repeats", type=click.IntRange(min=1), default=1, help="XOR table copies")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--schema-out",
    "schema_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Schema file (default: next to --out with a .schema.json suffix)",
)
@run_command
def synth(
    kind: str,
    n_instances: int,
    n_noise: int,
    noise_std: float,
    repeats: int,
    seed: int,
    out_path: Path,
    schema_path: Optional[Path],
):
    if SyntheticKind(kind) == SyntheticKind.XOR:
        frame, schema = synthetic_service.xor_frame(repeats)
    else:
        frame, schema = synthetic_service.informative_frame(n_instances, n_noise, noise_std, seed)
    schema_path = schema_path or out_path.with_suffix(".schema.json")
    ds = synthetic_service.to_dataset(frame, schema)

    with output_set() as outputs:
        synthetic_service.write_synthetic(
            frame, schema, outputs.claim(out_path), outputs.claim(schema_path)
        )
        write_manifest(
            outputs,
            manifest_path_for(out_path),
            "synth",
            click.get_current_context().params,
            ds.fingerprint(),
        )
    click.echo(f"wrote {len(frame)} rows to {out_path} and schema to {schema_path}")
