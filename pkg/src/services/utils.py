import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator

from src import __version__
from src.core.logger import logger
from src.schemas.reports import RunManifest


class OutputSet:
    """Files written by one command; removed together when the command fails."""

    def __init__(self):
        self.paths: list[Path] = []
        self.started = time.perf_counter()

    def claim(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.paths.append(path)
        return path

    def discard(self) -> None:
        for path in reversed(self.paths):
            path.unlink(missing_ok=True)
        if self.paths:
            logger.warning(f"Removed {len(self.paths)} partial output(s)")

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.started


@contextmanager
def output_set() -> Iterator[OutputSet]:
    outputs = OutputSet()
    try:
        yield outputs
    except BaseException:
        outputs.discard()
        raise


def manifest_path_for(output: Path | str) -> Path:
    output = Path(output)
    return output.with_name(f"{output.name}.manifest.json")


def build_manifest(
    command: str,
    flags: dict[str, Any],
    dataset_fingerprint: str,
    duration_seconds: float = 0.0,
    outputs: list[str] | None = None,
) -> RunManifest:
    return RunManifest(
        command=command,
        flags=flags,
        dataset_fingerprint=dataset_fingerprint,
        tool_version=__version__,
        duration_seconds=duration_seconds,
        outputs=outputs or [],
    )


def write_manifest(
    outputs: OutputSet,
    path: Path | str,
    command: str,
    flags: dict[str, Any],
    dataset_fingerprint: str,
) -> RunManifest:
    """Record the run; written last so it lists every result file."""
    manifest = build_manifest(
        command,
        flags,
        dataset_fingerprint,
        duration_seconds=outputs.elapsed,
        outputs=[p.name for p in outputs.paths],
    )
    outputs.claim(path).write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    return manifest
