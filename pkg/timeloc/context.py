from pathlib import Path
from typing import Any, Iterable, Sequence

from timeloc.config import ExperimentConfig
from timeloc.manifest_manager import ManifestManager
from timeloc.utils import CODE_VERSION, write_csv


class RunContext:
    def __init__(self, config: ExperimentConfig, threads: int = 1, quiet: bool = False) -> None:
        """Holds the resolved config, the run directory and its manifest. Every file a pipeline writes goes through here
        so it is checksummed into the manifest."""
        self.config = config
        self.threads = threads
        self.quiet = quiet

        self.output_dir = config.resolved_output_dir()
        self.output_dir.mkdir(parents=True, exist_ok=True)

        self.manifest_manager = ManifestManager(self)  # Has to be last

    def log(self, message: str) -> None:
        if not self.quiet:
            print(f"[TIMELOC] {message}")

    def provenance(self) -> list[str]:
        return [f"experiment={self.config.experiment} seed={self.config.seed} code_version={CODE_VERSION}"]

    def output_path(self, name: str) -> Path:
        return self.output_dir / name

    def register(self, path: Path) -> Path:
        self.manifest_manager.add_file(path)
        return path

    def write_table(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]], comments: Sequence[str] = ()) -> Path:
        path = write_csv(self.output_path(name), columns, rows, [*comments, *self.provenance()])
        self.log(f"Wrote {path}")
        return self.register(path)

    def echo_config(self) -> Path:
        path = self.output_path("config.yaml")
        path.write_text(self.config.to_yaml(), encoding="utf-8")
        return self.register(path)
