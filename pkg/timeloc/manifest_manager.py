import json
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import TYPE_CHECKING, Any, TypedDict
from uuid import uuid4

from timeloc.errors import ManifestError
from timeloc.utils import CODE_VERSION, file_checksum

if TYPE_CHECKING:
    from timeloc.context import RunContext

MANIFEST_FILE_VERSION = "1.0"
MANIFEST_FILE_NAME = "manifest.json"


class RunManifestType(TypedDict):
    manifest_file_version: str
    code_version: str
    run_id: str
    experiment: str
    config: dict[str, Any]
    started: str
    wall_time_seconds: float | None
    files: dict[str, str]
    summary: dict[str, Any]


class ManifestManager:
    def __init__(self, context: "RunContext", manifest_file_name: str = MANIFEST_FILE_NAME) -> None:
        self.context = context
        self.manifest_path = context.output_dir / manifest_file_name
        self.run_id = str(uuid4())
        self.manifest: RunManifestType = {
            "manifest_file_version": MANIFEST_FILE_VERSION,
            "code_version": CODE_VERSION,
            "run_id": self.run_id,
            "experiment": context.config.experiment,
            "config": context.config.to_sections(),
            "started": datetime.now(timezone.utc).isoformat(),
            "wall_time_seconds": None,
            "files": {},
            "summary": {},
        }

    @staticmethod
    def load_manifest(run_directory: str | Path) -> RunManifestType:
        path = Path(run_directory) / MANIFEST_FILE_NAME
        try:
            with open(path, encoding="utf-8") as manifest_file:
                return json.load(manifest_file)  # type: ignore[no-any-return]
        except FileNotFoundError as exc:
            raise ManifestError(f"No manifest found in {run_directory}") from exc
        except json.JSONDecodeError as exc:
            raise ManifestError("Manifest file is not valid JSON, it might have been corrupted?") from exc

    def write_manifest_file(self) -> Path:
        """Writes to a temporary sibling first, then renames over the target so readers never see half a manifest."""
        self.manifest_path.parent.mkdir(parents=True, exist_ok=True)
        temporary = self.manifest_path.with_suffix(".json.tmp")
        with open(temporary, "w", encoding="utf-8") as manifest_file:
            json.dump(self.manifest, manifest_file, indent=4, sort_keys=True)
        os.replace(temporary, self.manifest_path)
        return self.manifest_path

    # =======================================================================================================

    def add_file(self, path: str | Path) -> None:
        path = Path(path)
        relative = path.relative_to(self.context.output_dir).as_posix()
        self.manifest["files"][relative] = file_checksum(path)

    def add_summary(self, values: dict[str, Any]) -> None:
        self.manifest["summary"] |= values

    def finalize(self, wall_time_seconds: float) -> Path:
        self.manifest["wall_time_seconds"] = wall_time_seconds
        return self.write_manifest_file()

    # =======================================================================================================

    @staticmethod
    def verify(run_directory: str | Path) -> list[str]:
        """Returns the files whose checksum differs from the manifest (or which are missing)."""
        run_directory = Path(run_directory)
        manifest = ManifestManager.load_manifest(run_directory)
        mismatched = []
        for relative, checksum in sorted(manifest["files"].items()):
            path = run_directory / relative
            if not path.exists() or file_checksum(path) != checksum:
                mismatched.append(relative)
        return mismatched
