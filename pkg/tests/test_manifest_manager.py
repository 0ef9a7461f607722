import json

import numpy as np
import pytest

from timeloc.errors import ManifestError
from timeloc.manifest_manager import MANIFEST_FILE_NAME, MANIFEST_FILE_VERSION, ManifestManager
from timeloc.utils import CODE_VERSION, read_csv, write_csv

from tests.setup_context import setup_context


class TestManifestManager:
    def test_manifest_records_files_and_summary(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        context = setup_context(tmp_path, "sos")
        context.echo_config()
        context.write_table("table.csv", ["a", "b"], [(1, 2.5), (2, 3.5)], ["units: none"])
        context.manifest_manager.add_summary({"answer": 42})
        path = context.manifest_manager.finalize(1.5)
        assert path.name == MANIFEST_FILE_NAME

        manifest = ManifestManager.load_manifest(context.output_dir)
        assert manifest["manifest_file_version"] == MANIFEST_FILE_VERSION
        assert manifest["code_version"] == CODE_VERSION
        assert manifest["experiment"] == "sos"
        assert manifest["config"]["physics"]["V"] == 20.0
        assert set(manifest["files"]) == {"config.yaml", "table.csv"}
        assert manifest["summary"] == {"answer": 42}
        assert manifest["wall_time_seconds"] == 1.5
        assert ManifestManager.verify(context.output_dir) == []

    def test_table_carries_provenance(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        context = setup_context(tmp_path)
        path = context.write_table("table.csv", ["x"], [(1.0,)])
        text = path.read_text(encoding="utf-8")
        assert f"code_version={CODE_VERSION}" in text
        assert "seed=7" in text
        columns, table = read_csv(path)
        assert columns == ["x"]
        assert table.shape == (1, 1)

    def test_tampering_is_detected(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        context = setup_context(tmp_path)
        path = context.write_table("table.csv", ["x"], [(1.0,), (2.0,)])
        context.manifest_manager.finalize(0.1)
        path.write_text("x\n3.0\n", encoding="utf-8")
        assert ManifestManager.verify(context.output_dir) == ["table.csv"]
        path.unlink()
        assert ManifestManager.verify(context.output_dir) == ["table.csv"]

    def test_missing_or_corrupt_manifest(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        with pytest.raises(ManifestError):
            ManifestManager.load_manifest(tmp_path)
        (tmp_path / MANIFEST_FILE_NAME).write_text("{not json", encoding="utf-8")
        with pytest.raises(ManifestError):
            ManifestManager.load_manifest(tmp_path)

    def test_manifest_is_plain_json(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        context = setup_context(tmp_path)
        context.manifest_manager.finalize(0.0)
        with open(context.output_dir / MANIFEST_FILE_NAME, encoding="utf-8") as manifest_file:
            data = json.load(manifest_file)
        assert data["run_id"] == context.manifest_manager.run_id
        assert not (context.output_dir / "manifest.json.tmp").exists()


class TestCsvTables:
    def test_header_comes_first(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        path = write_csv(tmp_path / "fits.csv", ["index", "xi", "accepted", "band"], [(3, 0.25, True, "lowest"), (4, float("nan"), False, "lowest")], ["xi in radians"])
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# index,xi,accepted,band"
        assert lines[1] == "# xi in radians"
        assert lines[2].split(",")[0] == "3"
        assert lines[2].split(",")[2] == "1"

    def test_mixed_cells_read_back_as_floats(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        path = write_csv(tmp_path / "fits.csv", ["index", "xi", "accepted", "band"], [(3, 0.25, True, "lowest"), (4, float("nan"), False, "lowest")])
        columns, table = read_csv(path)
        assert columns == ["index", "xi", "accepted", "band"]
        assert table.shape == (2, 4)
        assert list(table[:, 0]) == [3.0, 4.0]
        assert table[0, 1] == 0.25
        assert np.isnan(table[1, 1])
        assert list(table[:, 2]) == [1.0, 0.0]
        assert np.all(np.isnan(table[:, 3]))

    def test_empty_table(self, tmp_path) -> None:  # type: ignore[no-untyped-def]
        columns, table = read_csv(write_csv(tmp_path / "empty.csv", ["V", "xi"], []))
        assert columns == ["V", "xi"]
        assert table.shape == (0, 2)
