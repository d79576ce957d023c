import json
import os

import pytest

from noethercheck.artifacts import atomic_path, file_entries, file_hash, write_json


class TestArtifacts:
    def test_atomic_write(self, tmpdir):
        path = os.path.join(tmpdir, "nested", "summary.json")
        write_json(path, {"passed": True})
        with open(path) as handle:
            assert json.load(handle) == {"passed": True}
        assert os.listdir(os.path.dirname(path)) == ["summary.json"]

    def test_failed_write_leaves_nothing(self, tmpdir):
        path = os.path.join(tmpdir, "table.csv")
        with pytest.raises(RuntimeError):
            with atomic_path(path) as temporary:
                with open(temporary, "w") as handle:
                    handle.write("partial")
                raise RuntimeError("interrupted")
        assert os.listdir(tmpdir) == []

    def test_hashes(self, tmpdir):
        first = os.path.join(tmpdir, "b.txt")
        second = os.path.join(tmpdir, "a.txt")
        for path in (first, second):
            with open(path, "w") as handle:
                handle.write("same")
        assert file_hash(first) == file_hash(second)
        entries = file_entries([first, second], tmpdir)
        assert [e["path"] for e in entries] == ["a.txt", "b.txt"]
        assert len(entries[0]["sha256"]) == 64
