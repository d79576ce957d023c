"""
Output files of the command line runs: atomic writes, content hashes and
JSON summaries.
"""

import contextlib
import hashlib
import json
import logging
import os


@contextlib.contextmanager
def atomic_path(path):
    """
    Yields a temporary path next to `path` that is renamed to `path` when the
    block succeeds and removed otherwise. The extension is kept, so writers
    that append one (numpy) see the real suffix.
    """
    directory, name = os.path.split(os.path.abspath(path))
    stem, extension = os.path.splitext(name)
    temporary = os.path.join(directory, f".{stem}.part{extension}")
    os.makedirs(directory, exist_ok=True)
    try:
        yield temporary
        os.replace(temporary, path)
    finally:
        if os.path.exists(temporary):
            os.remove(temporary)


def file_hash(path):
    """sha256 hex digest of the content of `path`."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def write_json(path, data):
    with atomic_path(path) as temporary:
        with open(temporary, "w") as handle:
            json.dump(data, handle, indent=2, sort_keys=True)
    logging.info(f"Written {path}.")
    return path


def file_entries(paths, root):
    """Relative path and sha256 hash of every file in `paths`."""
    return [
        {"path": os.path.relpath(p, root), "sha256": file_hash(p)}
        for p in sorted(paths)
    ]
