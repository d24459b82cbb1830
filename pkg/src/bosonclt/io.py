"""Run directories: stage outputs, binary sidecars and the hash manifest.

Binary sidecars are raw little-endian complex128 arrays in row-major order:

* ``hartree_states.bin``: one row of ``M`` values per stored time;
* ``pair.bin``: the ``M x M`` block ``U`` followed by ``V``.

``manifest.json`` records the SHA-256 of every file written to the run
directory together with the tool version and the config digest.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import IntegrityError

MANIFEST = "manifest.json"
BINARY_DTYPE = "<c16"


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class RunDirectory:
    """Append-only output directory; refuses to reuse a populated directory unless ``overwrite``."""

    def __init__(self, path, overwrite=False):
        self.path = Path(path)
        self.files = {}
        if self.path.exists() and any(self.path.iterdir()):
            if not overwrite:
                raise FileExistsError(f"run directory {self.path} is not empty (use --overwrite)")
            old = self.path / MANIFEST
            if old.exists():
                try:
                    listed = json.loads(old.read_text()).get("files", {})
                except json.JSONDecodeError:
                    listed = {}
                for name in listed:
                    (self.path / name).unlink(missing_ok=True)
                old.unlink()
        self.path.mkdir(parents=True, exist_ok=True)

    def _register(self, name):
        self.files[name] = sha256(self.path / name)
        return self.path / name

    def write_text(self, name, text):
        (self.path / name).write_text(text)
        return self._register(name)

    def write_json(self, name, obj):
        return self.write_text(name, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")

    def write_csv(self, name, header, rows):
        lines = [",".join(header)]
        lines += [",".join(fmt(v) if not isinstance(v, str) else v for v in row) for row in rows]
        return self.write_text(name, "\n".join(lines) + "\n")

    def write_binary(self, name, *arrays):
        with open(self.path / name, "wb") as fh:
            for a in arrays:
                fh.write(np.ascontiguousarray(a, dtype=BINARY_DTYPE).tobytes())
        return self._register(name)

    def finalize(self, meta: dict):
        manifest = dict(meta)
        manifest["files"] = dict(sorted(self.files.items()))
        (self.path / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return self.path / MANIFEST


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o)}")


def read_manifest(run_dir) -> dict:
    """Load the manifest and verify every listed hash; raises ``IntegrityError`` naming the bad file."""
    run_dir = Path(run_dir)
    p = run_dir / MANIFEST
    if not p.exists():
        raise IntegrityError(f"missing manifest in {run_dir}")
    try:
        manifest = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"corrupt manifest in {run_dir}: {exc}") from exc
    files = manifest.get("files")
    if not isinstance(files, dict):
        raise IntegrityError("manifest has no file table")
    for name, digest in files.items():
        f = run_dir / name
        if not f.exists():
            raise IntegrityError(f"file listed in manifest is missing: {name}")
        if sha256(f) != digest:
            raise IntegrityError(f"hash mismatch for {name}")
    return manifest


def read_binary(path, M, rows=None) -> np.ndarray:
    data = np.fromfile(path, dtype=BINARY_DTYPE)
    if data.size % M:
        raise IntegrityError(f"{path} does not hold rows of {M} values")
    return data.reshape(-1, M) if rows is None else data.reshape(rows, -1)


def read_pair(path, M):
    data = np.fromfile(path, dtype=BINARY_DTYPE)
    if data.size != 2 * M * M:
        raise IntegrityError(f"{path} does not hold two {M}x{M} blocks")
    return data[: M * M].reshape(M, M), data[M * M:].reshape(M, M)


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:] if line]
