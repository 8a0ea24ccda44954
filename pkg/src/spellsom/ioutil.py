"""Small text-format helpers shared by the exporters.

All artifacts are plain delimited text.  Floats are written with
``repr`` (shortest round-trip form) except in the feature-matrix and
map files, which use a documented fixed 17-significant-digit layout so
that a parse/write cycle is byte-identical.
"""

from __future__ import annotations

import hashlib
from collections.abc import Iterable


def fmt17(x: float) -> str:
    """Decimal text with 17 significant digits (exact float64 round trip)."""
    return format(float(x), ".17g")


def fmt(x) -> str:
    """Shortest round-trip text for a scalar; empty string for None."""
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(float(x))   # builtin repr also for numpy scalars
    return str(x)


def write_delimited(path, rows: Iterable[Iterable], delimiter: str = ",",
                    header: Iterable[str] | None = None) -> None:
    lines = []
    if header is not None:
        lines.append(delimiter.join(header))
    for row in rows:
        lines.append(delimiter.join(fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def derive_seed(global_seed: int, label: str) -> int:
    """Expand one global seed into an independent per-stage seed.

    The derivation is a labeled hash so each stage can be re-run in
    isolation with a reproducible stream.
    """
    digest = hashlib.sha256(f"spellsom:{global_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")
