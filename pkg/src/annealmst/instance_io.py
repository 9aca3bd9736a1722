"""Reading and writing the line-oriented instance file format.

Format: optional comment lines starting with ``c``, one header line
``p mst <n> <m>``, then exactly m lines ``e <u> <v> <w>`` with 0-based
vertex ids and a decimal weight. Weights are written with repr so they
round-trip bit for bit.
"""

from __future__ import annotations

import hashlib
from typing import Iterable

from .errors import InstanceFormatError
from .graph import Graph, build_graph


def parse_instance_text(text: str) -> Graph:
    n = m = None
    triples: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        if fields[0] == "p":
            if n is not None:
                raise InstanceFormatError(f"line {lineno}: duplicate header")
            if len(fields) != 4 or fields[1] != "mst":
                raise InstanceFormatError(f"line {lineno}: malformed header {line!r}")
            try:
                n, m = int(fields[2]), int(fields[3])
            except ValueError:
                raise InstanceFormatError(f"line {lineno}: non-integer sizes") from None
        elif fields[0] == "e":
            if n is None:
                raise InstanceFormatError(f"line {lineno}: edge before header")
            if len(fields) != 4:
                raise InstanceFormatError(f"line {lineno}: malformed edge {line!r}")
            try:
                u, v, w = int(fields[1]), int(fields[2]), float(fields[3])
            except ValueError:
                raise InstanceFormatError(f"line {lineno}: malformed edge {line!r}") from None
            if not w > 0.0:
                raise InstanceFormatError(f"line {lineno}: weight must be positive")
            triples.append((u, v, w))
        else:
            raise InstanceFormatError(f"line {lineno}: unknown record type {fields[0]!r}")
    if n is None:
        raise InstanceFormatError("missing `p mst` header")
    if len(triples) != m:
        raise InstanceFormatError(f"header declares m={m} but found {len(triples)} edges")
    return build_graph(n, triples)


def read_instance(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance_text(fh.read())


def serialize_instance(g: Graph, comments: Iterable[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p mst {g.n} {g.m}")
    lines.extend(f"e {e.u} {e.v} {e.w!r}" for e in g.edges)
    return "\n".join(lines) + "\n"


def write_instance(path: str, g: Graph, comments: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_instance(g, comments))


def instance_hash(g: Graph) -> str:
    """12-hex digest of the canonical (comment-free) serialization."""
    canon = serialize_instance(g)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]
