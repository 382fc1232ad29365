"""Plain-text packets: one vector per line, whitespace-separated entries,
a blank line between subspaces. Entries may be complex (``1+2j``)."""
from __future__ import annotations

from pathlib import Path
from typing import List

import numpy as np

from ..errors import InvalidArgumentError, ReportError
from ..lab.packets import FinitePacket


def parse_packet_text(text: str) -> FinitePacket:
    blocks: List[List[List[str]]] = [[]]
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            if blocks[-1]:
                blocks.append([])
            continue
        blocks[-1].append(line.split())
    blocks = [b for b in blocks if b]
    if not blocks:
        raise InvalidArgumentError("packet text contains no vectors")

    is_complex = any("j" in tok for b in blocks for row in b for tok in row)
    conv = complex if is_complex else float
    subs = []
    for i, b in enumerate(blocks):
        try:
            subs.append(np.array([[conv(tok) for tok in row] for row in b]))
        except ValueError as e:
            raise InvalidArgumentError(f"subspace {i}: {e}") from e
    widths = {s.shape[1] for s in subs if s.ndim == 2}
    if len(widths) != 1 or any(s.ndim != 2 for s in subs):
        raise InvalidArgumentError(f"vectors of unequal length in packet text: {sorted(widths)}")
    return FinitePacket(widths.pop(), tuple(subs))


def load_packet(path: Path) -> FinitePacket:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ReportError(path, f"cannot read packet: {e}") from e
    return parse_packet_text(text)


def format_packet(packet: FinitePacket) -> str:
    chunks = []
    for sub in packet.subspaces:
        chunks.append("\n".join(" ".join(repr(complex(v)) if np.iscomplexobj(sub) else repr(float(v)) for v in row) for row in sub))
    return "\n\n".join(chunks) + "\n"
