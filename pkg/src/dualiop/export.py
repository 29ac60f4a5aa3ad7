"""Text export of identification results."""

from __future__ import annotations

from pathlib import Path

from .lti import FirSeq, TfMatrix


def _fir_text(f: FirSeq) -> str:
    return f.to_tf().to_text()


def write_solution(directory, sol) -> list[Path]:
    """One file per FIR parameter plus ``g_hat.txt`` and ``diagnostics.txt``.

    Works for any solution dataclass: every :class:`FirSeq` field is exported.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for name, value in vars(sol).items():
        if isinstance(value, FirSeq):
            path = d / f"{name}.txt"
            path.write_text(_fir_text(value) + "\n")
            written.append(path)
    g: TfMatrix = sol.g_hat
    path = d / "g_hat.txt"
    path.write_text(g.to_text() + "\n")
    written.append(path)
    path = d / "diagnostics.txt"
    path.write_text("".join(f"{k} = {v}\n" for k, v in sorted(sol.diagnostics.items())))
    written.append(path)
    return written
