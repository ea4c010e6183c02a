"""Whitespace-delimited `step value` tables for generic plotting tools."""

from pathlib import Path
from typing import Sequence

import pandas as pd

from abiam.exceptions import InvalidArgumentError, UnknownObservableError
from abiam.kernel.results import FLOAT_FORMAT, OBSERVABLES

MANIFEST = "manifest.txt"


def emit_plotdata(
    frame: pd.DataFrame,
    observables: Sequence[str],
    out_dir: Path,
    allow_empty: bool = False,
) -> list[Path]:
    """One `<name>.dat` file per observable plus a manifest of files and columns."""
    for name in observables:
        if name not in OBSERVABLES:
            raise UnknownObservableError(name)
    if frame.empty and not allow_empty:
        raise InvalidArgumentError("Series is empty; pass allow_empty to write header-only tables")

    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in observables:
        path = out_dir / f"{name}.dat"
        table = pd.DataFrame({"step": frame["step"].astype(int), name: frame[name]}) if not frame.empty else None
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(f"# step {name}\n")
            if table is not None:
                table.to_csv(handle, sep=" ", index=False, header=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        written.append(path)

    manifest = out_dir / MANIFEST
    lines = [f"{path.name}: step {path.stem}" for path in written]
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [*written, manifest]
