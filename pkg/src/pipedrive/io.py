"""CSV writers for oscillograms, shear-stress profiles, energy and metrics.

Every file has a header row, commas as separators and ``.`` decimals.
Floats are written with 17 significant digits so files round-trip exactly
and equal runs give byte-identical output.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_table(path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def read_table(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def probe_column(z: float) -> str:
    """Column name for a probe at axial position z (metres)."""
    if z == 0:
        return "U_z0_m"
    return f"U_z{float(z):g}_m"


def write_oscillogram(path, osc, columns: list[str] | None = None) -> Path:
    """``t_s,U_m`` for a single history, one column per probe otherwise."""
    U = np.asarray(osc.U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    if columns is None:
        columns = ["U_m"] if U.shape[1] == 1 else [f"U{i}_m" for i in range(U.shape[1])]
    if len(columns) != U.shape[1]:
        raise ValueError(f"{len(columns)} column names for {U.shape[1]} probes")
    return write_table(path, ["t_s", *columns], zip(osc.t, *U.T))


def profile_filename(t: float) -> str:
    return f"tau_t{t * 1e3:g}.csv"


def write_profile(directory, t: float, z, tau) -> Path:
    return write_table(Path(directory) / profile_filename(t), ["z_m", "tau_Pa"], zip(z, tau))


ENERGY_HEADER = ["t_s", "work_J", "kinetic_J", "strain_J", "dissipated_J", "residual_J"]


def write_energy(path, t, energy: dict[str, np.ndarray]) -> Path:
    keys = ("work", "kinetic", "strain", "dissipated", "residual")
    return write_table(path, ENERGY_HEADER, zip(t, *(energy[k] for k in keys)))


def write_run(directory, result, prefix: str = "") -> list[Path]:
    """All CSVs of one solver run into ``directory``."""
    directory = Path(directory)
    osc_cols = [probe_column(z) for z in result.probe_z]
    out = [
        write_table(directory / f"{prefix}oscillogram.csv", ["t_s", *osc_cols], zip(result.t, *result.U.T)),
        write_energy(directory / f"{prefix}energy.csv", result.energy_t, result.energy),
    ]
    for t, tau in sorted(result.profiles.items()):
        out.append(write_profile(directory / f"{prefix}profiles", t, result.z_contact, tau))
    return out
