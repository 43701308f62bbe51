#!/usr/bin/env python3
"""Render figures from sweep/map CSV files produced by the rotcode CLI.

Standalone: ``python3 render.py --kind heatmap --in results.csv --out fig.png``.

Kinds and the CSV schema each consumes:

* ``curve``   — infidelity vs mean photon number, one line per family
                (bulk records schema).
* ``slice``   — infidelity vs noise strength along the equal-rates diagonal,
                one line per family (bulk records schema).
* ``heatmap`` — best infidelity per noise cell on the loss x dephasing grid
                (bulk records schema; optional ``--family`` filter).
* ``diffmap`` — pairwise relative fidelity difference per noise cell, grey
                where the trivial code beat both families (comparison schema).
* ``wigner``  — quasiprobability panel (x, p, W schema from the wigner
                subcommand).

The renderer never computes physics: it only maps columns to pixels, so a
rerun on the same CSV with the same style produces a byte-identical image.
``--decorations off`` drops axes/colorbars and renders one uniform pixel block
per data cell, which is what the pixel-level tests consume.

Exit codes: 0 success, 2 usage/schema errors (with column diagnostics),
4 I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm, TwoSlopeNorm  # noqa: E402

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 4

RECORDS_COLUMNS = [
    "family",
    "N",
    "param",
    "seed0",
    "seed1",
    "kappa_l_t",
    "kappa_phi_t",
    "cutoff_D",
    "fidelity",
    "infidelity",
    "nbar_code",
    "solver_status",
    "runtime_ms",
]

COMPARE_COLUMNS = [
    "schema_version",
    "kappa_l_t",
    "kappa_phi_t",
    "family_a",
    "family_b",
    "fidelity_a",
    "fidelity_b",
    "rel_diff",
    "trivial_wins",
]

WIGNER_COLUMNS = ["x", "p", "W"]

GREY = (0.5019607843137255, 0.5019607843137255, 0.5019607843137255)  # #808080
CELL_PIXELS = 10  # square block per data cell when decorations are off
DPI = 100

FAMILY_COLORS = {
    "TRIV": "#555555",
    "BIN": "#1f77b4",
    "CAT": "#d62728",
    "RAND1": "#2ca02c",
    "RAND2": "#9467bd",
}


class SchemaError(ValueError):
    """Input CSV does not carry the expected columns."""


def _check_columns(found: list[str], expected: list[str], path: str) -> None:
    if found == expected:
        return
    missing = [c for c in expected if c not in found]
    unexpected = [c for c in found if c not in expected]
    raise SchemaError(
        f"{path}: column mismatch.\n"
        f"  expected: {','.join(expected)}\n"
        f"  found:    {','.join(found)}\n"
        f"  missing:  {','.join(missing) or '-'}\n"
        f"  unexpected: {','.join(unexpected) or '-'}"
    )


def read_table(path: str, expected: list[str]) -> list[dict]:
    """Read a CSV with an exact header, skipping leading '#' comment lines."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty file, expected columns {','.join(expected)}")
    reader = csv.reader(lines)
    header = next(reader)
    _check_columns(header, expected, path)
    rows = [dict(zip(header, row)) for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: header only, no data rows")
    return rows


def _families_in(rows: list[dict]) -> list[str]:
    seen = []
    for row in rows:
        if row["family"] not in seen:
            seen.append(row["family"])
    return seen


def _grid_axes(rows, x_key="kappa_l_t", y_key="kappa_phi_t"):
    xs = sorted({float(r[x_key]) for r in rows})
    ys = sorted({float(r[y_key]) for r in rows})
    return xs, ys


def _new_figure(decorations: bool, n_cols: int, n_rows: int):
    if decorations:
        fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=DPI)
        return fig, ax
    # Integer inches at dpi == CELL_PIXELS give an exact pixel count
    # (n_cols * CELL_PIXELS wide), so every data cell is a uniform block.
    fig = plt.figure(figsize=(n_cols, n_rows), dpi=CELL_PIXELS)
    ax = fig.add_axes([0, 0, 1, 1])
    ax.set_axis_off()
    return fig, ax


def _save(fig, out_path: str) -> None:
    fig.savefig(out_path, dpi=fig.dpi, metadata={"Software": "render"})
    plt.close(fig)


def render_curve(rows: list[dict], out_path: str, decorations: bool, family: str | None):
    if family:
        rows = [r for r in rows if r["family"] == family]
        if not rows:
            raise SchemaError(f"no rows for family {family!r}")
    fig, ax = _new_figure(True, 0, 0) if decorations else _new_figure(False, 64, 48)
    for fam in _families_in(rows):
        points = sorted(
            ((float(r["nbar_code"]), float(r["infidelity"])) for r in rows if r["family"] == fam),
        )
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        ax.plot(xs, ys, marker="o", markersize=3, label=fam,
                color=FAMILY_COLORS.get(fam, "#000000"))
    ax.set_yscale("log")
    if decorations:
        ax.set_xlabel("mean photon number")
        ax.set_ylabel("infidelity")
        ax.legend()
        fig.tight_layout()
    _save(fig, out_path)


def render_slice(rows: list[dict], out_path: str, decorations: bool, family: str | None):
    diagonal = [r for r in rows if r["kappa_l_t"] == r["kappa_phi_t"]]
    if family:
        diagonal = [r for r in diagonal if r["family"] == family]
    if not diagonal:
        raise SchemaError("no rows on the equal-rates diagonal (kappa_l_t == kappa_phi_t)")
    fig, ax = _new_figure(True, 0, 0) if decorations else _new_figure(False, 64, 48)
    for fam in _families_in(diagonal):
        best: dict[float, float] = {}
        for r in diagonal:
            if r["family"] != fam:
                continue
            s = float(r["kappa_l_t"])
            infid = float(r["infidelity"])
            best[s] = min(best.get(s, math.inf), infid)
        xs = sorted(best)
        ax.plot(xs, [best[x] for x in xs], marker="o", markersize=3, label=fam,
                color=FAMILY_COLORS.get(fam, "#000000"))
    ax.set_xscale("log")
    ax.set_yscale("log")
    if decorations:
        ax.set_xlabel("noise strength (equal rates)")
        ax.set_ylabel("infidelity")
        ax.legend()
        fig.tight_layout()
    _save(fig, out_path)


def _pivot_min_infidelity(rows: list[dict]):
    xs, ys = _grid_axes(rows)
    grid = np.full((len(ys), len(xs)), np.nan)
    for r in rows:
        if r["solver_status"] == "failed":
            continue
        i = ys.index(float(r["kappa_phi_t"]))
        j = xs.index(float(r["kappa_l_t"]))
        value = float(r["infidelity"])
        if np.isnan(grid[i, j]) or value < grid[i, j]:
            grid[i, j] = value
    return xs, ys, grid


def render_heatmap(rows: list[dict], out_path: str, decorations: bool, family: str | None):
    if family:
        rows = [r for r in rows if r["family"] == family]
        if not rows:
            raise SchemaError(f"no rows for family {family!r}")
    xs, ys, grid = _pivot_min_infidelity(rows)
    finite = grid[np.isfinite(grid)]
    if finite.size == 0:
        raise SchemaError("no successfully solved cells to map")
    norm = LogNorm(vmin=max(finite.min(), 1e-12), vmax=max(finite.max(), 1e-11))
    fig, ax = _new_figure(decorations, len(xs), len(ys))
    image = ax.imshow(
        grid,
        origin="lower",
        aspect="auto",
        interpolation="nearest",
        cmap="viridis",
        norm=norm,
    )
    if decorations:
        ax.set_xticks(range(len(xs)), [f"{v:.3g}" for v in xs], rotation=45)
        ax.set_yticks(range(len(ys)), [f"{v:.3g}" for v in ys])
        ax.set_xlabel("loss strength")
        ax.set_ylabel("dephasing strength")
        fig.colorbar(image, ax=ax, label="best infidelity")
        fig.tight_layout()
    _save(fig, out_path)


def render_diffmap(rows: list[dict], out_path: str, decorations: bool):
    xs, ys = _grid_axes(rows)
    diff = np.full((len(ys), len(xs)), np.nan)
    masked = np.zeros((len(ys), len(xs)), dtype=bool)
    for r in rows:
        i = ys.index(float(r["kappa_phi_t"]))
        j = xs.index(float(r["kappa_l_t"]))
        diff[i, j] = float(r["rel_diff"])
        masked[i, j] = r["trivial_wins"] == "1"
    finite = diff[np.isfinite(diff)]
    if finite.size == 0:
        raise SchemaError("empty comparison table")
    # Unequal two-sided scaling: each sign is normalized by its own extreme,
    # so the color saturates where that family's advantage is largest.
    vmin = min(finite.min(), 0.0) or -1e-30
    vmax = max(finite.max(), 0.0) or 1e-30
    norm = TwoSlopeNorm(vmin=min(vmin, -1e-30), vcenter=0.0, vmax=max(vmax, 1e-30))
    cmap = plt.get_cmap("RdBu_r").copy()
    colored = cmap(norm(np.nan_to_num(diff, nan=0.0)))
    colored[np.isnan(diff)] = (1.0, 1.0, 1.0, 1.0)
    colored[masked] = (*GREY, 1.0)
    fig, ax = _new_figure(decorations, len(xs), len(ys))
    ax.imshow(colored, origin="lower", aspect="auto", interpolation="nearest")
    if decorations:
        ax.set_xticks(range(len(xs)), [f"{v:.3g}" for v in xs], rotation=45)
        ax.set_yticks(range(len(ys)), [f"{v:.3g}" for v in ys])
        ax.set_xlabel("loss strength")
        ax.set_ylabel("dephasing strength")
        first = rows[0]
        ax.set_title(
            f"relative fidelity: {first['family_a']} vs {first['family_b']} "
            f"(grey: trivial wins)"
        )
        fig.tight_layout()
    _save(fig, out_path)


def render_wigner(rows: list[dict], out_path: str, decorations: bool):
    xs = sorted({float(r["x"]) for r in rows})
    ps = sorted({float(r["p"]) for r in rows})
    grid = np.full((len(ps), len(xs)), np.nan)
    for r in rows:
        grid[ps.index(float(r["p"])), xs.index(float(r["x"]))] = float(r["W"])
    if np.isnan(grid).any():
        raise SchemaError("wigner table does not fill a complete x/p grid")
    peak = np.abs(grid).max() or 1.0
    fig, ax = _new_figure(decorations, len(xs), len(ps))
    image = ax.imshow(
        grid,
        origin="lower",
        aspect="equal" if decorations else "auto",
        interpolation="nearest",
        cmap="RdBu_r",
        vmin=-peak,
        vmax=peak,
        extent=(min(xs), max(xs), min(ps), max(ps)) if decorations else None,
    )
    if decorations:
        ax.set_xlabel("x")
        ax.set_ylabel("p")
        fig.colorbar(image, ax=ax, label="W(x, p)")
        fig.tight_layout()
    _save(fig, out_path)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render.py", description="Render sweep/map CSV files to images."
    )
    parser.add_argument(
        "--kind",
        required=True,
        choices=["curve", "slice", "heatmap", "diffmap", "wigner"],
    )
    parser.add_argument("--in", dest="input", required=True, help="input CSV path")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument(
        "--family", default=None, help="restrict curve/slice/heatmap to one family"
    )
    parser.add_argument(
        "--decorations",
        choices=["on", "off"],
        default="on",
        help="'off' renders bare uniform pixel blocks (one per data cell)",
    )
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    decorations = args.decorations == "on"
    try:
        if args.kind in ("curve", "slice", "heatmap"):
            rows = read_table(args.input, RECORDS_COLUMNS)
        elif args.kind == "diffmap":
            rows = read_table(args.input, COMPARE_COLUMNS)
        else:
            rows = read_table(args.input, WIGNER_COLUMNS)
        if args.kind == "curve":
            render_curve(rows, args.out, decorations, args.family)
        elif args.kind == "slice":
            render_slice(rows, args.out, decorations, args.family)
        elif args.kind == "heatmap":
            render_heatmap(rows, args.out, decorations, args.family)
        elif args.kind == "diffmap":
            render_diffmap(rows, args.out, decorations)
        else:
            render_wigner(rows, args.out, decorations)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"error: bad value in input table: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
