"""The `report` subcommand: metric and verification tables plus figures."""
from __future__ import annotations

import csv
from pathlib import Path

from . import fo
from .backends.solver import Invalid, Valid
from .pipeline import TABLE2, compile_program, corpus_names, load_program, read_program_text, verify

METRIC_COLUMNS = ["program", "fp_size", "fp_ld", "fp_bd", "sfp_size", "sfp_ld", "sfp_bd", "foi_size", "foi_qr",
                  "compile_seconds"]


def _mark(v) -> str:
    if isinstance(v, Valid):
        return "valid"
    if isinstance(v, Invalid):
        return "invalid"
    return f"unknown:{v.reason}"


def metric_rows(programs) -> list[dict]:
    rows = []
    for prog in programs:
        name, _ = read_program_text(prog)
        c = compile_program(load_program(prog))
        rows.append({"program": name, **c.metrics_row(), "compile_seconds": round(sum(c.timings.values()), 4)})
    return rows


def verify_rows(backends, timeout: float) -> list[dict]:
    rows = []
    for name, pre, post in TABLE2:
        out = verify(load_program(name), pre, post, backends, timeout, wait_all=True)
        row = {"program": name, "pre": pre, "post": post, "qrank": out.vf.qrank, "size": out.vf.size,
               "dag_size": fo.dag_size(out.vf.chi), "verdict": _mark(out.result.verdict)}
        for b in backends:
            v = out.result.verdicts[b]
            row[b] = _mark(v)
            row[f"{b}_seconds"] = round(v.seconds, 3)
            if isinstance(v, Invalid) and v.counterexample is not None:
                row.setdefault("counterexample", v.counterexample)
        rows.append(row)
    return rows


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)


def _plot_sizes(rows: list[dict], path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    names = [r["program"] for r in rows]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(names)), 4))
    for k, (col, label) in enumerate([("fp_size", "for-program"), ("sfp_size", "simple program"),
                                      ("foi_size", "interpretation")]):
        ax.bar(x + (k - 1) * 0.27, [r[col] for r in rows], width=0.27, label=label)
    ax.set_yscale("log")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=40, ha="right")
    ax.set_ylabel("size (log scale)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _plot_depths(rows: list[dict], path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter([r["sfp_bd"] for r in rows], [r["foi_qr"] for r in rows])
    for r in rows:
        ax.annotate(r["program"], (r["sfp_bd"], r["foi_qr"]), fontsize=7, xytext=(3, 3), textcoords="offset points")
    ax.set_xlabel("boolean depth of the simple program")
    ax.set_ylabel("quantifier rank of the interpretation")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _plot_verify(rows: list[dict], backends, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    names = [r["program"] for r in rows]
    x = np.arange(len(names))
    width = 0.8 / max(1, len(backends))
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(names)), 4))
    for k, b in enumerate(backends):
        secs = [r[f"{b}_seconds"] for r in rows]
        bars = ax.bar(x + (k - (len(backends) - 1) / 2) * width, secs, width=width, label=b)
        for bar, r in zip(bars, rows):
            ax.annotate(r[b].split(":")[0][0].upper(), (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                        ha="center", va="bottom", fontsize=7)
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("seconds (V valid, I invalid, U unknown)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(out: Path, programs=None, backends=("automata",), timeout: float = 5.0,
                 verify_table: bool = True) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    programs = programs or corpus_names()
    rows = metric_rows(programs)
    paths = [out / "metrics.csv", out / "sizes.png", out / "depth_vs_qrank.png"]
    _write_csv(paths[0], rows, METRIC_COLUMNS)
    _plot_sizes(rows, paths[1])
    _plot_depths(rows, paths[2])
    if verify_table:
        vrows = verify_rows(list(backends), timeout)
        cols = ["program", "pre", "post", "qrank", "size", "dag_size", "verdict", "counterexample"]
        cols += [c for b in backends for c in (b, f"{b}_seconds")]
        paths += [out / "verification.csv", out / "verification.png"]
        _write_csv(paths[3], vrows, cols)
        _plot_verify(vrows, list(backends), paths[4])
    return paths

