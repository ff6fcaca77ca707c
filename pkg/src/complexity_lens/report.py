"""Report rendering: JSON, delimited tables, highlight text, and figures.

Given identical report content the emitted bytes are identical, so runs
with the same configuration and seed can be diffed file by file.  The
highlighted-text format wraps marked tokens as ``[[token]]``, one
sentence per line; figures are rendered as PNG files next to the tables.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from complexity_lens.metrics import EvaluationReport

FORMATS = ("json", "tsv", "highlighted-text", "figures")

# Column order for the flat result table.
CORE_METRICS = ("P", "R", "F1", "TER")


def report_to_dict(report: EvaluationReport) -> dict:
    """JSON-ready view of a report; empty optional sections are omitted."""
    out: dict = {
        "dataset": report.dataset,
        "explainer": report.explainer,
        "classifier": report.classifier,
        "seed": report.seed,
        "n_explained": report.macro.n,
        "macro": dict(sorted(report.macro.means.items())),
        "undefined_counts": dict(sorted(report.macro.undefined.items())),
        "per_sentence": report.per_sentence,
    }
    if report.accuracy is not None:
        out["accuracy"] = report.accuracy
    if report.confusion is not None:
        out["confusion"] = report.confusion
    if report.z_test is not None:
        out["z_test"] = report.z_test
    if report.per_domain:
        out["per_domain"] = [
            {
                "domain": d.domain,
                "n_explained": d.n_explained,
                "classification_f1": d.classification_f1,
                "macro": dict(sorted(d.macro.means.items())),
                "undefined_counts": dict(sorted(d.macro.undefined.items())),
            }
            for d in report.per_domain
        ]
    if report.correlations:
        out["correlations"] = report.correlations
    return out


def _as_dict(report: EvaluationReport | dict) -> dict:
    return report if isinstance(report, dict) else report_to_dict(report)


def _metric_columns(macro: dict) -> list[str]:
    eds = sorted(
        (key for key in macro if key.startswith("ED_")),
        key=lambda key: float(key[3:]),
    )
    return list(CORE_METRICS) + eds


def _cell(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_tsv(reports: list[dict], path: Path) -> None:
    """One row per report: macro metrics in a flat, diffable table."""
    columns = _metric_columns(reports[0]["macro"])
    header = ["dataset", "explainer", "classifier"] + columns + ["n_explained", "seed"]
    lines = ["\t".join(header)]
    for rep in reports:
        row = [rep["dataset"], rep["explainer"], rep["classifier"]]
        row += [_cell(rep["macro"].get(c)) for c in columns]
        row += [_cell(rep["n_explained"]), _cell(rep["seed"])]
        lines.append("\t".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_per_domain_tsv(report: dict, path: Path) -> None:
    columns = _metric_columns(report["macro"])
    header = ["domain", "n_explained", "classification_F1"] + columns + ["seed"]
    lines = ["\t".join(header)]
    for dom in report["per_domain"]:
        row = [dom["domain"], _cell(dom["n_explained"]), _cell(dom["classification_f1"])]
        row += [_cell(dom["macro"].get(c)) for c in columns]
        row.append(_cell(report["seed"]))
        lines.append("\t".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def highlighted_line(tokens: list[str], mask: list[int]) -> str:
    return " ".join(
        f"[[{tok}]]" if bit else tok for tok, bit in zip(tokens, mask)
    )


def write_highlights(report: dict, text_path: Path, jsonl_path: Path) -> None:
    """Write the per-sentence masks as wrapped text plus JSON-lines."""
    lines = [
        highlighted_line(rec["tokens"], rec["mask"]) for rec in report["per_sentence"]
    ]
    text_path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    with open(jsonl_path, "w", encoding="utf-8") as fh:
        for rec in report["per_sentence"]:
            fh.write(
                json.dumps(
                    {
                        "id": rec["id"],
                        "mask": rec["mask"],
                        "explainer": report["explainer"],
                        "seed": report["seed"],
                    },
                    sort_keys=True,
                )
            )
            fh.write("\n")


def _save_png(fig, path: Path, reports: list[dict]) -> None:
    # The seed travels in the PNG metadata so figures stay traceable.
    title = ", ".join(
        f"{rep['dataset']}/{rep['explainer']} seed={rep['seed']}" for rep in reports
    )
    fig.savefig(path, dpi=150, metadata={"Title": title})


def _bar(ax, labels, values, title, color="#4878a8"):
    ax.bar(range(len(labels)), values, color=color)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels)
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)


def render_figures(reports: list[dict], out_dir: Path) -> list[Path]:
    """Render macro-metric and edit-distance charts as PNG files.

    One report yields single-run charts; several reports (e.g. different
    explainers over the same corpus) yield grouped comparison charts.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    single = len(reports) == 1
    tags = [rep["explainer"] for rep in reports]
    eds = sorted(
        (key for key in reports[0]["macro"] if key.startswith("ED_")),
        key=lambda key: float(key[3:]),
    )

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    if single:
        macro = reports[0]["macro"]
        _bar(axes[0], list(CORE_METRICS[:3]), [macro.get(m, 0.0) for m in CORE_METRICS[:3]],
             "Tokenwise highlight quality")
        _bar(axes[1], ["TER"], [macro.get("TER", 0.0)],
             "Remainder vs simple reference", color="#a85448")
        fig.suptitle(f"{reports[0]['dataset']} / {reports[0]['explainer']}")
    else:
        width = 0.8 / len(reports)
        for k, rep in enumerate(reports):
            vals = [rep["macro"].get(m, 0.0) for m in CORE_METRICS[:3]]
            axes[0].bar([i + k * width for i in range(3)], vals, width, label=tags[k])
            axes[1].bar([k * width], [rep["macro"].get("TER", 0.0)], width, label=tags[k])
        axes[0].set_xticks([i + 0.4 - width / 2 for i in range(3)])
        axes[0].set_xticklabels(CORE_METRICS[:3])
        axes[0].set_title("Tokenwise highlight quality")
        axes[0].legend(fontsize=8)
        axes[1].set_xticks([0.4 - width / 2])
        axes[1].set_xticklabels(["TER"])
        axes[1].set_title("Remainder vs simple reference")
        fig.suptitle(reports[0]["dataset"])
    fig.tight_layout()
    path = out_dir / "macro_metrics.png"
    _save_png(fig, path, reports)
    plt.close(fig)
    written.append(path)

    if eds:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        labels = [key[3:] for key in eds]
        if single:
            _bar(ax, labels, [reports[0]["macro"][key] for key in eds],
                 "Edit distance by substitution cost", color="#6a9a58")
        else:
            width = 0.8 / len(reports)
            for k, rep in enumerate(reports):
                ax.bar(
                    [i + k * width for i in range(len(eds))],
                    [rep["macro"].get(key, 0.0) for key in eds],
                    width,
                    label=tags[k],
                )
            ax.set_xticks([i + 0.4 - width / 2 for i in range(len(eds))])
            ax.set_xticklabels(labels)
            ax.set_title("Edit distance by substitution cost")
            ax.legend(fontsize=8)
        ax.set_xlabel("substitution cost")
        fig.tight_layout()
        path = out_dir / "edit_distance.png"
        _save_png(fig, path, reports)
        plt.close(fig)
        written.append(path)

    first = reports[0]
    if single and first.get("per_domain"):
        domains = [d["domain"] for d in first["per_domain"]]
        fig, ax = plt.subplots(figsize=(max(5, 0.9 * len(domains)), 3.5))
        width = 0.27
        xs = range(len(domains))
        ax.bar([x - width for x in xs],
               [d["classification_f1"] or 0.0 for d in first["per_domain"]],
               width, label="classification F1")
        ax.bar(list(xs),
               [d["macro"].get("F1", 0.0) for d in first["per_domain"]],
               width, label="explanation F1")
        ax.bar([x + width for x in xs],
               [d["macro"].get("TER", 0.0) for d in first["per_domain"]],
               width, label="TER")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(domains, rotation=30, ha="right", fontsize=8)
        ax.legend(fontsize=8)
        ax.set_title("Per-domain difficulty")
        fig.tight_layout()
        path = out_dir / "per_domain.png"
        _save_png(fig, path, reports)
        plt.close(fig)
        written.append(path)

    return written


def write_report(
    report: EvaluationReport | dict,
    out_dir: str | Path,
    formats=FORMATS,
) -> list[Path]:
    """Write the report in the requested formats; returns written paths."""
    rep = _as_dict(report)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if "json" in formats:
        path = out / "report.json"
        path.write_text(
            json.dumps(rep, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        written.append(path)
    if "tsv" in formats:
        path = out / "report.tsv"
        write_tsv([rep], path)
        written.append(path)
        if rep.get("per_domain"):
            path = out / "per_domain.tsv"
            write_per_domain_tsv(rep, path)
            written.append(path)
    if "highlighted-text" in formats:
        text_path = out / "highlighted.txt"
        jsonl_path = out / "highlights.jsonl"
        write_highlights(rep, text_path, jsonl_path)
        written.extend([text_path, jsonl_path])
    if "figures" in formats:
        written.extend(render_figures([rep], out / "figures"))
    return written


def write_correlations_tsv(report: dict, path: Path) -> None:
    """Flat table of per-domain correlation coefficients."""
    lines = ["\t".join(["classification", "explanation", "method", "coefficient"])]
    for metric, row in sorted((report.get("correlations") or {}).items()):
        for method, value in sorted(row.items()):
            lines.append(
                "\t".join(["classification_F1", metric, method, _cell(value)])
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
