"""Delimited reports and companion figures for runs and check suites.

Reports are plain TSV (stable field order, no timestamps) so repeated runs
with the same inputs are byte-identical. Each report writer has a figure
companion rendered next to the report file.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

# Strip the library version stamp so repeated runs write identical bytes.
_PNG_META = {"Software": None}


def write_certificate_report(path, cert, label="run") -> None:
    """Per-step distances and bounds of one iteration run as TSV."""
    lines = ["# field\tvalue",
             f"# label\t{label}",
             f"# terminal\t{cert.terminal}",
             f"# steps\t{cert.steps}",
             f"# factor\t{cert.factor:.12g}",
             f"# start_diameter\t{cert.diam0:.12g}",
             f"# eps\t{cert.eps:.12g}",
             "step\tstep_distance\tbound"]
    for n in range(cert.steps + 1):
        dist = f"{cert.per_step_distance[n]:.12g}" if n < cert.steps else ""
        lines.append(f"{n}\t{dist}\t{cert.apriori_bound[n]:.12g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def certificate_figure(path, cert, label="run") -> None:
    """Decay of per-step distances against the geometric bound, log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = list(range(cert.steps + 1))
    ax.plot(ns, cert.apriori_bound, "k--", label="a-priori bound")
    if cert.per_step_distance:
        pos = [(n, d) for n, d in enumerate(cert.per_step_distance) if d > 0]
        if pos:
            ax.plot([n for n, _ in pos], [d for _, d in pos], "o-",
                    label="step distance")
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("distance")
    ax.set_title(f"convergence: {label}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def write_check_report(path, results, meta=None) -> None:
    """Check suite verdicts as TSV: status, check, subject, gap, detail."""
    lines = ["# field\tvalue"]
    for k, v in (meta or {}).items():
        lines.append(f"# {k}\t{v}")
    n_fail = sum(1 for r in results if not r.passed)
    lines.append(f"# checks\t{len(results)}")
    lines.append(f"# failures\t{n_fail}")
    lines.append("status\tcheck\tsubject\tgap\tdetail")
    for r in results:
        lines.append(r.line())
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def check_figure(path, results) -> None:
    """Worst gap per check name, pass/fail colored."""
    by_name = {}
    for r in results:
        cur = by_name.get(r.name)
        if cur is None or r.gap > cur.gap or (not r.passed and cur.passed):
            by_name[r.name] = r
    names = sorted(by_name)
    gaps = [max(by_name[n].gap, 0.0) for n in names]
    colors = ["tab:green" if by_name[n].passed else "tab:red" for n in names]
    fig, ax = plt.subplots(figsize=(8, max(2.0, 0.5 + 0.35 * len(names))))
    ax.barh(range(len(names)), gaps, color=colors)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=8)
    ax.set_xlabel("worst gap")
    ax.set_title("check suite: worst gap per check (green = pass)")
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def write_decomposition_report(path, dec, label="decomposition") -> None:
    """Gap summary plus one row per support point with its representative."""
    lines = ["# field\tvalue",
             f"# label\t{label}",
             f"# envelope_gap\t{dec.gap:.12g}",
             f"# core_envelope_gap\t{dec.core_gap:.12g}",
             f"# distinct_parts\t{len(dec.distinct_parts)}",
             f"# terminal\t{dec.certificate.terminal}",
             "support_point\trepresentative\tpart_support_size"]
    for x in sorted(dec.parts):
        rep = dec.representatives[x]
        lines.append(f"{x!r}\t{rep!r}\t{len(dec.parts[x].support_points())}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def decomposition_figure(path, dec) -> None:
    """Support sizes of the distinct parts next to the whole."""
    reps = sorted(dec.distinct_parts)
    sizes = [len(dec.distinct_parts[r].support_points()) for r in reps]
    labels = [f"part@{r}" for r in reps] + ["whole"]
    values = sizes + [len(dec.whole.support_points())]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(range(len(values)), values, color=["tab:blue"] * len(sizes) + ["tab:orange"])
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("support size")
    ax.set_title(f"decomposition: {len(reps)} distinct part(s), "
                 f"envelope gap {dec.gap:.3g}")
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
