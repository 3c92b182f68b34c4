"""Tab-separated input/output and ``key = value`` config files."""

import math
import re

import numpy as np

INPUT_COLUMNS = ("id", "stat", "group")
ANALYZE_COLUMNS = ("id", "group", "stat", "p_value", "weight", "threshold", "rejected")
SWEEP_COLUMNS = ("p0", "p1", "xi0", "m1", "K", "r_squared", "power_weighted", "power_unweighted",
                 "diff_pct_points", "fwer_weighted", "fwer_unweighted", "se", "replicates", "master_seed",
                 "diff_se")
GROUP_LABEL = re.compile(r"^[A-Za-z0-9_.:-]+$")


class ParseError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            yield lineno, line


def read_table(path, required):
    """Rows of a headed TSV file as dicts of strings, with line numbers.

    Blank lines and ``#`` comments are skipped; the first remaining line is
    the header and must contain every column in ``required``.
    """
    lines = _data_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError(path, 0, "empty file (no header row)") from None
    columns = header.split("\t")
    missing = [c for c in required if c not in columns]
    if missing:
        raise ParseError(path, lineno, f"header lacks column(s) {', '.join(missing)}")
    rows = []
    for lineno, line in lines:
        cells = line.split("\t")
        if len(cells) != len(columns):
            raise ParseError(path, lineno, f"expected {len(columns)} fields, found {len(cells)}")
        rows.append((lineno, dict(zip(columns, cells))))
    return rows


def read_statistics(path, model="normal"):
    """Parse an ``id / stat / group`` file into ``(ids, stats, groups)`` arrays."""
    ids, stats, groups = [], [], []
    seen = set()
    for lineno, row in read_table(path, INPUT_COLUMNS):
        ident, group = row["id"], row["group"]
        if not ident:
            raise ParseError(path, lineno, "empty id")
        if ident in seen:
            raise ParseError(path, lineno, f"duplicate id {ident!r}")
        seen.add(ident)
        try:
            stat = float(row["stat"])
        except ValueError:
            raise ParseError(path, lineno, f"stat {row['stat']!r} is not a number") from None
        if not math.isfinite(stat):
            raise ParseError(path, lineno, f"stat {row['stat']!r} is not finite")
        if model == "chisq" and stat < 0:
            raise ParseError(path, lineno, "chi-square statistic must be non-negative")
        if not GROUP_LABEL.match(group):
            raise ParseError(path, lineno, f"malformed group label {group!r}")
        ids.append(ident)
        stats.append(stat)
        groups.append(group)
    if not ids:
        raise ParseError(path, 0, "no data rows")
    return np.array(ids, dtype=object), np.array(stats), np.array(groups)


def fmt_exact(x):
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


def fmt_rate(x):
    return f"{x:.6g}"


def write_analysis(fh, ids, groups, stats, result, summary, group_rows):
    """Per-test table preceded by ``#`` summary and per-group blocks."""
    for key, value in summary:
        fh.write(f"# {key} = {value}\n")
    fh.write("#group\tsize\tmean\tvariance\tpi_hat\txi_hat\tdegenerate\tweight\n")
    for row in group_rows:
        fh.write("#" + "\t".join(row) + "\n")
    fh.write("\t".join(ANALYZE_COLUMNS) + "\n")
    for j in range(result.m):
        fh.write("\t".join((
            str(ids[j]), str(groups[j]), fmt_exact(stats[j]), fmt_exact(result.p_values[j]),
            fmt_exact(result.weights[j]), fmt_exact(result.thresholds[j]),
            "1" if result.rejected[j] else "0")) + "\n")


def read_analysis(path):
    """Per-test rows of an analysis file, numeric fields converted."""
    out = []
    for _, row in read_table(path, ANALYZE_COLUMNS):
        out.append({
            "id": row["id"], "group": row["group"], "stat": float(row["stat"]),
            "p_value": float(row["p_value"]), "weight": float(row["weight"]),
            "threshold": float(row["threshold"]), "rejected": row["rejected"] == "1",
        })
    return out


def write_rows(fh, columns, rows):
    fh.write("\t".join(columns) + "\n")
    for row in rows:
        fh.write("\t".join(_cell(row[c]) for c in columns) + "\n")


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_rate(value)
    return str(value)


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment.

    Values stay strings; a comma-separated value denotes a list to sweep.
    """
    config = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ParseError(path, lineno, "expected 'key = value'")
            config[key.strip()] = value.strip()
    return config
