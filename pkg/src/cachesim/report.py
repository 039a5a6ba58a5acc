"""Render simulation results in three text shapes plus CSV/JSON.

* ``render_simcache``: classic per-counter statistics lines,
  ``<cache>.<counter> <value> # <description>``.
* ``render_vex_summary``: cycle breakdown with stall decomposition,
  branch statistics and bus bandwidth.
* ``render_region_profile``: flat per-region profile table sorted by
  attributed cycles.

Rates render with 4 decimals, percentages with 2, both half-up.
"""

import csv
import io
import json
from dataclasses import asdict

from ._fmt import fixed, pct
from .config import TimingSpec
from .hierarchy import TOTAL_REGION, SimReport
from .sweep import SweepRow
from .timing import CycleReport


class UnsupportedFormat(ValueError):
    pass


_COUNTERS = (
    ("accesses", "total number of accesses"),
    ("hits", "total number of hits"),
    ("misses", "total number of misses"),
    ("replacements", "total number of replacements"),
    ("writebacks", "total number of writebacks"),
    ("invalidations", "total number of invalidations"),
)
_RATES = (
    ("miss_rate", "miss rate (i.e., misses/ref)"),
    ("repl_rate", "replacement rate (i.e., repls/ref)"),
    ("wb_rate", "writeback rate (i.e., wrbks/ref)"),
    ("inv_rate", "invalidation rate (i.e., invs/ref)"),
)


def _stat_line(key, value, desc):
    return f"{key:<17} {value} # {desc}"


def render_simcache(report: SimReport) -> str:
    """Per-counter statistics text; byte-stable for identical reports."""
    lines = ["sim: ** simulation statistics **"]
    lines.append(_stat_line("sim_num_insn", report.sim_num_insn,
                            "total number of instructions executed"))
    lines.append(_stat_line("sim_num_refs", report.sim_num_refs,
                            "total number of loads and stores executed"))
    if report.branches.executed > 0:
        lines.append(_stat_line("sim_num_branches", report.branches.executed,
                                "total number of branches executed"))
        lines.append(_stat_line("sim_num_taken", report.branches.taken,
                                "total number of taken branches"))
        lines.append(_stat_line("sim_num_not_taken", report.branches.not_taken,
                                "total number of not-taken branches"))
    lines.append(_stat_line("sim_elapsed_time", report.sim_elapsed_time,
                            "total simulation time in seconds"))
    lines.append(_stat_line("sim_inst_rate", fixed(report.sim_inst_rate, 4),
                            "simulation speed (in insts/sec)"))
    for name, stats in report.caches.items():
        for counter, desc in _COUNTERS:
            lines.append(_stat_line(f"{name}.{counter}", getattr(stats, counter), desc))
        for rate, desc in _RATES:
            lines.append(_stat_line(f"{name}.{rate}", fixed(getattr(stats, rate), 4), desc))
    return "\n".join(lines) + "\n"


def _row(label, value, suffix=""):
    return f"{label:<28} {value}{suffix}"


def _paren_pct(numer, denom, width=6):
    return f" ({pct(numer, denom):>{width}}%)"


def _mem_block(title, rep, show_access_pct):
    lines = [f"{title} Operations:"]
    acc = rep.accesses
    lines.append(_row("  Accesses:", acc, " (100.00%)" if show_access_pct and acc else ""))
    if acc > 0:
        lines.append(_row("  Hits (Hit Rate):", rep.hits, _paren_pct(rep.hits, acc)))
        lines.append(_row("  Misses (Miss Rate):", rep.misses, _paren_pct(rep.misses, acc)))
    else:
        lines.append(_row("  Hits (Hit Rate):", rep.hits))
        lines.append(_row("  Misses (Miss Rate):", rep.misses))
    lines.append(f"{title} Stall Cycles")
    st = rep.stall_total
    if st > 0:
        lines.append(_row("  Total (in cycles):", st, " (100.00%)"))
        lines.append(_row("  Due to Misses:", rep.stall_miss, _paren_pct(rep.stall_miss, st)))
        lines.append(_row("  Due to Bus Conflicts:", rep.stall_bus_conflict,
                          _paren_pct(rep.stall_bus_conflict, st)))
    else:
        lines.append(_row("  Total (in cycles):", st))
        lines.append(_row("  Due to Misses:", rep.stall_miss))
        lines.append(_row("  Due to Bus Conflicts:", rep.stall_bus_conflict))
    return lines


def render_vex_summary(report: CycleReport, core_clk_mhz=None) -> str:
    """Cycle accounting summary in the single-level simulator's shape."""
    total = report.total_cycles
    ops = report.executed_operations
    insts = report.execution_cycles
    br = report.branch
    lines = []
    if core_clk_mhz:
        msec = fixed(total / (core_clk_mhz * 1000.0), 6)
        lines.append(_row("Total Cycles:", total, f" ({msec} msec)"))
    else:
        lines.append(_row("Total Cycles:", total))
    lines.append(_row("Execution Cycles:", insts, _paren_pct(insts, total)))
    lines.append(_row("Stall Cycles:", report.stall_cycles,
                      _paren_pct(report.stall_cycles, total)))
    lines.append(_row("Executed operations:", ops))
    lines.append("")
    lines.append(_row("Executed branches:", br.executed,
                      f" ({pct(br.executed, ops):>6}% ops)({pct(br.executed, insts):>5}% insts)"))
    for label, count in (("Not taken branches:", br.not_taken),
                         ("Taken branches:", br.taken)):
        lines.append(_row(label, count,
                          f" ({pct(count, ops):>6}% ops)({pct(count, insts):>5}% insts)"
                          f"({pct(count, br.executed):>5}% br)"))
    lines.append(_row("Branch Stall Cycles:", br.branch_stall_cycles))
    lines.append("")
    lines.extend(_mem_block("Instruction Memory", report.imem, False))
    lines.append("")
    lines.extend(_mem_block("Data Memory", report.dmem, True))
    lines.append("")
    lines.append(f"Percentage Bus Bandwidth Consumed: {fixed(report.bandwidth_pct, 2)}%")
    return "\n".join(lines) + "\n"


def render_region_profile(report: SimReport, t: TimingSpec) -> str:
    """Flat profile: per-region cycles attributed to instructions, data-side
    misses, instruction-side misses and taken branches, with percentages
    against the TOTAL region.  Rows sort by total cycles descending."""
    totals = report.regions[TOTAL_REGION]
    named = {n: r for n, r in report.regions.items() if n != TOTAL_REGION}
    rows_src = named if named else {TOTAL_REGION: totals}

    def cycles_of(r):
        d = r.d_misses * t.miss_penalty
        i = r.i_misses * t.icache_penalty
        total = r.insts + d + i + r.branches.taken * t.branch_stall
        return total, r.insts, d, i

    t_total, t_insts, t_d, t_i = cycles_of(totals)
    rows = []
    for name, r in rows_src.items():
        total, insts, d, i = cycles_of(r)
        rows.append((total, insts, d, i, name))
    rows.sort(key=lambda row: (-row[0], row[4]))

    lines = ["Flat profile (cycles)"]
    lines.append(f"{'Total':>8} {'Total%':>7} {'Insts':>8} {'Insts%':>7} "
                 f"{'Dcache':>8} {'Dcache%':>7} {'Icache':>8} {'Icache%':>7}  Region")
    for total, insts, d, i, name in rows:
        lines.append(f"{total:>8} {pct(total, t_total):>7} "
                     f"{insts:>8} {pct(insts, t_insts):>7} "
                     f"{d:>8} {pct(d, t_d):>7} "
                     f"{i:>8} {pct(i, t_i):>7}  {name}")
    return "\n".join(lines) + "\n"


def sim_report_dict(report: SimReport) -> dict:
    return asdict(report)


def cycle_report_dict(report: CycleReport) -> dict:
    return asdict(report)


def sweep_rows_dicts(rows) -> list:
    out = []
    for r in rows:
        d = {"nsets": r.nsets, "bsize": r.bsize, "assoc": r.assoc,
             "misses": r.misses, "miss_rate": r.miss_rate}
        if r.policy is not None:
            d["policy"] = r.policy
        out.append(d)
    return out


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    else:
        out.append((prefix, value))


def _kv_csv(d):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    flat = []
    _flatten("", d, flat)
    for k, v in flat:
        w.writerow([k, v])
    return buf.getvalue()


def _sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    with_policy = any(r.policy is not None for r in rows)
    if with_policy:
        w.writerow(["policy", "nsets", "bsize", "assoc", "misses", "miss_rate"])
        for r in rows:
            w.writerow([r.policy or "lru", r.nsets, r.bsize, r.assoc, r.misses,
                        repr(r.miss_rate)])
    else:
        w.writerow(["nsets", "bsize", "assoc", "misses", "miss_rate"])
        for r in rows:
            w.writerow([r.nsets, r.bsize, r.assoc, r.misses, repr(r.miss_rate)])
    return buf.getvalue()


def render_sweep_table(rows) -> str:
    with_policy = any(r.policy is not None for r in rows)
    head = f"{'nsets':>6} {'bsize':>6} {'assoc':>6} {'misses':>10} {'miss_rate':>10}"
    if with_policy:
        head = f"{'policy':>6} " + head
    lines = [head]
    for r in rows:
        line = (f"{r.nsets:>6} {r.bsize:>6} {r.assoc:>6} {r.misses:>10} "
                f"{fixed(r.miss_rate, 6):>10}")
        if with_policy:
            line = f"{r.policy or 'lru':>6} " + line
        lines.append(line)
    return "\n".join(lines) + "\n"


def export_combined(report: SimReport, cycles: CycleReport, fmt: str) -> str:
    """One document holding both the simulation and cycle reports."""
    if fmt not in ("csv", "json"):
        raise UnsupportedFormat(f"unsupported format {fmt!r}: use 'csv' or 'json'")
    d = {"sim": sim_report_dict(report), "cycles": cycle_report_dict(cycles)}
    return json.dumps(d, indent=2) + "\n" if fmt == "json" else _kv_csv(d)


def export(obj, fmt: str) -> str:
    """Serialize a SimReport, CycleReport or sweep row list losslessly."""
    if fmt not in ("csv", "json"):
        raise UnsupportedFormat(f"unsupported format {fmt!r}: use 'csv' or 'json'")
    if isinstance(obj, SimReport):
        d = sim_report_dict(obj)
        return json.dumps(d, indent=2) + "\n" if fmt == "json" else _kv_csv(d)
    if isinstance(obj, CycleReport):
        d = cycle_report_dict(obj)
        return json.dumps(d, indent=2) + "\n" if fmt == "json" else _kv_csv(d)
    if isinstance(obj, list) and all(isinstance(r, SweepRow) for r in obj):
        if fmt == "json":
            return json.dumps(sweep_rows_dicts(obj), indent=2) + "\n"
        return _sweep_csv(obj)
    raise TypeError(f"cannot export object of type {type(obj).__name__}")
