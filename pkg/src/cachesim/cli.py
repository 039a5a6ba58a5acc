"""Command-line driver: simulate, vexsim, sweep and gen.

Exit codes: 0 success, 1 usage or command-line configuration error,
2 input-file error (trace or vex.cfg, with line numbers).

The ``sim`` subcommand keeps the classic single-dash flag vocabulary
(``-cache:dl1 dl1:256:32:1:l``); subcommand-specific options use ``--``
style.  When any of the memory-timing flags is given, ``sim`` appends a
cycle-accounting summary whose per-side miss penalties are the main-memory
latency of one block transfer at that side's memory-boundary cache.
"""

import sys
from dataclasses import replace

from .config import (
    ConfigError,
    HierarchySpec,
    TimingSpec,
    is_pow2,
    parse_hierarchy_args,
    parse_vex_cfg,
)
from .hierarchy import TOTAL_REGION, Hierarchy
from .report import (
    export,
    export_combined,
    render_region_profile,
    render_simcache,
    render_sweep_table,
    render_vex_summary,
)
from .sweep import SweepRow, belady_misses, block_refs, sweep
from .timing import account, main_memory_latency
from .trace import TraceSyntaxError, gen_loop, gen_random, gen_sequential, \
    read_trace_path, write_trace, write_trace_path

USAGE = """\
usage: cachesim <command> [options]

commands:
  sim    [flags] <trace>          simulate a cache/TLB hierarchy over a trace
  vexsim <vex.cfg> <trace>        one-level simulation with cycle accounting
  sweep  [flags] <trace>          miss counts for many geometries, one pass each
  gen    <kind> [flags]           generate a synthetic trace

sim flags (defaults shown):
# -cache:dl1     dl1:256:32:1:l # l1 data cache config, i.e., {<config>|none}
# -cache:dl2     ul2:1024:64:4:l # l2 data cache config, i.e., {<config>|none}
# -cache:il1     il1:256:32:1:l # l1 inst cache config, i.e., {<config>|dl1|dl2|none}
# -cache:il2     dl2 # l2 instruction cache config, i.e., {<config>|dl2|none}
# -tlb:itlb      itlb:16:4096:4:l # instruction TLB config, i.e., {<config>|none}
# -tlb:dtlb      dtlb:32:4096:4:l # data TLB config, i.e., {<config>|none}
# -flush         false # flush caches on system calls
# -seed          1 # random number generator seed
# -mem:lat       18 2 # main memory access latency (first, rest)
# -mem:width     8 # width of memory bus in bytes
# -tlb:lat       30 # TLB miss latency (in cycles)
# --format       text # output format, one of {text|csv|json}
# --out          <null> # write the report to a file instead of stdout
# --clock        <null> # fixed elapsed seconds, for reproducible output

the cache config <config> has the format <name>:<nsets>:<bsize>:<assoc>:<repl>
  <name>  - name of the cache being defined
  <nsets> - number of sets in the cache
  <bsize> - block size of the cache
  <assoc> - associativity of the cache
  <repl>  - block replacement strategy, 'l'-LRU, 'f'-FIFO, 'r'-random
cache levels can be unified by pointing il1 at dl1 or dl2, or il2 at dl2

sweep flags:
  --sets N[,N...]   --bsize N[,N...]   --assoc N[,N...]   --opt
gen kinds and flags:
  sequential --start A --count N --stride S
  loop       --base A --ws BYTES --iters N --stride S
  random     --seed N --base A --range BYTES --count N
  common     --out PATH  (.ct text, .ctb binary; stdout when omitted)

trace records: 'I <hex> [ops]', 'L <hex> <size>', 'S <hex> <size>',
'B <T|N>', 'Y' (syscall), 'R <name>' (region marker), '#' comments
"""


class _UsageError(Exception):
    pass


def main(argv=None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    if not args:
        print(USAGE, file=sys.stderr)
        return 1
    cmd = args[0]
    if cmd in ("-h", "--help", "help"):
        print(USAGE)
        return 0
    handlers = {"sim": _cmd_sim, "vexsim": _cmd_vexsim,
                "sweep": _cmd_sweep, "gen": _cmd_gen}
    try:
        if cmd not in handlers:
            raise _UsageError(f"unknown command {cmd!r}")
        return handlers[cmd](args[1:])
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(USAGE, file=sys.stderr)
        return 1
    except TraceSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        # Command-line config strings raise _UsageError at the parse site;
        # anything arriving here came from an input file.
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run_main():
    sys.exit(main())


def _int_arg(flag, tok):
    try:
        return int(tok, 0)
    except ValueError:
        raise _UsageError(f"{flag} needs an integer, got {tok!r}") from None


def _take(args, i, flag, count=1):
    if i + count > len(args) - 1:
        raise _UsageError(f"{flag} is missing its value")
    return args[i + 1 : i + 1 + count]


def _emit(text, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _make_clock(fixed_elapsed):
    if fixed_elapsed is None:
        import time

        return time.time
    ticks = iter((0.0, float(fixed_elapsed)))
    return lambda: next(ticks, float(fixed_elapsed))


_HIER_FLAGS = ("-cache:il1", "-cache:il2", "-cache:dl1", "-cache:dl2",
               "-tlb:itlb", "-tlb:dtlb", "-flush")


def _cmd_sim(args) -> int:
    hier_pairs = []
    trace_path = None
    fmt = "text"
    out = None
    clock_val = None
    seed = 1
    mem_lat = None
    mem_width = None
    tlb_lat = None
    i = 0
    while i < len(args):
        a = args[i]
        if a in _HIER_FLAGS:
            (v,) = _take(args, i, a)
            hier_pairs += [a, v]
            i += 2
        elif a == "-mem:lat":
            first, nxt = _take(args, i, a, 2)
            mem_lat = (_int_arg(a, first), _int_arg(a, nxt))
            i += 3
        elif a == "-mem:width":
            (v,) = _take(args, i, a)
            mem_width = _int_arg(a, v)
            i += 2
        elif a == "-tlb:lat":
            (v,) = _take(args, i, a)
            tlb_lat = _int_arg(a, v)
            i += 2
        elif a == "-seed":
            (v,) = _take(args, i, a)
            seed = _int_arg(a, v)
            i += 2
        elif a == "--format":
            (fmt,) = _take(args, i, a)
            if fmt not in ("text", "csv", "json"):
                raise _UsageError(f"--format takes text, csv or json, got {fmt!r}")
            i += 2
        elif a == "--out":
            (out,) = _take(args, i, a)
            i += 2
        elif a == "--clock":
            (v,) = _take(args, i, a)
            try:
                clock_val = float(v)
            except ValueError:
                raise _UsageError(f"--clock needs a number, got {v!r}") from None
            i += 2
        elif a.startswith("-") and a != "-":
            raise _UsageError(f"unknown flag {a!r}")
        else:
            if trace_path is not None:
                raise _UsageError(f"unexpected extra argument {a!r}")
            trace_path = a
            i += 1
    if trace_path is None:
        raise _UsageError("missing trace file")

    try:
        hspec = parse_hierarchy_args(hier_pairs)
    except ConfigError as exc:
        raise _UsageError(str(exc)) from None

    with_timing = mem_lat is not None or mem_width is not None or tlb_lat is not None
    base = TimingSpec(
        mem_lat_first=mem_lat[0] if mem_lat else 18,
        mem_lat_next=mem_lat[1] if mem_lat else 2,
        mem_width=mem_width if mem_width is not None else 8,
        tlb_lat=tlb_lat if tlb_lat is not None else 30,
    )
    try:
        base.validate()
    except ConfigError as exc:
        raise _UsageError(str(exc)) from None

    h = Hierarchy(hspec, seed)
    records = read_trace_path(trace_path)
    report = h.run(records, collect_events=with_timing, clock=_make_clock(clock_val))

    cycles = None
    t = base
    if with_timing:
        i_boundary = h.boundary("I")
        d_boundary = h.boundary("D")
        t = replace(
            base,
            icache_penalty=main_memory_latency(base, i_boundary.bsize) if i_boundary else 0,
            miss_penalty=main_memory_latency(base, d_boundary.bsize) if d_boundary else 0,
            num_caches=len(h.caches),
        )
        b = report.branches
        cycles = account(h.events, t, report.sim_num_insn, h.ops_executed,
                         h.mem_counts["I"], h.mem_counts["D"],
                         (b.executed, b.taken, b.not_taken))

    if fmt == "text":
        parts = [render_simcache(report)]
        if cycles is not None:
            parts.append(render_vex_summary(cycles, t.core_clk_mhz))
            if any(name != TOTAL_REGION for name in report.regions):
                parts.append(render_region_profile(report, t))
        _emit("\n".join(parts), out)
    elif cycles is not None:
        _emit(export_combined(report, cycles, fmt), out)
    else:
        _emit(export(report, fmt), out)
    return 0


def _cmd_vexsim(args) -> int:
    positional = []
    fmt = "text"
    out = None
    clock_val = None
    seed = 1
    i = 0
    while i < len(args):
        a = args[i]
        if a == "--format":
            (fmt,) = _take(args, i, a)
            if fmt not in ("text", "csv", "json"):
                raise _UsageError(f"--format takes text, csv or json, got {fmt!r}")
            i += 2
        elif a == "--out":
            (out,) = _take(args, i, a)
            i += 2
        elif a == "--clock":
            (v,) = _take(args, i, a)
            clock_val = float(v)
            i += 2
        elif a == "-seed":
            (v,) = _take(args, i, a)
            seed = _int_arg(a, v)
            i += 2
        elif a.startswith("-"):
            raise _UsageError(f"unknown flag {a!r}")
        else:
            positional.append(a)
            i += 1
    if len(positional) != 2:
        raise _UsageError("vexsim takes a vex.cfg path and a trace path")
    cfg_path, trace_path = positional

    with open(cfg_path, encoding="utf-8") as fh:
        dcache, icache, t = parse_vex_cfg(fh.read())

    h = Hierarchy(HierarchySpec(il1=icache, dl1=dcache), seed)
    records = read_trace_path(trace_path)
    report = h.run(records, collect_events=True, clock=_make_clock(clock_val))
    b = report.branches
    cycles = account(h.events, t, report.sim_num_insn, h.ops_executed,
                     h.mem_counts["I"], h.mem_counts["D"],
                     (b.executed, b.taken, b.not_taken))

    if fmt == "text":
        parts = [render_vex_summary(cycles, t.core_clk_mhz)]
        if any(name != TOTAL_REGION for name in report.regions):
            parts.append(render_region_profile(report, t))
        _emit("\n".join(parts), out)
    else:
        _emit(export_combined(report, cycles, fmt), out)
    return 0


def _int_list(flag, text):
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise _UsageError(f"{flag} needs a comma-separated integer list") from None


def _cmd_sweep(args) -> int:
    sets = None
    bsizes = None
    assocs = None
    opt = False
    fmt = "text"
    out = None
    trace_path = None
    i = 0
    while i < len(args):
        a = args[i]
        if a == "--sets":
            (v,) = _take(args, i, a)
            sets = _int_list(a, v)
            i += 2
        elif a == "--bsize":
            (v,) = _take(args, i, a)
            bsizes = _int_list(a, v)
            i += 2
        elif a == "--assoc":
            (v,) = _take(args, i, a)
            assocs = _int_list(a, v)
            i += 2
        elif a == "--opt":
            opt = True
            i += 1
        elif a == "--format":
            (fmt,) = _take(args, i, a)
            if fmt not in ("text", "csv", "json"):
                raise _UsageError(f"--format takes text, csv or json, got {fmt!r}")
            i += 2
        elif a == "--out":
            (out,) = _take(args, i, a)
            i += 2
        elif a.startswith("-"):
            raise _UsageError(f"unknown flag {a!r}")
        else:
            if trace_path is not None:
                raise _UsageError(f"unexpected extra argument {a!r}")
            trace_path = a
            i += 1
    if trace_path is None:
        raise _UsageError("missing trace file")
    if not sets or not bsizes or not assocs:
        raise _UsageError("sweep needs --sets, --bsize and --assoc")
    for flag, values in (("--sets", sets), ("--bsize", bsizes), ("--assoc", assocs)):
        for v in values:
            if not is_pow2(v):
                raise _UsageError(f"{flag} values must be powers of two, got {v}")

    records = list(read_trace_path(trace_path))
    geometries = [(n, b) for n in sets for b in bsizes]
    rows = sweep(records, geometries, assocs)
    if opt:
        rows = [replace(r, policy="lru") for r in rows]
        for nsets, bsize in geometries:
            total = sum(1 for _ in block_refs(records, bsize))
            for assoc in assocs:
                misses = belady_misses(records, nsets, bsize, assoc)
                rows.append(SweepRow(nsets, bsize, assoc, misses,
                                     misses / total if total else 0.0, "opt"))

    if fmt == "text":
        _emit(render_sweep_table(rows), out)
    else:
        _emit(export(rows, fmt), out)
    return 0


def _cmd_gen(args) -> int:
    if not args:
        raise _UsageError("gen needs a kind: sequential, loop or random")
    kind = args[0]
    flags = {}
    out = None
    i = 1
    while i < len(args):
        a = args[i]
        if a == "--out":
            (out,) = _take(args, i, a)
            i += 2
        elif a.startswith("--"):
            (v,) = _take(args, i, a)
            flags[a[2:]] = _int_arg(a, v)
            i += 2
        else:
            raise _UsageError(f"unexpected argument {a!r}")

    def need(names):
        missing = [n for n in names if n not in flags]
        if missing:
            raise _UsageError(f"gen {kind} needs --" + ", --".join(missing))

    try:
        if kind == "sequential":
            need(["count"])
            records = gen_sequential(flags.get("start", 0), flags["count"],
                                     flags.get("stride", 32))
        elif kind == "loop":
            need(["ws", "iters"])
            records = gen_loop(flags.get("base", 0), flags["ws"], flags["iters"],
                               flags.get("stride", 32))
        elif kind == "random":
            need(["range", "count"])
            records = gen_random(flags.get("seed", 1), flags.get("base", 0),
                                 flags["range"], flags["count"])
        else:
            raise _UsageError(f"unknown generator kind {kind!r}")
    except ValueError as exc:
        if isinstance(exc, _UsageError):
            raise
        raise _UsageError(str(exc)) from None

    if out is None:
        sys.stdout.write(write_trace(records))
    else:
        write_trace_path(out, records)
    return 0
