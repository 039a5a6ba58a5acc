"""Route trace records through TLBs and the two-level cache hierarchy.

Routing rules:

* Inst records look up the instruction TLB (page = addr // page size via
  the TLB's own geometry), then the il1 chain; an il1 miss is refilled
  from il2 when one exists.
* Load/Store records look up the data TLB, then dl1/dl2.  An access that
  spans block boundaries issues one access per distinct block touched.
* A dirty eviction forwards a write of the evicted block to the next
  level; the refill read is issued first, then the writeback write.
* Syscall records flush every cache when flush-on-syscall is enabled.
  Flush writebacks are local: they do not generate next-level traffic.
* Region markers switch the attribution bucket; a TOTAL bucket always
  accrues everything, so named regions partition the trace under it.

Unified levels alias one Cache object, which is reported once under its
own name.  Per-level "routed" counters record exactly how many accesses
were forwarded into each lower cache (refills and writebacks separately),
so `l2.accesses == routed refills + routed writebacks` is checkable.

The caches at the memory boundary (the deepest cache on each side) also
feed the cycle model: their per-side access/hit/miss counts and, when
event collection is on, one TimingEvent per boundary miss, dirty
eviction, and taken branch.
"""

import time
import zlib
from dataclasses import dataclass, field

from .cache import HIT, MISS_REPLACE_DIRTY, AccessOutcome, Cache, CacheStats
from .config import CacheSpec, HierarchySpec, UnifiedWith
from .timing import TimingEvent

TOTAL_REGION = "TOTAL"


@dataclass
class BranchCounts:
    executed: int = 0
    taken: int = 0
    not_taken: int = 0


@dataclass
class RegionCounters:
    """Counters attributed to one region of the trace."""

    insts: int = 0
    ops: int = 0
    refs: int = 0
    branches: BranchCounts = field(default_factory=BranchCounts)
    i_misses: int = 0  # memory-boundary misses on the instruction side
    d_misses: int = 0  # memory-boundary misses on the data side
    caches: dict = field(default_factory=dict)  # name -> CacheStats


@dataclass
class SimReport:
    """Aggregated counters of one simulation run."""

    sim_num_insn: int = 0
    sim_num_refs: int = 0
    caches: dict = field(default_factory=dict)  # name -> CacheStats
    branches: BranchCounts = field(default_factory=BranchCounts)
    regions: dict = field(default_factory=dict)  # name -> RegionCounters
    sim_elapsed_time: int = 1
    sim_inst_rate: float = 0.0


class _Bucket:
    __slots__ = ("insts", "ops", "refs", "br_exec", "br_taken", "br_not_taken",
                 "i_misses", "d_misses", "caches")

    def __init__(self, cache_names):
        self.insts = 0
        self.ops = 0
        self.refs = 0
        self.br_exec = 0
        self.br_taken = 0
        self.br_not_taken = 0
        self.i_misses = 0
        self.d_misses = 0
        # per cache: [accesses, hits, misses, replacements, writebacks, invalidations]
        self.caches = {n: [0, 0, 0, 0, 0, 0] for n in cache_names}


def _cache_seed(master, name):
    return (master * 0x9E3779B1 + zlib.crc32(name.encode())) & 0xFFFFFFFFFFFFFFFF


class Hierarchy:
    """Single-owner mutable simulation state; build one per run."""

    def __init__(self, spec: HierarchySpec, seed: int = 1):
        spec.validate()
        self.spec = spec
        self.seed = seed
        self.flush_on_syscall = spec.flush_on_syscall

        def make(s):
            return Cache(s, _cache_seed(seed, s.name)) if isinstance(s, CacheSpec) else None

        dl1 = make(spec.dl1)
        dl2 = make(spec.dl2)
        data_obj = {"dl1": dl1, "dl2": dl2}

        il1 = dl2 if isinstance(spec.il1, UnifiedWith) and spec.il1.target == "dl2" \
            else dl1 if isinstance(spec.il1, UnifiedWith) else make(spec.il1)
        il2 = data_obj[spec.il2.target] if isinstance(spec.il2, UnifiedWith) else make(spec.il2)
        itlb = make(spec.itlb)
        dtlb = make(spec.dtlb)

        self.d_path = [c for c in (dl1, dl2) if c is not None]
        if il1 is None:
            self.i_path = []
        elif isinstance(spec.il1, UnifiedWith):
            # Fetches enter the data chain and follow it down.
            start = self.d_path.index(il1)
            self.i_path = self.d_path[start:]
        else:
            self.i_path = [il1] + ([il2] if il2 is not None else [])
        self.itlb = itlb
        self.dtlb = dtlb

        # Distinct caches once each, keyed and reported by their own name.
        self.caches = {}
        seen = set()
        for c in (il1, dl1, il2, dl2, itlb, dtlb):
            if c is None or id(c) in seen:
                continue
            if c.name in self.caches:
                raise ValueError(f"two distinct caches share the name {c.name!r}")
            seen.add(id(c))
            self.caches[c.name] = c

        # Access ledger: demand accesses entering a cache from the trace
        # versus accesses forwarded into it from the level above, so
        # accesses == entry + routed refills + routed writebacks per cache.
        self.entry_accesses = {n: 0 for n in self.caches}
        self.routed = {}
        for path in (self.i_path, self.d_path):
            for c in path[1:]:
                self.routed.setdefault(c.name, [0, 0])  # [refills, writebacks]

        # Linked level descriptors (cache, next descriptor, next's routed
        # counters) keep the walk free of list indexing.
        def levels(path):
            desc = None
            for c in reversed(path):
                routed = self.routed[desc[0].name] if desc is not None else None
                desc = (c, desc, routed)
            return desc

        self._i_entry = levels(self.i_path)
        self._d_entry = levels(self.d_path)
        self._i_entry_name = self.i_path[0].name if self.i_path else None
        self._d_entry_name = self.d_path[0].name if self.d_path else None

        # Named-region buckets only; the TOTAL region is synthesized from
        # the global counters at report time (it accrues everything by
        # definition, so tracking it incrementally would double the work).
        self.regions = {}
        self._cur_bucket = None  # None while in the TOTAL region
        self._cur_lists = None
        self.current_region = TOTAL_REGION

        self.sim_num_insn = 0
        self.sim_num_refs = 0
        self.ops_executed = 0
        self.branches = BranchCounts()
        self.mem_counts = {"I": [0, 0, 0], "D": [0, 0, 0]}  # [accesses, hits, misses]
        self.events = None  # list[TimingEvent] when collection is enabled
        self._now = 0

    def boundary(self, side):
        """The memory-boundary cache of side "I" or "D", or None."""
        path = self.i_path if side == "I" else self.d_path
        return path[-1] if path else None

    def _accrue(self, name, code):
        """Attribute one access to the active named-region bucket."""
        s = self._cur_lists[name]
        s[0] += 1
        if code == HIT:
            s[1] += 1
        else:
            s[2] += 1
            if code >= 2:
                s[3] += 1
                if code == MISS_REPLACE_DIRTY:
                    s[4] += 1

    def _access_level(self, level, addr, size, write, side, log):
        """Access every block of [addr, addr+size) at this level, forwarding
        refills and writebacks downward.  Returns the number of accesses
        issued at this level."""
        cache, nxt, nxt_routed = level
        shift = cache._bshift
        first = addr >> shift
        last = (addr + size - 1) >> shift
        events = self.events
        block = first
        while True:
            code = cache._access(block << shift, write)
            if self._cur_lists is not None:
                self._accrue(cache.name, code)
            if log is not None:
                log.append((cache.name, code,
                            cache.victim_tag if code >= 2 else None))
            if nxt is None:  # memory boundary
                mc = self.mem_counts[side]
                mc[0] += 1
                if code == HIT:
                    mc[1] += 1
                else:
                    mc[2] += 1
                    if self._cur_bucket is not None:
                        if side == "I":
                            self._cur_bucket.i_misses += 1
                        else:
                            self._cur_bucket.d_misses += 1
                    if events is not None:
                        events.append(TimingEvent(
                            "imiss" if side == "I" else "dmiss",
                            self._now, cache.bsize))
                if code == MISS_REPLACE_DIRTY and events is not None:
                    events.append(TimingEvent("writeback", self._now, cache.bsize))
            elif code != HIT:
                bsize = cache.bsize
                victim_addr = cache.victim_addr  # before the refill recursion
                nxt_routed[0] += self._access_level(
                    nxt, block << shift, bsize, False, side, log)
                if code == MISS_REPLACE_DIRTY:
                    nxt_routed[1] += self._access_level(
                        nxt, victim_addr, bsize, True, side, log)
            if block >= last:
                return last - first + 1
            block += 1

    def _step(self, rec, log):
        k = rec.kind
        cur = self._cur_bucket
        if k == "L" or k == "S":
            self._now = self.sim_num_insn
            self.sim_num_refs += 1
            if cur is not None:
                cur.refs += 1
            tlb = self.dtlb
            if tlb is not None:
                code = tlb._access(rec.addr, False)
                self.entry_accesses[tlb.name] += 1
                if self._cur_lists is not None:
                    self._accrue(tlb.name, code)
                if log is not None:
                    log.append((tlb.name, code,
                                tlb.victim_tag if code >= 2 else None))
            if self._d_entry is not None:
                self.entry_accesses[self._d_entry_name] += self._access_level(
                    self._d_entry, rec.addr, rec.size, k == "S", "D", log)
        elif k == "I":
            self._now = self.sim_num_insn
            self.sim_num_insn += 1
            self.ops_executed += rec.ops
            if cur is not None:
                cur.insts += 1
                cur.ops += rec.ops
            tlb = self.itlb
            if tlb is not None:
                code = tlb._access(rec.addr, False)
                self.entry_accesses[tlb.name] += 1
                if self._cur_lists is not None:
                    self._accrue(tlb.name, code)
                if log is not None:
                    log.append((tlb.name, code,
                                tlb.victim_tag if code >= 2 else None))
            if self._i_entry is not None:
                self.entry_accesses[self._i_entry_name] += self._access_level(
                    self._i_entry, rec.addr, 1, False, "I", log)
        elif k == "B":
            b = self.branches
            b.executed += 1
            if cur is not None:
                cur.br_exec += 1
            if rec.taken:
                b.taken += 1
                if cur is not None:
                    cur.br_taken += 1
                if self.events is not None:
                    self.events.append(TimingEvent("branch", self._now, 0))
            else:
                b.not_taken += 1
                if cur is not None:
                    cur.br_not_taken += 1
        elif k == "Y":
            if self.flush_on_syscall:
                for c in self.caches.values():
                    res = c.flush()
                    if self._cur_lists is not None:
                        s = self._cur_lists[c.name]
                        s[4] += res.writebacks_done
                        s[5] += res.lines_invalidated
        elif k == "R":
            name = rec.name
            self.current_region = name
            if name == TOTAL_REGION:
                self._cur_bucket = None
                self._cur_lists = None
            else:
                bucket = self.regions.get(name)
                if bucket is None:
                    bucket = _Bucket(self.caches)
                    self.regions[name] = bucket
                self._cur_bucket = bucket
                self._cur_lists = bucket.caches
        else:
            raise ValueError(f"unknown trace record kind {k!r}")

    def step(self, rec):
        """Process one record, returning [(cache name, AccessOutcome), ...]
        for every cache access it caused, in order."""
        log = []
        self._step(rec, log)
        out = []
        for name, code, victim_tag in log:
            if code == HIT:
                out.append((name, AccessOutcome(True)))
            elif victim_tag is None:
                out.append((name, AccessOutcome(False)))
            else:
                out.append((name, AccessOutcome(False, victim_tag,
                                                code == MISS_REPLACE_DIRTY)))
        return out

    def run(self, records, collect_events=False, clock=time.time):
        """Fold every record of the trace and return a SimReport.

        ``clock`` is called once before and once after the loop; injecting
        a fake clock makes the wall-time fields reproducible.  Elapsed time
        is floored at one second, matching the integer-seconds convention
        of the classic statistics output.
        """
        if collect_events:
            self.events = []
        start = clock()
        step = self._step
        for rec in records:
            step(rec, None)
        elapsed = int(clock() - start)
        if elapsed < 1:
            elapsed = 1
        return self._report(elapsed)

    def _report(self, elapsed):
        def bucket_counters(b):
            return RegionCounters(
                insts=b.insts, ops=b.ops, refs=b.refs,
                branches=BranchCounts(b.br_exec, b.br_taken, b.br_not_taken),
                i_misses=b.i_misses, d_misses=b.d_misses,
                caches={n: CacheStats(*v) for n, v in b.caches.items()},
            )

        caches = {n: c.stats for n, c in self.caches.items()}
        total = RegionCounters(
            insts=self.sim_num_insn, ops=self.ops_executed, refs=self.sim_num_refs,
            branches=BranchCounts(self.branches.executed, self.branches.taken,
                                  self.branches.not_taken),
            i_misses=self.mem_counts["I"][2], d_misses=self.mem_counts["D"][2],
            caches=dict(caches),
        )
        regions = {TOTAL_REGION: total}
        regions.update({n: bucket_counters(b) for n, b in self.regions.items()})
        return SimReport(
            sim_num_insn=self.sim_num_insn,
            sim_num_refs=self.sim_num_refs,
            caches=caches,
            branches=BranchCounts(self.branches.executed, self.branches.taken,
                                  self.branches.not_taken),
            regions=regions,
            sim_elapsed_time=elapsed,
            sim_inst_rate=self.sim_num_insn / elapsed,
        )
