"""Design-space exploration: many cache configurations from few passes.

For a fixed (nsets, bsize) geometry, one pass over the trace records the
LRU stack distance of every block reference: the 1-based depth of the
block in its set's recency stack.  A reference hits an assoc-way LRU cache
exactly when its distance is <= assoc, so the whole associativity axis is
answered by one histogram.  Different geometries change the index
function, so each needs its own pass.

Also provides an exact offline Belady (optimal) replacement simulator for
lower-bound comparisons.

Only Load and Store records are consumed here; write semantics are
ignored (miss counts only).  Accesses spanning block boundaries count one
reference per distinct block touched.
"""

from dataclasses import dataclass, field


def block_refs(records, bsize):
    """Yield the block-number stream of a trace's data references."""
    for r in records:
        k = r.kind
        if k == "L" or k == "S":
            first = r.addr // bsize
            last = (r.addr + r.size - 1) // bsize
            yield from range(first, last + 1)


@dataclass
class DistanceHistogram:
    """Per-geometry LRU stack-distance counts.

    ``counts[d]`` is the number of references that found their block at
    depth d of its set's stack; ``cold`` counts first touches.  Their sum
    is the total number of block references processed.
    """

    nsets: int
    bsize: int
    counts: dict = field(default_factory=dict)
    cold: int = 0

    @property
    def total(self):
        return self.cold + sum(self.counts.values())


def stack_distances(records, nsets, bsize) -> DistanceHistogram:
    """One pass over the trace, maintaining an LRU stack per set."""
    hist = DistanceHistogram(nsets, bsize)
    counts = hist.counts
    stacks = [[] for _ in range(nsets)]
    cold = 0
    for block in block_refs(records, bsize):
        stack = stacks[block % nsets]
        if block in stack:
            depth = stack.index(block) + 1
            counts[depth] = counts.get(depth, 0) + 1
            if depth > 1:
                del stack[depth - 1]
                stack.insert(0, block)
        else:
            cold += 1
            stack.insert(0, block)
    hist.cold = cold
    return hist


def misses_for_assoc(hist: DistanceHistogram, assoc: int) -> int:
    """LRU miss count of an (nsets, bsize, assoc) cache on the same trace."""
    if assoc < 1:
        raise ValueError(f"assoc must be >= 1, got {assoc}")
    return hist.cold + sum(c for d, c in hist.counts.items() if d > assoc)


@dataclass(frozen=True)
class SweepRow:
    nsets: int
    bsize: int
    assoc: int
    misses: int
    miss_rate: float
    policy: str | None = None


def sweep(records, geometries, assocs):
    """Evaluate every (geometry x assoc) combination, one trace pass per
    geometry.  ``records`` must be re-iterable (e.g. a list)."""
    if not geometries or not assocs:
        raise ValueError("geometries and assocs must be non-empty")
    rows = []
    for nsets, bsize in geometries:
        hist = stack_distances(records, nsets, bsize)
        total = hist.total
        for assoc in assocs:
            misses = misses_for_assoc(hist, assoc)
            rows.append(SweepRow(nsets, bsize, assoc, misses,
                                 misses / total if total else 0.0))
    return rows


def belady_misses(records, nsets, bsize, assoc) -> int:
    """Miss count under offline optimal replacement.

    Two passes: the first indexes each reference's next use, the second
    simulates a demand-fetch cache that evicts the resident block whose
    next use lies farthest in the future (never-reused blocks first; ties
    break toward the lowest way index).
    """
    if assoc < 1:
        raise ValueError(f"assoc must be >= 1, got {assoc}")
    stream = list(block_refs(records, bsize))
    n = len(stream)
    never = n  # sorts after every real position
    next_use = [never] * n
    last_seen = {}
    for i in range(n - 1, -1, -1):
        b = stream[i]
        next_use[i] = last_seen.get(b, never)
        last_seen[b] = i

    way_block = {}  # set index -> list of resident blocks per way
    way_next = {}  # set index -> next-use position per way
    resident = {}  # set index -> {block: way}
    misses = 0
    for i in range(n):
        b = stream[i]
        si = b % nsets
        si_res = resident.get(si)
        if si_res is None:
            si_res = resident[si] = {}
            way_block[si] = []
            way_next[si] = []
        way = si_res.get(b)
        if way is not None:
            way_next[si][way] = next_use[i]
            continue
        misses += 1
        blocks = way_block[si]
        nexts = way_next[si]
        if len(blocks) < assoc:
            si_res[b] = len(blocks)
            blocks.append(b)
            nexts.append(next_use[i])
        else:
            victim = 0
            best = nexts[0]
            for w in range(1, assoc):
                if nexts[w] > best:
                    best = nexts[w]
                    victim = w
            del si_res[blocks[victim]]
            si_res[b] = victim
            blocks[victim] = b
            nexts[victim] = next_use[i]
    return misses
