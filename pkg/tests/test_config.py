import random

import pytest

from cachesim import (
    CacheSpec,
    ConfigError,
    GeometryUnderflow,
    InvalidUnification,
    MissingKey,
    NonNumeric,
    NonNumericValue,
    NonPowerOfTwo,
    ReplacementPolicy,
    UnifiedWith,
    UnknownFlag,
    UnknownPolicy,
    WrongFieldCount,
    parse_cache_spec,
    parse_hierarchy_args,
    parse_vex_cfg,
)

VEX_CFG = """\
CoreCkFreq      1000
BusCkFreq       500
lg2CacheSize    16 # (CacheSize      = 256k)
lg2Sets         2 # (Sets           = 4)
lg2LineSize     5 # (LineSize       = 32)
MissPenalty     36
WBPenalty       33
lg2StrSize      9 # (StrSize        = 512)
lg2StrSets      4 # (StrSets         = 16)
lg2StrLineSize  5 # (StrLineSize     = 32)
StrMissPenalty  36
StrWBPenalty    33
lg2ICacheSize   15 # (ICacheSize     = 32k)
lg2ICacheSets   0 # (ICacheSets      = 1)
lg2ICacheLineSize 6 # (ICacheLineSize  = 64)
ICachePenalty   45
NumCaches       1
BranchStall     1
StreamEnable    FALSE
PrefetchEnable  TRUE
LockEnable      FALSE
ProfGranularity AUTO
"""


@pytest.mark.parametrize(
    "text,name,nsets,bsize,assoc,repl",
    [
        ("dl1:256:32:1:l", "dl1", 256, 32, 1, ReplacementPolicy.LRU),
        ("ul2:1024:64:4:l", "ul2", 1024, 64, 4, ReplacementPolicy.LRU),
        ("il1:256:32:1:l", "il1", 256, 32, 1, ReplacementPolicy.LRU),
        ("itlb:16:4096:4:l", "itlb", 16, 4096, 4, ReplacementPolicy.LRU),
        ("dtlb:32:4096:4:l", "dtlb", 32, 4096, 4, ReplacementPolicy.LRU),
        ("dl1:4096:32:1:l", "dl1", 4096, 32, 1, ReplacementPolicy.LRU),
        ("dtlb:128:4096:32:r", "dtlb", 128, 4096, 32, ReplacementPolicy.RANDOM),
        ("il1:128:64:1:l", "il1", 128, 64, 1, ReplacementPolicy.LRU),
    ],
)
def test_parse_cache_spec_known_strings(text, name, nsets, bsize, assoc, repl):
    spec = parse_cache_spec(text)
    assert spec == CacheSpec(name, nsets, bsize, assoc, repl)
    assert spec.render() == text


def test_capacity_bytes():
    assert parse_cache_spec("dl1:256:32:1:l").capacity_bytes == 8192
    assert parse_cache_spec("ul2:1024:64:4:l").capacity_bytes == 262144


def test_round_trip_random_specs():
    rng = random.Random(42)
    pows = [1 << i for i in range(13)]
    for _ in range(300):
        spec = CacheSpec(
            "c" + str(rng.randrange(1000)),
            rng.choice(pows),
            rng.choice(pows),
            rng.choice(pows),
            rng.choice(list(ReplacementPolicy)),
        )
        assert parse_cache_spec(spec.render()) == spec


def test_wrong_field_count():
    with pytest.raises(WrongFieldCount):
        parse_cache_spec("dl1:256:32:1")
    with pytest.raises(WrongFieldCount):
        parse_cache_spec("dl1:256:32:1:l:x")


def test_non_power_of_two_reports_field():
    with pytest.raises(NonPowerOfTwo) as exc:
        parse_cache_spec("dl1:100:32:1:l")
    assert exc.value.field == "nsets"
    with pytest.raises(NonPowerOfTwo) as exc:
        parse_cache_spec("dl1:256:48:1:l")
    assert exc.value.field == "bsize"
    with pytest.raises(NonPowerOfTwo) as exc:
        parse_cache_spec("dl1:256:32:3:l")
    assert exc.value.field == "assoc"
    with pytest.raises(NonPowerOfTwo):
        parse_cache_spec("dl1:0:32:1:l")


def test_unknown_policy():
    with pytest.raises(UnknownPolicy):
        parse_cache_spec("dl1:256:32:1:x")


def test_non_numeric_rejects_sloppy_integers():
    for bad in ("abc", "0x100", "1_0", "+256", "0256", ""):
        with pytest.raises(NonNumeric):
            parse_cache_spec(f"dl1:{bad}:32:1:l")


def test_policy_chars_round_trip():
    for p in ReplacementPolicy:
        assert ReplacementPolicy.from_char(p.char) is p


def test_default_hierarchy_matches_explicit_strings():
    spec = parse_hierarchy_args([])
    explicit = parse_hierarchy_args(
        [
            "-cache:dl1", "dl1:256:32:1:l",
            "-cache:dl2", "ul2:1024:64:4:l",
            "-cache:il1", "il1:256:32:1:l",
            "-cache:il2", "dl2",
            "-tlb:itlb", "itlb:16:4096:4:l",
            "-tlb:dtlb", "dtlb:32:4096:4:l",
            "-flush", "false",
        ]
    )
    assert spec == explicit
    assert spec.il2 == UnifiedWith("dl2")
    assert spec.flush_on_syscall is False


def test_unified_l2_example():
    spec = parse_hierarchy_args(["-cache:il1", "il1:128:64:1:l", "-cache:il2", "dl2"])
    assert spec.il1 == CacheSpec("il1", 128, 64, 1, ReplacementPolicy.LRU)
    assert spec.il2 == UnifiedWith("dl2")


def test_fully_unified_l1_example():
    spec = parse_hierarchy_args(
        ["-cache:dl1", "ul1:256:32:1:l", "-cache:il1", "dl1"]
    )
    assert spec.il1 == UnifiedWith("dl1")
    assert spec.dl1.name == "ul1"


def test_flush_flag():
    assert parse_hierarchy_args(["-flush", "true"]).flush_on_syscall is True
    with pytest.raises(ConfigError):
        parse_hierarchy_args(["-flush", "yes"])


def test_invalid_unifications():
    with pytest.raises(InvalidUnification):
        parse_hierarchy_args(["-cache:dl1", "il1"])
    with pytest.raises(InvalidUnification):
        parse_hierarchy_args(["-cache:dl1", "dl2"])
    with pytest.raises(InvalidUnification):
        parse_hierarchy_args(["-cache:il2", "dl1"])
    with pytest.raises(InvalidUnification):
        parse_hierarchy_args(["-tlb:itlb", "dl1"])


def test_unknown_flag_and_missing_value():
    with pytest.raises(UnknownFlag):
        parse_hierarchy_args(["-cache:l3", "x:1:1:1:l"])
    with pytest.raises(ConfigError):
        parse_hierarchy_args(["-cache:dl1"])


def test_l2_requires_l1():
    with pytest.raises(ConfigError):
        parse_hierarchy_args(["-cache:dl1", "none"])
    with pytest.raises(ConfigError):
        parse_hierarchy_args(
            ["-cache:il1", "none", "-cache:il2", "i2:512:64:2:l"]
        )


def test_unification_to_disabled_level_degrades():
    spec = parse_hierarchy_args(["-cache:dl1", "none", "-cache:dl2", "none"])
    assert spec.dl1 is None and spec.dl2 is None
    assert spec.il2 is None  # default il2=dl2 degrades with dl2 gone


def test_parse_errors_propagate_from_values():
    with pytest.raises(NonPowerOfTwo):
        parse_hierarchy_args(["-cache:dl1", "dl1:100:32:1:l"])


def test_vex_cfg_geometries():
    dcache, icache, timing = parse_vex_cfg(VEX_CFG)
    assert (dcache.nsets, dcache.bsize, dcache.assoc) == (512, 32, 4)
    assert dcache.capacity_bytes == 65536 == 2**16
    assert (icache.nsets, icache.bsize, icache.assoc) == (512, 64, 1)
    assert icache.capacity_bytes == 32768 == 2**15
    # geometry identity holds for both caches
    assert dcache.nsets * dcache.bsize * dcache.assoc == 1 << 16
    assert icache.nsets * icache.bsize * icache.assoc == 1 << 15


def test_vex_cfg_timing_fields():
    _, _, t = parse_vex_cfg(VEX_CFG)
    assert t.core_clk_mhz == 1000
    assert t.bus_clk_mhz == 500
    assert t.miss_penalty == 36
    assert t.wb_penalty == 33
    assert t.icache_penalty == 45
    assert t.branch_stall == 1
    assert t.num_caches == 1


def test_vex_line_size_example():
    _, _, _ = parse_vex_cfg(VEX_CFG)
    d, _, _ = parse_vex_cfg(VEX_CFG.replace("lg2LineSize     5", "lg2LineSize 5"))
    assert d.bsize == 32


def test_vex_unknown_key_warns_but_parses():
    with pytest.warns(UserWarning, match="Mystery"):
        d, _, _ = parse_vex_cfg(VEX_CFG + "MysteryKnob 7\n")
    assert d.bsize == 32


def test_vex_recognized_unused_keys_are_silent(recwarn):
    parse_vex_cfg(VEX_CFG)
    assert not recwarn.list


def test_vex_missing_key():
    broken = VEX_CFG.replace("MissPenalty     36\n", "")
    with pytest.raises(MissingKey) as exc:
        parse_vex_cfg(broken)
    assert exc.value.key == "MissPenalty"


def test_vex_non_numeric_value():
    broken = VEX_CFG.replace("MissPenalty     36", "MissPenalty many")
    with pytest.raises(NonNumericValue):
        parse_vex_cfg(broken)


def test_vex_geometry_underflow():
    broken = VEX_CFG.replace("lg2CacheSize    16", "lg2CacheSize    5")
    with pytest.raises(GeometryUnderflow):
        parse_vex_cfg(broken)


def test_vex_optional_defaults():
    trimmed = VEX_CFG.replace("NumCaches       1\n", "").replace("BranchStall     1\n", "")
    _, _, t = parse_vex_cfg(trimmed)
    assert t.branch_stall == 1
    assert t.num_caches == 1


def test_vex_malformed_line_reports_number():
    with pytest.raises(ConfigError, match="line 2"):
        parse_vex_cfg("CoreCkFreq 1000\nBusCkFreq\n")


def test_timing_validation():
    _, _, t = parse_vex_cfg(VEX_CFG)
    from dataclasses import replace

    with pytest.raises(ConfigError):
        replace(t, bus_clk_mhz=2000).validate()
    with pytest.raises(ConfigError):
        replace(t, miss_penalty=-1).validate()
    with pytest.raises(NonPowerOfTwo):
        replace(t, mem_width=3).validate()
