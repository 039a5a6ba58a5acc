"""Number rendering shared by the report and timing modules.

All rendered figures round half-up at the stated precision, because the
reference outputs this package reproduces are used as golden anchors in
tests.  Negative zero is never rendered.
"""

from decimal import ROUND_HALF_UP, Decimal


def fixed(value, places):
    """Render a number with a fixed decimal count, rounding half-up."""
    q = Decimal(1).scaleb(-places)
    d = Decimal(repr(float(value))).quantize(q, rounding=ROUND_HALF_UP)
    if d == 0:
        d = abs(d)
    return f"{d:.{places}f}"


def pct(numer, denom, places=2):
    """Percentage string, 0 when the denominator is 0."""
    return fixed(0.0 if denom == 0 else 100.0 * numer / denom, places)
