"""Worker-count policy shared by the FFT-heavy modules."""

import os


def workers() -> int:
    """Thread cap from ``PATCS_THREADS``; unset or invalid means all cores (-1)."""
    raw = os.environ.get("PATCS_THREADS", "").strip()
    try:
        n = int(raw)
    except ValueError:
        return -1
    return n if n > 0 else -1
