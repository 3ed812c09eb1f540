"""Caps and defaults, overridable via INVBINOM_* environment variables."""

import os

DEFAULT_PRECISION = 32          # relative p-adic digits
EXACT_N_CAP = 5000              # direct-summation engine cap
MODULAR_N_CAP = 1 << 16         # identity engine cap at p = 2
ROWSUM_N_CAP = 1 << 22          # term-by-term 2-adic row sum cap
SCAN_CEILING = 10 ** 6          # good-prime scan upper bound (long mode raises it)
WIEFERICH_CEILING = 10 ** 8
PRECISION_CEILING = 4096        # escalation stops here; beyond it we report failure

_ENV_KEYS = {
    "exact_n_cap": "INVBINOM_EXACT_N_CAP",
    "modular_n_cap": "INVBINOM_MODULAR_N_CAP",
    "rowsum_n_cap": "INVBINOM_ROWSUM_N_CAP",
    "scan_ceiling": "INVBINOM_SCAN_CEILING",
    "wieferich_ceiling": "INVBINOM_WIEFERICH_CEILING",
}


def env_caps() -> dict:
    """Current cap values with any INVBINOM_* environment overrides applied."""
    caps = {
        "exact_n_cap": EXACT_N_CAP,
        "modular_n_cap": MODULAR_N_CAP,
        "rowsum_n_cap": ROWSUM_N_CAP,
        "scan_ceiling": SCAN_CEILING,
        "wieferich_ceiling": WIEFERICH_CEILING,
    }
    for name, key in _ENV_KEYS.items():
        raw = os.environ.get(key)
        if raw is not None:
            caps[name] = int(raw)
    return caps
