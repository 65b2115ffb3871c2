"""Large-angle atom interferometer pulse-sequence simulator."""

from ._core import (
    AtomladderError,
    __version__,
    adiabaticity_parameter,
    contrast,
    encode,
    extract_spacing,
    ladder_population,
    plans,
    resolve_config,
    roundtrip,
    run,
    synthesize,
)

__all__ = [
    "AtomladderError",
    "__version__",
    "adiabaticity_parameter",
    "contrast",
    "encode",
    "extract_spacing",
    "ladder_population",
    "plans",
    "resolve_config",
    "roundtrip",
    "run",
    "synthesize",
]
