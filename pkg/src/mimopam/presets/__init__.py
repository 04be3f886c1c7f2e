"""Shipped sweep presets mirroring the reference experiment scenarios."""

from importlib import resources

PRESET_NAMES = ("fig2", "fig4", "fig5", "fig6", "prop1")


def preset_path(name: str) -> str:
    """Filesystem path of a shipped preset config."""
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown preset {name!r}; available: {PRESET_NAMES}")
    return str(resources.files(__package__) / f"{name}.cfg")
