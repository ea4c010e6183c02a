from importlib import resources

from abiam.kernel.scenario import PRESET_PACKAGE, preset_names

MODEL_FAMILIES = ("dsk", "dskfin", "abmiam", "cfhs", "grsw")
POLICY_EXPERIMENTS = (
    "dsk-fuel-shift",
    "dskfin-carbon-risk",
    "dskfin-guarantee",
    "dskfin-green-basel",
    "abmiam-carbon-tax",
    "abmiam-renewable-50",
    "grsw-fines-a",
    "grsw-fines-b",
    "grsw-fines-c",
    "grsw-fines-d",
)


def describe(name: str) -> str:
    """First comment line of a preset document."""
    text = resources.files(PRESET_PACKAGE).joinpath(f"{name}.yaml").read_text(encoding="utf-8")
    for line in text.splitlines():
        if line.startswith("#"):
            return line.lstrip("# ").strip()
    return ""


def list_presets() -> list[tuple[str, str]]:
    return [(name, describe(name)) for name in preset_names()]
