"""Named cost-model profiles loaded from a JSON config file.

The packaged ``data/profiles.json`` ships example profiles only; no
challenge constants are baked into the toolkit. A profiles file maps
profile names to CostModel fields:

    {"my-profile": {"c_miss": 1.0, "c_fa": 10.0,
                    "pi_target": 0.95, "pi_nontarget": 0.05}}

Unset fields take the CostModel defaults; keys starting with an underscore
are ignored (comments).
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import ValidationError
from .metrics import CostModel

_FIELDS = ("c_miss", "c_fa", "c_fa_spoof", "pi_target", "pi_nontarget", "pi_spoof")


def cost_model_from_dict(params: dict) -> CostModel:
    unknown = set(params) - set(_FIELDS)
    if unknown:
        raise ValidationError(f"unknown cost model fields: {sorted(unknown)}")
    return CostModel(**{k: float(v) for k, v in params.items()})


def load_profiles(path: str | Path | None = None) -> dict[str, CostModel]:
    """Load profiles from ``path``, or the packaged example profiles."""
    if path is None:
        text = resources.files("sasvkit").joinpath("data/profiles.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid profiles file: {exc}") from None
    if not isinstance(raw, dict):
        raise ValidationError("profiles file must hold an object of profiles")
    profiles: dict[str, CostModel] = {}
    for name, params in raw.items():
        if name.startswith("_"):
            continue
        if not isinstance(params, dict):
            raise ValidationError(f"profile '{name}' must be an object")
        try:
            profiles[name] = cost_model_from_dict(params)
        except ValidationError as exc:
            raise ValidationError(f"profile '{name}': {exc}") from None
    return profiles


def resolve_cost_model(
    profile: str | None,
    profiles_path: str | Path | None = None,
    overrides: dict | None = None,
) -> CostModel:
    """Resolve a named profile plus inline field overrides."""
    if profile is None:
        base: dict = {}
    else:
        profiles = load_profiles(profiles_path)
        if profile not in profiles:
            raise ValidationError(
                f"unknown profile '{profile}' (have: {', '.join(sorted(profiles))})"
            )
        model = profiles[profile]
        base = {f: getattr(model, f) for f in _FIELDS}
    if overrides:
        unknown = set(overrides) - set(_FIELDS)
        if unknown:
            raise ValidationError(f"unknown cost model fields: {sorted(unknown)}")
        base.update(overrides)
    if not base:
        raise ValidationError("no cost model given: pass a profile or overrides")
    return cost_model_from_dict(base)
