"""
Footbridge lateral-vibration model with delayed pedestrian feedback.

Physical form::

    M_f x'' + C_f x' + K_f x = K1 K2 Mp g tanh(K3 x'(t - tau))

After dividing by M_f and rescaling time by sqrt(K_f / M_f) the model becomes::

    x'' + alpha2 x' + x = kappa tanh(K3 x'(t - tau))

which is the form every other module works with.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Union

import numpy as np

__all__ = [
    "PhysicalParams",
    "NormalizedModel",
    "normalize",
    "taylor_coeffs",
    "nonlinearity",
    "load_scenario",
    "scenario_from_dict",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Modal parameters of the bridge and pedestrian crowd in SI units.

    ``pedestrian_weight`` is the modal self-weight ``Mp * g`` in newtons.
    The synchronisation function G(f) is fixed to 1.
    """

    modal_mass: float
    modal_damping: float
    modal_stiffness: float
    force_ratio: float
    sync_fraction: float
    pedestrian_weight: float
    saturation_rate: float
    delay: float = 0.0

    def __post_init__(self) -> None:
        positive = {
            "modal_mass": self.modal_mass,
            "modal_damping": self.modal_damping,
            "modal_stiffness": self.modal_stiffness,
            "force_ratio": self.force_ratio,
            "sync_fraction": self.sync_fraction,
            "pedestrian_weight": self.pedestrian_weight,
            "saturation_rate": self.saturation_rate,
        }
        for name, value in positive.items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if not (math.isfinite(self.delay) and self.delay >= 0):
            raise ValueError(f"delay must be non-negative, got {self.delay!r}")


@dataclass(frozen=True)
class NormalizedModel:
    """Dimensionless model ``x'' + alpha2 x' + x = kappa tanh(k3 x'(t - tau))``."""

    alpha2: float
    kappa: float
    k3: float
    tau: float = 0.0

    def __post_init__(self) -> None:
        for name in ("alpha2", "kappa", "k3"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if not (math.isfinite(self.tau) and self.tau >= 0):
            raise ValueError(f"tau must be non-negative, got {self.tau!r}")

    @classmethod
    def from_alphas(cls, alpha2: float, alpha3: float, k3: float = 1.0, tau: float = 0.0) -> "NormalizedModel":
        """Build a model with prescribed linear gain ``alpha3 = kappa * k3``."""
        return cls(alpha2=alpha2, kappa=alpha3 / k3, k3=k3, tau=tau)

    @property
    def alpha3(self) -> float:
        return self.kappa * self.k3

    @property
    def alpha4(self) -> float:
        return -self.kappa * self.k3**3 / 3.0

    @property
    def alpha5(self) -> float:
        return 2.0 * self.kappa * self.k3**5 / 15.0

    def with_tau(self, tau: float) -> "NormalizedModel":
        return NormalizedModel(self.alpha2, self.kappa, self.k3, tau)

    def to_dict(self) -> dict:
        return {"alpha2": self.alpha2, "kappa": self.kappa, "k3": self.k3, "tau": self.tau}


def normalize(p: PhysicalParams) -> tuple[NormalizedModel, float]:
    """Map physical parameters to the normalized model.

    Returns
    -------
    model : NormalizedModel
    scale : float
        ``sqrt(K_f / M_f)``. Dimensionless time is ``scale * t``, so a
        dimensionless frequency divided by ``scale`` is in rad/s and a
        dimensionless delay divided by ``scale`` is in seconds.
    """
    alpha1 = p.modal_stiffness / p.modal_mass
    scale = math.sqrt(alpha1)
    alpha2 = (p.modal_damping / p.modal_mass) / scale
    kappa = (p.force_ratio * p.sync_fraction * p.pedestrian_weight / p.modal_mass) / alpha1
    return NormalizedModel(alpha2=alpha2, kappa=kappa, k3=scale * p.saturation_rate, tau=scale * p.delay), scale


def taylor_coeffs(kappa: float, k3: float) -> tuple[float, float, float]:
    """Odd Taylor coefficients of ``kappa * tanh(k3 * y)`` up to fifth order."""
    if kappa <= 0 or k3 <= 0:
        raise ValueError("kappa and k3 must be positive")
    return kappa * k3, -kappa * k3**3 / 3.0, 2.0 * kappa * k3**5 / 15.0


def nonlinearity(model: NormalizedModel, y):
    """Pedestrian force ``kappa * tanh(k3 * y)``; accepts scalars or arrays."""
    if np.isscalar(y):
        return model.kappa * math.tanh(model.k3 * y)
    return model.kappa * np.tanh(model.k3 * np.asarray(y, dtype=float))


_NORMALIZED_KEYS = {"alpha2", "kappa", "k3"}
_PHYSICAL_KEYS = {
    "modal_mass",
    "modal_damping",
    "modal_stiffness",
    "force_ratio",
    "sync_fraction",
    "pedestrian_weight",
    "saturation_rate",
}


def scenario_from_dict(data: Mapping[str, Any]) -> NormalizedModel:
    """Build a model from a scenario mapping.

    Either the normalized keys ``alpha2, kappa, k3[, tau]`` or the full
    physical block (``modal_mass``, ..., ``saturation_rate[, delay]``) must
    be present; a nested ``"physical"`` object is accepted as well.
    """
    if "physical" in data and isinstance(data["physical"], Mapping):
        data = data["physical"]
    keys = set(data)
    if _NORMALIZED_KEYS <= keys:
        return NormalizedModel(
            alpha2=float(data["alpha2"]),
            kappa=float(data["kappa"]),
            k3=float(data["k3"]),
            tau=float(data.get("tau", 0.0)),
        )
    if _PHYSICAL_KEYS <= keys:
        params = PhysicalParams(**{k: float(data[k]) for k in _PHYSICAL_KEYS}, delay=float(data.get("delay", 0.0)))
        return normalize(params)[0]
    missing_n = sorted(_NORMALIZED_KEYS - keys)
    raise ValueError(f"scenario lacks normalized keys {missing_n} and is not a complete physical block")


def load_scenario(source: Union[str, Path, Mapping[str, Any]]) -> NormalizedModel:
    """Load a scenario from a JSON file path, a JSON string or a mapping."""
    if isinstance(source, Mapping):
        return scenario_from_dict(source)
    text = str(source)
    path = Path(text)
    if not text.lstrip().startswith(("{", "[")):
        if not path.is_file():
            raise ValueError(f"scenario file not found: {text}")
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed scenario JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("scenario JSON must be an object")
    return scenario_from_dict(data)
