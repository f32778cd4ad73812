from dataclasses import dataclass

import scipy.constants as sc


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants used for the point-charge couplings.

    ``relative_permittivity`` defaults to silicon. ``kappa_override`` replaces the
    derived Coulomb coupling constant when set (rad/s * m).
    """

    electron_charge: float = sc.e
    hbar: float = sc.hbar
    vacuum_permittivity: float = sc.epsilon_0
    relative_permittivity: float = 11.7
    kappa_override: float | None = None

    def __post_init__(self):
        for name in ("electron_charge", "hbar", "vacuum_permittivity", "relative_permittivity"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.kappa_override is not None and not self.kappa_override >= 0:
            raise ValueError("kappa_override must be non-negative")

    @property
    def kappa(self) -> float:
        """q^2 / (4 pi eps0 eps_r hbar): on-site shift times distance, in rad/s * m."""
        if self.kappa_override is not None:
            return float(self.kappa_override)
        q = self.electron_charge
        return q * q / (4.0 * sc.pi * self.vacuum_permittivity * self.relative_permittivity * self.hbar)

    def to_dict(self):
        return {
            "electron_charge": self.electron_charge,
            "hbar": self.hbar,
            "vacuum_permittivity": self.vacuum_permittivity,
            "relative_permittivity": self.relative_permittivity,
            "kappa_override": self.kappa_override,
            "kappa": self.kappa,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data.pop("kappa", None)
        return cls(**data)


SILICON = PhysicalConstants()
