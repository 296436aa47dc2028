"""State handle pairing a Fock representation with an optional exact Gaussian one."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import FockDensityMatrix
from .gaussian import GaussianState, gaussian_to_fock


@dataclass(frozen=True, eq=False)
class State:
    fock: FockDensityMatrix | None = None
    gaussian: GaussianState | None = None
    ket: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        if self.fock is None and self.gaussian is None:
            raise ValueError("State needs a Fock or a Gaussian representation")

    @classmethod
    def wrap(cls, obj):
        if isinstance(obj, State):
            return obj
        if isinstance(obj, FockDensityMatrix):
            return cls(fock=obj)
        if isinstance(obj, GaussianState):
            return cls(gaussian=obj)
        raise TypeError(f"cannot interpret {type(obj).__name__} as a state")

    @property
    def modes(self):
        return self.fock.modes if self.fock is not None else self.gaussian.modes

    @property
    def dim(self):
        return None if self.fock is None else self.fock.dim

    def fock_at(self, dim=None):
        if self.fock is not None and (dim is None or dim == self.fock.dim):
            return self.fock
        if self.gaussian is not None and dim is not None:
            return gaussian_to_fock(self.gaussian, dim)
        raise ValueError(f"{self.label or 'state'} has no Fock form at dim={dim}")

    def first_moments(self):
        """Quadrature means ``(<q1>, <p1>, ...)``."""
        if self.gaussian is not None:
            return np.array(self.gaussian.mean)
        from .fock import expect, momentum, position

        rho = self.fock
        out = []
        for mode in range(1, rho.modes + 1):
            out.append(expect(rho, [(position(rho.dim), mode)]).real)
            out.append(expect(rho, [(momentum(rho.dim), mode)]).real)
        return np.array(out)
