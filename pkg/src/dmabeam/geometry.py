"""Uniform planar array geometry and element indexing.

The array lies in the y-z plane. Element (y, z) sits at integer grid
coordinates y in {0..n_y-1} (columns) and z in {0..n_z-1} (rows). The flat
element order is y-major with z fastest, i.e. flat index n = y * n_z + z;
this matches the Kronecker layout of the steering vectors in
:func:`dmabeam.channel.steering_vector`, so a phase vector indexed this way
multiplies a channel matrix row-for-row.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """A rectangular antenna array with fixed element spacings.

    Args:
        n_y: element count along the y-axis (columns).
        n_z: element count along the z-axis (rows).
        d_y: element spacing along y in meters.
        d_z: element spacing along z in meters.
        wavelength: carrier wavelength in meters.
    """

    n_y: int
    n_z: int
    d_y: float
    d_z: float
    wavelength: float

    def __post_init__(self):
        if self.n_y < 1 or self.n_z < 1:
            raise ValueError(f"element counts must be >= 1, got {self.n_y}x{self.n_z}")
        if self.d_y <= 0 or self.d_z <= 0:
            raise ValueError("element spacings must be positive")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_y * self.n_z

    def element_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """(y, z) grid coordinates of every element in flat order."""
        ys = np.repeat(np.arange(self.n_y), self.n_z)
        zs = np.tile(np.arange(self.n_z), self.n_y)
        return ys, zs

    @classmethod
    def half_spaced(cls, n_y: int, n_z: int, wavelength: float) -> "ArrayGeometry":
        """Array with the common half-wavelength element spacing."""
        return cls(n_y=n_y, n_z=n_z, d_y=wavelength / 2, d_z=wavelength / 2,
                   wavelength=wavelength)
