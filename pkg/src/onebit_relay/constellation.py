"""Unit-modulus constellations and the joint multi-user input enumeration."""

from dataclasses import dataclass

import numpy as np

# QPSK points listed quadrant-by-quadrant; this listing order fixes the
# per-user symbol index for the lifetime of the package.
QPSK = "qpsk"
PSK8 = "8psk"

_POINTS = {
    QPSK: np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0),
    # 8PSK offset by pi/8 so no coordinate sits exactly on zero.
    PSK8: np.exp(1j * (np.pi / 8 + np.arange(8) * np.pi / 4)),
}


def constellation_points(name: str) -> np.ndarray:
    """Return the complex points of a supported constellation, in index order."""
    try:
        return _POINTS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}; expected one of {sorted(_POINTS)}")


def nearest_point_indices(points: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Map complex values to the index of the nearest constellation point.

    Ties break toward the lowest index (argmin keeps the first minimum).
    """
    values = np.asarray(values, dtype=complex)
    d = np.abs(values[..., None] - points)
    return np.argmin(d, axis=-1)


@dataclass(frozen=True)
class InputEnumeration:
    """All |M_t|^K joint inputs of K users, in lexicographic index order.

    Index i maps to per-user constellation indices ``digits[i]`` with user 0
    as the most significant digit. ``real_forms[i]`` stacks [Re; Im] of the
    complex symbol vector.
    """

    points: np.ndarray      # (Q,) complex constellation
    num_users: int
    digits: np.ndarray      # (Q**K, K) per-user point indices
    symbols: np.ndarray     # (Q**K, K) complex
    real_forms: np.ndarray  # (Q**K, 2K)

    @classmethod
    def build(cls, constellation: str, num_users: int) -> "InputEnumeration":
        points = constellation_points(constellation)
        q = len(points)
        grids = np.meshgrid(*([np.arange(q)] * num_users), indexing="ij")
        digits = np.stack(grids, axis=-1).reshape(-1, num_users)
        symbols = points[digits]
        real_forms = np.hstack([symbols.real, symbols.imag])
        return cls(points=points, num_users=num_users, digits=digits,
                   symbols=symbols, real_forms=real_forms)

    @property
    def size(self) -> int:
        return self.digits.shape[0]

    def index_of_digits(self, digits) -> int:
        """Joint index of a per-user digit tuple (user 0 most significant)."""
        q = len(self.points)
        idx = 0
        for d in digits:
            idx = idx * q + int(d)
        return idx

    def joint_indices(self, digit_rows: np.ndarray) -> np.ndarray:
        """Vectorized index_of_digits over rows of per-user digits."""
        q = len(self.points)
        weights = q ** np.arange(self.num_users - 1, -1, -1)
        return np.asarray(digit_rows) @ weights
