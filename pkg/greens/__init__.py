"""Pointwise Green's function G ~ H + E + S, scattering data and contour inversion."""

from greens.apply import BromwichResult, contour_green, green_apply
from greens.characteristics import CharacteristicPath, H_apply, characteristic_path, characteristic_share, sample
from greens.errfn import arrival_bracket, errfn, heat_kernel
from greens.kernels import E_eval, S_eval, e_kernel, linear_shift
from greens.scattering import ScatteringTable, SideModes, scattering_solve, side_modes

__all__ = [
    "errfn",
    "arrival_bracket",
    "heat_kernel",
    "characteristic_path",
    "CharacteristicPath",
    "H_apply",
    "characteristic_share",
    "sample",
    "scattering_solve",
    "ScatteringTable",
    "SideModes",
    "side_modes",
    "E_eval",
    "S_eval",
    "e_kernel",
    "linear_shift",
    "green_apply",
    "contour_green",
    "BromwichResult",
]
