"""Numerical laboratory for Fourier restriction on spheres, cones and rotating-fluid surfaces."""

__version__ = "0.1.0"

from .spectral import Field, GridSpec, forward_transform, frequency, inverse_transform, make_grid, physical
from .families import Gaussian, KnappPacket, RingBump, TensorProduct, sample
from .norms import exponent_profile, lp_norm, mixed_norm, sobolev_norm, sobolev_norm_along_axis
from .surfaces import ConeGraph, MFGraph, MGraph, Sphere, extension_operator, restrict_to_surface
from .chains import ChainError, ChainReport, RatioEstimate, verify_cone_chain
from .levelsets import verify_M_chain, verify_MF_chain
from .propagators import StrichartzSpec, WaveData, WindowError, rotating_evolve, strichartz_ratio, wave_evolve

__all__ = [
    "Field", "GridSpec", "forward_transform", "frequency", "inverse_transform", "make_grid", "physical",
    "Gaussian", "KnappPacket", "RingBump", "TensorProduct", "sample",
    "exponent_profile", "lp_norm", "mixed_norm", "sobolev_norm", "sobolev_norm_along_axis",
    "ConeGraph", "MFGraph", "MGraph", "Sphere", "extension_operator", "restrict_to_surface",
    "ChainError", "ChainReport", "RatioEstimate", "verify_cone_chain",
    "verify_M_chain", "verify_MF_chain",
    "StrichartzSpec", "WaveData", "WindowError", "rotating_evolve", "strichartz_ratio", "wave_evolve",
]
