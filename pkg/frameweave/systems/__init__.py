from .frame_core import SystemParams, WeavingPattern, frame_bounds, multiplier
from .generators import make_indicator_gabor, make_indicator_wavelet, make_powerlaw_wavelet, make_tapered_wavelet
from .weaving import weave_certificate

__all__ = [
    "SystemParams",
    "WeavingPattern",
    "frame_bounds",
    "multiplier",
    "make_indicator_gabor",
    "make_indicator_wavelet",
    "make_powerlaw_wavelet",
    "make_tapered_wavelet",
    "weave_certificate",
]
