"""uwsynth: physics-based synthesis of underwater-degraded image pairs.

Clean atmospheric RGB-D images are degraded by a wavelength-resolved colour
shift (seven Jerlov-style water types) and two kinds of marine-snow
artifacts, producing paired datasets with full provenance manifests plus a
PSNR/SSIM verification tool.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend  # noqa: F401
