"""Image recovery by per-channel matrix completion.

Corrupted pixels (random replacements or a text overlay) are treated as
missing entries; each color channel is completed independently and the three
recovered planes are reassembled.  Quality is measured by PSNR with peak 255,
averaged over all pixels and channels.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np
from PIL import Image

from .losses import CompletionProblem
from .penalties import Penalty
from .solver import SolverConfig, noise_free_config, solve

__all__ = [
    "ImageBuffer",
    "corrupt_random",
    "apply_text_mask",
    "inpaint",
    "psnr",
    "sample_image_path",
]


@dataclass(frozen=True)
class ImageBuffer:
    """RGB image held as float64 planes of shape (height, width, 3)."""

    planes: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.planes, dtype=float)
        if p.ndim != 3 or p.shape[2] != 3 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("expected an array of shape (h, w, 3)")
        object.__setattr__(self, "planes", p)

    @property
    def height(self) -> int:
        return self.planes.shape[0]

    @property
    def width(self) -> int:
        return self.planes.shape[1]

    @classmethod
    def from_png(cls, path) -> "ImageBuffer":
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            return cls(np.asarray(rgb, dtype=np.uint8).astype(float))

    def to_png(self, path):
        data = np.clip(np.rint(self.planes), 0, 255).astype(np.uint8)
        Image.fromarray(data, mode="RGB").save(path, format="PNG")


def sample_image_path():
    """Path to the bundled test image."""
    return resources.files("irnn").joinpath("data/sample_image.png")


def corrupt_random(image: ImageBuffer, fraction: float, seed):
    """Replace a random fraction of pixels with uniform noise in [0, 255].

    Returns the corrupted image and a boolean mask (True = pixel untouched,
    i.e. observed).  The mask is shared across channels.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    h, w = image.height, image.width
    total = h * w
    count = min(int(round(fraction * total)), total - 1)
    rng = np.random.default_rng(seed)
    flat = rng.choice(total, size=count, replace=False)
    rows, cols = np.unravel_index(flat, (h, w))
    planes = image.planes.copy()
    planes[rows, cols, :] = rng.uniform(0.0, 255.0, size=(count, 3))
    mask = np.ones((h, w), dtype=bool)
    mask[rows, cols] = False
    return ImageBuffer(planes), mask


def apply_text_mask(image: ImageBuffer, mask_image):
    """Mark pixels covered by a nonzero overlay as unobserved.

    ``mask_image`` is an :class:`ImageBuffer` or (h, w[, 3]) array whose
    nonzero pixels are the corrupted locations.  The image values at those
    locations are irrelevant to the solver.
    """
    overlay = mask_image.planes if isinstance(mask_image, ImageBuffer) else mask_image
    overlay = np.asarray(overlay)
    if overlay.ndim == 3:
        corrupted = (overlay != 0).any(axis=2)
    else:
        corrupted = overlay != 0
    if corrupted.shape != (image.height, image.width):
        raise ValueError("mask dimensions do not match the image")
    mask = ~corrupted
    if not mask.any():
        raise ValueError("mask leaves no observed pixels")
    return image, mask


def inpaint(
    image: ImageBuffer,
    mask: np.ndarray,
    penalty: Penalty,
    config: SolverConfig | None = None,
    mu: float = 1.1,
    eta: float = 0.7,
    max_iters: int = 500,
) -> ImageBuffer:
    """Complete each channel from the observed pixels and reassemble.

    With no explicit config, each channel gets the standard noise-free
    schedule derived from its own observed entries.  The output is the
    recovered matrix everywhere (observed pixels are not pasted back),
    clamped to [0, 255].
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (image.height, image.width):
        raise ValueError("mask dimensions do not match the image")
    if not mask.any():
        raise ValueError("mask leaves no observed pixels")
    out = np.empty_like(image.planes)
    for ch in range(3):
        problem = CompletionProblem.from_dense(image.planes[:, :, ch], mask)
        cfg = config
        if cfg is None:
            cfg = noise_free_config(problem, mu=mu, eta=eta, max_iters=max_iters)
        try:
            report = solve(problem, penalty, cfg)
        except Exception as exc:
            raise RuntimeError(f"inpainting failed on channel {ch}: {exc}") from exc
        out[:, :, ch] = np.clip(report.final_X, 0.0, 255.0)
    return ImageBuffer(out)


def psnr(reference: ImageBuffer, candidate: ImageBuffer) -> float:
    """Peak signal-to-noise ratio in dB, peak 255, MSE over all pixels and
    channels.  Identical images return +inf."""
    if reference.planes.shape != candidate.planes.shape:
        raise ValueError("image dimensions differ")
    mse = float(np.mean((reference.planes - candidate.planes) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(255.0**2 / mse)
