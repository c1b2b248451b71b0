"""Layered bokeh rendering at half resolution and the end-to-end pipeline."""

from dataclasses import dataclass, field

import numpy as np

from bokehsim.defocus import DefocusMap, defocus_magnitude, layer_masks, signed_defocus
from bokehsim.fusion import FusionConfig, FusionMask, fuse_defocus
from bokehsim.imagecore import PlanarImage, convolve, resize_bilinear
from bokehsim.kernels import KernelBank, build_bank, growing_schedule, scale_sizes
from bokehsim.radiance import RadianceParams, virtualize


def default_bank():
    """Soft disk kernels over the growing size schedule."""
    return build_bank(growing_schedule())


@dataclass(frozen=True)
class RenderConfig:
    """Layered rendering settings."""

    layers: int = 15
    gamma: float = 100.0
    eps_div: float = 1e-6
    bank: KernelBank = field(default_factory=default_bank)
    conv_mode: str = "optimized"

    def __post_init__(self):
        if self.layers != len(self.bank):
            raise ValueError(
                "bank holds %d kernels for %d layers" % (len(self.bank), self.layers)
            )
        if self.eps_div <= 0:
            raise ValueError("division floor must be positive")


@dataclass(frozen=True, eq=False)
class LayerStack:
    """Per-layer memberships and blurred planes used by the compositor."""

    masks: np.ndarray
    blurred_layers: np.ndarray
    blurred_masks: np.ndarray


def _occlusion_products(masks):
    """Product of (1 - mask) over all layers above each layer."""
    products = np.empty_like(masks)
    acc = np.ones(masks.shape[1:], dtype=np.float64)
    for layer in range(masks.shape[0] - 1, -1, -1):
        products[layer] = acc
        acc = acc * (1.0 - masks[layer])
    return products


def decompose(img, defocus, cfg=None):
    """Split an image into blurred depth layers with soft membership masks."""
    cfg = cfg or RenderConfig()
    masks = layer_masks(defocus, cfg.layers, cfg.gamma)
    blurred_layers = np.empty(masks.shape + (img.channels,), dtype=np.float64)
    blurred_masks = np.empty_like(masks)
    for layer in range(cfg.layers):
        kernel = cfg.bank[layer]
        weighted = PlanarImage(masks[layer][:, :, None] * img.data)
        blurred_layers[layer] = convolve(weighted, kernel, cfg.conv_mode).data
        mask_img = PlanarImage(masks[layer][:, :, None])
        blurred_masks[layer] = convolve(mask_img, kernel, cfg.conv_mode).plane(0)
    return LayerStack(masks=masks, blurred_layers=blurred_layers, blurred_masks=blurred_masks)


def _composite(blurred_layers, blurred_masks, products, eps_div):
    numerator = (blurred_layers * products[:, :, :, None]).sum(axis=0)
    denominator = (blurred_masks * products).sum(axis=0)
    return numerator / np.maximum(denominator, eps_div)[:, :, None]


def layered_render(img, defocus, cfg=None):
    """Blur each depth layer with its kernel and composite back to front."""
    cfg = cfg or RenderConfig()
    stack = decompose(img, defocus, cfg)
    products = _occlusion_products(stack.masks)
    return PlanarImage(_composite(stack.blurred_layers, stack.blurred_masks, products, cfg.eps_div))


def weighted_render(img, weights, defocus, cfg=None):
    """Layered rendering of the weighted image, normalized by rendered weights."""
    cfg = cfg or RenderConfig()
    if weights.data.shape != img.data.shape:
        raise ValueError("weights must match the image shape")
    masks = layer_masks(defocus, cfg.layers, cfg.gamma)
    products = _occlusion_products(masks)
    num_weighted = np.empty(masks.shape + (img.channels,), dtype=np.float64)
    num_weights = np.empty_like(num_weighted)
    blurred_masks = np.empty_like(masks)
    for layer in range(cfg.layers):
        kernel = cfg.bank[layer]
        member = masks[layer][:, :, None]
        num_weighted[layer] = convolve(
            PlanarImage(member * weights.data * img.data), kernel, cfg.conv_mode
        ).data
        num_weights[layer] = convolve(
            PlanarImage(member * weights.data), kernel, cfg.conv_mode
        ).data
        blurred_masks[layer] = convolve(
            PlanarImage(member), kernel, cfg.conv_mode
        ).plane(0)
    rendered_weighted = _composite(num_weighted, blurred_masks, products, cfg.eps_div)
    rendered_weights = _composite(num_weights, blurred_masks, products, cfg.eps_div)
    bokeh = rendered_weighted / np.maximum(rendered_weights, cfg.eps_div)
    return PlanarImage(bokeh)


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for the full render pipeline."""

    render: RenderConfig = field(default_factory=RenderConfig)
    radiance: RadianceParams = field(default_factory=RadianceParams)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    normalize: str = "fixed_range"


@dataclass(frozen=True, eq=False)
class RenderResult:
    """Final bokeh plus the intermediates produced along the way."""

    bokeh: PlanarImage
    bokeh_lr: PlanarImage
    bokeh_up: PlanarImage
    defocus_lr: DefocusMap
    defocus_full: DefocusMap
    radiance: PlanarImage
    mask: FusionMask


@dataclass(frozen=True, eq=False)
class RenderSession:
    """Image and disparity with cached half-resolution planes for refocusing."""

    image: PlanarImage
    disparity: PlanarImage
    image_lr: PlanarImage
    disparity_lr: PlanarImage
    pad: tuple

    @classmethod
    def open(cls, image, disparity):
        """Validate inputs, pad odd sizes to even, and cache the half planes."""
        if disparity.data.shape[:2] != image.data.shape[:2]:
            raise ValueError("disparity size does not match the image")
        if disparity.channels != 1:
            raise ValueError("disparity must be single channel")
        if disparity.data.min() < 0.0 or disparity.data.max() > 1.0:
            raise ValueError("disparity values must lie in [0, 1]")
        pad_h = image.height % 2
        pad_w = image.width % 2
        padded_img = image
        padded_disp = disparity
        if pad_h or pad_w:
            spec = ((0, pad_h), (0, pad_w), (0, 0))
            padded_img = PlanarImage(np.pad(image.data, spec, mode="edge"))
            padded_disp = PlanarImage(np.pad(disparity.data, spec, mode="edge"))
        image_lr = resize_bilinear(padded_img, padded_img.width // 2, padded_img.height // 2)
        disparity_lr = resize_bilinear(padded_disp, image_lr.width, image_lr.height)
        return cls(
            image=padded_img,
            disparity=padded_disp,
            image_lr=image_lr,
            disparity_lr=disparity_lr,
            pad=(pad_h, pad_w),
        )

    def _crop(self, data):
        pad_h, pad_w = self.pad
        if pad_h:
            data = data[:-pad_h]
        if pad_w:
            data = data[:, :-pad_w]
        return data


def _scaled_config(cfg, blur_scale):
    if blur_scale == 1.0:
        return cfg.render
    sizes = scale_sizes(cfg.render.bank.sizes, blur_scale)
    bank = build_bank(sizes, cfg.render.bank.shape, cfg.render.bank.sigma, cfg.render.bank.phi)
    return RenderConfig(
        layers=cfg.render.layers,
        gamma=cfg.render.gamma,
        eps_div=cfg.render.eps_div,
        bank=bank,
        conv_mode=cfg.render.conv_mode,
    )


def refocus(session, focal, blur_scale=1.0, cfg=None):
    """Render the session at a new focal plane and blur strength."""
    cfg = cfg or PipelineConfig()
    render_cfg = _scaled_config(cfg, blur_scale)
    signed_lr = signed_defocus(session.disparity_lr, focal)
    defocus_lr = defocus_magnitude(signed_lr, cfg.normalize)
    full_w, full_h = session.image.width, session.image.height
    up = resize_bilinear(PlanarImage(defocus_lr.data[:, :, None]), full_w, full_h)
    defocus_full = DefocusMap(np.clip(session._crop(up.plane(0)), 0.0, 1.0))
    cropped_image = PlanarImage(session._crop(session.image.data))

    if all(size == 1 for size in render_cfg.bank.sizes):
        # Every kernel is the identity, so the bokeh equals the input exactly.
        ones = FusionMask(np.ones((cropped_image.height, cropped_image.width)))
        return RenderResult(
            bokeh=cropped_image,
            bokeh_lr=session.image_lr,
            bokeh_up=cropped_image,
            defocus_lr=defocus_lr,
            defocus_full=defocus_full,
            radiance=virtualize(session.image_lr, cfg.radiance),
            mask=ones,
        )

    weights = virtualize(session.image_lr, cfg.radiance)
    bokeh_lr = weighted_render(session.image_lr, weights, defocus_lr, render_cfg)
    bokeh_up_padded = resize_bilinear(bokeh_lr, full_w, full_h)
    bokeh_up = PlanarImage(session._crop(bokeh_up_padded.data))
    fused, mask = fuse_defocus(cropped_image, bokeh_up, defocus_full, cfg.fusion)
    return RenderResult(
        bokeh=fused,
        bokeh_lr=bokeh_lr,
        bokeh_up=bokeh_up,
        defocus_lr=defocus_lr,
        defocus_full=defocus_full,
        radiance=weights,
        mask=mask,
    )


def render_pipeline(img, disparity, focal, cfg=None, blur_scale=1.0):
    """Full pipeline: downsample, weighted layered render, upsample, and fuse."""
    session = RenderSession.open(img, disparity)
    return refocus(session, focal, blur_scale, cfg)
