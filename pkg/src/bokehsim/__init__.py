"""Synthetic bokeh rendering from RGB-D input."""

from bokehsim.defocus import (
    DefocusMap,
    SignedDefocus,
    binary_mask,
    defocus_magnitude,
    defocus_smoothness,
    layer_masks,
    signed_defocus,
)
from bokehsim.fusion import (
    FusionConfig,
    FusionMask,
    blend_binary,
    blend_laplacian_pyramid,
    build_target,
    feathered_mask,
    fuse,
    fuse_defocus,
    optimize_mask,
    poisson_loss,
)
from bokehsim.imagecore import (
    ImageIOError,
    Kernel2D,
    PlanarImage,
    conv_backend,
    convolve,
    gradients_xy,
    laplacian,
    laplacian_adjoint,
    load_image,
    resize_bilinear,
    save_image,
)
from bokehsim.kernels import (
    KernelBank,
    KernelSchedule,
    build_bank,
    gaussian_kernel,
    growing_schedule,
    hard_disk,
    soft_disk,
    uniform_schedule,
)
from bokehsim.metrics import MetricReport, evaluate, l1, mse, psnr, ssim
from bokehsim.radiance import RadianceParams, bright_mask, virtualize
from bokehsim.render import (
    LayerStack,
    PipelineConfig,
    RenderConfig,
    RenderResult,
    RenderSession,
    decompose,
    layered_render,
    refocus,
    render_pipeline,
    weighted_render,
)
from bokehsim.synth import (
    FlatRecipe,
    HighlightsRecipe,
    RampRecipe,
    SyntheticScene,
    TwoPlaneRecipe,
    ground_truth_composite,
    make_scene,
)

__version__ = "0.1.0"
