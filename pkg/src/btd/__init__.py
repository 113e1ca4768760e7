"""Brain-tumor image classification, end to end: PGM ingestion, k-means
intensity quantization, an AlexNet-shaped CNN trained from scratch by SGD,
three interchangeable classifier heads, and a four-metric evaluation
engine."""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
