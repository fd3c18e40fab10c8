"""ECG beat classification through Wigner-Ville images and a compact CNN.

Pipeline: per-beat CSV files (or raw strips via the segmentation module)
-> 128x128 Wigner-Ville images with a coordinate ramp -> residual CNN
-> per-class precision/recall/F1 reports.
"""

from .labels import CLASS_CODES, CLASS_ORDER, ClassLabel

__version__ = "0.1.0"

__all__ = ["CLASS_CODES", "CLASS_ORDER", "ClassLabel", "__version__"]
