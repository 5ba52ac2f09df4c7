"""Atlas-based text-driven video editing toolkit.

Decomposes a video into layered 2D atlases, edits a targeted atlas region
with a mask- and edge-guided diffusion procedure, maps the edit back to
every frame, and scores results with semantic/similarity/temporal metrics.
All learned perception models sit behind provider interfaces with
deterministic analytic stubs, so the full pipeline runs without any
pretrained weights.
"""

__version__ = "0.1.0"
