"""Multi-view stereo with bimodal depth refinement."""

__version__ = "0.1.0"
