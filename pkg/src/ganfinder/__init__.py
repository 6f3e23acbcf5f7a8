"""Grid path finding as conditional image generation."""

__version__ = "0.1.0"
