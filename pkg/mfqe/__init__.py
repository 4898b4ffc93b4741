# Multi-frame quality enhancement toolkit for compressed video
__version__ = "2.0.0"
