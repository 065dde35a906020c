"""
mmgesture - mmWave Gesture Sensing Laboratory

Synthesizes FMCW radar returns for scripted hand gestures, reduces them to
Dynamic Range-Angle Images, augments, segments and classifies them.
"""

__version__ = "0.1.0"
__author__ = "mmgesture Team"
