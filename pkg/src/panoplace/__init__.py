"""Panoramic LiDAR place categorization.

Converts LiDAR point clouds into panoramic depth/reflectance images and
trains, evaluates, and explains convolutional place classifiers with
circular-structure-aware layers and multi-modal fusion.
"""

__version__ = "0.1.0"
