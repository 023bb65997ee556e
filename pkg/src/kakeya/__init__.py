"""Moving planar sets within small area: rigid motions, movements, raster sweeps,
Perron-tree and needle constructions, venetian-blind systems and winding-number tools.
"""

__version__ = "0.1.0"

from .errors import KakeyaError
from .motions import RigidMotion, compose, inverse, iterate, rotation, translation
from .movements import Movement, elementary_movement
from .scene import Arc, PointCloud, Polygon, Rectangle, Scene, Segment

__all__ = [
    "Arc", "KakeyaError", "Movement", "PointCloud", "Polygon", "Rectangle", "RigidMotion", "Scene",
    "Segment", "__version__", "compose", "elementary_movement", "inverse", "iterate", "rotation",
    "translation",
]
