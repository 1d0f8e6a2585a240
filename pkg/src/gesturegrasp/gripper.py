"""Hand-landmark to gripper-rotation mapping.

Three landmarks (thumb MCP, index MCP, index tip) span a plane; the
gripper frame is built from the thumb-to-index axis and that plane's
normal. Column convention: x = closing direction between the fingers,
z = plane normal (approach-plane normal), y = z x x.
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateTriangle
from .gesture import GRIPPER_REFS, HandKeypoints
from .geometry import Rotation3, unit


def hand_to_gripper_rotation(g: HandKeypoints) -> Rotation3:
    """Build the gripper rotation R_h from three hand landmarks.

    x axis runs thumb-MCP to index-MCP, z is the normal of the plane
    those two span with the index tip, y completes the right-handed
    frame. Axes are stored as columns.
    """
    k_thu, k_inp, k_inf = (g.joints[i] for i in GRIPPER_REFS)
    e1 = k_inp - k_thu
    e2 = k_inf - k_thu
    z = np.cross(e1, e2)
    if np.linalg.norm(z) <= 1e-10:
        raise DegenerateTriangle(
            "thumb MCP, index MCP, index tip are collinear"
        )
    x_hat = unit(e1)
    z_hat = unit(z)
    y_hat = np.cross(z_hat, x_hat)
    return Rotation3(np.column_stack([x_hat, y_hat, z_hat]))
