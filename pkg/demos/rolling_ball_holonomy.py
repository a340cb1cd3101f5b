"""
Rolling ball: geometric phase of a small square loop

Drive the contact point around a square and read off the net rotation of
the ball. For small loops the rotation is about the vertical axis and its
size is the enclosed area times the curvature, -side^2 / R^2.
"""
import numpy as np

from hamel_mech import models
from hamel_mech.connection import curvature
from hamel_mech.reconstruction import geometric_phase, square_loop

R = 0.1  # ball radius (m)
_, conn = models.rolling_ball(models.BallParams(mass=1.0, radius=R))

B = curvature(conn, np.zeros(2))
print("curvature B^3_54 =", B[2, 1, 0])  # 1/R^2

for side in (4e-2, 2e-2, 1e-2, 5e-3):
    ph = geometric_phase(conn, square_loop([0.0, 0.0], side), dt=1e-3)
    predicted = -side ** 2 * B[2, 1, 0]
    print(f"side {side:.0e}  log = {np.round(ph.log, 8)}  predicted vertical {predicted:.3e}")

# the horizontal residue shrinks like side^3, so the prediction sharpens as the loop shrinks
