"""
Free rigid body: Euler-Poincare integration on SO(3)

Spin a body near its intermediate axis and watch it flip. Energy and the
spatial angular momentum stay constant to round-off.
"""
import numpy as np

from hamel_mech import lie, models
from hamel_mech.reconstruction import integrate
from hamel_mech.system import BundleState, conserved_momentum, energy

body = models.rigid_body(np.diag([1.0, 2.0, 3.0]))
state = BundleState(lie.identity("SO3"), [], np.array([1e-3, 2.0, 1e-3]), [])
traj = integrate(body, "euler-poincare", state, t_end=20.0, dt=1e-3, record_every=500)

e0 = energy(body, [], traj.states[0].xi, [])
mu0 = conserved_momentum(body, traj.states[0].g, [], traj.states[0].xi, [])
for s in traj.states:
    mu = conserved_momentum(body, s.g, [], s.xi, [])
    # omega_2 changes sign at each flip
    print(f"t={s.t:5.1f}  omega={np.round(s.xi, 3)}  dE={energy(body, [], s.xi, []) - e0:+.1e}"
          f"  dmu={np.abs(mu - mu0).max():.1e}")
