"""Pointwise complex geometry on the resolved conifold chart.

The package builds, in order of dependency:

* ``forms``    -- exterior algebra of (p,q)-forms at a point of a 3-fold chart,
  with Hermitian-matrix representations of (1,1)- and (2,2)-forms and the
  dimension-3 positive square root of a positive (2,2)-form.
* ``conifold`` -- closed-form cone geometry: radius, cone metric, log term,
  Fubini-Study pullback, adapted frames, and a finite-difference oracle.
* ``cdlo``     -- the asymptotically conical Ricci-flat metric on the
  resolution, via a numerically solved radial volume condition.
* ``gluing``   -- cut-off profiles, the cut-off balanced square and its root,
  the singular-side metric and the preglued connected-sum field.
* ``analysis`` -- numerical exterior derivative, volume potentials and
  decay-rate regression.
* ``solver``   -- the radial fixed-point deformation to a solution of the
  balanced Monge-Ampere equation with point evaluation.
* ``cli``      -- command line driver emitting JSON/CSV reports.
"""

__version__ = "0.1.0"
