"""Continuous-variable surface-code toolkit.

Subpackages:

* :mod:`cvtoric.whalgebra` - exact symbolic displacement-operator algebra;
* :mod:`cvtoric.lattice` - square-lattice geometry, cluster precursor and
  star/plaquette nullifier generators;
* :mod:`cvtoric.gaussian` - numeric engine for pure Gaussian states in the
  complex-graph representation;
* :mod:`cvtoric.anyons` - excitation ledger: creation, detection, movement,
  fusion and braiding with the finite-squeezing topological factor;
* :mod:`cvtoric.gates` - logical registers and the computational protocols;
* :mod:`cvtoric.circuit` - circuit text format, interpreter and run reports;
* :mod:`cvtoric.cli` - command-line front end.
"""

from .lattice import (Boundary, LatticeSpec, MeasurementPattern, StabilizerGen,
                      build_lattice, cluster_graph, code_generators, validate_code)
from .whalgebra import (GeneratorPoly, WHWord, commute_through_cubic,
                        commute_through_quadratic, conjugate_by_stabilizer,
                        equivalent, format_word, normal_order, parse_word)
from .gaussian import (CovarianceMoments, GaussianGraphState, MeasurementRecord,
                       apply_gate, displace, from_covariance, graph_from_cluster,
                       measure_homodyne, nullifier_stats, to_covariance)
from .anyons import (AnyonRecord, AnyonSim, BraidResult, topological_factor,
                     topological_factor_log)

__version__ = "0.1.0"
