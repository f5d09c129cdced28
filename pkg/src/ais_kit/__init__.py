"""Immune-inspired algorithms for anomaly detection, classification and optimization.

Subpackages and modules:

* :mod:`ais_kit.affinity` -- bit-string and real-vector matching kernels.
* :mod:`ais_kit.negsel` -- negative-selection detector pipeline.
* :mod:`ais_kit.clonal` -- clonal selection for classification and optimization.
* :mod:`ais_kit.idionet` -- idiotypic network concentration dynamics.
* :mod:`ais_kit.dca` -- deterministic dendritic cell algorithm.
* :mod:`ais_kit.harness` -- datasets, scenario generators and metrics.
* :mod:`ais_kit.cli` -- the ``ais-kit`` command line front end.
"""

__version__ = "0.1.0"

from ais_kit.errors import ConfigError

__all__ = ["ConfigError", "__version__"]
