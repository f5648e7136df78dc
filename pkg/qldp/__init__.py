"""q-deformed calculus and large-deviation harness.

Pipeline:
  python -m qldp.qcore --q 0.5 --x 4 --y 3        # q-log / q-exp / q-product
  python -m qldp.qcomb --q 1.5                     # delta_q and Stirling checks
  python -m qldp.qdist --q 1.5 --n 10 --r 0.5      # q-binomial pmf with C_q
  python -m qldp.qdiv --q 0.5 --p 0.5 0.5 --r 0.25 0.75
  python -m qldp.ldp                               # empirical q-rates vs rate function
  python -m qldp.cli <qfun|stirling|pmf|divergence|ldp>   # deterministic tables
  python -m qldp.records data/pmf.csv              # check a saved pmf record
"""

__all__ = [
    "cli",
    "common",
    "ldp",
    "qcomb",
    "qcore",
    "qdist",
    "qdiv",
    "records",
    "vectors",
]
