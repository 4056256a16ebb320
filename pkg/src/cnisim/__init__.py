"""Stabilizer-circuit noise simulation with classical noise inversion.

Subpackages cover signed Pauli algebra and Clifford circuits (`pauli`),
stabilizer tableau simulation with trace factors (`tableau`), dense
transfer-matrix oracles (`ptm`), noise models and quasi-probability
inverses (`noise`), Z-block noise compression (`compress`), fixed-circuit
Monte Carlo estimators (`montecarlo`), CNOT-minimal Clifford synthesis
(`compiler`), shadow-estimation protocols (`shadows`), vectorized sweep
experiments (`experiments`), figure rendering (`report`), and the
experiment CLI (`cli`).
"""

__version__ = "0.1.0"
