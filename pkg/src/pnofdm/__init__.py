"""pnofdm: link-level OFDM phase-noise compensation simulator.

Library layers (bottom up): :mod:`pnofdm.numerics`,
:mod:`pnofdm.phase_noise`, :mod:`pnofdm.link`, :mod:`pnofdm.pilots`,
:mod:`pnofdm.estimators`, :mod:`pnofdm.analysis`, and the CLI experiment
runner under :mod:`pnofdm.harness`.
"""

__version__ = "0.1.0"
