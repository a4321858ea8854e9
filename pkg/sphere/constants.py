"""Numerical constants of the certified median computation."""

from __future__ import annotations

import math

# Curvilinear diameter of the icosahedral triangulation: diam <= DIAMETER_CONSTANT / N.
DIAMETER_CONSTANT = math.sqrt(3.0) * (3.0 - math.sqrt(5.0))

# Lower bound on planar angles of the projected triangles.
MIN_ANGLE = math.pi - 2.0 * math.acos((6.0 * math.sqrt(5.0) - 13.0) / 2.0)

# ||F||_Lip <= PL_LIP_FACTOR * ||f||_Lip, equal to pi / (2 sin(MIN_ANGLE / 2)).
PL_LIP_FACTOR = math.pi * (13.0 + 6.0 * math.sqrt(5.0)) / 11.0

# Equal-area regions have diameter <= PARTITION_DIAMETER / sqrt(k).
PARTITION_DIAMETER = 7.0

# Each region contains a cap of Euclidean radius >= INRADIUS_CONSTANT / sqrt(k).
INRADIUS_CONSTANT = 0.77970

# Coefficient of 1/sqrt(k) in the certified error bound.
PARTITION_TERM = PARTITION_DIAMETER * PL_LIP_FACTOR

# Admissible parameters: k odd, MIN_K <= k <= K_RATIO * N^2.
K_RATIO = 0.115744
MIN_K = 237
MIN_N = 46

POLAR_SECTORS = 6

# Aggregated constant quoted for the bound C / N; see quasistate.median.aggregated_constant.
STATED_AGGREGATED_CONSTANT = 197.778
