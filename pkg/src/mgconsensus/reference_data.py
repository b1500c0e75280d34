"""Published numerical fixtures.

``COUNTEREXAMPLE_*``: two graphs on nine nodes and a positive diagonal matrix
whose product ``L D M`` has eigenvalues with negative real part. Values are as
printed (four decimals).

``LINES_7DGU`` / ``RATED_7DGU``: the seven-DGU test microgrid.
"""
import numpy as np

from .graph import Line

COUNTEREXAMPLE_B1 = np.array([
    [-1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, -1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, -1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, -1, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, -1, 0, 0, 0, 0],
    [0, 0, 1, 0, 1, -1, -1, 0, 0],
    [0, 0, 0, 0, 0, 1, 0, 1, -1],
    [0, 0, 0, 0, 0, 0, 1, -1, 0],
    [0, 0, 0, 1, 0, 0, 0, 0, 1],
], dtype=float)

COUNTEREXAMPLE_B2 = np.array([
    [-1, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, -1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, -1, -1, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 1, -1, 0, 0, 0, 0],
    [0, 0, 0, 0, -1, 0, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, -1, -1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 1, -1, 0],
    [0, 0, 0, 1, 0, 0, 0, 0, 1, 1],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, -1],
], dtype=float)

COUNTEREXAMPLE_W1 = np.array([0.8842, 0.8676, 0.9167, 0.8456, 0.2113, 0.0038, 0.4139, 0.1918, 0.9815])
COUNTEREXAMPLE_W2 = np.array([0.6074, 0.9785, 0.8275, 0.3907, 0.4405, 0.2719, 0.1663, 0.8310, 0.3885, 0.8292])
COUNTEREXAMPLE_D = np.array([0.5977, 0.4297, 0.4937, 0.0058, 0.4643, 0.0005, 0.6299, 0.8209, 0.3597])

# Edge lists (source -> target, source carries +1) reproducing B1 and B2.
COUNTEREXAMPLE_EDGES_G1 = [(5, 1), (5, 2), (6, 3), (9, 4), (6, 5), (7, 6), (8, 6), (7, 8), (9, 7)]
COUNTEREXAMPLE_EDGES_G2 = [(2, 1), (3, 2), (4, 3), (8, 3), (4, 5), (6, 4), (5, 6), (7, 6), (8, 7), (8, 9)]

COUNTEREXAMPLE_L = np.array([
    [0.8842, 0, 0, 0, -0.8842, 0, 0, 0, 0],
    [0, 0.8676, 0, 0, -0.8676, 0, 0, 0, 0],
    [0, 0, 0.9167, 0, 0, -0.9167, 0, 0, 0],
    [0, 0, 0, 0.8456, 0, 0, 0, 0, -0.8456],
    [-0.8842, -0.8676, 0, 0, 1.9631, -0.2113, 0, 0, 0],
    [0, 0, -0.9167, 0, -0.2113, 1.5458, -0.0038, -0.4139, 0],
    [0, 0, 0, 0, 0, -0.0038, 1.1771, -0.1918, -0.9815],
    [0, 0, 0, 0, 0, -0.4139, -0.1918, 0.6057, 0],
    [0, 0, 0, -0.8456, 0, 0, -0.9815, 0, 1.8271],
])

COUNTEREXAMPLE_M = np.array([
    [0.6074, -0.6074, 0, 0, 0, 0, 0, 0, 0],
    [-0.6074, 1.5859, -0.9785, 0, 0, 0, 0, 0, 0],
    [0, -0.9785, 2.1967, -0.8275, 0, 0, 0, -0.3907, 0],
    [0, 0, -0.8275, 1.5399, -0.4405, -0.2719, 0, 0, 0],
    [0, 0, 0, -0.4405, 0.6068, -0.1663, 0, 0, 0],
    [0, 0, 0, -0.2719, -0.1663, 1.2691, -0.8310, 0, 0],
    [0, 0, 0, 0, 0, -0.8310, 1.2195, -0.3885, 0],
    [0, 0, -0.3907, 0, 0, 0, -0.3885, 1.6085, -0.8292],
    [0, 0, 0, 0, 0, 0, 0, -0.8292, 0.8292],
])

COUNTEREXAMPLE_Q = np.array([
    [0.3210, -0.3210, 0, 0.1808, -0.2491, 0.0683, 0, 0, 0],
    [-0.2264, 0.5912, -0.3647, 0.1774, -0.2444, 0.0670, 0, 0, 0],
    [0, -0.4428, 0.9941, -0.3744, 0.0001, -0.0006, 0.0004, -0.1768, 0],
    [0, 0, -0.0040, 0.0075, -0.0021, -0.0013, 0, 0.2522, -0.2522],
    [-0.0946, -0.2701, 0.3647, -0.4015, 0.5531, -0.1517, 0.0001, 0, 0],
    [0, 0.4428, -0.8614, 0.4175, -0.0597, 0.0193, 0.1284, -0.3688, 0.2817],
    [0, 0, 0.0615, 0.0000, 0.0000, -0.6161, 0.9653, -0.2485, -0.1622],
    [0, 0, -0.1943, 0.0001, 0.0000, 0.1001, -0.3403, 0.8467, -0.4123],
    [0, 0, 0.0040, -0.0075, 0.0021, 0.5150, -0.7539, -0.3048, 0.5450],
])

COUNTEREXAMPLE_EIGENVALUES = np.array([
    1.3891 + 0.1564j, 1.3891 - 0.1564j, 0.9210, 0.5879, 0.4509, 0.1057,
    -0.0002 + 0.0039j, -0.0002 - 0.0039j, 0.0,
])

# Seven-DGU test microgrid: (i, j, R [ohm], L [uH]).
LINE_TABLE_7DGU = [
    (1, 2, 0.05, 2.1),
    (1, 3, 0.07, 1.8),
    (3, 4, 0.06, 1.0),
    (2, 4, 0.04, 2.3),
    (4, 5, 0.08, 1.8),
    (1, 6, 0.1, 2.5),
    (5, 6, 0.08, 3.0),
    (4, 7, 0.09, 2.3),
    (7, 5, 0.05, 2.4),
]
LINES_7DGU = tuple(Line(i, j, r, l * 1e-6) for i, j, r, l in LINE_TABLE_7DGU)

RATED_7DGU = {1: 10.0, 2: 10.0, 3: 10.0, 4: 5.0, 5: 5.0, 6: 3.33, 7: 3.33}

# Converter filter parameters (R_t [ohm], L_t [mH], C_t [mF]); unused by the
# abstracted primary loops, kept for completeness of the table.
CONVERTERS_7DGU = {
    1: (0.2, 1.8, 2.2),
    2: (0.3, 2.0, 1.9),
    3: (0.1, 2.2, 1.7),
    4: (0.5, 3.0, 2.5),
    5: (0.4, 1.2, 2.0),
    6: (0.6, 2.5, 3.0),
    7: (0.3, 2.0, 2.1),
}

V_REF_7DGU = 48.0
