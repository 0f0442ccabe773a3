"""STO-3G basis data for the elements used by the fixture set.

Exponents and contraction coefficients are the standard published STO-3G
values. SP shells share exponents between the s and p contractions.
"""

# element -> list of shells; each shell: (shell_type, exponents, coeffs dict)
STO3G = {
    "H": [
        ("S", [3.425250914, 0.6239137298, 0.1688554040],
         {"S": [0.1543289673, 0.5353281423, 0.4446345422]}),
    ],
    "Li": [
        ("S", [16.11957475, 2.936200663, 0.7946504870],
         {"S": [0.1543289673, 0.5353281423, 0.4446345422]}),
        ("SP", [0.6362897469, 0.1478600533, 0.0480886784],
         {"S": [-0.09996722919, 0.3995128261, 0.7001154689],
          "P": [0.1559162750, 0.6076837186, 0.3919573931]}),
    ],
    "O": [
        ("S", [130.7093200, 23.80886605, 6.443608313],
         {"S": [0.1543289673, 0.5353281423, 0.4446345422]}),
        ("SP", [5.033151319, 1.169596125, 0.3803889600],
         {"S": [-0.09996722919, 0.3995128261, 0.7001154689],
          "P": [0.1559162750, 0.6076837186, 0.3919573931]}),
    ],
}

ATOMIC_NUMBER = {"H": 1, "Li": 3, "O": 8}

# p functions are ordered x, y, z after the s function of an SP shell
CARTESIAN_POWERS = {
    "S": [(0, 0, 0)],
    "P": [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
}


def basis_functions(symbol, center):
    """Expand an element's shells into contracted Cartesian functions.

    Returns a list of (lmn, center, exponents, coefficients) tuples in a
    fixed order: shells as listed, s before p within an SP shell.
    """
    funcs = []
    for shell_type, exps, coeffs in STO3G[symbol]:
        parts = ["S"] if shell_type == "S" else ["S", "P"]
        for part in parts:
            for lmn in CARTESIAN_POWERS[part]:
                funcs.append((lmn, tuple(center), tuple(exps), tuple(coeffs[part])))
    return funcs
