"""Gaussian integrals over contracted Cartesian functions (McMurchie-Davidson).

Sufficient for s and p shells; the recursions are written generally. The
Boys function is evaluated through the confluent hypergeometric function.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import hyp1f1


def boys(n, x):
    return hyp1f1(n + 0.5, n + 1.5, -x) / (2.0 * n + 1.0)


def hermite_coef(i, j, t, qx, a, b):
    """Hermite expansion coefficient E_t^{ij} for a 1-D Gaussian product."""
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return np.exp(-q * qx * qx)
    if j == 0:
        return (hermite_coef(i - 1, j, t - 1, qx, a, b) / (2 * p)
                - q * qx / a * hermite_coef(i - 1, j, t, qx, a, b)
                + (t + 1) * hermite_coef(i - 1, j, t + 1, qx, a, b))
    return (hermite_coef(i, j - 1, t - 1, qx, a, b) / (2 * p)
            + q * qx / b * hermite_coef(i, j - 1, t, qx, a, b)
            + (t + 1) * hermite_coef(i, j - 1, t + 1, qx, a, b))


def hermite_coulomb(t, u, v, n, p, pc):
    """Auxiliary Hermite Coulomb integral R^n_{tuv}."""
    if t == u == v == 0:
        return (-2.0 * p) ** n * boys(n, p * float(np.dot(pc, pc)))
    if t > 0:
        val = 0.0
        if t > 1:
            val += (t - 1) * hermite_coulomb(t - 2, u, v, n + 1, p, pc)
        val += pc[0] * hermite_coulomb(t - 1, u, v, n + 1, p, pc)
        return val
    if u > 0:
        val = 0.0
        if u > 1:
            val += (u - 1) * hermite_coulomb(t, u - 2, v, n + 1, p, pc)
        val += pc[1] * hermite_coulomb(t, u - 1, v, n + 1, p, pc)
        return val
    val = 0.0
    if v > 1:
        val += (v - 1) * hermite_coulomb(t, u, v - 2, n + 1, p, pc)
    val += pc[2] * hermite_coulomb(t, u, v - 1, n + 1, p, pc)
    return val


def primitive_norm(a, lmn):
    l, m, n = lmn
    from math import factorial

    def dfact(k):  # (2k-1)!!
        out = 1
        for i in range(2 * k - 1, 0, -2):
            out *= i
        return out

    return ((2 * a / np.pi) ** 0.75
            * (4 * a) ** ((l + m + n) / 2.0)
            / np.sqrt(dfact(l) * dfact(m) * dfact(n)))


def _overlap_prim(a, lmn1, ra, b, lmn2, rb):
    p = a + b
    pre = (np.pi / p) ** 1.5
    val = pre
    for d in range(3):
        val *= hermite_coef(lmn1[d], lmn2[d], 0, ra[d] - rb[d], a, b)
    return val


def _kinetic_prim(a, lmn1, ra, b, lmn2, rb):
    l2, m2, n2 = lmn2
    term = b * (2 * (l2 + m2 + n2) + 3) * _overlap_prim(a, lmn1, ra, b, lmn2, rb)
    term += -2.0 * b ** 2 * (
        _overlap_prim(a, lmn1, ra, b, (l2 + 2, m2, n2), rb)
        + _overlap_prim(a, lmn1, ra, b, (l2, m2 + 2, n2), rb)
        + _overlap_prim(a, lmn1, ra, b, (l2, m2, n2 + 2), rb))
    term += -0.5 * (
        l2 * (l2 - 1) * _overlap_prim(a, lmn1, ra, b, (l2 - 2, m2, n2), rb)
        + m2 * (m2 - 1) * _overlap_prim(a, lmn1, ra, b, (l2, m2 - 2, n2), rb)
        + n2 * (n2 - 1) * _overlap_prim(a, lmn1, ra, b, (l2, m2, n2 - 2), rb))
    return term


def _nuclear_prim(a, lmn1, ra, b, lmn2, rb, rc):
    p = a + b
    rp = (a * np.asarray(ra) + b * np.asarray(rb)) / p
    pc = rp - np.asarray(rc)
    val = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        et = hermite_coef(lmn1[0], lmn2[0], t, ra[0] - rb[0], a, b)
        if et == 0.0:
            continue
        for u in range(lmn1[1] + lmn2[1] + 1):
            eu = hermite_coef(lmn1[1], lmn2[1], u, ra[1] - rb[1], a, b)
            if eu == 0.0:
                continue
            for v in range(lmn1[2] + lmn2[2] + 1):
                ev = hermite_coef(lmn1[2], lmn2[2], v, ra[2] - rb[2], a, b)
                if ev == 0.0:
                    continue
                val += et * eu * ev * hermite_coulomb(t, u, v, 0, p, pc)
    return 2.0 * np.pi / p * val


class ContractedGaussian:
    __slots__ = ("lmn", "center", "exps", "coefs")

    def __init__(self, lmn, center, exps, coefs):
        self.lmn = tuple(lmn)
        self.center = np.asarray(center, dtype=float)
        self.exps = np.asarray(exps, dtype=float)
        norms = np.array([primitive_norm(a, self.lmn) for a in self.exps])
        raw = np.asarray(coefs, dtype=float) * norms
        # normalize the contracted function
        s = 0.0
        for ci, ai in zip(raw, self.exps):
            for cj, aj in zip(raw, self.exps):
                s += ci * cj * _overlap_prim(ai, self.lmn, self.center,
                                             aj, self.lmn, self.center)
        self.coefs = raw / np.sqrt(s)


def overlap(g1, g2):
    val = 0.0
    for c1, a1 in zip(g1.coefs, g1.exps):
        for c2, a2 in zip(g2.coefs, g2.exps):
            val += c1 * c2 * _overlap_prim(a1, g1.lmn, g1.center, a2, g2.lmn, g2.center)
    return val


def kinetic(g1, g2):
    val = 0.0
    for c1, a1 in zip(g1.coefs, g1.exps):
        for c2, a2 in zip(g2.coefs, g2.exps):
            val += c1 * c2 * _kinetic_prim(a1, g1.lmn, g1.center, a2, g2.lmn, g2.center)
    return val


def nuclear(g1, g2, rc):
    val = 0.0
    for c1, a1 in zip(g1.coefs, g1.exps):
        for c2, a2 in zip(g2.coefs, g2.exps):
            val += c1 * c2 * _nuclear_prim(a1, g1.lmn, g1.center, a2, g2.lmn, g2.center, rc)
    return val


def _eri_prim(a, lmn1, ra, b, lmn2, rb, c, lmn3, rc, d, lmn4, rd):
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    rp = (a * np.asarray(ra) + b * np.asarray(rb)) / p
    rq = (c * np.asarray(rc) + d * np.asarray(rd)) / q
    pq = rp - rq

    e1 = [[hermite_coef(lmn1[dd], lmn2[dd], t, ra[dd] - rb[dd], a, b)
           for t in range(lmn1[dd] + lmn2[dd] + 1)] for dd in range(3)]
    e2 = [[hermite_coef(lmn3[dd], lmn4[dd], t, rc[dd] - rd[dd], c, d)
           for t in range(lmn3[dd] + lmn4[dd] + 1)] for dd in range(3)]

    val = 0.0
    for t in range(len(e1[0])):
        if e1[0][t] == 0.0:
            continue
        for u in range(len(e1[1])):
            if e1[1][u] == 0.0:
                continue
            for v in range(len(e1[2])):
                if e1[2][v] == 0.0:
                    continue
                for tt in range(len(e2[0])):
                    if e2[0][tt] == 0.0:
                        continue
                    for uu in range(len(e2[1])):
                        if e2[1][uu] == 0.0:
                            continue
                        for vv in range(len(e2[2])):
                            if e2[2][vv] == 0.0:
                                continue
                            val += (e1[0][t] * e1[1][u] * e1[2][v]
                                    * e2[0][tt] * e2[1][uu] * e2[2][vv]
                                    * (-1) ** (tt + uu + vv)
                                    * hermite_coulomb(t + tt, u + uu, v + vv,
                                                      0, alpha, pq))
    return val * 2.0 * np.pi ** 2.5 / (p * q * np.sqrt(p + q))


def eri(g1, g2, g3, g4):
    val = 0.0
    for c1, a1 in zip(g1.coefs, g1.exps):
        for c2, a2 in zip(g2.coefs, g2.exps):
            for c3, a3 in zip(g3.coefs, g3.exps):
                for c4, a4 in zip(g4.coefs, g4.exps):
                    val += c1 * c2 * c3 * c4 * _eri_prim(
                        a1, g1.lmn, g1.center, a2, g2.lmn, g2.center,
                        a3, g3.lmn, g3.center, a4, g4.lmn, g4.center)
    return val
