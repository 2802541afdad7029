import os
from fractions import Fraction
from math import gcd

import pytest

from g2endo.analysis.finitefield import CurveModel
from g2endo.analysis.intpoly import IntPoly

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data')


@pytest.fixture
def rm_curve():
    """y^2 = x^5 - x^4 - x^3 + x^2 + x - 1, real multiplication by Z[sqrt 2] over Q(sqrt 2)."""
    return CurveModel(IntPoly((-1, 1, 1, -1, -1, 1)))


@pytest.fixture
def trivial_curve():
    """y^2 = x^5 - x + 1: irreducible quintic, disc 2869 = 19 * 151."""
    return CurveModel(IntPoly((1, -1, 0, 0, 0, 1)))


@pytest.fixture
def cm_curve():
    """y^2 = x^5 + 1, CM by Z[zeta5]."""
    return CurveModel(IntPoly((1, 0, 0, 0, 0, 1)))


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def degree7_curve():
    return CurveModel(IntPoly((56, 0, 45, 30, 9, 12, 4)))


def vanishing_igusa_equation(point, discriminant):
    """Text of a weighted-homogeneous Igusa equation through point, P10^a x_w^b - P_w^b x10^a."""
    weights = (2, 4, 6)
    for index, (w, value) in enumerate(zip(weights, point.values()[:3])):
        if value != 0:
            g = gcd(w, 10)
            a, b = w // g, 10 // g
            exps = [0, 0, 0, 0]
            exps[index] = b
            left = Fraction(point.I10) ** a
            right = -Fraction(value) ** b
            break
    else:
        raise ValueError("point has I2 = I4 = I6 = 0")
    return (
        f"discriminant={discriminant}\n"
        "coords=igusa\n"
        "convention=igusa-clebsch/transvectant-v1\n"
        f"{' '.join(map(str, exps))} : {left}\n"
        f"0 0 0 {a} : {right}\n"
    )


def write_humbert(directory, point, discriminant):
    humbert = os.path.join(directory, 'humbert')
    os.makedirs(humbert, exist_ok=True)
    path = os.path.join(humbert, f"h{discriminant}.eq")
    with open(path, 'w') as f:
        f.write(vanishing_igusa_equation(point, discriminant))
    return path
