import numpy as np
import pytest

from swallowkit.builder import AsymptoticData, SwallowtailData, build, build_asymptotic


@pytest.fixture(scope="session")
def ex217():
    """Generic swallowtail with planar singular image: (u^2+2v, u^3+3uv, v^2)."""
    return build(SwallowtailData(xi=("2", "3*u", "0"), b=("0", "0", "1")))


@pytest.fixture(scope="session")
def ex218():
    """Non-generic generalized swallowtail: (u^2+2v, u^3+3uv, 2uv^2)."""
    return build(SwallowtailData(xi=("2", "3*u", "0"), b=("0", "0", "2*u")))


@pytest.fixture(scope="session")
def fplus():
    """Positively curved asymptotic swallowtail (q = 0, r = xi x xi')."""
    return build_asymptotic(AsymptoticData(xi=("1", "u", "u^2"), q="0",
                                           r=("u^2", "0-2*u", "1")))


@pytest.fixture(scope="session")
def fminus():
    return build_asymptotic(AsymptoticData(xi=("1", "u", "u^2"), q="0",
                                           r=("0-u^2", "2*u", "0-1")))


@pytest.fixture(scope="session")
def parabolic():
    """Asymptotic swallowtail of parabolic type (q = 1/10, r = 0)."""
    return build_asymptotic(AsymptoticData(xi=("1", "u", "u^2"), q="0.1",
                                           r=("0", "0", "0")))


@pytest.fixture(scope="session")
def developable():
    """Tangential developable of the generic cusp (zero curvature)."""
    return build_asymptotic(AsymptoticData(xi=("1", "u", "u^2"), q="0",
                                           r=("0", "0", "0")))


def random_data(rng, generic=True):
    """Random polynomial swallowtail data with a well-conditioned cusp."""
    from swallowkit.jets import Add, Const, Mul, Pow, U, poly_to_expr

    def poly(coeffs):
        return poly_to_expr(np.asarray(coeffs, dtype=float))

    while True:
        xi = tuple(poly(rng.uniform(-1, 1, size=3)) for _ in range(3))
        x0 = np.array([c.jet(0.0, 0.0, 1).value() for c in xi])
        x1 = np.array([c.jet(0.0, 0.0, 1).partial(1, 0) for c in xi])
        if np.linalg.norm(np.cross(x0, x1)) < 0.3:
            continue
        b = tuple(poly(rng.uniform(-1, 1, size=2)) for _ in range(3))
        data = SwallowtailData(xi=xi, b=b)
        from swallowkit.builder import discriminants
        disc = discriminants(data)
        if generic and (abs(disc.D0) < 0.1 or abs(disc.D1) < 0.1):
            continue
        return data
