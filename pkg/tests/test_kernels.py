"""Compiled kernels against the pure-Python fallback."""
import math

import numpy as np
import pytest

from catflow import _kernels
from catflow._kernels import _fallback

compiled = pytest.mark.skipif(not _kernels.has_compiled(),
                              reason="compiled extension not built")


def _meridian(n):
    ts = np.linspace(0.0, math.pi / 2, n)
    return np.column_stack([np.sin(ts), np.zeros(n), np.cos(ts)]), ts


@compiled
def test_sphere_tractrix_agreement():
    gamma, ts = _meridian(400)
    p0 = np.array([0.0, math.sin(0.7), math.cos(0.7)])
    a = _kernels._compiled.sphere_tractrix(gamma, p0, 0.8, 1.0)
    b = _fallback.sphere_tractrix(gamma, p0, 0.8, 1.0)
    assert np.max(np.abs(a - b)) <= 1e-12


@compiled
def test_euclidean_tractrix_agreement():
    n = 500
    ts = np.linspace(0.0, 5.0, n)
    gamma = ts[:, None]
    p0 = np.array([0.0])
    a = _kernels._compiled.euclidean_tractrix(gamma, p0, 1.0)
    b = _fallback.euclidean_tractrix(gamma, p0, 1.0)
    assert np.max(np.abs(a - b)) <= 1e-12


@compiled
def test_arc_glued_agreement():
    ts = np.linspace(0.0, math.pi / 2, 300)
    arc_start = np.array([0.0, 0.0, 1.0])
    arc_tan = np.array([1.0, 0.0, 0.0])
    p0 = np.array([math.sin(0.9) * math.cos(0.5), math.sin(0.9) * math.sin(0.5),
                   math.cos(0.9)])
    args = (p0, arc_start, arc_tan, 1.0, math.pi / 2, 0.0, math.pi / 2, ts, 41)
    ta, sa, ea, na = _kernels._compiled.arc_glued_tractrix(*args)
    tb, sb, eb, nb = _fallback.arc_glued_tractrix(*args)
    assert na == nb == len(ts)
    assert np.max(np.abs(ta - tb)) <= 1e-9
    assert np.max(np.abs(sa - sb)) <= 1e-9


@compiled
def test_psi_glued_agreement():
    ts = np.linspace(0.0, math.pi / 2, 300)
    x = np.array([0.2, 0.3, 0.93])
    x /= np.linalg.norm(x)
    y = np.array([-0.4, 0.1, 0.9])
    y /= np.linalg.norm(y)
    x6 = np.concatenate([x, y]) / math.sqrt(2.0)
    pole = np.array([0.0, 0.0, 1.0])
    ta, za, ea = _kernels._compiled.psi_glued_tractrix(x6, pole, math.pi / 2, ts)
    tb, zb, eb = _fallback.psi_glued_tractrix(x6, pole, math.pi / 2, ts)
    assert np.max(np.abs(ta - tb)) <= 1e-9
    assert np.max(np.abs(za - zb)) <= 1e-9


@compiled
def test_pipeline_backend_agreement():
    """The glued pipeline lands on the same K point under either backend."""
    from catflow import ArcOnSphere, SphereSpace, phi_retraction

    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    arc = ArcOnSphere.from_endpoints(space, pole, space.point([1, 0, 0]))
    phi = phi_retraction(space, arc, pole, delta=5e-3, eps_k=math.pi / 100)
    x = space.point([0.3, 0.8, 0.52], normalize=True)
    try:
        _kernels.use_backend("compiled")
        a = phi.retract(x)
        _kernels.use_backend("python")
        b = phi.retract(x)
    finally:
        _kernels.use_backend("compiled" if _kernels.has_compiled() else "python")
    assert space.distance(a, b) <= 1e-9


def test_backend_switch():
    name = _kernels.backend_name()
    _kernels.use_backend("python")
    assert _kernels.backend_name() == "python"
    gamma, ts = _meridian(50)
    out = _kernels.sphere_tractrix(gamma, np.array([0.0, 0.0, 1.0]), 0.8, 1.0)
    assert out.shape == (50, 3)
    if _kernels.has_compiled():
        _kernels.use_backend("compiled")
        assert _kernels.backend_name() == "compiled"
    with pytest.raises(ValueError):
        _kernels.use_backend("nonsense")
