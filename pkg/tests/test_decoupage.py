import json

import numpy as np
import pytest

from cornerstone.decoupage import (
    DecoupageSpec,
    DefiningFunction,
    active_faces,
    check_transverse,
    corner_model,
    enumerate_faces,
    interval_model,
    is_positive_part,
    orbit_signature,
    signature,
)
from cornerstone.errors import AmbientTooLarge, SampleNotOnAnyFace, SpecError
from cornerstone.suites import transversality_examples


def test_json_round_trip():
    doc = {"ambient_dim": 2, "hypersurfaces": [
        {"kind": "coordinate", "axis": 1},
        {"kind": "reparameterized", "axis": 2, "f": "2 + x1"},
        {"kind": "general", "expr": "x1 + x2 - 1"}]}
    spec = DecoupageSpec.from_json(json.dumps(doc))
    again = DecoupageSpec.from_dict(spec.to_dict())
    x = np.array([[0.3, 0.4], [1.0, 2.0]])
    np.testing.assert_allclose(spec.rho(x), again.rho(x))
    np.testing.assert_allclose(spec.rho(x)[:, 1], (2 + x[:, 0]) * x[:, 1])


@pytest.mark.parametrize("doc, key", [
    ({"ambient_dim": 2, "hypersurfaces": [{"kind": "coordinate", "axis": 3}]}, "hypersurfaces[0].axis"),
    ({"ambient_dim": 2, "hypersurfaces": [{"kind": "coordinate", "axiz": 1}]}, "hypersurfaces[0].axiz"),
    ({"ambient_dim": 2, "hypersurfaces": [{"kind": "blob"}]}, "hypersurfaces[0].kind"),
    ({"ambient_dim": 0, "hypersurfaces": []}, "ambient_dim"),
    ({"ambient_dim": 1, "hypersurfaces": [{"kind": "reparameterized", "axis": 1, "f": "x / 2"}]},
     "hypersurfaces[0].f"),
    ({"ambient_dim": 1, "hypersurfaces": [], "extra": 1}, "extra"),
])
def test_malformed_spec_names_key(doc, key):
    with pytest.raises(SpecError) as exc:
        DecoupageSpec.from_dict(doc)
    assert exc.value.key == key


def test_invalid_json_is_spec_error():
    with pytest.raises(SpecError):
        DecoupageSpec.from_json("{not json")


def test_faces_of_square():
    spec = corner_model(2)
    assert active_faces(spec, (0.0, 0.5)) == signature(1)
    assert active_faces(spec, (0.0, 0.0)) == signature(1, 2)
    assert active_faces(spec, (0.2, 0.5)).codimension == 0
    assert is_positive_part(spec, (0.0, 1.0)) and not is_positive_part(spec, (-0.1, 1.0))


def test_orbit_contains_same_face_only():
    spec = corner_model(2)
    orbit = orbit_signature(spec, (0.0, 0.5))
    assert orbit.contains((0.0, 3.0))
    assert not orbit.contains((0.0, 0.0))
    assert not orbit.contains((0.1, 0.5))


def test_enumerate_faces_counts():
    assert len(enumerate_faces(corner_model(3))) == 8
    # [0, 1] has the interior and two endpoints; both endpoints together is empty
    assert sorted(len(f) for f in enumerate_faces(interval_model())) == [0, 1, 1]


def test_enumerate_refuses_large_ambient():
    with pytest.raises(AmbientTooLarge):
        enumerate_faces(corner_model(17))


@pytest.mark.parametrize("name, spec, point, expected", transversality_examples())
def test_transversality_examples_with_margin(name, spec, point, expected):
    rep = check_transverse(spec, [point])
    assert rep.transverse is expected
    assert rep.margin >= 10.0
    assert rep.certificate == "verified at samples"


def test_rank_deficient_gradients_are_equal():
    _, spec, point, _ = transversality_examples()[0]
    np.testing.assert_allclose(spec[1].grad(np.array(point)), spec[2].grad(np.array(point)))


def test_transversality_needs_a_face():
    with pytest.raises(SampleNotOnAnyFace):
        check_transverse(corner_model(2), [(0.5, 0.5)])


def test_more_hypersurfaces_than_dimensions_is_degenerate():
    spec = DecoupageSpec(1, (DefiningFunction.coordinate(1), DefiningFunction.coordinate(1, 0.0, -1.0)))
    rep = check_transverse(spec, [(0.0,)])
    assert not rep.transverse and rep.samples[0].sigma_min == 0.0
