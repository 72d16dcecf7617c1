import hashlib
import io
import itertools
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import amplitude_scalar
from rissim.array_model import ArrayGeometry, PhaseSet, RisConfiguration, SteeringAngles, upa_response
from rissim.codebook import (
    angular_grid,
    build_codebook,
    dumps_codebook,
    load_codebook,
    loads_codebook,
    save_codebook,
)
from rissim.errors import CodebookParseError, CodebookVersionError, GridMismatchError

DATA = Path(__file__).parent / "data"
# sha256 of the serialized 10x10, 3 deg, [-90,90]x[-45,45] codebook, frozen at first build
DEFAULT_CODEBOOK_SHA256 = "810b591bec6779f530ef210e92fc7a779eb3a39ef8b3271f9275f3c206d21a07"


@pytest.fixture(scope="module")
def default_codebook():
    return build_codebook(ArrayGeometry(10, 10))


def test_grid_sizes():
    assert len(angular_grid()) == 61 * 31 == 1891
    assert len(angular_grid((0, 0), (0, 0), 3)) == 1
    assert len(angular_grid((-90, 90), (-45, 45), 9)) == 21 * 11


def test_grid_order_is_azimuth_outer():
    g = angular_grid((-3, 3), (-3, 0), 3)
    got = [t.degrees for t in g][:3]
    assert np.allclose(got, [(-3.0, -3.0), (-3.0, 0.0), (0.0, -3.0)])


@pytest.mark.parametrize("spacing", [7.0, 0.0, -3.0])
def test_grid_rejects_bad_spacing(spacing):
    with pytest.raises(GridMismatchError):
        angular_grid(spacing_deg=spacing)


def test_default_codebook_size_and_hash(default_codebook):
    assert len(default_codebook) == 1891
    digest = hashlib.sha256(dumps_codebook(default_codebook).encode()).hexdigest()
    assert digest == DEFAULT_CODEBOOK_SHA256


def test_build_is_deterministic():
    g = ArrayGeometry(4, 4)
    a = build_codebook(g, spacing_deg=15)
    b = build_codebook(g, spacing_deg=15)
    assert dumps_codebook(a) == dumps_codebook(b)


def test_single_cell_picks_zero_phase():
    cb = build_codebook(ArrayGeometry(1, 1), spacing_deg=15)
    zero = int(np.argmin(np.abs(PhaseSet.default().array)))
    assert all(e.config.states == (zero,) for e in cb)


def test_small_codebook_matches_exhaustive_search():
    g = ArrayGeometry(2, 2)
    ps = PhaseSet.default()
    cb = build_codebook(g, spacing_deg=45)
    for entry in cb:
        az, el = entry.target.azimuth_rad, entry.target.elevation_rad
        h = [complex(v) for v in upa_response(g, entry.target)]
        best = max(
            abs(amplitude_scalar([ps.phases_rad[k] for k in states], h)) ** 2
            for states in itertools.product(range(7), repeat=4)
        )
        got = abs(amplitude_scalar([ps.phases_rad[k] for k in entry.config.states], h)) ** 2
        assert got >= best * (1 - 1e-9), (np.rad2deg(az), np.rad2deg(el))


def test_nearest_lookup(default_codebook):
    assert default_codebook.nearest(1.2, -2.0).target.degrees == pytest.approx((0.0, -3.0))
    assert default_codebook.nearest(200, 200).target.degrees == pytest.approx((90.0, 45.0))


def test_mirror_symmetry(default_codebook):
    """Mirrored targets reach the same coherent gain at their own direction."""
    g = default_codebook.geometry
    by_target = {tuple(np.round(e.target.degrees, 6)): e for e in default_codebook}
    for (az, el), e in list(by_target.items())[::37]:
        for mirrored in ((-az, el), (az, -el)):
            m = by_target[mirrored]
            own = abs(e.config.coefficients() @ upa_response(g, e.target))
            mir = abs(m.config.coefficients() @ upa_response(g, m.target))
            assert own == pytest.approx(mir, rel=1e-9)
        assert by_target[(-az, el)].config.states == e.config.states


def test_round_trip(tmp_path):
    cb = build_codebook(ArrayGeometry(3, 2, mask=(True, False, True, True, True, False)), spacing_deg=30)
    path = tmp_path / "cb.json"
    save_codebook(cb, path)
    back = load_codebook(path)
    assert back == cb
    assert dumps_codebook(back) == path.read_text()


def test_golden_file():
    text = (DATA / "codebook_2x2_45deg.json").read_text()
    doc = json.loads(text)
    assert list(doc) == [
        "format", "version", "nx", "ny", "delta", "mask", "phases_rad",
        "spacing_deg", "azimuth_range_deg", "elevation_range_deg", "entries",
    ]
    cb = loads_codebook(text)
    assert len(cb) == 5 * 3
    assert dumps_codebook(build_codebook(ArrayGeometry(2, 2), spacing_deg=45)) == text


def _golden_lines():
    return (DATA / "codebook_2x2_45deg.json").read_text().splitlines()


def test_out_of_range_state_names_entry_and_line():
    lines = _golden_lines()
    first = next(i for i, l in enumerate(lines) if l.startswith(" [")) + 2  # entries[2]
    lines[first] = " [6,9,6,4],"
    with pytest.raises(CodebookParseError, match=r"entries\[2\] \(line %d\)\[1\]: state 9" % (first + 1)):
        loads_codebook("\n".join(lines))


def test_version_mismatch():
    text = "\n".join(_golden_lines()).replace('"version": 1', '"version": 2')
    with pytest.raises(CodebookVersionError):
        loads_codebook(text)


def test_malformed_json_reports_line():
    lines = _golden_lines()
    lines[4] = ' "delta" 0.5,'
    with pytest.raises(CodebookParseError, match="line 5"):
        loads_codebook("\n".join(lines))


@pytest.mark.parametrize(
    "edit, message",
    [
        (lambda d: d.pop("nx"), "missing field 'nx'"),
        (lambda d: d.update(spacing_deg=40), "inconsistent grid"),
        (lambda d: d["entries"].pop(), "rows"),
        (lambda d: d.update(format="other"), "format"),
    ],
)
def test_structural_errors(edit, message):
    doc = json.loads((DATA / "codebook_2x2_45deg.json").read_text())
    edit(doc)
    with pytest.raises(CodebookParseError, match=message):
        loads_codebook(json.dumps(doc))


def test_parse_errors_are_value_errors_or_ris_errors():
    from rissim.errors import RisError

    with pytest.raises(RisError):
        load_codebook(io.StringIO("[]"))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.sampled_from([15.0, 22.5, 45.0]))
def test_round_trip_property(nx, ny, spacing):
    cb = build_codebook(ArrayGeometry(nx, ny), spacing_deg=spacing, az_range=(-45, 45), el_range=(0, 45))
    assert loads_codebook(dumps_codebook(cb)) == cb


def test_entries_use_only_valid_states(default_codebook):
    states = np.array([e.config.states for e in default_codebook])
    assert states.min() >= 0 and states.max() <= 6


def test_configurations_are_plain_phase_configs():
    cb = build_codebook(ArrayGeometry(2, 2), spacing_deg=90, az_range=(0, 90), el_range=(0, 0))
    assert all(isinstance(e.config, RisConfiguration) for e in cb)
    assert [e.target for e in cb] == [SteeringAngles.from_degrees(a, 0) for a in (0, 90)]
