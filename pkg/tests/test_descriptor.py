"""JSON descriptor round trips and input validation."""

import json

import numpy as np
import pytest

from helpers import random_lax
from isomon.descriptor import (descriptor_to_lax, lax_to_descriptor,
                               load_system, load_system_file,
                               preset_descriptor)
from isomon.errors import InputError
from isomon.presets import make_preset


def lax_identical(a, b):
    assert a.r == b.r
    assert len(a.poles) == len(b.poles)
    for pa, pb in zip(a.poles, b.poles):
        assert pa.loc == pb.loc
        assert np.array_equal(pa.coeffs, pb.coeffs)
    assert np.array_equal(a.infinity.coeffs, b.infinity.coeffs)


def test_explicit_round_trip_exact():
    rng = np.random.default_rng(11)
    for _ in range(5):
        lax = random_lax(rng, 3, [1, 0], 2)
        back, preset = load_system(lax_to_descriptor(lax))
        assert preset is None
        lax_identical(lax, back)


def test_pairs_are_re_im():
    data = {
        "r": 1,
        "poles": [{"c": [0.5, -1.0], "d": 0, "coeffs": [[[[2.0, 3.0]]]]}],
        "infinity": {"d": 1, "coeffs": [[[[0.0, -4.0]]]]},
    }
    lax = descriptor_to_lax(data)
    assert lax.poles[0].loc == 0.5 - 1.0j
    assert lax.poles[0].coeffs[0, 0, 0] == 2.0 + 3.0j
    assert lax.infinity.coeffs[0, 0, 0] == -4.0j
    # bare reals are accepted for scalars
    data["poles"][0]["c"] = 0.5
    assert descriptor_to_lax(data).poles[0].loc == 0.5 + 0.0j


def test_preset_descriptor_round_trip():
    pts = {
        "pii": {"x1": 0.8, "x2": -0.6, "y1": 1.1, "y2": 0.4, "t": 0.3},
        "schlesinger": {
            "locs": [0.0, 1.0],
            "residues": [[[0.20, 0.10], [-0.30, 0.15]],
                         [[-0.10, 0.25], [0.20, 0.05]]],
        },
        "fuchsian-const": {
            "leading": [0.4, -0.8],
            "locs": [0.0, 1.0],
            "residues": [[[0.20, 0.10], [-0.30, 0.15]],
                         [[-0.10, 0.25], [0.20, 0.05]]],
        },
    }
    for name, pt in pts.items():
        p = make_preset(name, pt)
        lax, p2 = load_system(preset_descriptor(p))
        assert p2 is not None and p2.name == name
        lax_identical(p.lax, lax)
        assert p2.flows.keys() == p.flows.keys()


def test_structural_errors():
    good = {
        "r": 2,
        "poles": [{"c": [0.0, 0.0], "d": 0,
                   "coeffs": [[[[1.0, 0.0], [0.0, 0.0]],
                               [[0.0, 0.0], [2.0, 0.0]]]]}],
        "infinity": {"d": 0, "coeffs": []},
    }
    descriptor_to_lax(good)  # sanity: the template itself loads

    with pytest.raises(InputError, match="'r'"):
        descriptor_to_lax({"poles": []})
    bad = json.loads(json.dumps(good))
    bad["poles"][0].pop("c")
    with pytest.raises(InputError, match="pole 0"):
        descriptor_to_lax(bad)
    bad = json.loads(json.dumps(good))
    bad["poles"][0]["d"] = 3
    with pytest.raises(InputError, match="declared d=3"):
        descriptor_to_lax(bad)
    bad = json.loads(json.dumps(good))
    bad["poles"][0]["coeffs"] = [[[[1.0, 0.0]]]]  # 1x1 block in an r=2 system
    with pytest.raises(InputError, match="expected shape"):
        descriptor_to_lax(bad)
    bad = json.loads(json.dumps(good))
    bad["poles"][0]["coeffs"] = []
    bad["poles"][0].pop("d")
    with pytest.raises(InputError, match="pole 0"):
        descriptor_to_lax(bad)
    bad = json.loads(json.dumps(good))
    bad["infinity"] = {"d": 2, "coeffs": [[[[1.0, 0.0], [0.0, 0.0]],
                                           [[0.0, 0.0], [1.0, 0.0]]]]}
    with pytest.raises(InputError, match="infinity"):
        descriptor_to_lax(bad)
    with pytest.raises(InputError, match="JSON object"):
        load_system([1, 2, 3])
    with pytest.raises(InputError, match="'name'"):
        load_system({"preset": {}})
    bad = json.loads(json.dumps(good))
    bad["poles"][0]["coeffs"] = [[[[1.0, 0.0, 9.9], [0.0, 0.0]],
                                  [[0.0, 0.0], [2.0, 0.0]]]]
    with pytest.raises(InputError, match="malformed|re, im"):
        descriptor_to_lax(bad)


def test_file_loading(tmp_path):
    rng = np.random.default_rng(7)
    lax = random_lax(rng, 2, [0], 1)
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(lax_to_descriptor(lax)))
    back, _ = load_system_file(str(path))
    lax_identical(lax, back)

    with pytest.raises(InputError, match="cannot read"):
        load_system_file(str(tmp_path / "absent.json"))

    broken = tmp_path / "broken.json"
    broken.write_text('{"r": 2,\n  "poles": [}\n}')
    with pytest.raises(InputError, match=r"line 2 column \d+"):
        load_system_file(str(broken))
