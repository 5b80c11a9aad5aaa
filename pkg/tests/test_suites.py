import math
from pathlib import Path

import numpy as np
import pytest

from carnot_spectra.config import load_config
from carnot_spectra.suites import (SUITES, Assertion, builtin_manifest,
                                   parse_manifest, slope)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_builtin_corpus_has_25_pairs():
    pairs = parse_manifest(builtin_manifest())
    assert len(pairs) == 25
    shipped = parse_manifest((CONFIGS / "corpus.txt").read_text())
    assert shipped == pairs


def test_manifest_errors():
    with pytest.raises(ValueError, match="line 2"):
        parse_manifest("gaussian lam=1 | gaussian lam=1\nradial sigma=1\n")


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_shipped_configs_parse(suite):
    cfg = load_config(CONFIGS / f"{suite}.cfg", suite=suite)
    assert cfg.suite == suite
    assert cfg.resolved()["suite"] == suite


def test_assertion_semantics():
    assert Assertion("a", 0.5, 1.0, "le").passed
    assert not Assertion("a", math.nan, 1.0, "le").passed
    assert not Assertion("a", None, 1.0, "le").passed
    assert Assertion("a", 2.0, 1.0, "ge").passed
    assert Assertion("a", 1.5, (1.0, 2.0), "in").passed
    assert not Assertion("a", 2.5, (1.0, 2.0), "in").passed


def test_slope():
    js = [0, 1, 2]
    assert slope(js, 2.0 ** (1.5 * np.array(js))) == pytest.approx(1.5)
