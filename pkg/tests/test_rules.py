import pytest

from gasmet.rules import BESPOKE, GENERIC, RULEBOOK, SMELL_IDS, RuleConfigError, load_rules, parse_rules


def test_catalog_has_nineteen_smells():
    assert len(SMELL_IDS) == 19 and set(RULEBOOK) == set(SMELL_IDS)
    assert set(BESPOKE) | set(GENERIC) == set(SMELL_IDS)


def test_default_severities():
    assert {s for s in BESPOKE if RULEBOOK[s].severity == "info"} == {"CS5", "CS17", "CS19"}
    assert all(RULEBOOK[s].severity == "warning" for s in ("CS1", "CS4", "CS9"))


def test_defaults():
    cfg = parse_rules("")
    assert cfg.enabled == frozenset(SMELL_IDS)
    assert cfg.threshold("CS2") == 10 and cfg.threshold("CS19") == 3
    assert not cfg.iff_include_private


def test_full_file(tmp_path):
    path = tmp_path / "rules.txt"
    path.write_text(
        "# comment\nenabled = CS1, cs2 ,CS4\nthreshold.CS2 = 4\nthresholds.CS19 = 5\n"
        "metric.CS3 = nlf   # trailing comment\nthreshold.CS3 = 2\niff_include_private = true\n"
    )
    cfg = load_rules(path)
    assert cfg.enabled == {"CS1", "CS2", "CS4"}
    assert cfg.thresholds["CS2"] == 4 and cfg.thresholds["CS19"] == 5
    assert cfg.metrics == {"CS3": "nlf"} and cfg.iff_include_private


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("colour = red", "unknown key"),
        ("enabled = CS20", "unknown smell"),
        ("threshold.CS1 = 3", "does not take a threshold"),
        ("threshold.CS2 = many", "numeric"),
        ("metric.CS1 = nlf", "bespoke"),
        ("metric.CS3 = gas", "unknown metric"),
        ("metric.CS3 = nlf", "no threshold"),
        ("iff_include_private = maybe", "boolean"),
        ("just words", "key = value"),
    ],
)
def test_rejects_bad_config(text, fragment):
    with pytest.raises(RuleConfigError, match=fragment):
        parse_rules(text)


def test_error_names_the_line():
    with pytest.raises(RuleConfigError, match="line 3"):
        parse_rules("# ok\nenabled = CS1\nbogus = 1\n")
