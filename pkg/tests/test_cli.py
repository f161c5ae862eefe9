import json
from importlib import resources

import jsonschema
import pytest

from reqsolve.cli import REPORT_JSON, REPORT_TXT, REQUIREMENTS_OUT, main
from reqsolve.config import KNOWLEDGE_ENV, config_from_mapping, load_config
from reqsolve.errors import ConfigInvalid, PinMismatch
from reqsolve.versioning import Version

from minibench import build_index, make_scenario

SCHEMA = json.loads(resources.files("reqsolve").joinpath("report.schema.json").read_text())


@pytest.fixture(scope="module")
def mirror(tmp_path_factory):
    root = tmp_path_factory.mktemp("mirror")
    return build_index(root / "index"), root / "kb"


@pytest.fixture
def layout(tmp_path):
    (tmp_path / "proj").mkdir()
    (tmp_path / "requirements.txt").write_text("scipy==0.18.1\nstatkit==1.0.0\n")
    return tmp_path


def base(**over):
    data = {"project_path": "proj", "requirements_path": "requirements.txt", "target_name": "scipy",
            "current_version": "0.18.1", "target_version": "1.3.0"}
    data.update(over)
    return {k: v for k, v in data.items() if v is not None}


# -- configuration ---------------------------------------------------------------

def test_missing_target_version(layout):
    with pytest.raises(ConfigInvalid) as exc:
        config_from_mapping(base(target_version=None), layout)
    assert exc.value.field == "target_version"


def test_pin_mismatch(layout):
    with pytest.raises(PinMismatch):
        config_from_mapping(base(current_version="0.19.0"), layout)


def test_unpinned_target_and_unknown_key(layout):
    with pytest.raises(ConfigInvalid):
        config_from_mapping(base(target_name="numpy"), layout)
    with pytest.raises(ConfigInvalid):
        config_from_mapping(base(colour="blue"), layout)


def test_bad_numbers_and_booleans(layout):
    with pytest.raises(ConfigInvalid):
        config_from_mapping(base(max_iterations="0"), layout)
    with pytest.raises(ConfigInvalid):
        config_from_mapping(base(offline="maybe"), layout)


def test_key_value_and_json_forms_agree(layout, monkeypatch):
    monkeypatch.delenv(KNOWLEDGE_ENV, raising=False)
    (layout / "a.cfg").write_text("# comment\n" + "\n".join(f"{k} = {v}" for k, v in base().items()) + "\n")
    (layout / "b.json").write_text(json.dumps(base()))
    a, b = load_config(layout / "a.cfg"), load_config(layout / "b.json")
    assert a == b
    assert a.target_version == Version("1.3.0")
    assert a.project_path == (layout / "proj").resolve()


def test_knowledge_env_overrides(layout, monkeypatch, tmp_path):
    monkeypatch.setenv(KNOWLEDGE_ENV, str(tmp_path / "elsewhere"))
    cfg = config_from_mapping(base(knowledge_path="kb"), layout)
    assert cfg.knowledge_path == (tmp_path / "elsewhere").resolve()


def test_aliases_parse(layout):
    cfg = config_from_mapping(base(aliases="Pillow:PIL, scikit-learn:sklearn"), layout)
    assert cfg.aliases == {"pillow": ["PIL"], "scikit-learn": ["sklearn"]}


# -- main --------------------------------------------------------------------------

def read_outputs(directory):
    report = json.loads((directory / REPORT_JSON).read_text())
    jsonschema.validate(report, SCHEMA)
    return report


def test_happy_path(mirror, tmp_path, capsys):
    url, kb = mirror
    cfg = make_scenario("scipy-comb", tmp_path, url, kb)
    assert main(["--config", str(cfg)]) == 0
    assert (tmp_path / REQUIREMENTS_OUT).read_text() == "scipy==1.3.0\nstatkit==2.0.0\n"
    report = read_outputs(tmp_path)
    assert report["verdict"] == "compatible" and report["exit_code"] == 0
    assert [e["step"] for e in report["events"]] == list(range(1, len(report["events"]) + 1))
    assert "scipy.misc.comb" in (tmp_path / REPORT_TXT).read_text()
    assert "compatible" in capsys.readouterr().err


def test_exhausted_exits_two_with_fallback(mirror, tmp_path):
    url, kb = mirror
    cfg = make_scenario("exhausted", tmp_path, url, kb)
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--output-dir", str(out)]) == 2
    assert (out / REQUIREMENTS_OUT).read_text() == "corelib==2.0.0\npluginkit==1.0.0\n"
    report = read_outputs(out)
    assert report["verdict"] == "fallback"
    assert report["open_issues"]


def test_unreadable_project_exits_one(mirror, tmp_path):
    url, kb = mirror
    cfg = make_scenario("scipy-comb", tmp_path, url, kb)
    (tmp_path / "project" / "run.py").unlink()
    (tmp_path / "project").rmdir()
    assert main(["--config", str(cfg)]) == 1
    report = read_outputs(tmp_path)
    assert report["exit_code"] == 1 and "project_path" in report["reason"]
    assert not (tmp_path / REQUIREMENTS_OUT).exists()


def test_offline_cold_cache_exits_one(mirror, tmp_path):
    url, _ = mirror
    cfg = make_scenario("scipy-comb", tmp_path, url, tmp_path / "empty-kb")
    assert main(["--config", str(cfg), "--offline"]) == 1


def test_dump_formula(mirror, tmp_path):
    url, kb = mirror
    cfg = make_scenario("torch-conflict", tmp_path, url, kb)
    smt = tmp_path / "f.smt2"
    assert main(["--config", str(cfg), "--dump-formula", str(smt)]) == 0
    text = smt.read_text()
    assert "(check-sat)" in text and "torch" in text


def test_outputs_are_byte_identical_across_runs(mirror, tmp_path):
    url, kb = mirror
    assert main(["--config", str(make_scenario("pillow-version", tmp_path / "warm", url, kb))]) == 0
    outs = []
    for n in range(2):
        cfg = make_scenario("pillow-version", tmp_path / str(n), url, kb)
        assert main(["--config", str(cfg), "--offline"]) == 0
        outs.append(((tmp_path / str(n) / REQUIREMENTS_OUT).read_bytes(),
                     (tmp_path / str(n) / REPORT_JSON).read_bytes()))
    assert outs[0] == outs[1]


def test_torch_upgrade_config_is_valid(tmp_path):
    (tmp_path / "speech_app").mkdir()
    (tmp_path / "requirements.txt").write_text("torch==1.6.0\ntorchaudio==0.6.0\nnumpy==1.16.4\n")
    (tmp_path / "cfg.json").write_text(json.dumps({
        "project path": "speech_app", "requirements path": "requirements.txt", "target tpl name": "torch",
        "current version": "1.6.0", "target version": "1.9.0", "python version": "3.7",
        "path of knowledge": "kb"}))
    cfg = load_config(tmp_path / "cfg.json")
    assert (cfg.target_name, cfg.current_version, cfg.target_version) == ("torch", Version("1.6.0"), Version("1.9.0"))
    assert cfg.python_version == "3.7" and cfg.max_iterations == 50
