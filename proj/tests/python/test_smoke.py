import json
import xml.dom.minidom

import numpy as np
import pytest

import planning_transformer as pt


def tiny_config(**extra):
    cfg = pt.default_run_config("maze-umaze")
    cfg.update(
        dataset_trajectories=30,
        embedding_dim=16,
        batch_size=8,
        sequence_length=4,
        num_planning_tokens=3,
        replanning_interval=4,
        transformer_layers=1,
        seeds=[0],
    )
    cfg.update(extra)
    return cfg


@pytest.fixture(scope="module")
def dataset():
    return pt.generate_dataset(tiny_config())


@pytest.fixture(scope="module")
def model(dataset):
    m, _ = pt.train(dataset, tiny_config(), seed=0, updates=20)
    return m


def test_env_names_and_defaults():
    assert set(pt.env_names()) == {"maze-umaze", "maze-medium", "maze-large", "dense-chain"}
    cfg = pt.default_run_config("dense-chain")
    assert cfg["env"] == "dense-chain"
    assert cfg["alpha"] == 0.5 and cfg["beta"] == 0.5


def test_unknown_key_rejected():
    with pytest.raises(pt.ConfigError, match="bogus"):
        pt.validate_run_config({"bogus": 1})


def test_worked_sampling_examples():
    line = [[float(i)] for i in range(11)]
    assert pt.sample_plan_indices(line, 0, 5, "fixed_time") == [2, 4, 6, 8, 10]
    assert pt.sample_plan_indices(line[:8], 0, 3, "log_time") == [1, 3, 7]


def test_maze_env_step():
    env = pt.make_env("maze-umaze")
    s0 = env.reset(3)
    s1, reward, done = env.step([0.0, 0.0])
    assert s1 == s0 and reward == 0.0 and not done
    assert len(env.goal()) == 2


def test_dataset_shapes(dataset):
    assert len(dataset) == 30
    t = dataset.trajectory(0)
    assert t["states"].shape[1] == 2
    assert t["states"].shape[0] == len(t["rewards"]) == len(t["rtg"])
    np.testing.assert_allclose(t["rtg"], np.cumsum(t["rewards"][::-1])[::-1], atol=1e-5)


def test_train_loss_identity_and_reproducible(dataset):
    cfg = tiny_config(alpha=0.3, beta=0.7)
    _, a = pt.train(dataset, cfg, seed=5, updates=8)
    _, b = pt.train(dataset, cfg, seed=5, updates=8)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(a[:, 1], 0.3 * a[:, 2] + 0.7 * a[:, 3], atol=1e-6)


def test_checkpoint_round_trip(model, tmp_path):
    path = str(tmp_path / "m.ckpt")
    model.save(path)
    back = pt.load_model(path)
    assert back.config == model.config
    s, g = [1.5, 1.5], [3.5, 1.5]
    np.testing.assert_array_equal(back.generate_plan(s, 1.0, g), model.generate_plan(s, 1.0, g))
    with pytest.raises(pt.SchemaError):
        pt.load_model(str(tmp_path / "missing.ckpt"))


def test_rollout_and_svgs(model):
    rec = pt.rollout(model, seed=2, max_steps=12, capture_attention=True)
    assert rec.plan_steps == [0, 4, 8]
    assert rec.states.shape == (13, 2)
    layout = pt.builtin_maze_layout("umaze")
    for svg in (rec.render_plan_overlay(layout), rec.render_attention()):
        xml.dom.minidom.parseString(svg)
    dump = rec.attention_json()
    assert len(dump["rgb"]) == dump["length"]
    json.dumps(rec.to_json())


def test_evaluate_summary(model):
    s = pt.evaluate([model, model], [0, 1], n_rollouts=2)
    assert set(s) == {"env", "seeds", "mean", "std", "per_seed"}
    mean, std = pt.mean_std(s["per_seed"])
    assert s["mean"] == mean and s["std"] == std


def test_shipped_configs_validate_against_schema():
    import pathlib

    jsonschema = pytest.importorskip("jsonschema")
    root = pathlib.Path(__file__).resolve().parents[2] / "configs"
    schema = json.loads((root / "run_config.schema.json").read_text())
    for env in pt.env_names():
        cfg = json.loads((root / f"{env}.json").read_text())
        jsonschema.validate(cfg, schema)
        assert cfg == pt.default_run_config(env)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"bogus": 1}, schema)


def test_imports_expected_build():
    import os
    import pathlib

    if os.environ.get("PT_EXPECT_BUILD_TREE"):
        where = pathlib.Path(pt.__file__).resolve()
        assert where.parent.parent == pathlib.Path(os.environ["PYTHONPATH"]).resolve()
