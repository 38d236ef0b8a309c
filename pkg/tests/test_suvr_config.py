from pathlib import Path

import pytest

from suvr_engine.exceptions import ConfigError
from suvr_engine.models import ResetPolicy
from suvr_engine.models import TrainConfig
from suvr_engine.neighbors import Strategy
from suvr_engine.suvr_config import load_dataset
from suvr_engine.suvr_config import load_experiment_config


def write_config(tmp_path, text):
    path = tmp_path / "suvr.toml"
    path.write_text(text)
    return path


def test_defaults(clean_env):
    config = load_experiment_config()
    train = config.train
    assert (train.strategy, train.k, train.m, train.tau) == (Strategy.GREEDY, 4, 2, 0.07)
    assert (train.base_lr, train.nesterov_mu, train.momentum, train.d) == (0.03, 0.9, 0.5, 64)
    assert train.reset_policy == ResetPolicy.EVERY_STEP
    assert config.eval.k_eval == 5
    assert config.output.directory == "runs"


@pytest.mark.parametrize(
    "k,negatives,expected",
    [(1, None, 0), (2, None, 1), (3, None, 2), (4, None, 2), (8, None, 4), (8, 3, 3)],
)
def test_resolved_negative_count(k, negatives, expected):
    assert TrainConfig(k=k, negatives=negatives).m == expected


@pytest.mark.parametrize(
    "fields",
    [{"k": 0}, {"k": 2, "negatives": 2}, {"tau": 0.0}, {"batch_size": 0}, {"base_lr": -1.0}],
)
def test_train_config_invariants(fields):
    with pytest.raises(ValueError):
        TrainConfig(**fields)


def test_precedence_file_env_flags(tmp_path, clean_env, monkeypatch):
    path = write_config(
        tmp_path,
        '[train]\nk = 8\nstrategy = "dfs"\nepochs = 3\n\n[output]\ndirectory = "from-file"\n',
    )
    config = load_experiment_config(path)
    assert (config.train.k, config.train.strategy, config.train.epochs) == (8, Strategy.DFS, 3)
    assert config.output.directory == "from-file"

    monkeypatch.setenv("SUVR_METRICS_DIR", "from-env")
    assert load_experiment_config(path).output.directory == "from-env"

    config = load_experiment_config(path, {"train": {"k": 2}, "output": {"directory": "flag"}})
    assert (config.train.k, config.train.strategy) == (2, Strategy.DFS)
    assert config.output.directory == "flag"


def test_invalid_field_is_reported_by_path(tmp_path, clean_env):
    path = write_config(tmp_path, "[train]\nk = 2\nnegatives = 5\n\n[eval]\nk_eval = 0\n")
    with pytest.raises(ConfigError) as excinfo:
        load_experiment_config(path)
    message = str(excinfo.value)
    assert "train" in message
    assert "eval.k_eval" in message


def test_unknown_key_is_rejected(tmp_path, clean_env):
    with pytest.raises(ConfigError, match="train.neighbours"):
        load_experiment_config(write_config(tmp_path, "[train]\nneighbours = 4\n"))


def test_missing_and_malformed_files(tmp_path, clean_env):
    with pytest.raises(ConfigError, match="not found"):
        load_experiment_config(tmp_path / "absent.toml")
    with pytest.raises(ConfigError):
        load_experiment_config(write_config(tmp_path, "[train\nk = 4\n"))


def test_dataset_path_required_for_files(clean_env):
    with pytest.raises(ConfigError, match="dataset.path"):
        load_experiment_config(overrides={"dataset": {"kind": "csv"}})


def test_load_blobs_dataset_is_split_and_seeded(clean_env):
    config = load_experiment_config(
        overrides={"dataset": {"per_class": 20, "d_in": 4, "test_size": 15}}
    )
    train, test = load_dataset(config)
    assert (train.n, test.n) == (45, 15)
    again, _ = load_dataset(config)
    assert (train.features == again.features).all()


def test_load_csv_dataset_with_test_file(tmp_path, clean_env):
    (tmp_path / "train.csv").write_text("1,0,a\n0,1,b\n1,1,a\n")
    (tmp_path / "test.csv").write_text("2,0,a\n")
    config = load_experiment_config(
        overrides={
            "dataset": {
                "kind": "csv",
                "path": str(tmp_path / "train.csv"),
                "test_path": str(tmp_path / "test.csv"),
                "label_column": 2,
            }
        }
    )
    train, test = load_dataset(config)
    assert (train.n, test.n) == (3, 1)


def test_unlabeled_dataset_has_no_test_split(tmp_path, clean_env):
    (tmp_path / "x.csv").write_text("1,0\n0,1\n1,1\n")
    config = load_experiment_config(
        overrides={"dataset": {"kind": "csv", "path": str(tmp_path / "x.csv")}}
    )
    train, test = load_dataset(config)
    assert train.n == 3 and test is None


def test_test_file_dimension_must_match(tmp_path, clean_env):
    (tmp_path / "train.csv").write_text("1,0,a\n0,1,b\n")
    (tmp_path / "test.csv").write_text("1,0,a,0\n")
    config = load_experiment_config(
        overrides={
            "dataset": {
                "kind": "csv",
                "path": str(tmp_path / "train.csv"),
                "test_path": str(tmp_path / "test.csv"),
                "label_column": 2,
            }
        }
    )
    with pytest.raises(ConfigError, match="dimension"):
        load_dataset(config)


def test_csv_test_labels_follow_training_ids(tmp_path, clean_env):
    (tmp_path / "train.csv").write_text("1,0,a\n0,1,b\n")
    (tmp_path / "test.csv").write_text("0,1,b\n1,0,a\n1,1,c\n")
    config = load_experiment_config(
        overrides={
            "dataset": {
                "kind": "csv",
                "path": str(tmp_path / "train.csv"),
                "test_path": str(tmp_path / "test.csv"),
                "label_column": 2,
            }
        }
    )
    _, test = load_dataset(config)
    assert test.labels.tolist() == [1, 0, 2]
    assert test.label_names == ("a", "b", "c")


def test_example_config_is_valid(clean_env):
    example = Path(__file__).parent.parent / "config.example.toml"
    assert load_experiment_config(example) == load_experiment_config()
