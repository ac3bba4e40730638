import numpy as np
import pytest

import config
from config import Settings, get_settings, get_tensor_storage, get_thread_count
from exceptions import (
    ContainerFormatError,
    EmptyDatasetError,
    InvalidArgumentError,
    MissingDecoderError,
    NumericalFailureError,
    ShapeMismatchError,
    TensorFileNotFoundError,
    exit_code_for,
)
from storages import LocalTensorStorage
from utils import parallel_map, resolve_threads, tensor_checksum


def test_testing_environment_selects_testing_settings():
    settings = get_settings()
    assert isinstance(settings, config.TestingSettings)
    assert settings.PROGRESS_BARS is False


def test_testing_settings_run_single_threaded(monkeypatch):
    monkeypatch.delenv("PGC_THREADS", raising=False)
    assert config.TestingSettings().THREAD_COUNT == 1
    assert get_thread_count(config.TestingSettings()) == 1


def test_other_environments_use_settings(monkeypatch):
    monkeypatch.setenv("ENVIRONMENT", "developing")
    monkeypatch.setenv("PGC_THREADS", "3")
    settings = get_settings()
    assert type(settings) is Settings
    assert settings.THREAD_COUNT == 3


def test_zero_threads_means_all_cores(monkeypatch):
    monkeypatch.setenv("PGC_THREADS", "0")
    assert Settings().THREAD_COUNT >= 1


def test_tensor_storage_defaults_to_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("PGC_OUTPUT_DIR", str(tmp_path))
    storage = get_tensor_storage()
    assert isinstance(storage, LocalTensorStorage)
    assert storage.root == tmp_path
    assert get_tensor_storage(tmp_path / "run").root == tmp_path / "run"


def test_resolve_threads():
    assert resolve_threads(4) == 4
    assert resolve_threads(None) == 1
    assert resolve_threads(0) == 1


def test_resolve_threads_follows_the_thread_setting(monkeypatch):
    monkeypatch.setenv("ENVIRONMENT", "developing")
    monkeypatch.setenv("PGC_THREADS", "3")
    assert resolve_threads(None) == get_thread_count() == 3
    assert resolve_threads(2) == 2


@pytest.mark.parametrize("threads", [1, 3])
def test_parallel_map_keeps_order(threads):
    assert parallel_map(lambda v: v * v, range(7), threads) == [
        0, 1, 4, 9, 16, 25, 36
    ]


def test_checksum_covers_dtype_and_shape():
    a = np.arange(4, dtype=np.float32)
    assert tensor_checksum(a) == tensor_checksum(a.copy())
    assert tensor_checksum(a) != tensor_checksum(a.astype(np.float64))
    assert tensor_checksum(a) != tensor_checksum(a.reshape(2, 2))


@pytest.mark.parametrize(
    "error, code",
    [
        (InvalidArgumentError(), 2),
        (MissingDecoderError(), 2),
        (ShapeMismatchError(), 3),
        (TensorFileNotFoundError(), 3),
        (ContainerFormatError(), 3),
        (EmptyDatasetError(), 2),
        (NumericalFailureError(), 4),
    ],
)
def test_exit_codes(error, code):
    assert exit_code_for(error) == code
