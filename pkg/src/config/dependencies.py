import os
from pathlib import Path
from typing import Optional, Union

from config.settings import BaseAppSettings, Settings, TestingSettings
from storages import LocalTensorStorage, TensorStorageInterface


def get_settings() -> BaseAppSettings:
    """
    Retrieve the application settings based on the current environment.

    This function reads the 'ENVIRONMENT' environment variable
    (defaulting to 'developing' if not set) and returns a corresponding
    settings instance. If the environment is 'testing', it returns an
    instance of TestingSettings; otherwise, it returns an instance of
    Settings.

    Returns:
        BaseAppSettings: The settings instance appropriate
        for the current environment.
    """
    environment = os.getenv("ENVIRONMENT", "developing")
    if environment == "testing":
        return TestingSettings()
    return Settings()


def get_tensor_storage(
    root: Optional[Union[str, Path]] = None,
    settings: Optional[BaseAppSettings] = None,
) -> TensorStorageInterface:
    """
    Create a local tensor storage rooted at `root`, or at the configured
    output directory when no root is given.

    Args:
        root (str | Path, optional): Directory the storage resolves
            relative names against.
        settings (BaseAppSettings, optional): Settings to read OUTPUT_DIR
            from. Defaults to the output of get_settings().

    Returns:
        TensorStorageInterface: A LocalTensorStorage instance.
    """
    if root is None:
        settings = settings or get_settings()
        root = settings.OUTPUT_DIR
    return LocalTensorStorage(root)


def get_thread_count(settings: Optional[BaseAppSettings] = None) -> int:
    settings = settings or get_settings()
    return settings.THREAD_COUNT
