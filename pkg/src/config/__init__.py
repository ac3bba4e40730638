from config.settings import (
    BaseAppSettings,
    Settings,
    TestingSettings,
)
from config.dependencies import (
    get_settings,
    get_tensor_storage,
    get_thread_count,
)
