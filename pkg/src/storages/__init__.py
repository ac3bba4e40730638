from storages.interfaces import TensorStorageInterface
from storages.local import LocalTensorStorage
from storages.container import encode_tensor, decode_tensor
