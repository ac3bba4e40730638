from utils.checksums import tensor_checksum
from utils.parallel import parallel_map, resolve_threads
