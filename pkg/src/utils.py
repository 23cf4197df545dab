import json
import hashlib
import logging
import numpy as np
from config import Config


#############################################
# LOGGING
#############################################
logging.basicConfig(
    level= Config.LOGGING_LEVEL,
    format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
    handlers=[logging.StreamHandler()]  # ensure console output
)
root_logger = logging.getLogger()

## Disable library logging
logging.getLogger("numba").setLevel(logging.ERROR)
logging.getLogger("joblib").setLevel(logging.ERROR)


#############################################
# RANDOM STREAMS
#############################################
def spawn_generators(seed, count):
    """
    Counter-split a master seed into `count` independent generators.
    Stream i depends only on (seed, i), never on scheduling.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def spawn_seeds(seed, count):
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint32)[0]) for child in children]


#############################################
# HASHING
#############################################
def stable_hash(payload):
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=jsonable)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def array_hash(*arrays):
    digest = hashlib.sha256()
    for array in arrays:
        array = np.ascontiguousarray(array)
        digest.update(str(array.shape).encode("utf-8"))
        digest.update(array.tobytes())
    return digest.hexdigest()


def jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
