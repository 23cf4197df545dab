import os
import json
import numpy as np
import pandas as pd
from config import Config
from utils import jsonable, root_logger
from simplex_models.errors import ParseError
from simplex_models.models import ParameterSet
from simplex_models.simplex import close_dataset, dataset_from_array


#############################################
# CSV
#############################################
def _has_header(path):
    first = pd.read_csv(path, header=None, nrows=1, dtype=str)
    try:
        first.astype(float)
        return False
    except ValueError:
        return True


def read_dataset(path, spec=None, close=False, pseudocount=0.0):
    """
    Rows are samples, columns components, with an optional header of
    component labels. `close` treats the table as counts.
    """
    try:
        header = 0 if _has_header(path) else None
        frame = pd.read_csv(path, header=header)
        values = frame.to_numpy(dtype=float)
    except (OSError, ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"could not read {path}: {e}")
    labels = [str(c) for c in frame.columns] if header == 0 else None
    root_logger.info(f"Read {values.shape[0]} samples of {values.shape[1]} components from {path}")
    if close:
        data = close_dataset(values, pseudocount, labels)
        return dataset_from_array(data.samples, spec, labels=labels).model_copy(update={"provenance": "counts"})
    return dataset_from_array(values, spec, labels=labels)


def write_dataset(path, data):
    columns = data.labels or [f"x{j + 1}" for j in range(data.m)]
    pd.DataFrame(data.samples, columns=columns).to_csv(path, index=False, float_format="%.17g")


def write_table(path, frame):
    frame.to_csv(path, index=False, float_format="%.17g")


#############################################
# JSON
#############################################
def write_json(path, payload, fingerprint):
    """Canonical JSON with schema version, configuration fingerprint and library version."""
    document = {
        "schema_version": Config.SCHEMA_VERSION,
        "version": Config.VERSION,
        "fingerprint": fingerprint,
        **payload,
    }
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as f:
        f.write(json.dumps(document, sort_keys=True, indent=2, default=jsonable))
        f.write("\n")


def read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, ValueError) as e:
        raise ParseError(f"could not read {path}: {e}")


def params_to_json(params):
    return {"K": params.K.tolist(), "eta": params.eta.tolist()}


def params_from_json(document):
    try:
        return ParameterSet(K=np.asarray(document["K"], dtype=float), eta=np.asarray(document["eta"], dtype=float))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed parameter block: {e}")


def matrix_to_json(matrix):
    return [[None if np.isnan(v) else float(v) for v in row] for row in np.asarray(matrix, dtype=float)]
