import os

import numpy as np
import pytest

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

FAMILY_TABLE = os.path.join(DATA_DIR, "family_profile_sizes.tsv")
CORPUS_SMALL = os.path.join(DATA_DIR, "corpus_small.tsv")
CORPUS_TINY = os.path.join(DATA_DIR, "corpus_tiny.tsv")
CORPUS_GROWTH = os.path.join(DATA_DIR, "corpus_growth.tsv")
ASJP_RAW = os.path.join(DATA_DIR, "asjp_raw_sample.txt")


def _load_family_table():
    with open(FAMILY_TABLE, encoding="utf-8") as handle:
        lines = handle.read().strip().split("\n")
    rows = [line.split("\t") for line in lines[1:]]
    return {
        "nol": np.array([float(r[1]) for r in rows]),
        "cum3": np.array([float(r[2]) for r in rows]),
        "cum4": np.array([float(r[3]) for r in rows]),
        "cum5": np.array([float(r[4]) for r in rows]),
    }


@pytest.fixture(scope="session")
def family_columns():
    """The bundled 45-family dataset: language counts and cumulative
    3/4/5-gram profile sizes."""
    return _load_family_table()


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR
